#pragma once

#include <Eigen/Dense>

#include <vector>

#include "uspl/errors.hpp"

namespace uspl {

using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;

/// Dense symmetric matrix. Construction symmetrizes the input as (M + M^T)/2,
/// so entries(i, j) == entries(j, i) holds bit-for-bit.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const DenseMatrix& m);

  static SymMatrix identity(Eigen::Index dim);
  static SymMatrix zero(Eigen::Index dim);

  Eigen::Index dim() const { return m_.rows(); }
  const DenseMatrix& matrix() const { return m_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  SymMatrix operator+(const SymMatrix& other) const;
  SymMatrix operator-(const SymMatrix& other) const;
  SymMatrix operator*(double s) const;
  SymMatrix with_shift(double shift) const;

  double trace() const { return m_.trace(); }
  double frobenius_norm() const { return m_.norm(); }

 private:
  DenseMatrix m_;
};

inline SymMatrix operator*(double s, const SymMatrix& m) { return m * s; }

/// Diagonal shifts tried in order; each entry is multiplied by trace(m)/dim.
struct JitterPolicy {
  std::vector<double> ladder{0.0, 1e-12, 1e-10, 1e-8, 1e-6};

  static JitterPolicy none() { return JitterPolicy{{0.0}}; }
};

struct CholeskyFactor {
  DenseMatrix lower;
  double jitter_used = 0.0;

  Eigen::Index dim() const { return lower.rows(); }

  // L^{-1} x and L^{-T} x via triangular solves.
  DenseMatrix solve_lower(const DenseMatrix& x) const;
  DenseMatrix solve_upper(const DenseMatrix& x) const;
};

CholeskyFactor cholesky(const SymMatrix& m, const JitterPolicy& policy = {});

struct SymEig {
  Vector values;        // descending
  DenseMatrix vectors;  // columns match values
};

SymEig sym_eig(const SymMatrix& m);

struct ThinSvd {
  DenseMatrix u;
  Vector sigma;  // descending, nonnegative
  DenseMatrix v;
};

ThinSvd thin_svd(const DenseMatrix& m);

/// Householder reflector H = I - 2 u u^T with H y = alpha e_1 for the vector it
/// was built from. An identity reflector (is_identity) leaves vectors unchanged.
struct Reflector {
  Vector u;
  double alpha = 0.0;
  bool is_identity = false;

  static Reflector identity(Eigen::Index dim);

  Eigen::Index dim() const { return u.size(); }
  Vector apply(const Vector& x) const;
  DenseMatrix explicit_matrix() const;
};

Reflector reflector_from(const Vector& y);

/// [H_left * block * H_right](2:end, 2:end) via two rank-1 updates.
DenseMatrix two_sided_reflector_update(const DenseMatrix& block, const Reflector& left,
                                       const Reflector& right);

}  // namespace uspl
