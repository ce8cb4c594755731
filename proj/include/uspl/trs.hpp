#pragma once

#include <cstdint>
#include <functional>

#include "uspl/matkernels.hpp"

namespace uspl {

// max_{||x||_2 = 1} x^T A x + 2 b^T x
struct TrsProblem {
  SymMatrix a;
  Vector b;
};

struct TrsSolution {
  Vector x;
  double value = 0.0;
  double multiplier = 0.0;  // lambda with (lambda I - A) x = b, lambda >= lambda_max(A)
  bool hard_case = false;
  int iterations = 0;       // secular Newton steps (dense) or Krylov dimension (Lanczos)
};

struct TrsOptions {
  Eigen::Index dense_threshold = 500;
  double dense_tol = 1e-10;
  double lanczos_tol = 1e-8;
  Eigen::Index max_lanczos_dim = 300;
  std::uint64_t restart_seed = 0x5eed;
};

using LinearOperator = std::function<Vector(const Vector&)>;

double trs_objective(const SymMatrix& a, const Vector& b, const Vector& x);
double trs_kkt_residual(const SymMatrix& a, const Vector& b, const TrsSolution& s);

/// Eigendecomposes A once so that many linear terms can be solved against it,
/// which is how the alternating sweeps use it.
class DenseTrsSolver {
 public:
  explicit DenseTrsSolver(const SymMatrix& a, double hard_case_tol = 1e-10);

  TrsSolution solve(const Vector& b) const;

  Eigen::Index dim() const { return eig_.values.size(); }
  double top_eigenvalue() const { return eig_.values(0); }

 private:
  SymEig eig_;
  double tol_;
};

TrsSolution solve_trs_dense(const TrsProblem& p, double hard_case_tol = 1e-10);

/// Krylov (GLTR-style) solver with full reorthogonalization. A is only touched
/// through matrix-vector products.
TrsSolution solve_trs_lanczos(const LinearOperator& a, Eigen::Index dim, const Vector& b,
                              double tol = 1e-8, Eigen::Index max_lanczos_dim = 300,
                              std::uint64_t restart_seed = 0x5eed);
TrsSolution solve_trs_lanczos(const TrsProblem& p, double tol = 1e-8,
                              Eigen::Index max_lanczos_dim = 300);

TrsSolution solve_trs(const TrsProblem& p, const TrsOptions& opts = {});

}  // namespace uspl
