#include "uspl/matkernels.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace uspl {

SymMatrix::SymMatrix(const DenseMatrix& m) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorKind::DimensionMismatch,
                "symmetric matrix must be square, got " + std::to_string(m.rows()) + "x" +
                    std::to_string(m.cols()));
  }
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::identity(Eigen::Index dim) {
  return SymMatrix(DenseMatrix::Identity(dim, dim));
}

SymMatrix SymMatrix::zero(Eigen::Index dim) { return SymMatrix(DenseMatrix::Zero(dim, dim)); }

SymMatrix SymMatrix::operator+(const SymMatrix& other) const {
  if (other.dim() != dim()) throw Error(ErrorKind::DimensionMismatch, "SymMatrix sum");
  SymMatrix out;
  out.m_ = m_ + other.m_;
  return out;
}

SymMatrix SymMatrix::operator-(const SymMatrix& other) const {
  if (other.dim() != dim()) throw Error(ErrorKind::DimensionMismatch, "SymMatrix difference");
  SymMatrix out;
  out.m_ = m_ - other.m_;
  return out;
}

SymMatrix SymMatrix::operator*(double s) const {
  SymMatrix out;
  out.m_ = s * m_;
  return out;
}

SymMatrix SymMatrix::with_shift(double shift) const {
  SymMatrix out = *this;
  out.m_.diagonal().array() += shift;
  return out;
}

DenseMatrix CholeskyFactor::solve_lower(const DenseMatrix& x) const {
  return lower.triangularView<Eigen::Lower>().solve(x);
}

DenseMatrix CholeskyFactor::solve_upper(const DenseMatrix& x) const {
  return lower.transpose().triangularView<Eigen::Upper>().solve(x);
}

CholeskyFactor cholesky(const SymMatrix& m, const JitterPolicy& policy) {
  const Eigen::Index n = m.dim();
  if (n == 0) throw Error(ErrorKind::DimensionMismatch, "cholesky of an empty matrix");
  const double scale = m.trace() / static_cast<double>(n);
  const double max_diag = m.matrix().diagonal().cwiseAbs().maxCoeff();
  // A factor whose smallest pivot is at rounding level is numerically singular.
  const double pivot_floor = 16.0 * std::numeric_limits<double>::epsilon() * max_diag;

  for (double step : policy.ladder) {
    const double shift = step * scale;
    if (step > 0.0 && !(shift > 0.0)) continue;
    Eigen::LLT<DenseMatrix> llt(m.matrix() + shift * DenseMatrix::Identity(n, n));
    if (llt.info() != Eigen::Success) continue;
    DenseMatrix lower = llt.matrixL();
    if (lower.diagonal().array().square().minCoeff() <= pivot_floor) continue;
    return CholeskyFactor{std::move(lower), shift};
  }
  throw Error(ErrorKind::NotPositiveDefinite,
              "jitter ladder exhausted for a " + std::to_string(n) + "x" + std::to_string(n) +
                  " matrix");
}

SymEig sym_eig(const SymMatrix& m) {
  Eigen::SelfAdjointEigenSolver<DenseMatrix> solver(m.matrix());
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::ConvergenceFailure, "symmetric eigensolver did not converge");
  }
  // Eigen returns ascending order.
  SymEig out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

ThinSvd thin_svd(const DenseMatrix& m) {
  Eigen::JacobiSVD<DenseMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) {
    throw Error(ErrorKind::ConvergenceFailure, "SVD did not converge");
  }
  return ThinSvd{svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

Reflector Reflector::identity(Eigen::Index dim) {
  Reflector r;
  r.u = Vector::Zero(dim);
  if (dim > 0) r.u(0) = 1.0;
  r.alpha = 1.0;
  r.is_identity = true;
  return r;
}

Vector Reflector::apply(const Vector& x) const {
  if (is_identity) return x;
  return x - (2.0 * u.dot(x)) * u;
}

DenseMatrix Reflector::explicit_matrix() const {
  const Eigen::Index n = dim();
  DenseMatrix h = DenseMatrix::Identity(n, n);
  if (!is_identity) h.noalias() -= 2.0 * u * u.transpose();
  return h;
}

Reflector reflector_from(const Vector& y) {
  const double norm = y.norm();
  if (y.size() == 0 || !(norm > 0.0)) {
    throw Error(ErrorKind::ZeroVector, "cannot build a reflector from a zero vector");
  }
  // sign(0) = +1, so alpha always has the opposite sign of y(0) and y - alpha e1
  // cannot cancel. When y is a multiple of e1 this gives u = e1 (a sign flip).
  const double sign = y(0) >= 0.0 ? 1.0 : -1.0;
  Reflector r;
  r.alpha = -sign * norm;
  r.u = y;
  r.u(0) -= r.alpha;
  r.u /= r.u.norm();
  return r;
}

DenseMatrix two_sided_reflector_update(const DenseMatrix& block, const Reflector& left,
                                       const Reflector& right) {
  if (block.rows() != left.dim() || block.cols() != right.dim()) {
    throw Error(ErrorKind::DimensionMismatch,
                "block " + std::to_string(block.rows()) + "x" + std::to_string(block.cols()) +
                    " vs reflectors " + std::to_string(left.dim()) + "/" +
                    std::to_string(right.dim()));
  }
  if (block.rows() == 0 || block.cols() == 0) {
    throw Error(ErrorKind::DimensionMismatch, "empty block in reflector update");
  }
  DenseMatrix m = block;
  if (!left.is_identity) {
    const Eigen::RowVectorXd ut_m = left.u.transpose() * m;
    m.noalias() -= 2.0 * left.u * ut_m;
  }
  if (!right.is_identity) {
    const Vector m_w = m * right.u;
    m.noalias() -= 2.0 * m_w * right.u.transpose();
  }
  return m.bottomRightCorner(m.rows() - 1, m.cols() - 1);
}

}  // namespace uspl
