#pragma once

// Test-only helpers and independent oracles. Nothing here calls into the
// library's solvers; oracles use Eigen directly or brute-force enumeration.

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace fixtures {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = n(rng);
  return m;
}

inline VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n) {
  return random_matrix(rng, n, 1).col(0);
}

inline VectorXd random_unit(std::mt19937_64& rng, Eigen::Index n) {
  VectorXd v = random_vector(rng, n);
  return v / v.norm();
}

inline MatrixXd random_symmetric(std::mt19937_64& rng, Eigen::Index n) {
  MatrixXd m = random_matrix(rng, n, n);
  return 0.5 * (m + m.transpose());
}

inline MatrixXd random_spd(std::mt19937_64& rng, Eigen::Index n, double floor = 0.5) {
  MatrixXd m = random_matrix(rng, n, n);
  return m * m.transpose() / static_cast<double>(n) + floor * MatrixXd::Identity(n, n);
}

// Symmetric inverse square root through a dense eigendecomposition.
inline MatrixXd inv_sqrt(const MatrixXd& s) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(s);
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
         es.eigenvectors().transpose();
}

// Sum of the top-k singular values of C11^-1/2 C12 C22^-1/2.
inline double cca_svd_oracle(const MatrixXd& c11, const MatrixXd& c12, const MatrixXd& c22,
                             Eigen::Index k) {
  const MatrixXd core = inv_sqrt(c11) * c12 * inv_sqrt(c22);
  Eigen::JacobiSVD<MatrixXd> svd(core);
  return svd.singularValues().head(k).sum();
}

// Maximum of [p1; p2]^T A [p1; p2] over 2+2 unit vectors by an angle grid.
// Returns the value and the maximizing angles.
struct GridMax {
  double value = -INFINITY;
  double theta1 = 0.0;
  double theta2 = 0.0;
};

inline GridMax angle_grid_max_2x2(const MatrixXd& a11, const MatrixXd& a12, const MatrixXd& a22,
                                  int steps) {
  GridMax best;
  const double pi = std::numbers::pi;
  std::vector<Eigen::Vector2d> dirs(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    const double th = pi * i / steps;  // half circle covers +/- pairs
    dirs[static_cast<std::size_t>(i)] = Eigen::Vector2d(std::cos(th), std::sin(th));
  }
  // Precompute q^T A q per side and the cross term basis.
  std::vector<double> f1(dirs.size()), f2(dirs.size());
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    f1[i] = dirs[i].dot(a11 * dirs[i]);
    f2[i] = dirs[i].dot(a22 * dirs[i]);
  }
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    const Eigen::RowVector2d left = dirs[i].transpose() * a12;
    for (std::size_t j = 0; j < dirs.size(); ++j) {
      // Flipping one side's sign flips the cross term; take the better sign.
      const double cross = 2.0 * std::abs(left.dot(dirs[j]));
      const double v = f1[i] + f2[j] + cross;
      if (v > best.value) {
        best.value = v;
        best.theta1 = pi * static_cast<double>(i) / steps;
        best.theta2 = pi * static_cast<double>(j) / steps;
      }
    }
  }
  return best;
}

// Local refinement of a grid maximizer by a finer grid around it.
inline double refine_2x2(const MatrixXd& a11, const MatrixXd& a12, const MatrixXd& a22,
                         GridMax start, int steps, double halfwidth, int rounds) {
  auto value = [&](double t1, double t2) {
    const Eigen::Vector2d u(std::cos(t1), std::sin(t1));
    const Eigen::Vector2d v(std::cos(t2), std::sin(t2));
    return u.dot(a11 * u) + v.dot(a22 * v) + 2.0 * std::abs(u.dot(a12 * v));
  };
  double best = start.value;
  for (int r = 0; r < rounds; ++r) {
    GridMax next = start;
    for (int i = -steps; i <= steps; ++i) {
      for (int j = -steps; j <= steps; ++j) {
        const double t1 = start.theta1 + halfwidth * i / steps;
        const double t2 = start.theta2 + halfwidth * j / steps;
        const double v = value(t1, t2);
        if (v > next.value) {
          next.value = v;
          next.theta1 = t1;
          next.theta2 = t2;
        }
      }
    }
    start = next;
    best = std::max(best, next.value);
    halfwidth /= steps / 2.0;
  }
  return best;
}

// Non-hard-case TRS by eigendecomposition and plain bisection on
// sum beta_i^2 / (lambda - lambda_i)^2 = 1. Returns the optimal value.
inline double trs_bisect_oracle(const MatrixXd& a, const VectorXd& b) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(a);
  const VectorXd lam = es.eigenvalues();
  const VectorXd beta = es.eigenvectors().transpose() * b;
  const double top = lam.maxCoeff();
  auto norm2 = [&](double l) { return (beta.array() / (l - lam.array())).square().sum(); };
  double lo = top;
  double hi = top + b.norm() + 1.0;
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (norm2(mid) > 1.0) lo = mid; else hi = mid;
  }
  const double l = 0.5 * (lo + hi);
  VectorXd y = (beta.array() / (l - lam.array())).matrix();
  y /= y.norm();
  return (lam.array() * y.array().square()).sum() + 2.0 * beta.dot(y);
}

// Orthonormal complement of the span of the columns of q (full QR).
inline MatrixXd qr_complement(const MatrixXd& q) {
  Eigen::HouseholderQR<MatrixXd> qr(q);
  const MatrixXd full = qr.householderQ() * MatrixXd::Identity(q.rows(), q.rows());
  return full.rightCols(q.rows() - q.cols());
}

}  // namespace fixtures
