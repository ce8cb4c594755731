#include "uspl/trs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "uspl/rng.hpp"

namespace uspl {

namespace {

constexpr int kMaxSecularIterations = 200;
constexpr double kEps = std::numeric_limits<double>::epsilon();

// Finds t >= t_lo with ||x(t)|| = 1, x_i(t) = beta_i / (t + gap_i), by Newton on
// psi(t) = 1/||x(t)||, which is concave and increasing, so iterates starting at
// psi <= 1 approach the root from the left. Bisection guards the bracket.
double solve_secular(const Vector& beta, const Vector& gap, double t_lo, double t_hi,
                     int& iterations) {
  auto eval = [&](double t, double& psi, double& dpsi) {
    const Eigen::ArrayXd denom = gap.array() + t;
    const Eigen::ArrayXd ratio = beta.array() / denom;
    const double s2 = ratio.square().sum();
    const double s3 = (ratio.square() / denom).sum();
    const double nrm = std::sqrt(s2);
    psi = 1.0 / nrm;
    dpsi = s3 / (nrm * nrm * nrm);
  };

  double lo = t_lo;
  double hi = std::max(t_hi, t_lo);
  double t = lo;
  for (iterations = 1; iterations <= kMaxSecularIterations; ++iterations) {
    double psi = 0.0;
    double dpsi = 0.0;
    eval(t, psi, dpsi);
    if (std::abs(psi - 1.0) <= 4.0 * kEps) return t;
    if (psi < 1.0) {
      lo = t;
    } else {
      hi = t;
    }
    double next = t + (1.0 - psi) / dpsi;
    if (!std::isfinite(next) || next <= lo || next >= hi) next = 0.5 * (lo + hi);
    if (std::abs(next - t) <= 2.0 * kEps * std::max(std::abs(t), 1e-300)) return next;
    if (hi - lo <= 2.0 * kEps * std::max(std::abs(hi), 1e-300)) return next;
    t = next;
  }
  throw Error(ErrorKind::ConvergenceFailure, "secular equation Newton exceeded " +
                                                 std::to_string(kMaxSecularIterations) +
                                                 " iterations");
}

}  // namespace

double trs_objective(const SymMatrix& a, const Vector& b, const Vector& x) {
  return x.dot(a.matrix() * x) + 2.0 * b.dot(x);
}

double trs_kkt_residual(const SymMatrix& a, const Vector& b, const TrsSolution& s) {
  return (s.multiplier * s.x - a.matrix() * s.x - b).norm();
}

DenseTrsSolver::DenseTrsSolver(const SymMatrix& a, double hard_case_tol)
    : eig_(sym_eig(a)), tol_(hard_case_tol) {
  if (a.dim() == 0) throw Error(ErrorKind::DimensionMismatch, "TRS on an empty matrix");
}

TrsSolution DenseTrsSolver::solve(const Vector& b) const {
  const Eigen::Index n = dim();
  if (b.size() != n) {
    throw Error(ErrorKind::DimensionMismatch, "TRS linear term has dimension " +
                                                  std::to_string(b.size()) + ", expected " +
                                                  std::to_string(n));
  }
  const Vector& lambda = eig_.values;
  const Vector beta = eig_.vectors.transpose() * b;
  const double bnorm = b.norm();

  const double scale = std::max(std::abs(lambda(0)), std::abs(lambda(n - 1)));
  const double cluster_tol = 1e-12 * scale;
  Eigen::Index top = 1;
  while (top < n && lambda(0) - lambda(top) <= cluster_tol) ++top;
  Vector gap = (lambda(0) - lambda.array()).matrix();
  gap.head(top).setZero();
  const double beta_top = beta.head(top).norm();

  TrsSolution sol;
  Vector y = Vector::Zero(n);
  double t = 0.0;

  if (bnorm == 0.0) {
    y(0) = 1.0;
    sol.hard_case = true;
  } else if (beta_top <= tol_ * bnorm) {
    Vector rest = Vector::Zero(n);
    for (Eigen::Index i = top; i < n; ++i) rest(i) = beta(i) / gap(i);
    const double rest_norm = rest.norm();
    if (rest_norm <= 1.0) {
      // Multiplier sticks at lambda_max; a top-eigenvector component reaches
      // the sphere. Both signs are evaluated.
      const double tau = std::sqrt(std::max(0.0, 1.0 - rest_norm * rest_norm));
      Vector plus = rest;
      Vector minus = rest;
      plus(0) += tau;
      minus(0) -= tau;
      auto value_of = [&](const Vector& v) {
        return (lambda.array() * v.array().square()).sum() + 2.0 * beta.dot(v);
      };
      y = value_of(minus) > value_of(plus) ? minus : plus;
      sol.hard_case = true;
    } else {
      Vector reduced = beta;
      reduced.head(top).setZero();
      t = solve_secular(reduced, gap, 0.0, bnorm, sol.iterations);
      y = (reduced.array() / (gap.array() + t)).matrix();
    }
  } else {
    t = solve_secular(beta, gap, beta_top, bnorm, sol.iterations);
    y = (beta.array() / (gap.array() + t)).matrix();
  }

  y /= y.norm();
  sol.x = eig_.vectors * y;
  sol.multiplier = lambda(0) + t;
  sol.value = (lambda.array() * y.array().square()).sum() + 2.0 * beta.dot(y);
  return sol;
}

TrsSolution solve_trs_dense(const TrsProblem& p, double hard_case_tol) {
  return DenseTrsSolver(p.a, hard_case_tol).solve(p.b);
}

TrsSolution solve_trs_lanczos(const LinearOperator& a, Eigen::Index dim, const Vector& b,
                              double tol, Eigen::Index max_lanczos_dim,
                              std::uint64_t restart_seed) {
  if (b.size() != dim || dim == 0) {
    throw Error(ErrorKind::DimensionMismatch, "Lanczos TRS dimension mismatch");
  }
  const Eigen::Index max_dim = std::min(max_lanczos_dim, dim);
  const double bnorm = b.norm();
  DenseMatrix basis(dim, max_dim);
  std::vector<double> alpha;
  std::vector<double> beta;  // beta[j] couples basis columns j and j+1
  Rng rng(restart_seed);

  auto orthogonalize = [&](Vector& w, Eigen::Index cols) {
    for (int pass = 0; pass < 2 && cols > 0; ++pass) {
      w.noalias() -= basis.leftCols(cols) * (basis.leftCols(cols).transpose() * w);
    }
  };
  auto random_start = [&](Eigen::Index cols) -> std::optional<Vector> {
    Vector v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v(i) = rng.symmetric_uniform();
    const double before = v.norm();
    orthogonalize(v, cols);
    const double after = v.norm();
    if (after <= 1e-8 * before) return std::nullopt;
    return Vector(v / after);
  };

  // The chain started from b may close off an invariant subspace that misses
  // the top eigenvalues of A (hard case). A further chain from a random start
  // then runs until its own top Ritz value has converged, certifying that the
  // multiplier dominates the rest of the spectrum.
  bool certifying = false;
  Eigen::Index chain_start = 0;
  Vector q;
  if (bnorm > 0.0) {
    q = b / bnorm;
  } else {
    auto start = random_start(0);
    q = *start;
    certifying = true;
  }

  double anorm = 0.0;
  for (Eigen::Index j = 0;; ++j) {
    basis.col(j) = q;
    Vector w = a(q);
    const double aj = q.dot(w);
    w -= aj * q;
    if (j > chain_start) w -= beta[j - 1] * basis.col(j - 1);
    orthogonalize(w, j + 1);
    const double bj = w.norm();
    alpha.push_back(aj);
    beta.push_back(bj);
    anorm = std::max(anorm, std::abs(aj) + bj + (j > chain_start ? beta[j - 1] : 0.0));

    const Eigen::Index m = j + 1;
    DenseMatrix t = DenseMatrix::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      t(i, i) = alpha[i];
      if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[i];
    }
    Vector g = Vector::Zero(m);
    g(0) = bnorm;
    const TrsSolution sub = DenseTrsSolver(SymMatrix(t)).solve(g);
    const double residual = bj * std::abs(sub.x(m - 1));
    const double floor = std::max(anorm, std::numeric_limits<double>::min());
    const bool breakdown = bj <= 1e-12 * floor;
    const double target = tol * (bnorm > 0.0 ? bnorm : floor);

    bool done = false;
    if (!certifying) {
      done = !breakdown && residual <= target;
    } else if (breakdown) {
      done = true;
    } else {
      const Eigen::Index len = m - chain_start;
      const SymEig ritz = sym_eig(SymMatrix(t.block(chain_start, chain_start, len, len)));
      const double ritz_residual = bj * std::abs(ritz.vectors(len - 1, 0));
      done = ritz_residual <= tol * floor && residual <= target;
    }

    if (!done && breakdown && m < max_dim && !certifying) {
      auto start = random_start(m);
      if (start) {
        beta.back() = 0.0;
        q = *start;
        chain_start = m;
        certifying = true;
        continue;
      }
      done = true;
    }
    if (!done && breakdown) done = true;

    if (done || m == max_dim) {
      if (!done && residual > tol * (anorm + bnorm)) {
        throw Error(ErrorKind::ConvergenceFailure,
                    "Lanczos TRS did not converge within " + std::to_string(max_dim) +
                        " basis vectors (residual " + std::to_string(residual) + ")");
      }
      TrsSolution sol;
      sol.x = basis.leftCols(m) * sub.x;
      sol.x /= sol.x.norm();
      sol.value = sol.x.dot(a(sol.x)) + 2.0 * b.dot(sol.x);
      sol.multiplier = sub.multiplier;
      sol.hard_case = sub.hard_case;
      sol.iterations = static_cast<int>(m);
      return sol;
    }
    q = w / bj;
  }
}

TrsSolution solve_trs_lanczos(const TrsProblem& p, double tol, Eigen::Index max_lanczos_dim) {
  const DenseMatrix& a = p.a.matrix();
  return solve_trs_lanczos([&a](const Vector& v) -> Vector { return a * v; }, p.a.dim(), p.b,
                           tol, max_lanczos_dim);
}

TrsSolution solve_trs(const TrsProblem& p, const TrsOptions& opts) {
  if (p.a.dim() <= opts.dense_threshold) return solve_trs_dense(p, opts.dense_tol);
  const DenseMatrix& a = p.a.matrix();
  return solve_trs_lanczos([&a](const Vector& v) -> Vector { return a * v; }, p.a.dim(), p.b,
                           opts.lanczos_tol, opts.max_lanczos_dim, opts.restart_seed);
}

}  // namespace uspl
