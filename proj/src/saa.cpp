#include "uspl/saa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <tuple>

#include "uspl/rng.hpp"

namespace uspl {

void JointProblem::validate() const {
  const auto d1v = a1.dim();
  const auto d2v = a2.dim();
  if (d1v == 0 || d2v == 0) throw Error(ErrorKind::DimensionMismatch, "empty joint problem");
  if (c.rows() != d1v || c.cols() != d2v || b1.dim() != d1v || b2.dim() != d2v) {
    throw Error(ErrorKind::DimensionMismatch,
                "joint problem blocks disagree: A1 " + std::to_string(d1v) + ", A2 " +
                    std::to_string(d2v) + ", C " + std::to_string(c.rows()) + "x" +
                    std::to_string(c.cols()) + ", B1 " + std::to_string(b1.dim()) + ", B2 " +
                    std::to_string(b2.dim()));
  }
}

WhitenedBlocks whiten(const JointProblem& jp, const JitterPolicy& jitter) {
  jp.validate();
  WhitenedBlocks w;
  w.chol1 = cholesky(jp.b1, jitter);
  w.chol2 = cholesky(jp.b2, jitter);
  // L^-1 A L^-T = L^-1 (L^-1 A)^T for symmetric A.
  const DenseMatrix left1 = w.chol1.solve_lower(jp.a1.matrix());
  w.a11 = SymMatrix(w.chol1.solve_lower(left1.transpose()));
  const DenseMatrix left2 = w.chol2.solve_lower(jp.a2.matrix());
  w.a22 = SymMatrix(w.chol2.solve_lower(left2.transpose()));
  const DenseMatrix ct = w.chol2.solve_lower(jp.c.transpose());
  w.a12 = w.chol1.solve_lower(ct.transpose());
  return w;
}

DeflationState DeflationState::start(const WhitenedBlocks& blocks) {
  DeflationState s;
  s.a11 = blocks.a11;
  s.a12 = blocks.a12;
  s.a22 = blocks.a22;
  s.d1 = blocks.a11.dim();
  s.d2 = blocks.a22.dim();
  return s;
}

double block_objective(const SymMatrix& a11, const DenseMatrix& a12, const SymMatrix& a22,
                       const Vector& q1, const Vector& q2) {
  return q1.dot(a11.matrix() * q1) + 2.0 * q1.dot(a12 * q2) + q2.dot(a22.matrix() * q2);
}

namespace {

// One side of the alternating scheme: maximize x^T A x + 2 b^T x on the sphere
// for a fixed A and varying b.
class SideSolver {
 public:
  SideSolver(const SymMatrix& a, const TrsOptions& opts) : a_(a), opts_(opts) {
    if (a.dim() <= opts.dense_threshold) dense_ = std::make_unique<DenseTrsSolver>(a, opts.dense_tol);
  }

  TrsSolution solve(const Vector& b) const {
    if (dense_) return dense_->solve(b);
    const DenseMatrix& m = a_.matrix();
    return solve_trs_lanczos([&m](const Vector& v) -> Vector { return m * v; }, a_.dim(), b,
                             opts_.lanczos_tol, opts_.max_lanczos_dim, opts_.restart_seed);
  }

 private:
  const SymMatrix& a_;
  TrsOptions opts_;
  std::unique_ptr<DenseTrsSolver> dense_;
};

AlternatingResult run_alternating(const SymMatrix& a11, const DenseMatrix& a12,
                                  const SymMatrix& a22, const SideSolver& side1,
                                  const SideSolver& side2, const Vector& q2_init,
                                  const AlternatingOptions& opts) {
  AlternatingResult r;
  r.q2 = q2_init / q2_init.norm();
  r.q1 = Vector::Zero(a11.dim());
  double value = -std::numeric_limits<double>::infinity();

  // A half-sweep only replaces its block when the objective does not drop, so
  // the recorded trace is nondecreasing even under inexact subproblem solves.
  for (r.sweeps = 1; r.sweeps <= opts.max_sweeps; ++r.sweeps) {
    const double sweep_start = value;
    const Vector q1_prev = r.q1;
    const Vector q2_prev = r.q2;

    const TrsSolution s1 = side1.solve(a12 * r.q2);
    const double v1 = s1.value + r.q2.dot(a22.matrix() * r.q2);
    if (v1 >= value) {
      r.q1 = s1.x;
      value = v1;
    }
    r.trace.push_back(value);

    const TrsSolution s2 = side2.solve(a12.transpose() * r.q1);
    const double v2 = s2.value + r.q1.dot(a11.matrix() * r.q1);
    if (v2 >= value) {
      r.q2 = s2.x;
      value = v2;
    }
    r.trace.push_back(value);

    // The objective is flat to second order near a maximizer, so a small gain
    // alone leaves the vectors far less accurate than the value.
    const double step = std::max((r.q1 - q1_prev).norm(), (r.q2 - q2_prev).norm());
    if (std::isfinite(sweep_start) && value - sweep_start < opts.tol * (1.0 + std::abs(value)) &&
        step <= opts.step_tol) {
      break;
    }
  }
  r.sweeps = std::min(r.sweeps, opts.max_sweeps);
  r.value = value;
  return r;
}

Vector warm_start(const DenseMatrix& a12) {
  const Eigen::Index n2 = a12.cols();
  if (a12.norm() == 0.0) {
    Vector e = Vector::Zero(n2);
    e(0) = 1.0;
    return e;
  }
  // Top right-singular vector of A12 = top eigenvector of A12^T A12.
  const SymEig eig = sym_eig(SymMatrix(a12.transpose() * a12));
  return eig.vectors.col(0);
}

// View-2 part of the top eigenvector of the whole block matrix, or empty
// when that part vanishes.
Vector joint_start(const SymMatrix& a11, const DenseMatrix& a12, const SymMatrix& a22) {
  const Eigen::Index n1 = a11.dim();
  const Eigen::Index n2 = a22.dim();
  DenseMatrix j(n1 + n2, n1 + n2);
  j << a11.matrix(), a12, a12.transpose(), a22.matrix();
  const Vector top = sym_eig(SymMatrix(j)).vectors.col(0);
  if (top.tail(n2).norm() <= 1e-8) return {};
  return top.tail(n2).normalized();
}

}  // namespace

AlternatingResult alternating_pair_from(const SymMatrix& a11, const DenseMatrix& a12,
                                        const SymMatrix& a22, const Vector& q2_init,
                                        const AlternatingOptions& opts) {
  if (a12.rows() != a11.dim() || a12.cols() != a22.dim() || q2_init.size() != a22.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "alternating blocks disagree");
  }
  if (!(q2_init.norm() > 0.0)) throw Error(ErrorKind::ZeroVector, "zero initial guess");
  const SideSolver side1(a11, opts.trs);
  const SideSolver side2(a22, opts.trs);
  return run_alternating(a11, a12, a22, side1, side2, q2_init, opts);
}

AlternatingResult alternating_pair(const SymMatrix& a11, const DenseMatrix& a12,
                                   const SymMatrix& a22, const AlternatingOptions& opts) {
  if (a12.rows() != a11.dim() || a12.cols() != a22.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "alternating blocks disagree");
  }
  const SideSolver side1(a11, opts.trs);
  const SideSolver side2(a22, opts.trs);

  AlternatingResult best;
  bool have_best = false;
  auto consider = [&](AlternatingResult r) {
    if (!have_best || r.value > best.value) {
      best = std::move(r);
      have_best = true;
    }
  };

  if (opts.svd_warm_start) {
    consider(run_alternating(a11, a12, a22, side1, side2, warm_start(a12), opts));
  }
  if (opts.joint_eigen_start) {
    const Vector init = joint_start(a11, a12, a22);
    if (init.size() > 0) consider(run_alternating(a11, a12, a22, side1, side2, init, opts));
  }
  Rng rng(opts.seed);
  const int restarts = opts.svd_warm_start ? opts.random_restarts : std::max(1, opts.random_restarts);
  for (int i = 0; i < restarts; ++i) {
    Vector init(a22.dim());
    do {
      for (Eigen::Index j = 0; j < init.size(); ++j) init(j) = rng.symmetric_uniform();
    } while (init.norm() == 0.0);
    consider(run_alternating(a11, a12, a22, side1, side2, init, opts));
  }
  return best;
}

DeflationState deflate_step(const DeflationState& state, const Vector& q1, const Vector& q2) {
  if (q1.size() != state.a11.dim() || q2.size() != state.a22.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "deflation vectors do not match trailing blocks");
  }
  const Reflector r1 = reflector_from(q1);
  const Reflector r2 = reflector_from(q2);
  DeflationState next;
  next.d1 = state.d1;
  next.d2 = state.d2;
  next.reflectors1 = state.reflectors1;
  next.reflectors2 = state.reflectors2;
  next.reflectors1.push_back(r1);
  next.reflectors2.push_back(r2);
  next.a11 = SymMatrix(two_sided_reflector_update(state.a11.matrix(), r1, r1));
  next.a12 = two_sided_reflector_update(state.a12, r1, r2);
  next.a22 = SymMatrix(two_sided_reflector_update(state.a22.matrix(), r2, r2));
  return next;
}

namespace {

Vector apply_reflector_product(const std::vector<Reflector>& reflectors, Eigen::Index dim,
                               const Vector& q) {
  const auto j = static_cast<Eigen::Index>(reflectors.size());
  if (q.size() != dim - j) {
    throw Error(ErrorKind::DimensionMismatch,
                "recovered vector has dimension " + std::to_string(q.size()) + ", expected " +
                    std::to_string(dim - j));
  }
  Vector z = Vector::Zero(dim);
  z.tail(dim - j) = q;
  // Q^(j) = H^(1) diag(1, H^(2)) ... diag(I_{j-1}, H^(j)), applied right to left.
  for (Eigen::Index i = j - 1; i >= 0; --i) {
    z.tail(dim - i) = reflectors[static_cast<std::size_t>(i)].apply(z.tail(dim - i));
  }
  return z;
}

}  // namespace

std::pair<Vector, Vector> recover_column(const DeflationState& state, const Vector& q1,
                                         const Vector& q2) {
  return {apply_reflector_product(state.reflectors1, state.d1, q1),
          apply_reflector_product(state.reflectors2, state.d2, q2)};
}

DenseMatrix align(const DenseMatrix& p1, const DenseMatrix& p2, const DenseMatrix& c) {
  if (p1.rows() != c.rows() || p2.rows() != c.cols() || p1.cols() != p2.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "align: shapes disagree");
  }
  const ThinSvd svd = thin_svd(p1.transpose() * c * p2);
  return p2 * svd.v * svd.u.transpose();
}

std::pair<DenseMatrix, DenseMatrix> align_both(const DenseMatrix& p1, const DenseMatrix& p2,
                                               const DenseMatrix& c) {
  if (p1.rows() != c.rows() || p2.rows() != c.cols() || p1.cols() != p2.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "align: shapes disagree");
  }
  const ThinSvd svd = thin_svd(p1.transpose() * c * p2);
  return {p1 * svd.u, p2 * svd.v};
}

double joint_objective(const JointProblem& jp, const DenseMatrix& p1, const DenseMatrix& p2) {
  return (p1.transpose() * jp.c * p2).trace() +
         0.5 * ((p1.transpose() * jp.a1.matrix() * p1).trace() +
                (p2.transpose() * jp.a2.matrix() * p2).trace());
}

std::vector<ProjectionPair> saa_solve_nested(const JointProblem& jp, Eigen::Index k,
                                             const SaaOptions& opts,
                                             SaaDiagnostics* diagnostics) {
  jp.validate();
  const Eigen::Index d1 = jp.d1();
  const Eigen::Index d2 = jp.d2();
  if (k < 1 || k > std::min(d1, d2)) {
    throw Error(ErrorKind::InvalidK, "k = " + std::to_string(k) + " outside [1, " +
                                         std::to_string(std::min(d1, d2)) + "]");
  }
  const WhitenedBlocks blocks = whiten(jp, opts.jitter);
  if (diagnostics) {
    *diagnostics = SaaDiagnostics{};
    diagnostics->jitter1 = blocks.chol1.jitter_used;
    diagnostics->jitter2 = blocks.chol2.jitter_used;
  }

  DenseMatrix pbar1(d1, k);
  DenseMatrix pbar2(d2, k);
  std::vector<double> values;
  DeflationState state = DeflationState::start(blocks);
  Vector q1_prev;
  Vector q2_prev;
  for (Eigen::Index col = 0; col < k; ++col) {
    if (col > 0) state = deflate_step(state, q1_prev, q2_prev);
    AlternatingOptions round = opts.alternating;
    round.seed = opts.alternating.seed + static_cast<std::uint64_t>(col) * 0x100000001b3ULL;
    const AlternatingResult r = alternating_pair(state.a11, state.a12, state.a22, round);
    auto [p1c, p2c] = recover_column(state, r.q1, r.q2);
    if (p1c.dot(blocks.a12 * p2c) < 0.0) {
      p1c = -p1c;
      p2c = -p2c;
    }
    pbar1.col(col) = p1c;
    pbar2.col(col) = p2c;
    values.push_back(r.value);
    q1_prev = r.q1;
    q2_prev = r.q2;
    if (diagnostics) {
      diagnostics->sweeps_per_column.push_back(r.sweeps);
      for (std::size_t i = 1; i < r.trace.size(); ++i) {
        diagnostics->max_monotonicity_violation =
            std::max(diagnostics->max_monotonicity_violation, r.trace[i - 1] - r.trace[i]);
      }
    }
  }

  const DenseMatrix p1 = blocks.chol1.solve_upper(pbar1);
  const DenseMatrix p2 = blocks.chol2.solve_upper(pbar2);

  std::vector<ProjectionPair> out;
  out.reserve(static_cast<std::size_t>(k));
  for (Eigen::Index kk = 1; kk <= k; ++kk) {
    ProjectionPair pair;
    std::tie(pair.p1, pair.p2) = align_both(p1.leftCols(kk), p2.leftCols(kk), jp.c);
    pair.objective = joint_objective(jp, pair.p1, pair.p2);
    pair.per_column_values.assign(values.begin(), values.begin() + kk);
    out.push_back(std::move(pair));
  }
  return out;
}

ProjectionPair saa_solve(const JointProblem& jp, Eigen::Index k, const SaaOptions& opts,
                         SaaDiagnostics* diagnostics) {
  auto all = saa_solve_nested(jp, k, opts, diagnostics);
  return std::move(all.back());
}

KktReport kkt_residual(const JointProblem& jp, const ProjectionPair& pair) {
  const DenseMatrix& p1 = pair.p1;
  const DenseMatrix& p2 = pair.p2;
  const DenseMatrix lambda1 = p1.transpose() * jp.c * p2 + p1.transpose() * jp.a1.matrix() * p1;
  const DenseMatrix lambda2 =
      p2.transpose() * jp.c.transpose() * p1 + p2.transpose() * jp.a2.matrix() * p2;
  KktReport r;
  r.residual1 = (jp.c * p2 + jp.a1.matrix() * p1 - jp.b1.matrix() * p1 * lambda1).norm();
  r.residual2 =
      (jp.c.transpose() * p1 + jp.a2.matrix() * p2 - jp.b2.matrix() * p2 * lambda2).norm();
  r.lambda_asymmetry = std::max((lambda1 - lambda1.transpose()).norm(),
                                (lambda2 - lambda2.transpose()).norm());
  return r;
}

}  // namespace uspl
