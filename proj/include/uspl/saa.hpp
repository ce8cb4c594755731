#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "uspl/matkernels.hpp"
#include "uspl/trs.hpp"

namespace uspl {

/// max tr(P1^T C P2) + 1/2 sum_s tr(Ps^T As Ps)  s.t.  Ps^T Bs Ps = I_k.
struct JointProblem {
  SymMatrix a1;
  SymMatrix a2;
  DenseMatrix c;  // d1 x d2
  SymMatrix b1;
  SymMatrix b2;

  Eigen::Index d1() const { return a1.dim(); }
  Eigen::Index d2() const { return a2.dim(); }
  void validate() const;
};

/// Blocks of diag(L1^-1, L2^-1) [A1 C; C^T A2] diag(L1^-T, L2^-T).
struct WhitenedBlocks {
  SymMatrix a11;
  DenseMatrix a12;
  SymMatrix a22;
  CholeskyFactor chol1;
  CholeskyFactor chol2;
};

struct DeflationState {
  std::vector<Reflector> reflectors1;
  std::vector<Reflector> reflectors2;
  SymMatrix a11;
  DenseMatrix a12;
  SymMatrix a22;
  Eigen::Index d1 = 0;  // original (whitened) dimensions
  Eigen::Index d2 = 0;

  static DeflationState start(const WhitenedBlocks& blocks);
  Eigen::Index columns_done() const { return static_cast<Eigen::Index>(reflectors1.size()); }
};

struct ProjectionPair {
  DenseMatrix p1;  // d1 x k
  DenseMatrix p2;  // d2 x k
  double objective = 0.0;
  std::vector<double> per_column_values;

  Eigen::Index k() const { return p1.cols(); }
};

struct AlternatingOptions {
  double tol = 1e-10;       // relative objective gain over a full sweep
  double step_tol = 1e-9;   // and largest change of q1 or q2 over that sweep
  int max_sweeps = 1000;
  int random_restarts = 3;  // seeded random starts tried after the SVD warm start
  bool svd_warm_start = true;
  bool joint_eigen_start = true;  // view-2 part of the top eigenvector of the whole block matrix
  std::uint64_t seed = 0x9e3779b97f4a7c15ULL;
  TrsOptions trs;
};

struct AlternatingResult {
  Vector q1;
  Vector q2;
  double value = 0.0;  // q^T Abar q with q = [q1; q2]
  int sweeps = 0;
  // Objective after every half-sweep of the returned run (nondecreasing).
  std::vector<double> trace;
};

struct SaaOptions {
  AlternatingOptions alternating;
  JitterPolicy jitter;
};

struct SaaDiagnostics {
  double jitter1 = 0.0;
  double jitter2 = 0.0;
  double max_monotonicity_violation = 0.0;  // largest drop seen across half-sweeps
  std::vector<int> sweeps_per_column;
};

WhitenedBlocks whiten(const JointProblem& jp, const JitterPolicy& jitter = {});

/// q^T Abar q for the stacked q = [q1; q2].
double block_objective(const SymMatrix& a11, const DenseMatrix& a12, const SymMatrix& a22,
                       const Vector& q1, const Vector& q2);

AlternatingResult alternating_pair(const SymMatrix& a11, const DenseMatrix& a12,
                                   const SymMatrix& a22, const AlternatingOptions& opts = {});
/// Single run from a given unit-vector start for q2.
AlternatingResult alternating_pair_from(const SymMatrix& a11, const DenseMatrix& a12,
                                        const SymMatrix& a22, const Vector& q2_init,
                                        const AlternatingOptions& opts = {});

DeflationState deflate_step(const DeflationState& state, const Vector& q1, const Vector& q2);

/// p_s = Q_s^(j) [0_j; q_s] using the stored reflectors.
std::pair<Vector, Vector> recover_column(const DeflationState& state, const Vector& q1,
                                         const Vector& q2);

/// Returns p2 V U^T where p1^T c p2 = U S V^T.
DenseMatrix align(const DenseMatrix& p1, const DenseMatrix& p2, const DenseMatrix& c);

/// Rotates both sides: returns (p1 U, p2 V), so the product becomes diag(S).
/// Equals align() followed by p1 <- p1 U; the objective is the same.
std::pair<DenseMatrix, DenseMatrix> align_both(const DenseMatrix& p1, const DenseMatrix& p2,
                                               const DenseMatrix& c);

/// f(P1, P2) = tr(P1^T C P2) + 1/2 sum_s tr(Ps^T As Ps).
double joint_objective(const JointProblem& jp, const DenseMatrix& p1, const DenseMatrix& p2);

ProjectionPair saa_solve(const JointProblem& jp, Eigen::Index k, const SaaOptions& opts = {},
                         SaaDiagnostics* diagnostics = nullptr);

/// Aligned solutions for every k' = 1..k from a single greedy run; entry i holds
/// k' = i + 1. Columns are nested before alignment.
std::vector<ProjectionPair> saa_solve_nested(const JointProblem& jp, Eigen::Index k,
                                             const SaaOptions& opts = {},
                                             SaaDiagnostics* diagnostics = nullptr);

struct KktReport {
  double residual1 = 0.0;  // ||Phi12 P2 + Phi11 P1 - Psi11 P1 Lambda1||_F
  double residual2 = 0.0;
  double lambda_asymmetry = 0.0;
};

KktReport kkt_residual(const JointProblem& jp, const ProjectionPair& pair);

}  // namespace uspl
