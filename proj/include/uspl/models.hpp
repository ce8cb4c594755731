#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/SparseCore>

#include "uspl/matkernels.hpp"
#include "uspl/saa.hpp"

namespace uspl {

/// Labeled subset of one view: column indices into that view's samples and
/// class ids (0-based).
struct LabelSet {
  std::vector<Eigen::Index> indices;
  std::vector<int> classes;

  Eigen::Index size() const { return static_cast<Eigen::Index>(indices.size()); }
};

/// Columns are samples. The first paired_count columns of both views are
/// mutually paired; the rest of each view is unpaired.
struct TwoViewData {
  DenseMatrix view1_all;
  DenseMatrix view2_all;
  Eigen::Index paired_count = 0;
  std::optional<LabelSet> labels1;
  std::optional<LabelSet> labels2;

  const DenseMatrix& view(int s) const { return s == 1 ? view1_all : view2_all; }
  const std::optional<LabelSet>& labels(int s) const { return s == 1 ? labels1 : labels2; }
  void validate() const;
};

enum class Family {
  CCA,
  SemiCCA,
  USemiCCA,
  SemiCCALR,
  USemiCCALR,
  SCCA,
  USCCA,
  S2GCA,
  US2GCA,
  S2CCALR,
  US2CCALR,
};

std::string_view to_string(Family f);
Family family_from_string(std::string_view name);  // BadFamily on unknown names

/// New models go through saa_solve; baselines are generalized eigenproblems.
bool is_uncorrelated(Family f);
/// Uses class labels (scatter matrices).
bool is_supervised(Family f);
/// Uses the heat-kernel Laplacian regularizer.
bool uses_laplacian(Family f);

enum class GraphKind { LDA, LFDA, MFA };

std::string_view to_string(GraphKind g);
GraphKind graph_kind_from_string(std::string_view name);

struct GraphSpec {
  GraphKind kind = GraphKind::LDA;
  int knn = 5;               // LFDA local scaling neighbour / MFA k1
  int knn_penalty = 5;       // MFA k2
  double heat_scale = 1.0;   // Laplacian bandwidth = heat_scale * mean paired distance
  int laplacian_knn = 5;     // k of the Laplacian k-NN graph

  auto key() const { return std::tuple(kind, knn, knn_penalty, heat_scale, laplacian_knn); }
  bool operator==(const GraphSpec& o) const { return key() == o.key(); }
};

struct ModelSpec {
  Family family = Family::CCA;
  double gamma = 1.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double eta = 0.0;
  std::optional<GraphSpec> graph;
  Eigen::Index k = 2;
  double ridge = 1e-6;

  void validate() const;
};

struct GepProblem {
  SymMatrix lhs;
  SymMatrix rhs;
  Eigen::Index k = 0;
  Eigen::Index d1 = 0;  // rows of P belonging to view 1
};

// ---- covariance and graph building blocks --------------------------------

/// (1/n) X_s H_n X_t^T over the paired columns.
DenseMatrix cross_covariance(const TwoViewData& data, int s, int t);
/// (1/n_s) X~_s H X~_s^T over all columns of view s.
SymMatrix total_covariance(const TwoViewData& data, int s);

/// Squared Euclidean distances between columns, by direct differences.
DenseMatrix pairwise_sq_distances(const DenseMatrix& x);

/// Symmetric (union) k-NN heat-kernel weights on all samples of view s.
Eigen::SparseMatrix<double> heat_knn_weights(const TwoViewData& data, int s, int knn,
                                             double heat_scale);
SymMatrix heat_knn_laplacian(const TwoViewData& data, int s, int knn, double heat_scale);
/// X~_s L_s X~_s^T computed through the sparse weights.
SymMatrix laplacian_regularizer(const TwoViewData& data, int s, int knn, double heat_scale);

struct GraphPair {
  SymMatrix within;
  SymMatrix between;
};

/// num_classes < 0 means "the classes present"; otherwise every id in
/// [0, num_classes) must occur.
GraphPair lda_graphs(const std::vector<int>& classes, int num_classes = -1);
GraphPair lfda_graphs(const DenseMatrix& labeled, const std::vector<int>& classes, int knn);
GraphPair mfa_graphs(const DenseMatrix& labeled, const std::vector<int>& classes, int k1, int k2);

SymMatrix graph_laplacian(const SymMatrix& w);

struct ScatterPair {
  SymMatrix within;
  SymMatrix between;
};

/// S = (1/m) X^ L X^^T for both graphs.
ScatterPair scatter_matrices(const DenseMatrix& labeled, const GraphPair& graphs);

// ---- model assembly -------------------------------------------------------

/// Memoizes the per-dataset matrices so that a hyperparameter grid reuses
/// covariances, Laplacian regularizers and scatter matrices. Not thread-safe;
/// use one instance per worker.
class ModelBuilder {
 public:
  explicit ModelBuilder(const TwoViewData& data);

  const TwoViewData& data() const { return data_; }

  const DenseMatrix& c12();
  const SymMatrix& paired_cov(int s);
  const SymMatrix& total_cov(int s);
  const SymMatrix& laplacian_term(int s, int knn, double heat_scale);
  const ScatterPair& scatter(int s, const GraphSpec& g);

  JointProblem build_joint(const ModelSpec& spec);
  GepProblem build_gep(const ModelSpec& spec);

 private:
  const TwoViewData& data_;
  std::optional<DenseMatrix> c12_;
  std::optional<SymMatrix> paired_[2];
  std::optional<SymMatrix> total_[2];
  std::map<std::tuple<int, int, double>, SymMatrix> laplacian_;
  std::map<std::tuple<int, GraphKind, int, int>, ScatterPair> scatter_;
};

JointProblem build_joint(const TwoViewData& data, const ModelSpec& spec);
GepProblem build_gep(const TwoViewData& data, const ModelSpec& spec);

/// Top-k eigenpairs of the pencil (lhs, rhs) by Cholesky reduction. P^T rhs P = I;
/// objective = 1/2 tr(P^T lhs P); per_column_values are the eigenvalues.
ProjectionPair solve_gep(const GepProblem& gp, const JitterPolicy& jitter = {});

}  // namespace uspl
