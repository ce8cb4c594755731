#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "uspl/models.hpp"

namespace uspl {

/// Fully paired two-view data with one label per sample (columns are samples).
struct LabeledTwoView {
  DenseMatrix view1;
  DenseMatrix view2;
  std::vector<int> labels;

  Eigen::Index size() const { return view1.cols(); }
  void validate() const;
};

struct SplitPlan {
  std::uint64_t seed = 0;
  double train_ratio = 0.5;
  double paired_ratio = 0.2;   // fraction of the training set kept paired
  double labeled_ratio = 0.1;  // fraction of the training set carrying labels

  void validate() const;
};

struct Split {
  TwoViewData train;  // paired block first, then per-view unpaired columns
  // Sample ids (into the source dataset) of each training column per view.
  std::vector<Eigen::Index> columns1;
  std::vector<Eigen::Index> columns2;
  std::vector<Eigen::Index> train_ids;    // ascending
  std::vector<Eigen::Index> paired_ids;   // ascending; also the first paired_count columns
  std::vector<Eigen::Index> labeled_ids;  // ascending, shared by both views
  std::vector<Eigen::Index> test_ids;     // ascending
};

/// Uniform integer in [0, n) from the raw engine output. Unlike
/// std::uniform_int_distribution this is the same on every standard library.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n);
/// Fisher-Yates shuffle driven by uniform_below.
void shuffle_indices(std::vector<Eigen::Index>& v, std::mt19937_64& rng);

Split make_split(const LabeledTwoView& data, const SplitPlan& plan);

enum class TestedView { Concat, View1, View2 };
std::string_view to_string(TestedView v);
TestedView tested_view_from_string(std::string_view name);

/// Which training samples the nearest-neighbour classifier sees.
enum class NncTraining {
  Auto,          // labeled subset for supervised families, paired subset otherwise
  AllTraining,   // every training sample with its true pairing
  PairedOnly,    // the paired training subset
  LabeledOnly,   // the labeled subset
};

/// [P1^T x1; P2^T x2].
DenseMatrix project_concat(const ProjectionPair& pair, const DenseMatrix& x1, const DenseMatrix& x2);
DenseMatrix project(const ProjectionPair& pair, const DenseMatrix& x1, const DenseMatrix& x2,
                    TestedView view);

/// 1-NN under Euclidean distance, ties to the smallest training index.
std::vector<int> nnc(const DenseMatrix& train_points, const std::vector<int>& train_labels,
                     const DenseMatrix& test_points);

struct TrialResult {
  double accuracy = 0.0;
  Eigen::Index k = 0;
  ModelSpec spec;
  std::uint64_t seed = 0;
  TestedView tested_view = TestedView::Concat;
  double objective = 0.0;
};

struct EvalOptions {
  TestedView tested_view = TestedView::Concat;
  NncTraining nnc_training = NncTraining::Auto;
  SaaOptions saa;
};

/// One split plus cached model matrices; evaluates any number of specs on it.
class TrialContext {
 public:
  TrialContext(const LabeledTwoView& data, const SplitPlan& plan);
  TrialContext(const TrialContext&) = delete;
  TrialContext& operator=(const TrialContext&) = delete;

  const Split& split() const { return split_; }
  ModelBuilder& builder() { return builder_; }

  /// Fits once with max(ks) columns and scores every requested k.
  std::vector<TrialResult> evaluate(const ModelSpec& spec, const std::vector<Eigen::Index>& ks,
                                    const EvalOptions& opts = {});

 private:
  const LabeledTwoView& data_;
  std::uint64_t seed_;
  Split split_;
  ModelBuilder builder_;
};

/// Fitted projections for k = 1..k_max (entry i has k = i + 1).
std::vector<ProjectionPair> fit_nested(ModelBuilder& builder, const ModelSpec& spec,
                                       Eigen::Index k_max, const SaaOptions& opts = {});

TrialResult run_trial(const LabeledTwoView& data, const SplitPlan& plan, const ModelSpec& spec,
                      const EvalOptions& opts = {});

struct Aggregate {
  double mean = 0.0;
  double stddev = 0.0;  // sample (n - 1) standard deviation
};

Aggregate aggregate(const std::vector<double>& accuracies);
Aggregate aggregate(const std::vector<TrialResult>& results);

}  // namespace uspl
