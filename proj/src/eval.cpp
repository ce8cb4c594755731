#include "uspl/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <unordered_map>

namespace uspl {

namespace {

DenseMatrix gather(const DenseMatrix& x, const std::vector<Eigen::Index>& ids) {
  DenseMatrix out(x.rows(), static_cast<Eigen::Index>(ids.size()));
  for (std::size_t i = 0; i < ids.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = x.col(ids[i]);
  return out;
}

std::vector<int> gather(const std::vector<int>& y, const std::vector<Eigen::Index>& ids) {
  std::vector<int> out;
  out.reserve(ids.size());
  for (Eigen::Index i : ids) out.push_back(y[static_cast<std::size_t>(i)]);
  return out;
}

LabelSet label_set(const std::vector<Eigen::Index>& columns, const std::vector<Eigen::Index>& labeled,
                   const std::vector<int>& labels) {
  std::unordered_map<Eigen::Index, Eigen::Index> position;
  for (std::size_t c = 0; c < columns.size(); ++c) position[columns[c]] = static_cast<Eigen::Index>(c);
  LabelSet out;
  for (Eigen::Index id : labeled) {
    out.indices.push_back(position.at(id));
    out.classes.push_back(labels[static_cast<std::size_t>(id)]);
  }
  return out;
}

bool ratio_ok(double r) { return r > 0.0 && r <= 1.0; }

}  // namespace

void LabeledTwoView::validate() const {
  if (view1.cols() != view2.cols() || view1.cols() != static_cast<Eigen::Index>(labels.size())) {
    throw Error(ErrorKind::ShapeMismatch, "views and labels must have the same sample count");
  }
  for (int c : labels) {
    if (c < 0) throw Error(ErrorKind::InvalidParameter, "negative class id");
  }
}

void SplitPlan::validate() const {
  if (!ratio_ok(train_ratio) || !ratio_ok(paired_ratio) || !ratio_ok(labeled_ratio)) {
    throw Error(ErrorKind::RatioInfeasible, "ratios must lie in (0, 1]");
  }
}

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  if (n == 0) throw Error(ErrorKind::InvalidParameter, "uniform_below(0)");
  const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
  for (;;) {
    const std::uint64_t x = rng();
    if (x >= threshold) return x % n;
  }
}

void shuffle_indices(std::vector<Eigen::Index>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(v[i - 1], v[j]);
  }
}

Split make_split(const LabeledTwoView& data, const SplitPlan& plan) {
  data.validate();
  plan.validate();
  const Eigen::Index n = data.size();
  const auto n_train = static_cast<Eigen::Index>(std::llround(plan.train_ratio * static_cast<double>(n)));
  const auto n_paired = static_cast<Eigen::Index>(std::llround(plan.paired_ratio * static_cast<double>(n_train)));
  const auto n_labeled = static_cast<Eigen::Index>(std::llround(plan.labeled_ratio * static_cast<double>(n_train)));
  if (n - n_train < 1) throw Error(ErrorKind::RatioInfeasible, "test set would be empty");
  if (n_paired < 2) {
    throw Error(ErrorKind::RatioInfeasible, "only " + std::to_string(n_paired) + " paired training samples");
  }
  if (n_labeled < 1) throw Error(ErrorKind::RatioInfeasible, "no labeled training samples");

  std::mt19937_64 rng(plan.seed);
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  shuffle_indices(perm, rng);

  Split split;
  split.train_ids.assign(perm.begin(), perm.begin() + n_train);
  split.test_ids.assign(perm.begin() + n_train, perm.end());
  std::sort(split.train_ids.begin(), split.train_ids.end());
  std::sort(split.test_ids.begin(), split.test_ids.end());

  std::vector<Eigen::Index> pool = split.train_ids;
  shuffle_indices(pool, rng);
  std::vector<Eigen::Index> paired(pool.begin(), pool.begin() + n_paired);
  std::sort(paired.begin(), paired.end());
  split.paired_ids = paired;
  std::vector<Eigen::Index> unpaired(pool.begin() + n_paired, pool.end());
  std::sort(unpaired.begin(), unpaired.end());
  // Independent orders per view erase the cross-view correspondence.
  std::vector<Eigen::Index> u1 = unpaired, u2 = unpaired;
  shuffle_indices(u1, rng);
  shuffle_indices(u2, rng);
  split.columns1 = paired;
  split.columns1.insert(split.columns1.end(), u1.begin(), u1.end());
  split.columns2 = paired;
  split.columns2.insert(split.columns2.end(), u2.begin(), u2.end());

  std::vector<Eigen::Index> lab = split.train_ids;
  shuffle_indices(lab, rng);
  split.labeled_ids.assign(lab.begin(), lab.begin() + n_labeled);
  std::sort(split.labeled_ids.begin(), split.labeled_ids.end());

  split.train.view1_all = gather(data.view1, split.columns1);
  split.train.view2_all = gather(data.view2, split.columns2);
  split.train.paired_count = n_paired;
  split.train.labels1 = label_set(split.columns1, split.labeled_ids, data.labels);
  split.train.labels2 = label_set(split.columns2, split.labeled_ids, data.labels);
  return split;
}

std::string_view to_string(TestedView v) {
  switch (v) {
    case TestedView::Concat: return "concat";
    case TestedView::View1: return "view1";
    case TestedView::View2: return "view2";
  }
  return "?";
}

TestedView tested_view_from_string(std::string_view name) {
  if (name == "concat") return TestedView::Concat;
  if (name == "view1") return TestedView::View1;
  if (name == "view2") return TestedView::View2;
  throw Error(ErrorKind::InvalidParameter, "unknown tested view '" + std::string(name) + "'");
}

DenseMatrix project_concat(const ProjectionPair& pair, const DenseMatrix& x1, const DenseMatrix& x2) {
  if (x1.rows() != pair.p1.rows() || x2.rows() != pair.p2.rows() || x1.cols() != x2.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "test data does not match the projections");
  }
  DenseMatrix out(pair.p1.cols() + pair.p2.cols(), x1.cols());
  out.topRows(pair.p1.cols()) = pair.p1.transpose() * x1;
  out.bottomRows(pair.p2.cols()) = pair.p2.transpose() * x2;
  return out;
}

DenseMatrix project(const ProjectionPair& pair, const DenseMatrix& x1, const DenseMatrix& x2,
                    TestedView view) {
  switch (view) {
    case TestedView::Concat:
      return project_concat(pair, x1, x2);
    case TestedView::View1:
      if (x1.rows() != pair.p1.rows()) throw Error(ErrorKind::DimensionMismatch, "view 1 rows");
      return pair.p1.transpose() * x1;
    case TestedView::View2:
      if (x2.rows() != pair.p2.rows()) throw Error(ErrorKind::DimensionMismatch, "view 2 rows");
      return pair.p2.transpose() * x2;
  }
  return {};
}

std::vector<int> nnc(const DenseMatrix& train_points, const std::vector<int>& train_labels,
                     const DenseMatrix& test_points) {
  if (train_points.cols() == 0) throw Error(ErrorKind::EmptyTrainingSet, "no training points");
  if (train_points.cols() != static_cast<Eigen::Index>(train_labels.size())) {
    throw Error(ErrorKind::DimensionMismatch, "training labels do not match training points");
  }
  if (test_points.cols() > 0 && test_points.rows() != train_points.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "test and training dimensions differ");
  }
  std::vector<int> out(static_cast<std::size_t>(test_points.cols()));
  for (Eigen::Index t = 0; t < test_points.cols(); ++t) {
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index arg = 0;
    for (Eigen::Index i = 0; i < train_points.cols(); ++i) {
      const double d = (train_points.col(i) - test_points.col(t)).squaredNorm();
      if (d < best) {
        best = d;
        arg = i;
      }
    }
    out[static_cast<std::size_t>(t)] = train_labels[static_cast<std::size_t>(arg)];
  }
  return out;
}

std::vector<ProjectionPair> fit_nested(ModelBuilder& builder, const ModelSpec& spec,
                                       Eigen::Index k_max, const SaaOptions& opts) {
  ModelSpec s = spec;
  s.k = k_max;
  s.validate();
  if (is_uncorrelated(s.family)) return saa_solve_nested(builder.build_joint(s), k_max, opts);

  const GepProblem gp = builder.build_gep(s);
  const ProjectionPair full = solve_gep(gp, opts.jitter);
  std::vector<ProjectionPair> out;
  for (Eigen::Index k = 1; k <= k_max; ++k) {
    ProjectionPair p;
    p.p1 = full.p1.leftCols(k);
    p.p2 = full.p2.leftCols(k);
    p.per_column_values.assign(full.per_column_values.begin(), full.per_column_values.begin() + k);
    p.objective = 0.5 * std::accumulate(p.per_column_values.begin(), p.per_column_values.end(), 0.0);
    out.push_back(std::move(p));
  }
  return out;
}

TrialContext::TrialContext(const LabeledTwoView& data, const SplitPlan& plan)
    : data_(data), seed_(plan.seed), split_(make_split(data, plan)), builder_(split_.train) {}

std::vector<TrialResult> TrialContext::evaluate(const ModelSpec& spec, const std::vector<Eigen::Index>& ks,
                                                const EvalOptions& opts) {
  if (ks.empty()) throw Error(ErrorKind::InvalidK, "no k requested");
  const Eigen::Index k_max = *std::max_element(ks.begin(), ks.end());
  const std::vector<ProjectionPair> fits = fit_nested(builder_, spec, k_max, opts.saa);

  NncTraining mode = opts.nnc_training;
  if (mode == NncTraining::Auto) mode = is_supervised(spec.family) ? NncTraining::LabeledOnly : NncTraining::PairedOnly;
  const std::vector<Eigen::Index>& train_ids = mode == NncTraining::LabeledOnly ? split_.labeled_ids
                                               : mode == NncTraining::PairedOnly ? split_.paired_ids
                                                                                 : split_.train_ids;

  // True pairing is used for the classifier's training points.
  const DenseMatrix tr1 = gather(data_.view1, train_ids);
  const DenseMatrix tr2 = gather(data_.view2, train_ids);
  const std::vector<int> ytr = gather(data_.labels, train_ids);
  const DenseMatrix te1 = gather(data_.view1, split_.test_ids);
  const DenseMatrix te2 = gather(data_.view2, split_.test_ids);
  const std::vector<int> yte = gather(data_.labels, split_.test_ids);

  std::vector<TrialResult> out;
  for (Eigen::Index k : ks) {
    if (k < 1) throw Error(ErrorKind::InvalidK, "k must be positive");
    const ProjectionPair& pair = fits[static_cast<std::size_t>(k - 1)];
    const std::vector<int> pred = nnc(project(pair, tr1, tr2, opts.tested_view), ytr,
                                      project(pair, te1, te2, opts.tested_view));
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == yte[i] ? 1 : 0;
    TrialResult r;
    r.accuracy = static_cast<double>(hits) / static_cast<double>(pred.size());
    r.k = k;
    r.spec = spec;
    r.spec.k = k;
    r.seed = seed_;
    r.tested_view = opts.tested_view;
    r.objective = pair.objective;
    out.push_back(r);
  }
  return out;
}

TrialResult run_trial(const LabeledTwoView& data, const SplitPlan& plan, const ModelSpec& spec,
                      const EvalOptions& opts) {
  TrialContext ctx(data, plan);
  return ctx.evaluate(spec, {spec.k}, opts).front();
}

Aggregate aggregate(const std::vector<double>& accuracies) {
  if (accuracies.size() < 2) throw Error(ErrorKind::TooFewTrials, "need at least 2 trials");
  const double n = static_cast<double>(accuracies.size());
  const double mean = std::accumulate(accuracies.begin(), accuracies.end(), 0.0) / n;
  double ss = 0.0;
  for (double a : accuracies) ss += (a - mean) * (a - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

Aggregate aggregate(const std::vector<TrialResult>& results) {
  std::vector<double> acc;
  acc.reserve(results.size());
  for (const auto& r : results) acc.push_back(r.accuracy);
  return aggregate(acc);
}

}  // namespace uspl
