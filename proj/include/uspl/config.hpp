#pragma once

#include <string>
#include <utility>
#include <vector>

#include "uspl/eval.hpp"

namespace uspl {

/// Experiment description. Text form is one `key = value` per line, lists are
/// comma-separated, `#` starts a comment. See README for the key reference.
struct ExperimentConfig {
  std::string dataset = "mfeat";  // mfeat | csv
  std::string mfeat_dir;          // empty: $USPL_MFEAT_DIR
  std::vector<std::string> csv_views;
  std::string csv_labels;
  bool standardize = true;

  std::vector<std::pair<std::string, std::string>> pairs;  // empty: every view pair
  std::vector<Family> families;
  std::vector<GraphKind> graphs;

  std::vector<double> gamma;
  std::vector<double> gamma2;
  std::vector<double> eta;
  std::vector<double> heat_scale;
  std::vector<int> knn;  // LFDA local scaling neighbour
  std::vector<int> k1;   // MFA within-class neighbours
  std::vector<int> k2;   // MFA between-class pairs
  int laplacian_knn = 5;
  int k_min = 2;
  int k_max = 6;
  double ridge = 1e-6;

  double train_ratio = 0.5;
  double paired_ratio = 0.2;
  double labeled_ratio = 0.1;
  int trials = 10;
  std::uint64_t seed_base = 0;

  TestedView tested_view = TestedView::Concat;
  NncTraining nnc_training = NncTraining::Auto;
  int threads = 0;  // 0: $USPL_THREADS, else hardware concurrency
  std::string output = "results";

  bool operator==(const ExperimentConfig&) const = default;

  /// Default grids: gamma {0.01 .. 0.99}, gamma2 and eta {1e-3 .. 1e3},
  /// heat_scale {1/4 .. 4}, neighbours {3, 5, 7, 10, 20}, k in [2, 6], 10 trials.
  static ExperimentConfig defaults();

  /// ConfigError on empty grids, bad ranges or unknown names.
  void validate() const;
};

ExperimentConfig parse_config(const std::string& text);
std::string serialize_config(const ExperimentConfig& config);
ExperimentConfig load_config(const std::string& path);

std::string_view to_string(NncTraining n);
NncTraining nnc_training_from_string(std::string_view name);

}  // namespace uspl
