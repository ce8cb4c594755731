#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "uspl/config.hpp"
#include "uspl/io.hpp"

namespace uspl {

/// Hyperparameter points for one family (and graph kind, for supervised
/// families) in a fixed nested order.
std::vector<ModelSpec> expand_grid(const ExperimentConfig& config, Family family,
                                   std::optional<GraphKind> graph);

/// One trial on one view pair.
struct TrialRecord {
  std::string pair;  // "a-b"
  TrialResult result;
};

std::string record_header();
std::string format_record(const TrialRecord& record);
TrialRecord parse_record(const std::string& line);  // ParseError

/// Columns of the record that identify a grid point (everything but seed and outcomes).
std::string group_key(const TrialRecord& record);
/// Short human-readable list of the hyperparameters that matter for the family.
std::string describe_params(const ModelSpec& spec);

struct SummaryRow {
  std::string pair;
  std::string family;
  std::string graph;  // "-" for families without class graphs
  double mean = 0.0;
  double stddev = 0.0;
  Eigen::Index k = 0;
  std::string params;
  int trials = 0;
};

/// Best grid point (including k) per (pair, family, graph) by mean accuracy
/// over seeds; ties keep the earliest point in record order.
std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records);

/// Best mean accuracy at each k per (pair, family, graph).
struct Series {
  std::string pair;
  std::string family;
  std::string graph;
  std::vector<std::pair<Eigen::Index, double>> points;
};
std::vector<Series> series_by_k(const std::vector<TrialRecord>& records);

std::vector<TrialRecord> read_records(const std::string& path);  // MissingResults
/// format: "table" or "records".
std::string render_report(const std::vector<TrialRecord>& records, const std::string& format);

MultiViewDataset load_dataset(const ExperimentConfig& config);
/// Configured pairs, or every pair of views in dataset order.
std::vector<std::pair<std::string, std::string>> resolve_pairs(const ExperimentConfig& config,
                                                               const MultiViewDataset& data);

struct RunOptions {
  int threads = 0;                       // 0: config, then $USPL_THREADS, then hardware
  std::optional<std::uint64_t> seed_base;  // overrides the config
  long max_jobs = -1;                    // stop after this many new jobs (testing resume)
  bool fresh = false;                    // discard partial results instead of resuming
  std::ostream* log = nullptr;
};

struct RunOutcome {
  bool complete = false;
  std::size_t jobs_total = 0;
  std::size_t jobs_run = 0;
  std::vector<SummaryRow> summary;
};

/// Runs every (pair, seed) job; each job evaluates the whole grid on one split.
/// Writes <output>/trials.tsv, summary.tsv and summary.txt when all jobs are
/// done. Finished jobs are kept under <output>/partial so an interrupted run
/// resumes where it stopped.
RunOutcome run_experiment(const ExperimentConfig& config, const MultiViewDataset& data,
                          const RunOptions& options = {});

}  // namespace uspl
