// uspl: run semi-paired subspace learning experiments from the command line.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <set>

#include "uspl/runner.hpp"

using namespace uspl;

namespace {

int cmd_run(const std::string& path, int threads, std::optional<std::uint64_t> seed_base, long max_jobs,
            bool fresh, bool quiet) {
  const ExperimentConfig config = load_config(path);
  const MultiViewDataset data = load_dataset(config);
  RunOptions opts;
  opts.threads = threads;
  opts.seed_base = seed_base;
  opts.max_jobs = max_jobs;
  opts.fresh = fresh;
  opts.log = quiet ? nullptr : &std::cerr;
  const RunOutcome out = run_experiment(config, data, opts);
  if (!out.complete) {
    std::cerr << "stopped with " << out.jobs_run << " new jobs; rerun the same command to resume\n";
    return 2;
  }
  std::cout << render_report(read_records(config.output), "table");
  return 0;
}

int cmd_report(const std::string& path, const std::string& format) {
  std::cout << render_report(read_records(path), format);
  return 0;
}

int cmd_split(const std::string& path) {
  const ExperimentConfig config = load_config(path);
  const MultiViewDataset data = load_dataset(config);
  const auto pairs = resolve_pairs(config, data);
  const LabeledTwoView d = data.pair(pairs.front().first, pairs.front().second);
  std::printf("seed\ttrain\ttest\tpaired\tunpaired\tlabeled\tlabeled_classes\n");
  for (int t = 0; t < config.trials; ++t) {
    const SplitPlan plan{config.seed_base + static_cast<std::uint64_t>(t), config.train_ratio, config.paired_ratio,
                         config.labeled_ratio};
    const Split s = make_split(d, plan);
    std::set<int> classes(s.train.labels1->classes.begin(), s.train.labels1->classes.end());
    std::printf("%llu\t%zu\t%zu\t%ld\t%ld\t%zu\t%zu\n", static_cast<unsigned long long>(plan.seed), s.train_ids.size(),
                s.test_ids.size(), static_cast<long>(s.train.paired_count),
                static_cast<long>(s.train_ids.size()) - static_cast<long>(s.train.paired_count), s.labeled_ids.size(),
                classes.size());
  }
  return 0;
}

struct SolveArgs {
  std::string model;
  std::string pair = "fac-fou";
  std::string config;
  std::string mfeat_dir;
  std::vector<std::string> csv_views;
  std::string csv_labels;
  bool raw = false;
  double gamma = 1.0, gamma1 = 0.0, gamma2 = 0.0, eta = 0.0, ridge = 1e-6;
  std::string graph = "lda";
  GraphSpec gs;
  int k = 2;
  std::uint64_t seed = 0;
  std::string out = "P";
};

int cmd_solve(const SolveArgs& a) {
  ExperimentConfig config = a.config.empty() ? ExperimentConfig::defaults() : load_config(a.config);
  if (!a.mfeat_dir.empty()) config.mfeat_dir = a.mfeat_dir;
  if (!a.csv_views.empty()) {
    config.dataset = "csv";
    config.csv_views = a.csv_views;
    config.csv_labels = a.csv_labels;
  }
  if (a.raw) config.standardize = false;
  const MultiViewDataset data = load_dataset(config);
  const auto dash = a.pair.find('-');
  if (dash == std::string::npos) throw Error(ErrorKind::ConfigError, "--pair looks like a-b");
  const LabeledTwoView d = data.pair(a.pair.substr(0, dash), a.pair.substr(dash + 1));

  ModelSpec spec;
  spec.family = family_from_string(a.model);
  spec.gamma = a.gamma;
  spec.gamma1 = a.gamma1;
  spec.gamma2 = a.gamma2;
  spec.eta = a.eta;
  spec.ridge = a.ridge;
  spec.k = a.k;
  if (is_supervised(spec.family) || uses_laplacian(spec.family)) {
    GraphSpec g = a.gs;
    g.kind = graph_kind_from_string(a.graph);
    spec.graph = g;
  }
  const SplitPlan plan{a.seed, config.train_ratio, config.paired_ratio, config.labeled_ratio};
  TrialContext ctx(d, plan);
  const auto fits = fit_nested(ctx.builder(), spec, spec.k);
  const ProjectionPair& p = fits.back();
  write_csv(a.out + "1.csv", p.p1);
  write_csv(a.out + "2.csv", p.p2);
  EvalOptions opts;
  opts.tested_view = config.tested_view;
  opts.nnc_training = config.nnc_training;
  const TrialResult r = ctx.evaluate(spec, {spec.k}, opts).front();
  std::printf("objective\t%.15g\naccuracy\t%.15g\n", p.objective, r.accuracy);
  std::printf("wrote %s1.csv (%ld x %ld) and %s2.csv (%ld x %ld)\n", a.out.c_str(), static_cast<long>(p.p1.rows()),
              static_cast<long>(p.p1.cols()), a.out.c_str(), static_cast<long>(p.p2.rows()),
              static_cast<long>(p.p2.cols()));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Uncorrelated semi-paired subspace learning"};
  app.require_subcommand(1);

  std::string run_path;
  int threads = 0;
  std::uint64_t seed_base = 0;
  long max_jobs = -1;
  bool fresh = false, quiet = false;
  auto* run = app.add_subcommand("run", "run an experiment grid");
  run->add_option("config", run_path, "config file")->required();
  run->add_option("--threads", threads, "worker threads (default: $USPL_THREADS or all cores)");
  auto* seed_opt = run->add_option("--seed-base", seed_base, "offset added to every trial seed");
  run->add_option("--max-jobs", max_jobs, "stop after this many (pair, seed) jobs");
  run->add_flag("--fresh", fresh, "discard partial results in the output directory");
  run->add_flag("-q,--quiet", quiet, "no progress lines");

  std::string report_path, format = "table";
  auto* report = app.add_subcommand("report", "summarize a results directory or trials.tsv");
  report->add_option("results", report_path, "results directory or trials.tsv")->required();
  report->add_option("--format", format, "table or records")->check(CLI::IsMember({"table", "records"}));

  std::string split_path;
  auto* split = app.add_subcommand("split", "print split sizes per seed");
  split->add_option("--inspect", split_path, "config file")->required();

  SolveArgs sa;
  auto* solve = app.add_subcommand("solve", "fit one model on one split and write P1/P2");
  solve->add_option("--model", sa.model, "model family, e.g. USemiCCA")->required();
  solve->add_option("--pair", sa.pair, "view pair a-b");
  solve->add_option("--config", sa.config, "take dataset and split ratios from a config file");
  solve->add_option("--mfeat-dir", sa.mfeat_dir, "mfeat directory");
  solve->add_option("--csv-views", sa.csv_views, "CSV view files (samples as rows)")->delimiter(',');
  solve->add_option("--csv-labels", sa.csv_labels, "CSV label file");
  solve->add_flag("--raw", sa.raw, "do not standardize features");
  solve->add_option("--gamma", sa.gamma);
  solve->add_option("--gamma1", sa.gamma1);
  solve->add_option("--gamma2", sa.gamma2);
  solve->add_option("--eta", sa.eta);
  solve->add_option("--ridge", sa.ridge);
  solve->add_option("--graph", sa.graph, "lda, lfda or mfa")->check(CLI::IsMember({"lda", "lfda", "mfa"}));
  solve->add_option("--knn", sa.gs.knn, "LFDA neighbour / MFA k1");
  solve->add_option("--k2", sa.gs.knn_penalty, "MFA k2");
  solve->add_option("--heat-scale", sa.gs.heat_scale);
  solve->add_option("--laplacian-knn", sa.gs.laplacian_knn);
  solve->add_option("--k", sa.k, "target dimension");
  solve->add_option("--seed", sa.seed, "split seed");
  solve->add_option("--out", sa.out, "output prefix; writes <out>1.csv and <out>2.csv");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) {
      return cmd_run(run_path, threads, seed_opt->count() ? std::optional<std::uint64_t>(seed_base) : std::nullopt,
                     max_jobs, fresh, quiet);
    }
    if (*report) return cmd_report(report_path, format);
    if (*split) return cmd_split(split_path);
    if (*solve) return cmd_solve(sa);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
