#include "uspl/runner.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace uspl {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

bool uses_gamma(Family f) {
  return f == Family::SemiCCA || f == Family::USemiCCA || f == Family::S2GCA || f == Family::US2GCA;
}

std::string graph_column(const ModelSpec& s) {
  return is_supervised(s.family) && s.graph ? std::string(to_string(s.graph->kind)) : "-";
}

void write_text(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error(ErrorKind::MissingFile, "cannot write " + tmp.string());
    out << text;
    if (!out) throw Error(ErrorKind::MissingFile, "write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::MissingResults, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int resolve_threads(const ExperimentConfig& config, const RunOptions& options) {
  if (options.threads > 0) return options.threads;
  if (config.threads > 0) return config.threads;
  if (const char* env = std::getenv("USPL_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::string pad(const std::string& s, std::size_t w) { return s + std::string(w > s.size() ? w - s.size() : 0, ' '); }

}  // namespace

std::vector<ModelSpec> expand_grid(const ExperimentConfig& c, Family family, std::optional<GraphKind> graph) {
  const std::vector<double> one{0.0};
  const auto& gammas = uses_gamma(family) ? c.gamma : std::vector<double>{1.0};
  const bool lap = uses_laplacian(family);
  const bool sup = is_supervised(family);
  const auto& gamma2s = lap ? c.gamma2 : one;
  const auto& heats = lap ? c.heat_scale : std::vector<double>{1.0};
  const auto& etas = sup ? c.eta : one;
  std::vector<std::pair<int, int>> neighbours{{GraphSpec{}.knn, GraphSpec{}.knn_penalty}};
  if (sup && graph == GraphKind::LFDA) {
    neighbours.clear();
    for (int k : c.knn) neighbours.emplace_back(k, GraphSpec{}.knn_penalty);
  } else if (sup && graph == GraphKind::MFA) {
    neighbours.clear();
    for (int a : c.k1)
      for (int b : c.k2) neighbours.emplace_back(a, b);
  }

  std::vector<ModelSpec> out;
  for (double g : gammas)
    for (double g2 : gamma2s)
      for (double h : heats)
        for (double e : etas)
          for (const auto& [n1, n2] : neighbours) {
            ModelSpec s;
            s.family = family;
            s.gamma = g;
            s.gamma2 = g2;
            s.eta = e;
            s.ridge = c.ridge;
            s.k = c.k_max;
            if (lap || sup) {
              GraphSpec gs;
              if (sup) gs.kind = graph.value_or(GraphKind::LDA);
              if (lap) {
                gs.heat_scale = h;
                gs.laplacian_knn = c.laplacian_knn;
              }
              gs.knn = n1;
              gs.knn_penalty = n2;
              s.graph = gs;
            }
            out.push_back(s);
          }
  return out;
}

std::string record_header() {
  return "pair\tfamily\tgraph\tgamma\tgamma1\tgamma2\teta\theat_scale\tlaplacian_knn\tknn\tknn_penalty\tridge\tk\tseed\ttested_view\taccuracy\tobjective";
}

std::string format_record(const TrialRecord& r) {
  const ModelSpec& s = r.result.spec;
  const bool lap = uses_laplacian(s.family) && s.graph;
  const bool sup = is_supervised(s.family) && s.graph;
  const bool lfda_or_mfa = sup && s.graph->kind != GraphKind::LDA;
  const bool mfa = sup && s.graph->kind == GraphKind::MFA;
  std::string line = r.pair;
  for (const std::string& f :
       {std::string(to_string(s.family)), graph_column(s), num(s.gamma), num(s.gamma1), num(s.gamma2), num(s.eta),
        lap ? num(s.graph->heat_scale) : "-", lap ? std::to_string(s.graph->laplacian_knn) : "-",
        lfda_or_mfa ? std::to_string(s.graph->knn) : "-", mfa ? std::to_string(s.graph->knn_penalty) : "-",
        num(s.ridge), std::to_string(r.result.k), std::to_string(r.result.seed),
        std::string(to_string(r.result.tested_view)), num(r.result.accuracy), num(r.result.objective)}) {
    line += '\t';
    line += f;
  }
  return line;
}

TrialRecord parse_record(const std::string& line) {
  const auto f = split_tabs(line);
  if (f.size() != 17) {
    throw Error(ErrorKind::ParseError, "trial record has " + std::to_string(f.size()) + " fields, expected 17");
  }
  auto field_error = [&](std::size_t i) {
    return Error(ErrorKind::ParseError, "field " + std::to_string(i + 1) + ": '" + f[i] + "'");
  };
  auto d = [&](std::size_t i) {
    char* end = nullptr;
    const double v = std::strtod(f[i].c_str(), &end);
    if (f[i].empty() || *end != '\0') throw field_error(i);
    return v;
  };
  auto n = [&](std::size_t i) {
    char* end = nullptr;
    const long long v = std::strtoll(f[i].c_str(), &end, 10);
    if (f[i].empty() || *end != '\0') throw field_error(i);
    return v;
  };
  TrialRecord r;
  r.pair = f[0];
  ModelSpec& s = r.result.spec;
  s.family = family_from_string(f[1]);
  s.gamma = d(3);
  s.gamma1 = d(4);
  s.gamma2 = d(5);
  s.eta = d(6);
  if (is_supervised(s.family) || uses_laplacian(s.family)) {
    GraphSpec g;
    if (f[2] != "-") g.kind = graph_kind_from_string(f[2]);
    if (f[7] != "-") g.heat_scale = d(7);
    if (f[8] != "-") g.laplacian_knn = static_cast<int>(n(8));
    if (f[9] != "-") g.knn = static_cast<int>(n(9));
    if (f[10] != "-") g.knn_penalty = static_cast<int>(n(10));
    s.graph = g;
  }
  s.ridge = d(11);
  r.result.k = static_cast<Eigen::Index>(n(12));
  s.k = r.result.k;
  r.result.seed = static_cast<std::uint64_t>(n(13));
  r.result.tested_view = tested_view_from_string(f[14]);
  r.result.accuracy = d(15);
  r.result.objective = d(16);
  return r;
}

std::string group_key(const TrialRecord& r) {
  const auto f = split_tabs(format_record(r));
  std::string key;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (i == 13 || i == 15 || i == 16) continue;  // seed and outcomes
    key += f[i];
    key += '\t';
  }
  return key;
}

std::string describe_params(const ModelSpec& s) {
  std::string out;
  auto add = [&](const std::string& kv) { out += (out.empty() ? "" : " ") + kv; };
  if (uses_gamma(s.family)) add("gamma=" + short_num(s.gamma));
  if (uses_laplacian(s.family)) {
    if (s.gamma1 != 0.0) add("gamma1=" + short_num(s.gamma1));
    add("gamma2=" + short_num(s.gamma2));
    if (s.graph) add("heat_scale=" + short_num(s.graph->heat_scale));
  }
  if (is_supervised(s.family)) {
    add("eta=" + short_num(s.eta));
    if (s.graph && s.graph->kind == GraphKind::LFDA) add("knn=" + std::to_string(s.graph->knn));
    if (s.graph && s.graph->kind == GraphKind::MFA) {
      add("k1=" + std::to_string(s.graph->knn));
      add("k2=" + std::to_string(s.graph->knn_penalty));
    }
  }
  return out.empty() ? "-" : out;
}

namespace {

struct Group {
  const TrialRecord* first = nullptr;
  std::vector<double> accuracies;
};

// Groups in first-appearance order, plus the (pair, family, graph) triple order.
std::pair<std::vector<Group>, std::vector<std::string>> grouped(const std::vector<TrialRecord>& records) {
  std::vector<Group> groups;
  std::map<std::string, std::size_t> index;
  std::vector<std::string> triples;
  std::map<std::string, bool> seen;
  for (const TrialRecord& r : records) {
    const std::string key = group_key(r);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, groups.size()).first;
      groups.push_back({&r, {}});
    }
    groups[it->second].accuracies.push_back(r.result.accuracy);
    const std::string triple = r.pair + '\t' + std::string(to_string(r.result.spec.family)) + '\t' + graph_column(r.result.spec);
    if (!seen[triple]) {
      seen[triple] = true;
      triples.push_back(triple);
    }
  }
  return {std::move(groups), std::move(triples)};
}

std::string triple_of(const TrialRecord& r) {
  return r.pair + '\t' + std::string(to_string(r.result.spec.family)) + '\t' + graph_column(r.result.spec);
}

}  // namespace

std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records) {
  const auto [groups, triples] = grouped(records);
  std::vector<SummaryRow> rows;
  for (const std::string& t : triples) {
    SummaryRow best;
    bool found = false;
    for (const Group& g : groups) {
      if (triple_of(*g.first) != t) continue;
      const Aggregate a = aggregate(g.accuracies);
      if (!found || a.mean > best.mean) {
        found = true;
        best.pair = g.first->pair;
        best.family = std::string(to_string(g.first->result.spec.family));
        best.graph = graph_column(g.first->result.spec);
        best.mean = a.mean;
        best.stddev = a.stddev;
        best.k = g.first->result.k;
        best.params = describe_params(g.first->result.spec);
        best.trials = static_cast<int>(g.accuracies.size());
      }
    }
    rows.push_back(best);
  }
  return rows;
}

std::vector<Series> series_by_k(const std::vector<TrialRecord>& records) {
  const auto [groups, triples] = grouped(records);
  std::vector<Series> out;
  for (const std::string& t : triples) {
    std::map<Eigen::Index, double> best;
    Series s;
    for (const Group& g : groups) {
      if (triple_of(*g.first) != t) continue;
      s.pair = g.first->pair;
      s.family = std::string(to_string(g.first->result.spec.family));
      s.graph = graph_column(g.first->result.spec);
      const double m = aggregate(g.accuracies).mean;
      const Eigen::Index k = g.first->result.k;
      if (!best.count(k) || m > best[k]) best[k] = m;
    }
    s.points.assign(best.begin(), best.end());
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<TrialRecord> read_records(const std::string& path) {
  fs::path p(path);
  if (fs::is_directory(p)) p /= "trials.tsv";
  if (!fs::exists(p)) throw Error(ErrorKind::MissingResults, "no results at " + p.string());
  std::istringstream in(read_text(p));
  std::string line;
  std::vector<TrialRecord> out;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      if (line != record_header()) throw Error(ErrorKind::ParseError, p.string() + ": unexpected header");
      continue;
    }
    if (!line.empty()) out.push_back(parse_record(line));
  }
  if (out.empty()) throw Error(ErrorKind::MissingResults, p.string() + " holds no trials");
  return out;
}

std::string render_report(const std::vector<TrialRecord>& records, const std::string& format) {
  const auto rows = summarize(records);
  const auto series = series_by_k(records);
  std::ostringstream out;
  char buf[64];
  if (format == "table") {
    std::vector<std::vector<std::string>> cells{{"pair", "family", "graph", "accuracy (%)", "k", "trials", "params"}};
    for (const auto& r : rows) {
      std::snprintf(buf, sizeof buf, "%.2f +- %.2f", 100.0 * r.mean, 100.0 * r.stddev);
      cells.push_back({r.pair, r.family, r.graph, buf, std::to_string(r.k), std::to_string(r.trials), r.params});
    }
    std::vector<std::size_t> w(7, 0);
    for (const auto& row : cells)
      for (std::size_t i = 0; i < row.size(); ++i) w[i] = std::max(w[i], row[i].size());
    for (const auto& row : cells) {
      std::string line;
      for (std::size_t i = 0; i < row.size(); ++i) line += i + 1 < row.size() ? pad(row[i], w[i] + 2) : row[i];
      out << line << '\n';
    }
    out << "\nbest accuracy (%) by k\n";
    for (const auto& s : series) {
      out << s.pair << ' ' << s.family << ' ' << s.graph << ':';
      for (const auto& [k, m] : s.points) {
        std::snprintf(buf, sizeof buf, " k=%ld %.2f", static_cast<long>(k), 100.0 * m);
        out << buf;
      }
      out << '\n';
    }
  } else if (format == "records") {
    for (const auto& r : rows) {
      out << "{\"kind\": \"summary\", \"pair\": \"" << r.pair << "\", \"family\": \"" << r.family
          << "\", \"graph\": \"" << r.graph << "\", \"mean\": " << num(r.mean) << ", \"std\": " << num(r.stddev)
          << ", \"k\": " << r.k << ", \"trials\": " << r.trials << ", \"params\": \"" << r.params << "\"}\n";
    }
    for (const auto& s : series) {
      out << "{\"kind\": \"series\", \"pair\": \"" << s.pair << "\", \"family\": \"" << s.family
          << "\", \"graph\": \"" << s.graph << "\", \"k\": [";
      for (std::size_t i = 0; i < s.points.size(); ++i) out << (i ? ", " : "") << s.points[i].first;
      out << "], \"accuracy\": [";
      for (std::size_t i = 0; i < s.points.size(); ++i) out << (i ? ", " : "") << num(s.points[i].second);
      out << "]}\n";
    }
  } else {
    throw Error(ErrorKind::InvalidParameter, "unknown report format '" + format + "' (table or records)");
  }
  return out.str();
}

MultiViewDataset load_dataset(const ExperimentConfig& config) {
  if (config.dataset == "csv") return load_csv(config.csv_views, config.csv_labels, config.standardize);
  std::string dir = config.mfeat_dir;
  if (dir.empty()) {
    if (const char* env = std::getenv("USPL_MFEAT_DIR")) dir = env;
  }
  if (dir.empty()) throw Error(ErrorKind::MissingFile, "set mfeat_dir or USPL_MFEAT_DIR");
  return load_mfeat(dir, config.standardize);
}

std::vector<std::pair<std::string, std::string>> resolve_pairs(const ExperimentConfig& config,
                                                               const MultiViewDataset& data) {
  if (!config.pairs.empty()) return config.pairs;
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t a = 0; a < data.names.size(); ++a)
    for (std::size_t b = a + 1; b < data.names.size(); ++b) out.emplace_back(data.names[a], data.names[b]);
  return out;
}

RunOutcome run_experiment(const ExperimentConfig& config, const MultiViewDataset& data, const RunOptions& options) {
  config.validate();
  const auto pairs = resolve_pairs(config, data);
  std::vector<LabeledTwoView> pair_data;
  for (const auto& [a, b] : pairs) {
    LabeledTwoView d;
    try {
      d = data.pair(a, b);
    } catch (const Error& e) {
      throw Error(ErrorKind::ConfigError, e.what());
    }
    if (config.k_max > std::min(d.view1.rows(), d.view2.rows())) {
      throw Error(ErrorKind::ConfigError, "k_max = " + std::to_string(config.k_max) + " exceeds the smaller view of " +
                                              a + "-" + b);
    }
    pair_data.push_back(std::move(d));
  }

  ExperimentConfig effective = config;
  effective.seed_base = options.seed_base.value_or(config.seed_base);
  const fs::path out_dir(config.output);
  const fs::path partial = out_dir / "partial";
  const fs::path snapshot = out_dir / "config.txt";
  const std::string snapshot_text = serialize_config(effective);
  if (options.fresh) {
    fs::remove_all(partial);
    for (const char* f : {"trials.tsv", "summary.tsv", "summary.txt", "config.txt", "INCOMPLETE"}) fs::remove(out_dir / f);
  }
  fs::create_directories(partial);
  if (fs::exists(snapshot) && read_text(snapshot) != snapshot_text) {
    throw Error(ErrorKind::ConfigError, out_dir.string() + " holds results of a different config; rerun with --fresh");
  }
  write_text(snapshot, snapshot_text);
  write_text(out_dir / "INCOMPLETE", "resume by rerunning the same config\n");

  struct Job {
    std::size_t pair;
    std::uint64_t seed;
    fs::path file;
  };
  std::vector<Job> jobs;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    for (int t = 0; t < config.trials; ++t) {
      const std::uint64_t seed = effective.seed_base + static_cast<std::uint64_t>(t);
      jobs.push_back({p, seed, partial / (pairs[p].first + "-" + pairs[p].second + ".seed" + std::to_string(seed) + ".tsv")});
    }
  }
  std::vector<const Job*> pending;
  for (const Job& j : jobs)
    if (!fs::exists(j.file)) pending.push_back(&j);

  std::vector<Eigen::Index> ks;
  for (int k = config.k_min; k <= config.k_max; ++k) ks.push_back(k);
  EvalOptions eval_opts;
  eval_opts.tested_view = config.tested_view;
  eval_opts.nnc_training = config.nnc_training;

  std::atomic<std::size_t> next{0};
  std::atomic<long> launched{0};
  std::atomic<std::size_t> finished{0};
  std::atomic<bool> stop{false};
  std::exception_ptr failure;
  std::mutex mu;

  auto run_job = [&](const Job& job) {
    const auto start = std::chrono::steady_clock::now();
    SplitPlan plan{job.seed, config.train_ratio, config.paired_ratio, config.labeled_ratio};
    TrialContext ctx(pair_data[job.pair], plan);
    const std::string name = pairs[job.pair].first + "-" + pairs[job.pair].second;
    std::string text;
    for (Family f : config.families) {
      std::vector<std::optional<GraphKind>> kinds{std::nullopt};
      if (is_supervised(f)) kinds.assign(config.graphs.begin(), config.graphs.end());
      for (const auto& g : kinds) {
        for (const ModelSpec& spec : expand_grid(config, f, g)) {
          for (const TrialResult& r : ctx.evaluate(spec, ks, eval_opts)) {
            text += format_record({name, r});
            text += '\n';
          }
        }
      }
    }
    write_text(job.file, text);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const std::size_t done = ++finished;
    if (options.log) {
      std::lock_guard<std::mutex> lock(mu);
      char buf[160];
      std::snprintf(buf, sizeof buf, "[%zu/%zu] %s seed %llu (%.1f s)\n", done, pending.size(), name.c_str(),
                    static_cast<unsigned long long>(job.seed), secs);
      *options.log << buf << std::flush;
    }
  };

  auto worker = [&] {
    while (!stop) {
      const std::size_t i = next++;
      if (i >= pending.size()) return;
      if (options.max_jobs >= 0 && launched++ >= options.max_jobs) return;
      try {
        run_job(*pending[i]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failure) failure = std::current_exception();
        stop = true;
      }
    }
  };

  const int threads = std::min<int>(resolve_threads(config, options), static_cast<int>(std::max<std::size_t>(pending.size(), 1)));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  RunOutcome outcome;
  outcome.jobs_total = jobs.size();
  outcome.jobs_run = finished;
  for (const Job& j : jobs)
    if (!fs::exists(j.file)) return outcome;

  std::string trials = record_header() + "\n";
  for (const Job& j : jobs) trials += read_text(j.file);
  write_text(out_dir / "trials.tsv", trials);
  const std::vector<TrialRecord> records = read_records((out_dir / "trials.tsv").string());
  outcome.summary = summarize(records);
  std::string summary = "pair\tfamily\tgraph\tmean\tstd\tk\ttrials\tparams\n";
  for (const auto& r : outcome.summary) {
    summary += r.pair + '\t' + r.family + '\t' + r.graph + '\t' + num(r.mean) + '\t' + num(r.stddev) + '\t' +
               std::to_string(r.k) + '\t' + std::to_string(r.trials) + '\t' + r.params + '\n';
  }
  write_text(out_dir / "summary.tsv", summary);
  write_text(out_dir / "summary.txt", render_report(records, "table"));
  fs::remove(out_dir / "INCOMPLETE");
  outcome.complete = true;
  return outcome;
}

}  // namespace uspl
