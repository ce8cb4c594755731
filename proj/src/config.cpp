#include "uspl/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace uspl {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    const auto comma = value.find(',', start);
    const std::string item = trim(std::string_view(value).substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void bad(const std::string& key, const std::string& value, const std::string& why) {
  throw Error(ErrorKind::ConfigError, key + " = " + value + ": " + why);
}

double to_double(const std::string& key, const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) bad(key, s, "not a number");
  return v;
}

long long to_int(const std::string& key, const std::string& s) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) bad(key, s, "not an integer");
  return v;
}

bool to_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  bad(key, s, "expected true or false");
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T, class F>
std::string join(const std::vector<T>& v, F f) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += f(v[i]);
  }
  return out;
}

}  // namespace

std::string_view to_string(NncTraining n) {
  switch (n) {
    case NncTraining::Auto: return "auto";
    case NncTraining::AllTraining: return "all";
    case NncTraining::PairedOnly: return "paired";
    case NncTraining::LabeledOnly: return "labeled";
  }
  return "?";
}

NncTraining nnc_training_from_string(std::string_view name) {
  for (NncTraining n : {NncTraining::Auto, NncTraining::AllTraining, NncTraining::PairedOnly,
                        NncTraining::LabeledOnly}) {
    if (to_string(n) == name) return n;
  }
  throw Error(ErrorKind::ConfigError, "unknown nnc_training '" + std::string(name) + "'");
}

ExperimentConfig ExperimentConfig::defaults() {
  ExperimentConfig c;
  c.families = {Family::CCA, Family::SemiCCA, Family::USemiCCA, Family::SemiCCALR, Family::USemiCCALR};
  c.graphs = {GraphKind::LDA, GraphKind::LFDA, GraphKind::MFA};
  c.gamma = {0.01, 0.05, 0.1, 0.5, 0.9, 0.95, 0.99};
  c.gamma2 = {1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1000.0};
  c.eta = c.gamma2;
  c.heat_scale = {0.25, 0.5, 1.0, 2.0, 4.0};
  c.knn = {3, 5, 7, 10, 20};
  c.k1 = c.knn;
  c.k2 = c.knn;
  return c;
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorKind::ConfigError, m); };
  if (dataset != "mfeat" && dataset != "csv") fail("dataset must be mfeat or csv");
  if (dataset == "csv" && (csv_views.size() < 2 || csv_labels.empty())) {
    fail("csv dataset needs at least two csv_views and csv_labels");
  }
  if (families.empty()) fail("families is empty");
  bool supervised = false, laplacian = false, semi = false;
  for (Family f : families) {
    supervised |= is_supervised(f);
    laplacian |= uses_laplacian(f);
    semi |= f == Family::SemiCCA || f == Family::USemiCCA || f == Family::S2GCA || f == Family::US2GCA;
  }
  if (semi && gamma.empty()) fail("gamma grid is empty");
  if (laplacian && (gamma2.empty() || heat_scale.empty())) fail("gamma2 or heat_scale grid is empty");
  if (supervised) {
    if (eta.empty()) fail("eta grid is empty");
    if (graphs.empty()) fail("graphs is empty");
    for (GraphKind g : graphs) {
      if (g == GraphKind::LFDA && knn.empty()) fail("knn grid is empty");
      if (g == GraphKind::MFA && (k1.empty() || k2.empty())) fail("k1 or k2 grid is empty");
    }
  }
  for (double g : gamma)
    if (!(g >= 0.0 && g <= 1.0)) fail("gamma values must lie in [0, 1]");
  for (const auto* grid : {&gamma2, &eta, &heat_scale})
    for (double v : *grid)
      if (!(v >= 0.0)) fail("gamma2, eta and heat_scale values must be nonnegative");
  for (const auto* grid : {&knn, &k1, &k2})
    for (int v : *grid)
      if (v < 1) fail("neighbour counts must be positive");
  if (laplacian_knn < 1) fail("laplacian_knn must be positive");
  if (k_min < 2 || k_max < k_min) fail("k range must satisfy 2 <= k_min <= k_max");
  if (trials < 2) fail("trials must be at least 2");
  if (threads < 0) fail("threads must be nonnegative");
  if (!(ridge >= 0.0)) fail("ridge must be nonnegative");
  try {
    SplitPlan{0, train_ratio, paired_ratio, labeled_ratio}.validate();
  } catch (const Error& e) {
    fail(e.what());
  }
  if (output.empty()) fail("output is empty");
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  auto doubles = [](std::vector<double>& dst) -> Setter {
    return [&dst](const std::string& k, const std::string& v) {
      dst.clear();
      for (const auto& s : split_list(v)) dst.push_back(to_double(k, s));
    };
  };
  auto ints = [](std::vector<int>& dst) -> Setter {
    return [&dst](const std::string& k, const std::string& v) {
      dst.clear();
      for (const auto& s : split_list(v)) dst.push_back(static_cast<int>(to_int(k, s)));
    };
  };
  const std::map<std::string, Setter> setters = {
      {"dataset", [&](auto&, auto& v) { c.dataset = v; }},
      {"mfeat_dir", [&](auto&, auto& v) { c.mfeat_dir = v; }},
      {"csv_views", [&](auto&, auto& v) { c.csv_views = split_list(v); }},
      {"csv_labels", [&](auto&, auto& v) { c.csv_labels = v; }},
      {"standardize", [&](auto& k, auto& v) { c.standardize = to_bool(k, v); }},
      {"pairs",
       [&](auto& k, auto& v) {
         c.pairs.clear();
         if (v == "all") return;
         for (const auto& item : split_list(v)) {
           const auto dash = item.find('-');
           if (dash == std::string::npos || dash == 0 || dash + 1 == item.size()) bad(k, v, "pairs look like a-b");
           c.pairs.emplace_back(item.substr(0, dash), item.substr(dash + 1));
         }
       }},
      {"families",
       [&](auto& k, auto& v) {
         c.families.clear();
         for (const auto& s : split_list(v)) {
           try {
             c.families.push_back(family_from_string(s));
           } catch (const Error&) {
             bad(k, v, "unknown family " + s);
           }
         }
       }},
      {"graphs",
       [&](auto& k, auto& v) {
         c.graphs.clear();
         for (const auto& s : split_list(v)) {
           try {
             c.graphs.push_back(graph_kind_from_string(s));
           } catch (const Error&) {
             bad(k, v, "unknown graph " + s);
           }
         }
       }},
      {"gamma", doubles(c.gamma)},
      {"gamma2", doubles(c.gamma2)},
      {"eta", doubles(c.eta)},
      {"heat_scale", doubles(c.heat_scale)},
      {"knn", ints(c.knn)},
      {"k1", ints(c.k1)},
      {"k2", ints(c.k2)},
      {"laplacian_knn", [&](auto& k, auto& v) { c.laplacian_knn = static_cast<int>(to_int(k, v)); }},
      {"k_min", [&](auto& k, auto& v) { c.k_min = static_cast<int>(to_int(k, v)); }},
      {"k_max", [&](auto& k, auto& v) { c.k_max = static_cast<int>(to_int(k, v)); }},
      {"ridge", [&](auto& k, auto& v) { c.ridge = to_double(k, v); }},
      {"train_ratio", [&](auto& k, auto& v) { c.train_ratio = to_double(k, v); }},
      {"paired_ratio", [&](auto& k, auto& v) { c.paired_ratio = to_double(k, v); }},
      {"labeled_ratio", [&](auto& k, auto& v) { c.labeled_ratio = to_double(k, v); }},
      {"trials", [&](auto& k, auto& v) { c.trials = static_cast<int>(to_int(k, v)); }},
      {"seed_base", [&](auto& k, auto& v) { c.seed_base = static_cast<std::uint64_t>(to_int(k, v)); }},
      {"tested_view",
       [&](auto& k, auto& v) {
         try {
           c.tested_view = tested_view_from_string(v);
         } catch (const Error&) {
           bad(k, v, "expected concat, view1 or view2");
         }
       }},
      {"nnc_training", [&](auto&, auto& v) { c.nnc_training = nnc_training_from_string(v); }},
      {"threads", [&](auto& k, auto& v) { c.threads = static_cast<int>(to_int(k, v)); }},
      {"output", [&](auto&, auto& v) { c.output = v; }},
  };

  // Unset grids fall back to the defaults; an explicitly empty value stays empty.
  const ExperimentConfig d = ExperimentConfig::defaults();
  c.families = d.families;
  c.graphs = d.graphs;
  c.gamma = d.gamma;
  c.gamma2 = d.gamma2;
  c.eta = d.eta;
  c.heat_scale = d.heat_scale;
  c.knn = d.knn;
  c.k1 = d.k1;
  c.k2 = d.k2;

  std::istringstream in(text);
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::ConfigError, "line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) {
      throw Error(ErrorKind::ConfigError, "line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    it->second(key, value);
  }
  c.validate();
  return c;
}

std::string serialize_config(const ExperimentConfig& c) {
  auto num = [](double v) { return fmt(v); };
  auto integer = [](int v) { return std::to_string(v); };
  std::ostringstream out;
  out << "dataset = " << c.dataset << '\n';
  if (!c.mfeat_dir.empty()) out << "mfeat_dir = " << c.mfeat_dir << '\n';
  if (!c.csv_views.empty()) out << "csv_views = " << join(c.csv_views, [](const std::string& s) { return s; }) << '\n';
  if (!c.csv_labels.empty()) out << "csv_labels = " << c.csv_labels << '\n';
  out << "standardize = " << (c.standardize ? "true" : "false") << '\n';
  out << "pairs = "
      << (c.pairs.empty() ? std::string("all")
                          : join(c.pairs, [](const auto& p) { return p.first + "-" + p.second; }))
      << '\n';
  out << "families = " << join(c.families, [](Family f) { return std::string(to_string(f)); }) << '\n';
  out << "graphs = " << join(c.graphs, [](GraphKind g) { return std::string(to_string(g)); }) << '\n';
  out << "gamma = " << join(c.gamma, num) << '\n';
  out << "gamma2 = " << join(c.gamma2, num) << '\n';
  out << "eta = " << join(c.eta, num) << '\n';
  out << "heat_scale = " << join(c.heat_scale, num) << '\n';
  out << "knn = " << join(c.knn, integer) << '\n';
  out << "k1 = " << join(c.k1, integer) << '\n';
  out << "k2 = " << join(c.k2, integer) << '\n';
  out << "laplacian_knn = " << c.laplacian_knn << '\n';
  out << "k_min = " << c.k_min << '\n';
  out << "k_max = " << c.k_max << '\n';
  out << "ridge = " << fmt(c.ridge) << '\n';
  out << "train_ratio = " << fmt(c.train_ratio) << '\n';
  out << "paired_ratio = " << fmt(c.paired_ratio) << '\n';
  out << "labeled_ratio = " << fmt(c.labeled_ratio) << '\n';
  out << "trials = " << c.trials << '\n';
  out << "seed_base = " << c.seed_base << '\n';
  out << "tested_view = " << to_string(c.tested_view) << '\n';
  out << "nnc_training = " << to_string(c.nnc_training) << '\n';
  out << "threads = " << c.threads << '\n';
  out << "output = " << c.output << '\n';
  return out.str();
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingFile, "cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace uspl
