#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "support/fixtures.hpp"
#include "uspl/runner.hpp"

using namespace uspl;
namespace fs = std::filesystem;

namespace {

struct ScratchCleanup {
  ~ScratchCleanup() {
    std::error_code ec;
    fs::remove_all(fs::temp_directory_path() / ("uspl_test_" + std::to_string(::getpid())), ec);
  }
} cleanup;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("uspl_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::ConfigError;
}

// 60 samples, 3 classes, two views sharing a class signal; written as CSV.
ExperimentConfig csv_fixture(const fs::path& dir) {
  std::mt19937_64 rng(42);
  DenseMatrix a = fixtures::random_matrix(rng, 60, 4);
  DenseMatrix b = fixtures::random_matrix(rng, 60, 3);
  std::string labels;
  for (int i = 0; i < 60; ++i) {
    a(i, 0) += 3.0 * (i % 3);
    b(i, 1) -= 3.0 * (i % 3);
    labels += std::to_string(i % 3) + "\n";
  }
  write_csv((dir / "left.csv").string(), a);
  write_csv((dir / "right.csv").string(), b);
  spit(dir / "labels.csv", labels);
  ExperimentConfig c = ExperimentConfig::defaults();
  c.dataset = "csv";
  c.csv_views = {(dir / "left.csv").string(), (dir / "right.csv").string()};
  c.csv_labels = (dir / "labels.csv").string();
  c.families = {Family::USemiCCA};
  c.gamma = {0.5};
  c.k_min = 2;
  c.k_max = 3;
  c.trials = 2;
  c.paired_ratio = 0.4;
  c.labeled_ratio = 0.4;
  c.threads = 1;
  c.output = (dir / "out").string();
  return c;
}

std::string mfeat_dir() {
  if (const char* env = std::getenv("USPL_MFEAT_DIR")) return env;
  return "/root/data/mfeat";
}

TrialRecord rec(const std::string& pair, Family f, double gamma, Eigen::Index k, std::uint64_t seed, double acc) {
  TrialRecord r;
  r.pair = pair;
  r.result.spec.family = f;
  r.result.spec.gamma = gamma;
  r.result.spec.k = k;
  r.result.k = k;
  r.result.seed = seed;
  r.result.accuracy = acc;
  r.result.objective = 0.25 * static_cast<double>(k);
  return r;
}

}  // namespace

TEST_CASE("load_mfeat") {
  SUBCASE("public distribution") {
    const std::string dir = mfeat_dir();
    if (!fs::exists(fs::path(dir) / "mfeat-fac")) {
      MESSAGE("mfeat not found at " << dir << "; skipped");
      return;
    }
    const MultiViewDataset ds = load_mfeat(dir);
    const std::vector<Eigen::Index> dims{216, 76, 64, 6, 240, 47};
    REQUIRE(ds.views.size() == 6);
    for (std::size_t v = 0; v < 6; ++v) {
      CHECK(ds.views[v].rows() == dims[v]);
      CHECK(ds.views[v].cols() == 2000);
    }
    CHECK(ds.labels[200] == 1);  // row 201
    CHECK(ds.labels[199] == 0);
    CHECK(ds.labels[1999] == 9);
    for (int c = 0; c < 10; ++c) CHECK(std::count(ds.labels.begin(), ds.labels.end(), c) == 200);
  }
  SUBCASE("truncated file names the file") {
    const fs::path dir = scratch("mfeat");
    for (const auto& [name, dim] : mfeat_views()) {
      std::string row;
      for (Eigen::Index j = 0; j < dim; ++j) row += j ? " 1" : "1";
      std::string text;
      const int rows = name == "kar" ? 1999 : 2000;
      for (int i = 0; i < rows; ++i) text += row + "\n";
      spit(dir / ("mfeat-" + name), text);
    }
    try {
      load_mfeat(dir.string());
      FAIL("expected ShapeMismatch");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::ShapeMismatch);
      CHECK(std::string(e.what()).find("mfeat-kar") != std::string::npos);
    }
    fs::remove(dir / "mfeat-zer");
    CHECK(kind_of([&] { load_mfeat(dir.string()); }) == ErrorKind::ShapeMismatch);  // kar still comes first
  }
}

TEST_CASE("csv io") {
  const fs::path dir = scratch("csv");
  SUBCASE("3 x 2 file") {
    spit(dir / "v.csv", "1,2\n3,4\n5,6\n");
    spit(dir / "w.csv", "1\n2\n3\n");
    spit(dir / "y.csv", "0\n1\n0\n");
    const MultiViewDataset ds =
        load_csv({(dir / "v.csv").string(), (dir / "w.csv").string()}, (dir / "y.csv").string());
    CHECK(ds.views[0].rows() == 2);
    CHECK(ds.views[0].cols() == 3);
    CHECK(ds.views[0](1, 2) == 6.0);
    CHECK(ds.names[0] == "v");
    spit(dir / "z.csv", "1\n2\n");
    CHECK(kind_of([&] { load_csv({(dir / "v.csv").string(), (dir / "z.csv").string()}, (dir / "y.csv").string()); }) ==
          ErrorKind::ShapeMismatch);
  }
  SUBCASE("round trip") {
    std::mt19937_64 rng(1);
    DenseMatrix m = fixtures::random_matrix(rng, 7, 5);
    m(0, 0) = 1e-300;
    m(1, 1) = -123456789.123456789;
    write_csv((dir / "m.csv").string(), m);
    CHECK(read_delimited((dir / "m.csv").string()) == m);
  }
  SUBCASE("parse error location") {
    spit(dir / "bad.csv", "1,2\n3,x\n");
    try {
      read_delimited((dir / "bad.csv").string());
      FAIL("expected ParseError");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::ParseError);
      CHECK(std::string(e.what()).find("row 2, column 2") != std::string::npos);
    }
    CHECK(kind_of([&] { read_delimited((dir / "none.csv").string()); }) == ErrorKind::MissingFile);
  }
}

TEST_CASE("config") {
  SUBCASE("defaults") {
    const ExperimentConfig d = ExperimentConfig::defaults();
    CHECK(d.gamma == std::vector<double>{0.01, 0.05, 0.1, 0.5, 0.9, 0.95, 0.99});
    CHECK(d.gamma2 == std::vector<double>{1e-3, 1e-2, 1e-1, 1, 10, 100, 1000});
    CHECK(d.eta == d.gamma2);
    CHECK(d.heat_scale == std::vector<double>{0.25, 0.5, 1, 2, 4});
    CHECK(d.knn == std::vector<int>{3, 5, 7, 10, 20});
    CHECK(d.k_min == 2);
    CHECK(d.k_max == 6);
    CHECK(d.trials == 10);
    CHECK(d.ridge == 1e-6);
    CHECK(parse_config("") == d);
  }
  SUBCASE("round trip") {
    ExperimentConfig c = ExperimentConfig::defaults();
    CHECK(parse_config(serialize_config(c)) == c);
    c.pairs = {{"fac", "fou"}, {"kar", "zer"}};
    c.families = {Family::US2CCALR, Family::CCA};
    c.graphs = {GraphKind::MFA};
    c.gamma = {0.1, 1.0 / 3.0};
    c.heat_scale = {0.1 + 0.2};
    c.tested_view = TestedView::View2;
    c.nnc_training = NncTraining::LabeledOnly;
    c.seed_base = 1000;
    c.standardize = false;
    c.output = "out dir";
    CHECK(parse_config(serialize_config(c)) == c);
  }
  SUBCASE("validation") {
    CHECK(kind_of([] { parse_config("gamma =\n"); }) == ErrorKind::ConfigError);
    CHECK(kind_of([] { parse_config("families =\n"); }) == ErrorKind::ConfigError);
    CHECK(kind_of([] { parse_config("colour = red\n"); }) == ErrorKind::ConfigError);
    CHECK(kind_of([] { parse_config("k_min = 1\n"); }) == ErrorKind::ConfigError);
    CHECK(kind_of([] { parse_config("k_min = 5\nk_max = 4\n"); }) == ErrorKind::ConfigError);
    CHECK(kind_of([] { parse_config("families = PLS\n"); }) == ErrorKind::ConfigError);
    CHECK(kind_of([] { parse_config("trials = x\n"); }) == ErrorKind::ConfigError);
    CHECK(kind_of([] { parse_config("paired_ratio = 0\n"); }) == ErrorKind::ConfigError);
    CHECK(parse_config("families = CCA\ngamma =\n").gamma.empty());  // unused grid may be empty
  }
}

TEST_CASE("records and grids") {
  ExperimentConfig c = ExperimentConfig::defaults();
  CHECK(expand_grid(c, Family::CCA, std::nullopt).size() == 1);
  CHECK(expand_grid(c, Family::USemiCCA, std::nullopt).size() == 7);
  CHECK(expand_grid(c, Family::SemiCCALR, std::nullopt).size() == 35);
  CHECK(expand_grid(c, Family::S2GCA, GraphKind::LDA).size() == 49);
  CHECK(expand_grid(c, Family::US2CCALR, GraphKind::MFA).size() == 7 * 5 * 7 * 25);
  CHECK(expand_grid(c, Family::USCCA, GraphKind::LFDA).size() == 35);
  for (Family f : {Family::CCA, Family::SemiCCALR, Family::US2GCA, Family::S2CCALR}) {
    for (GraphKind g : {GraphKind::LDA, GraphKind::LFDA, GraphKind::MFA}) {
      for (const ModelSpec& s : expand_grid(c, f, g)) {
        CHECK_NOTHROW(s.validate());
        TrialRecord r{"a-b", {0.625, 3, s, 7, TestedView::View1, -1.5}};
        r.result.spec.k = 3;
        const std::string line = format_record(r);
        CHECK(format_record(parse_record(line)) == line);
      }
    }
  }
  CHECK(kind_of([] { parse_record("a\tb"); }) == ErrorKind::ParseError);
}

TEST_CASE("run_experiment") {
  const fs::path dir = scratch("run");
  ExperimentConfig c = csv_fixture(dir);
  const MultiViewDataset data = load_dataset(c);

  SUBCASE("single grid point, two seeds") {
    const RunOutcome out = run_experiment(c, data);
    CHECK(out.complete);
    REQUIRE(out.summary.size() == 1);
    CHECK(out.summary[0].trials == 2);
    CHECK(out.summary[0].pair == "left-right");
    CHECK(fs::exists(fs::path(c.output) / "summary.txt"));
    CHECK(!fs::exists(fs::path(c.output) / "INCOMPLETE"));
    CHECK(read_records(c.output).size() == 4);  // 2 seeds x 2 values of k
  }
  SUBCASE("resume gives the uninterrupted bytes; thread count does not matter") {
    c.families = {Family::CCA, Family::USemiCCA, Family::US2GCA};
    c.eta = {1.0};
    c.graphs = {GraphKind::LDA, GraphKind::LFDA};
    c.knn = {2};
    c.trials = 4;
    run_experiment(c, data);
    const std::string reference = slurp(fs::path(c.output) / "trials.tsv");
    const std::string summary = slurp(fs::path(c.output) / "summary.tsv");

    RunOptions fresh;
    fresh.fresh = true;
    fresh.max_jobs = 1;
    const RunOutcome partial = run_experiment(c, data, fresh);
    CHECK(!partial.complete);
    CHECK(partial.jobs_run == 1);
    CHECK(fs::exists(fs::path(c.output) / "INCOMPLETE"));
    CHECK(!fs::exists(fs::path(c.output) / "trials.tsv"));
    RunOptions more;
    more.max_jobs = 2;
    CHECK(!run_experiment(c, data, more).complete);
    const RunOutcome rest = run_experiment(c, data);
    CHECK(rest.complete);
    CHECK(rest.jobs_run == 1);
    CHECK(slurp(fs::path(c.output) / "trials.tsv") == reference);
    CHECK(slurp(fs::path(c.output) / "summary.tsv") == summary);

    RunOptions threaded;
    threaded.fresh = true;
    threaded.threads = 3;
    run_experiment(c, data, threaded);
    CHECK(slurp(fs::path(c.output) / "trials.tsv") == reference);
  }
  SUBCASE("seed base shifts every seed") {
    RunOptions opts;
    opts.seed_base = 100;
    run_experiment(c, data, opts);
    for (const TrialRecord& r : read_records(c.output)) CHECK(r.result.seed >= 100);
    // Different effective config in the same directory.
    CHECK(kind_of([&] { run_experiment(c, data); }) == ErrorKind::ConfigError);
  }
  SUBCASE("validation happens before any work") {
    c.gamma.clear();
    c.output = (dir / "never").string();
    CHECK(kind_of([&] { run_experiment(c, data); }) == ErrorKind::ConfigError);
    CHECK(!fs::exists(c.output));
    c.gamma = {0.5};
    c.k_max = 4;  // right view has 3 features
    CHECK(kind_of([&] { run_experiment(c, data); }) == ErrorKind::ConfigError);
    CHECK(!fs::exists(c.output));
  }
}

TEST_CASE("report") {
  std::vector<TrialRecord> records;
  // CCA: k=2 and k=3 tie on the mean; the earlier point wins.
  for (std::uint64_t s = 0; s < 2; ++s) {
    records.push_back(rec("a-b", Family::CCA, 1.0, 2, s, s ? 0.7 : 0.5));
    records.push_back(rec("a-b", Family::CCA, 1.0, 3, s, 0.6));
    records.push_back(rec("a-b", Family::USemiCCA, 0.1, 2, s, s ? 0.9 : 0.8));
    records.push_back(rec("a-b", Family::USemiCCA, 0.5, 2, s, 0.875));
    records.push_back(rec("a-b", Family::USemiCCA, 0.5, 3, s, s ? 0.75 : 0.7));
  }
  const auto rows = summarize(records);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].k == 2);
  CHECK(rows[0].mean == doctest::Approx(0.6));
  CHECK(rows[0].stddev == doctest::Approx(0.1414213562));
  CHECK(rows[1].params == "gamma=0.5");
  CHECK(rows[1].mean == doctest::Approx(0.875));

  const auto series = series_by_k(records);
  REQUIRE(series.size() == 2);
  CHECK(series[1].points.size() == 2);
  CHECK(series[1].points[1].second == doctest::Approx(0.725));

  const fs::path golden(USPL_GOLDEN_DIR);
  if (std::getenv("USPL_UPDATE_GOLDEN")) {
    spit(golden / "report_table.txt", render_report(records, "table"));
    spit(golden / "report_records.txt", render_report(records, "records"));
  }
  CHECK(render_report(records, "table") == slurp(golden / "report_table.txt"));
  CHECK(render_report(records, "records") == slurp(golden / "report_records.txt"));

  SUBCASE("five-point series and single method") {
    std::vector<TrialRecord> one;
    for (Eigen::Index k = 2; k <= 6; ++k)
      for (std::uint64_t s = 0; s < 3; ++s) one.push_back(rec("x-y", Family::CCA, 1.0, k, s, 0.1 * static_cast<double>(k)));
    CHECK(summarize(one).size() == 1);
    CHECK(series_by_k(one).front().points.size() == 5);
    CHECK(summarize(one).front().k == 6);
  }
  SUBCASE("missing results") {
    const fs::path dir = scratch("report");
    CHECK(kind_of([&] { read_records(dir.string()); }) == ErrorKind::MissingResults);
    CHECK(kind_of([&] { render_report(records, "html"); }) == ErrorKind::InvalidParameter);
  }
}
