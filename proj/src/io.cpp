#include "uspl/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string_view>

namespace uspl {

namespace {

bool is_sep(char c) { return c == ' ' || c == '\t' || c == ',' || c == '\r'; }

std::vector<double> parse_row(std::string_view line, const std::string& path, std::size_t row) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && is_sep(line[pos])) ++pos;
    if (pos >= line.size()) break;
    std::size_t end = pos;
    while (end < line.size() && !is_sep(line[end])) ++end;
    double v = 0.0;
    const char* first = line.data() + pos;
    const char* last = line.data() + end;
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
      throw Error(ErrorKind::ParseError, path + ": row " + std::to_string(row + 1) + ", column " +
                                             std::to_string(out.size() + 1) + ": '" +
                                             std::string(line.substr(pos, end - pos)) + "' is not a number");
    }
    out.push_back(v);
    pos = end;
  }
  return out;
}

std::string stem(const std::string& path) { return std::filesystem::path(path).stem().string(); }

}  // namespace

std::size_t MultiViewDataset::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return i;
  throw Error(ErrorKind::InvalidParameter, "no view named '" + name + "'");
}

LabeledTwoView MultiViewDataset::pair(const std::string& a, const std::string& b) const {
  return {views[index_of(a)], views[index_of(b)], labels};
}

const std::vector<std::pair<std::string, Eigen::Index>>& mfeat_views() {
  static const std::vector<std::pair<std::string, Eigen::Index>> views = {
      {"fac", 216}, {"fou", 76}, {"kar", 64}, {"mor", 6}, {"pix", 240}, {"zer", 47}};
  return views;
}

DenseMatrix read_delimited(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingFile, "cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t row = 0;
  for (; std::getline(in, line); ++row) {
    std::vector<double> r = parse_row(line, path, row);
    if (r.empty()) continue;
    if (!rows.empty() && r.size() != rows.front().size()) {
      throw Error(ErrorKind::ShapeMismatch, path + ": row " + std::to_string(row + 1) + " has " +
                                                std::to_string(r.size()) + " values, expected " +
                                                std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(r));
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = rows.empty() ? Eigen::Index{0} : static_cast<Eigen::Index>(rows.front().size());
  DenseMatrix m(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

void write_csv(const std::string& path, const DenseMatrix& m) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw Error(ErrorKind::MissingFile, "cannot write " + path);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) std::fprintf(f, j ? ",%.17g" : "%.17g", m(i, j));
    std::fputc('\n', f);
  }
  std::fclose(f);
}

void standardize_features(DenseMatrix& x) {
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    auto row = x.row(r);
    const double mean = row.mean();
    row.array() -= mean;
    const double sd = std::sqrt(row.squaredNorm() / static_cast<double>(std::max<Eigen::Index>(x.cols() - 1, 1)));
    if (sd > 0.0) row /= sd;
  }
}

MultiViewDataset load_mfeat(const std::string& dir, bool standardize) {
  MultiViewDataset ds;
  constexpr Eigen::Index samples = 2000;
  for (const auto& [name, dim] : mfeat_views()) {
    const std::string path = (std::filesystem::path(dir) / ("mfeat-" + name)).string();
    const DenseMatrix m = read_delimited(path);
    if (m.rows() != samples || m.cols() != dim) {
      throw Error(ErrorKind::ShapeMismatch, path + ": expected " + std::to_string(samples) + " x " +
                                                std::to_string(dim) + ", got " + std::to_string(m.rows()) +
                                                " x " + std::to_string(m.cols()));
    }
    ds.names.push_back(name);
    ds.views.push_back(m.transpose());
    if (standardize) standardize_features(ds.views.back());
  }
  for (Eigen::Index r = 0; r < samples; ++r) ds.labels.push_back(static_cast<int>(r / 200));
  return ds;
}

MultiViewDataset load_csv(const std::vector<std::string>& view_paths, const std::string& label_path,
                          bool standardize) {
  MultiViewDataset ds;
  const DenseMatrix y = read_delimited(label_path);
  if (y.cols() != 1) throw Error(ErrorKind::ShapeMismatch, label_path + ": expected one label per row");
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    const double v = y(i, 0);
    if (v != std::floor(v) || v < 0) {
      throw Error(ErrorKind::ParseError, label_path + ": row " + std::to_string(i + 1) +
                                             ": labels must be nonnegative integers");
    }
    ds.labels.push_back(static_cast<int>(v));
  }
  for (const std::string& p : view_paths) {
    const DenseMatrix m = read_delimited(p);
    if (m.rows() != y.rows()) {
      throw Error(ErrorKind::ShapeMismatch, p + ": " + std::to_string(m.rows()) + " rows, labels have " +
                                                std::to_string(y.rows()));
    }
    ds.names.push_back(stem(p));
    ds.views.push_back(m.transpose());
    if (standardize) standardize_features(ds.views.back());
  }
  return ds;
}

}  // namespace uspl
