#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "uspl/models.hpp"

namespace uspl {

namespace {

// Neighbour order: smaller squared distance first, ties by smaller index.
std::vector<Eigen::Index> nearest(const DenseMatrix& d2, Eigen::Index i,
                                  const std::vector<Eigen::Index>& candidates, std::size_t count) {
  std::vector<Eigen::Index> order;
  order.reserve(candidates.size());
  for (Eigen::Index j : candidates)
    if (j != i) order.push_back(j);
  count = std::min(count, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count), order.end(),
                    [&](Eigen::Index a, Eigen::Index b) {
                      if (d2(i, a) != d2(i, b)) return d2(i, a) < d2(i, b);
                      return a < b;
                    });
  order.resize(count);
  return order;
}

void check_classes(const std::vector<int>& classes) {
  if (classes.empty()) throw Error(ErrorKind::EmptyClass, "no labeled samples");
  for (int c : classes) {
    if (c < 0) throw Error(ErrorKind::InvalidParameter, "negative class id " + std::to_string(c));
  }
}

std::vector<std::vector<Eigen::Index>> members_by_class(const std::vector<int>& classes) {
  const int c = *std::max_element(classes.begin(), classes.end()) + 1;
  std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(c));
  for (std::size_t i = 0; i < classes.size(); ++i) {
    members[static_cast<std::size_t>(classes[i])].push_back(static_cast<Eigen::Index>(i));
  }
  return members;
}

// exp(-d2 / bandwidth2), where coincident points keep weight 1 even when the
// bandwidth collapses to zero.
double heat(double d2, double bandwidth2) {
  if (d2 == 0.0) return 1.0;
  if (bandwidth2 == 0.0) return 0.0;
  return std::exp(-d2 / bandwidth2);
}

}  // namespace

DenseMatrix pairwise_sq_distances(const DenseMatrix& x) {
  const Eigen::Index n = x.cols();
  DenseMatrix d2 = DenseMatrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double v = (x.col(i) - x.col(j)).squaredNorm();
      d2(i, j) = v;
      d2(j, i) = v;
    }
  }
  return d2;
}

Eigen::SparseMatrix<double> heat_knn_weights(const TwoViewData& data, int s, int knn,
                                             double heat_scale) {
  const DenseMatrix& x = data.view(s);
  const Eigen::Index ns = x.cols();
  if (knn < 1) throw Error(ErrorKind::InvalidParameter, "Laplacian knn must be positive");
  if (ns < knn + 1) {
    throw Error(ErrorKind::TooFewSamples, "view " + std::to_string(s) + " has " +
                                              std::to_string(ns) + " samples, knn = " +
                                              std::to_string(knn));
  }
  const Eigen::Index n = data.paired_count;
  if (n < 2) throw Error(ErrorKind::TooFewPaired, "bandwidth needs at least 2 paired samples");
  if (!(heat_scale > 0.0)) throw Error(ErrorKind::InvalidParameter, "heat_scale must be positive");

  const DenseMatrix d2 = pairwise_sq_distances(x);
  double total = 0.0;
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = j + 1; i < n; ++i) total += std::sqrt(d2(i, j));
  const double mean = total / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
  const double sigma = heat_scale * mean;

  std::vector<Eigen::Index> all(static_cast<std::size_t>(ns));
  std::iota(all.begin(), all.end(), Eigen::Index{0});
  std::vector<char> edge(static_cast<std::size_t>(ns * ns), 0);
  for (Eigen::Index i = 0; i < ns; ++i) {
    for (Eigen::Index j : nearest(d2, i, all, static_cast<std::size_t>(knn))) {
      edge[static_cast<std::size_t>(i * ns + j)] = 1;
      edge[static_cast<std::size_t>(j * ns + i)] = 1;
    }
  }
  std::vector<Eigen::Triplet<double>> triplets;
  for (Eigen::Index j = 0; j < ns; ++j) {
    for (Eigen::Index i = 0; i < ns; ++i) {
      if (!edge[static_cast<std::size_t>(i * ns + j)]) continue;
      if (sigma == 0.0 && d2(i, j) > 0.0) {
        throw Error(ErrorKind::DegenerateBandwidth,
                    "all paired samples of view " + std::to_string(s) + " coincide");
      }
      triplets.emplace_back(i, j, heat(d2(i, j), sigma * sigma));
    }
  }
  Eigen::SparseMatrix<double> w(ns, ns);
  w.setFromTriplets(triplets.begin(), triplets.end());
  return w;
}

SymMatrix heat_knn_laplacian(const TwoViewData& data, int s, int knn, double heat_scale) {
  return graph_laplacian(SymMatrix(DenseMatrix(heat_knn_weights(data, s, knn, heat_scale))));
}

SymMatrix laplacian_regularizer(const TwoViewData& data, int s, int knn, double heat_scale) {
  const Eigen::SparseMatrix<double> w = heat_knn_weights(data, s, knn, heat_scale);
  const DenseMatrix& x = data.view(s);
  const Vector degree = w * Vector::Ones(w.cols());
  const DenseMatrix xw = x * w;
  const DenseMatrix xd = x * degree.asDiagonal();
  return SymMatrix(xd * x.transpose() - xw * x.transpose());
}

SymMatrix graph_laplacian(const SymMatrix& w) {
  DenseMatrix l = -w.matrix();
  l.diagonal() += w.matrix().rowwise().sum();
  return SymMatrix(l);
}

GraphPair lda_graphs(const std::vector<int>& classes, int num_classes) {
  check_classes(classes);
  const auto members = members_by_class(classes);
  const int c = num_classes < 0 ? static_cast<int>(members.size()) : num_classes;
  if (static_cast<int>(members.size()) > c) {
    throw Error(ErrorKind::InvalidParameter, "class id beyond num_classes");
  }
  if (num_classes >= 0) {
    for (int r = 0; r < c; ++r) {
      if (static_cast<std::size_t>(r) >= members.size() || members[static_cast<std::size_t>(r)].empty()) {
        throw Error(ErrorKind::EmptyClass, "class " + std::to_string(r) + " has no labeled sample");
      }
    }
  }
  const auto m = static_cast<Eigen::Index>(classes.size());
  DenseMatrix ww = DenseMatrix::Zero(m, m);
  for (const auto& group : members) {
    const double v = 1.0 / static_cast<double>(group.size());
    for (Eigen::Index i : group)
      for (Eigen::Index j : group) ww(i, j) = v;
  }
  DenseMatrix wb = DenseMatrix::Constant(m, m, 1.0 / static_cast<double>(m)) - ww;
  return {SymMatrix(ww), SymMatrix(wb)};
}

GraphPair lfda_graphs(const DenseMatrix& labeled, const std::vector<int>& classes, int knn) {
  check_classes(classes);
  if (labeled.cols() != static_cast<Eigen::Index>(classes.size())) {
    throw Error(ErrorKind::DimensionMismatch, "labels and labeled samples disagree");
  }
  if (knn < 1) throw Error(ErrorKind::InvalidParameter, "LFDA knn must be positive");
  const auto members = members_by_class(classes);
  const Eigen::Index m = labeled.cols();
  const DenseMatrix d2 = pairwise_sq_distances(labeled);

  // Local scale: distance to the knn-th nearest neighbour within the class.
  Vector sigma = Vector::Zero(m);
  for (const auto& group : members) {
    if (group.size() < 2) continue;
    for (Eigen::Index i : group) {
      const auto nn = nearest(d2, i, group, static_cast<std::size_t>(knn));
      sigma(i) = std::sqrt(d2(i, nn.back()));
    }
  }

  const double inv_m = 1.0 / static_cast<double>(m);
  DenseMatrix ww = DenseMatrix::Zero(m, m);
  DenseMatrix wb = DenseMatrix::Constant(m, m, inv_m);
  for (const auto& group : members) {
    const double inv_mr = 1.0 / static_cast<double>(group.size());
    for (Eigen::Index i : group) {
      for (Eigen::Index j : group) {
        const double a = heat(d2(i, j), sigma(i) * sigma(j));
        ww(i, j) = a * inv_mr;
        wb(i, j) = a * (inv_m - inv_mr);
      }
    }
  }
  return {SymMatrix(ww), SymMatrix(wb)};
}

GraphPair mfa_graphs(const DenseMatrix& labeled, const std::vector<int>& classes, int k1, int k2) {
  check_classes(classes);
  if (labeled.cols() != static_cast<Eigen::Index>(classes.size())) {
    throw Error(ErrorKind::DimensionMismatch, "labels and labeled samples disagree");
  }
  if (k1 < 1 || k2 < 1) throw Error(ErrorKind::InvalidParameter, "MFA k1, k2 must be positive");
  const auto members = members_by_class(classes);
  const Eigen::Index m = labeled.cols();
  const DenseMatrix d2 = pairwise_sq_distances(labeled);

  DenseMatrix ww = DenseMatrix::Zero(m, m);
  for (const auto& group : members) {
    for (Eigen::Index i : group) {
      for (Eigen::Index j : nearest(d2, i, group, static_cast<std::size_t>(k1))) {
        ww(i, j) = 1.0;
        ww(j, i) = 1.0;
      }
    }
  }

  // Marginal graph: for each class, its k2 closest cross-class pairs.
  DenseMatrix wb = DenseMatrix::Zero(m, m);
  for (std::size_t r = 0; r < members.size(); ++r) {
    const auto& group = members[r];
    if (group.empty()) continue;
    std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
    for (Eigen::Index i : group)
      for (Eigen::Index j = 0; j < m; ++j)
        if (classes[static_cast<std::size_t>(j)] != static_cast<int>(r)) pairs.emplace_back(i, j);
    const std::size_t count = std::min(pairs.size(), static_cast<std::size_t>(k2));
    std::partial_sort(pairs.begin(), pairs.begin() + static_cast<std::ptrdiff_t>(count), pairs.end(),
                      [&](const auto& a, const auto& b) {
                        const double da = d2(a.first, a.second);
                        const double db = d2(b.first, b.second);
                        if (da != db) return da < db;
                        return a < b;
                      });
    for (std::size_t p = 0; p < count; ++p) {
      wb(pairs[p].first, pairs[p].second) = 1.0;
      wb(pairs[p].second, pairs[p].first) = 1.0;
    }
  }
  return {SymMatrix(ww), SymMatrix(wb)};
}

ScatterPair scatter_matrices(const DenseMatrix& labeled, const GraphPair& graphs) {
  const Eigen::Index m = labeled.cols();
  if (graphs.within.dim() != m || graphs.between.dim() != m) {
    throw Error(ErrorKind::DimensionMismatch, "graph size differs from labeled sample count");
  }
  if (m == 0) throw Error(ErrorKind::EmptyClass, "no labeled samples");
  const double inv_m = 1.0 / static_cast<double>(m);
  auto scatter = [&](const SymMatrix& w) {
    return SymMatrix(inv_m * labeled * graph_laplacian(w).matrix() * labeled.transpose());
  };
  return {scatter(graphs.within), scatter(graphs.between)};
}

}  // namespace uspl
