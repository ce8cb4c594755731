#include "uspl/models.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <string>

namespace uspl {

namespace {

constexpr std::array<std::pair<Family, std::string_view>, 11> kFamilies{{
    {Family::CCA, "CCA"},
    {Family::SemiCCA, "SemiCCA"},
    {Family::USemiCCA, "USemiCCA"},
    {Family::SemiCCALR, "SemiCCALR"},
    {Family::USemiCCALR, "USemiCCALR"},
    {Family::SCCA, "SCCA"},
    {Family::USCCA, "USCCA"},
    {Family::S2GCA, "S2GCA"},
    {Family::US2GCA, "US2GCA"},
    {Family::S2CCALR, "S2CCALR"},
    {Family::US2CCALR, "US2CCALR"},
}};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

// Centered second moment (1/cols) X H Y^T.
DenseMatrix centered_product(const DenseMatrix& x, const DenseMatrix& y) {
  const double inv = 1.0 / static_cast<double>(x.cols());
  const DenseMatrix xc = x.colwise() - x.rowwise().mean();
  const DenseMatrix yc = y.colwise() - y.rowwise().mean();
  return inv * xc * yc.transpose();
}

DenseMatrix block2(const DenseMatrix& a, const DenseMatrix& b, const DenseMatrix& c,
                   const DenseMatrix& d) {
  DenseMatrix out(a.rows() + c.rows(), a.cols() + b.cols());
  out << a, b, c, d;
  return out;
}

DenseMatrix labeled_columns(const TwoViewData& data, int s) {
  const LabelSet& labels = *data.labels(s);
  const DenseMatrix& x = data.view(s);
  DenseMatrix out(x.rows(), labels.size());
  for (Eigen::Index i = 0; i < labels.size(); ++i) out.col(i) = x.col(labels.indices[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace

void TwoViewData::validate() const {
  if (view1_all.cols() == 0 || view2_all.cols() == 0 || view1_all.rows() == 0 ||
      view2_all.rows() == 0) {
    throw Error(ErrorKind::DimensionMismatch, "empty view");
  }
  if (paired_count < 0 || paired_count > std::min(view1_all.cols(), view2_all.cols())) {
    throw Error(ErrorKind::DimensionMismatch, "paired_count exceeds a view's sample count");
  }
  for (int s : {1, 2}) {
    const auto& labels = this->labels(s);
    if (!labels) continue;
    if (labels->indices.size() != labels->classes.size()) {
      throw Error(ErrorKind::DimensionMismatch, "label indices and classes differ in length");
    }
    for (Eigen::Index idx : labels->indices) {
      if (idx < 0 || idx >= view(s).cols()) {
        throw Error(ErrorKind::DimensionMismatch,
                    "label index " + std::to_string(idx) + " outside view " + std::to_string(s));
      }
    }
    for (int c : labels->classes) {
      if (c < 0) throw Error(ErrorKind::InvalidParameter, "negative class id");
    }
  }
}

std::string_view to_string(Family f) {
  for (const auto& [family, name] : kFamilies)
    if (family == f) return name;
  return "?";
}

Family family_from_string(std::string_view name) {
  for (const auto& [family, n] : kFamilies)
    if (iequals(n, name)) return family;
  throw Error(ErrorKind::BadFamily, "unknown model family '" + std::string(name) + "'");
}

bool is_uncorrelated(Family f) {
  switch (f) {
    case Family::USemiCCA:
    case Family::USemiCCALR:
    case Family::USCCA:
    case Family::US2GCA:
    case Family::US2CCALR:
      return true;
    default:
      return false;
  }
}

bool is_supervised(Family f) {
  switch (f) {
    case Family::SCCA:
    case Family::USCCA:
    case Family::S2GCA:
    case Family::US2GCA:
    case Family::S2CCALR:
    case Family::US2CCALR:
      return true;
    default:
      return false;
  }
}

bool uses_laplacian(Family f) {
  switch (f) {
    case Family::SemiCCALR:
    case Family::USemiCCALR:
    case Family::S2CCALR:
    case Family::US2CCALR:
      return true;
    default:
      return false;
  }
}

std::string_view to_string(GraphKind g) {
  switch (g) {
    case GraphKind::LDA:
      return "lda";
    case GraphKind::LFDA:
      return "lfda";
    case GraphKind::MFA:
      return "mfa";
  }
  return "?";
}

GraphKind graph_kind_from_string(std::string_view name) {
  for (GraphKind g : {GraphKind::LDA, GraphKind::LFDA, GraphKind::MFA})
    if (iequals(to_string(g), name)) return g;
  throw Error(ErrorKind::InvalidParameter, "unknown graph kind '" + std::string(name) + "'");
}

void ModelSpec::validate() const {
  if (k < 1) throw Error(ErrorKind::InvalidK, "k must be at least 1");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw Error(ErrorKind::InvalidParameter, "gamma outside [0, 1]");
  if (!(gamma1 >= 0.0) || !(gamma2 >= 0.0) || !(eta >= 0.0) || !(ridge >= 0.0)) {
    throw Error(ErrorKind::InvalidParameter, "gamma1, gamma2, eta and ridge must be nonnegative");
  }
  if (family == Family::USCCA && !(eta > 0.0)) {
    throw Error(ErrorKind::InvalidParameter, "USCCA needs eta > 0 (its constraint is eta S_w)");
  }
  if ((is_supervised(family) || uses_laplacian(family)) && !graph) {
    throw Error(ErrorKind::MissingGraph, std::string(to_string(family)) + " needs a graph spec");
  }
}

DenseMatrix cross_covariance(const TwoViewData& data, int s, int t) {
  const Eigen::Index n = data.paired_count;
  if (n < 2) throw Error(ErrorKind::TooFewPaired, "need at least 2 paired samples");
  return centered_product(data.view(s).leftCols(n), data.view(t).leftCols(n));
}

SymMatrix total_covariance(const TwoViewData& data, int s) {
  const DenseMatrix& x = data.view(s);
  if (x.cols() < 2) throw Error(ErrorKind::TooFewSamples, "need at least 2 samples");
  return SymMatrix(centered_product(x, x));
}

ModelBuilder::ModelBuilder(const TwoViewData& data) : data_(data) { data_.validate(); }

const DenseMatrix& ModelBuilder::c12() {
  if (!c12_) c12_ = cross_covariance(data_, 1, 2);
  return *c12_;
}

const SymMatrix& ModelBuilder::paired_cov(int s) {
  auto& slot = paired_[s - 1];
  if (!slot) slot = SymMatrix(cross_covariance(data_, s, s));
  return *slot;
}

const SymMatrix& ModelBuilder::total_cov(int s) {
  auto& slot = total_[s - 1];
  if (!slot) slot = total_covariance(data_, s);
  return *slot;
}

const SymMatrix& ModelBuilder::laplacian_term(int s, int knn, double heat_scale) {
  const auto key = std::tuple(s, knn, heat_scale);
  auto it = laplacian_.find(key);
  if (it == laplacian_.end()) {
    it = laplacian_.emplace(key, laplacian_regularizer(data_, s, knn, heat_scale)).first;
  }
  return it->second;
}

const ScatterPair& ModelBuilder::scatter(int s, const GraphSpec& g) {
  const int knn = g.kind == GraphKind::LDA ? 0 : g.knn;
  const int penalty = g.kind == GraphKind::MFA ? g.knn_penalty : 0;
  const auto key = std::tuple(s, g.kind, knn, penalty);
  auto it = scatter_.find(key);
  if (it != scatter_.end()) return it->second;
  if (!data_.labels(s) || data_.labels(s)->size() == 0) {
    throw Error(ErrorKind::MissingLabels, "view " + std::to_string(s) + " has no labels");
  }
  const DenseMatrix x = labeled_columns(data_, s);
  const std::vector<int>& classes = data_.labels(s)->classes;
  GraphPair graphs;
  switch (g.kind) {
    case GraphKind::LDA:
      graphs = lda_graphs(classes);
      break;
    case GraphKind::LFDA:
      graphs = lfda_graphs(x, classes, g.knn);
      break;
    case GraphKind::MFA:
      graphs = mfa_graphs(x, classes, g.knn, g.knn_penalty);
      break;
  }
  return scatter_.emplace(key, scatter_matrices(x, graphs)).first->second;
}

JointProblem ModelBuilder::build_joint(const ModelSpec& spec) {
  spec.validate();
  if (!is_uncorrelated(spec.family)) {
    throw Error(ErrorKind::BadFamily,
                std::string(to_string(spec.family)) + " is a GEP baseline, not a joint problem");
  }
  const double g = spec.gamma;
  const double eta = spec.eta;
  JointProblem jp;
  std::array<SymMatrix, 2> phi;
  std::array<SymMatrix, 2> psi;
  for (int s : {1, 2}) {
    const Eigen::Index d = data_.view(s).rows();
    const SymMatrix eye = SymMatrix::identity(d);
    SymMatrix& f = phi[static_cast<std::size_t>(s - 1)];
    SymMatrix& p = psi[static_cast<std::size_t>(s - 1)];
    auto regularizer = [&]() {
      const GraphSpec& gs = *spec.graph;
      return spec.gamma1 * eye + spec.gamma2 * laplacian_term(s, gs.laplacian_knn, gs.heat_scale);
    };
    switch (spec.family) {
      case Family::USemiCCA:
        f = (1.0 - g) * total_cov(s);
        p = g * paired_cov(s) + (1.0 - g) * eye;
        break;
      case Family::USemiCCALR:
        f = SymMatrix::zero(d);
        p = paired_cov(s) + regularizer();
        break;
      case Family::USCCA:
        f = eta * scatter(s, *spec.graph).between;
        p = eta * scatter(s, *spec.graph).within;
        break;
      case Family::US2GCA:
        f = eta * scatter(s, *spec.graph).between + (1.0 - g) * total_cov(s);
        p = eta * scatter(s, *spec.graph).within + (1.0 - g) * eye;
        break;
      case Family::US2CCALR:
        f = eta * scatter(s, *spec.graph).between;
        p = eta * scatter(s, *spec.graph).within + regularizer();
        break;
      default:
        break;
    }
    p = p.with_shift(spec.ridge);
  }
  const double cross_weight =
      (spec.family == Family::USemiCCA || spec.family == Family::US2GCA) ? g : 1.0;
  jp.c = cross_weight == 1.0 ? c12() : DenseMatrix(cross_weight * c12());
  jp.a1 = phi[0];
  jp.a2 = phi[1];
  jp.b1 = psi[0];
  jp.b2 = psi[1];
  return jp;
}

GepProblem ModelBuilder::build_gep(const ModelSpec& spec) {
  spec.validate();
  if (is_uncorrelated(spec.family)) {
    throw Error(ErrorKind::BadFamily,
                std::string(to_string(spec.family)) + " is a joint problem, not a GEP baseline");
  }
  const double g = spec.gamma;
  const double eta = spec.eta;
  std::array<SymMatrix, 2> diag_lhs;
  std::array<SymMatrix, 2> diag_rhs;
  double cross_weight = 1.0;
  for (int s : {1, 2}) {
    const Eigen::Index d = data_.view(s).rows();
    const SymMatrix eye = SymMatrix::identity(d);
    SymMatrix& l = diag_lhs[static_cast<std::size_t>(s - 1)];
    SymMatrix& r = diag_rhs[static_cast<std::size_t>(s - 1)];
    auto regularizer = [&]() {
      const GraphSpec& gs = *spec.graph;
      return spec.gamma1 * eye + spec.gamma2 * laplacian_term(s, gs.laplacian_knn, gs.heat_scale);
    };
    auto supervised = [&]() {
      const ScatterPair& sc = scatter(s, *spec.graph);
      return eta * (sc.between - sc.within);
    };
    switch (spec.family) {
      case Family::CCA:
        l = SymMatrix::zero(d);
        r = paired_cov(s);
        break;
      case Family::SemiCCA:
        l = (1.0 - g) * total_cov(s);
        r = g * paired_cov(s) + (1.0 - g) * eye;
        cross_weight = g;
        break;
      case Family::SemiCCALR:
        l = SymMatrix::zero(d);
        r = paired_cov(s) + regularizer();
        break;
      case Family::S2GCA:
        l = supervised() + (1.0 - g) * total_cov(s);
        r = g * paired_cov(s) + (1.0 - g) * eye;
        cross_weight = g;
        break;
      case Family::SCCA:
        l = supervised();
        r = paired_cov(s);
        break;
      case Family::S2CCALR:
        l = supervised();
        r = paired_cov(s) + regularizer();
        break;
      default:
        break;
    }
    r = r.with_shift(spec.ridge);
  }
  const DenseMatrix cross = cross_weight == 1.0 ? c12() : DenseMatrix(cross_weight * c12());
  GepProblem gp;
  gp.lhs = SymMatrix(block2(diag_lhs[0].matrix(), cross, cross.transpose(), diag_lhs[1].matrix()));
  const DenseMatrix z12 = DenseMatrix::Zero(cross.rows(), cross.cols());
  gp.rhs = SymMatrix(block2(diag_rhs[0].matrix(), z12, z12.transpose(), diag_rhs[1].matrix()));
  gp.k = spec.k;
  gp.d1 = data_.view1_all.rows();
  return gp;
}

JointProblem build_joint(const TwoViewData& data, const ModelSpec& spec) {
  return ModelBuilder(data).build_joint(spec);
}

GepProblem build_gep(const TwoViewData& data, const ModelSpec& spec) {
  return ModelBuilder(data).build_gep(spec);
}

ProjectionPair solve_gep(const GepProblem& gp, const JitterPolicy& jitter) {
  const Eigen::Index n = gp.lhs.dim();
  if (gp.rhs.dim() != n || gp.d1 <= 0 || gp.d1 >= n) {
    throw Error(ErrorKind::DimensionMismatch, "GEP blocks disagree");
  }
  if (gp.k < 1 || gp.k > std::min(gp.d1, n - gp.d1)) {
    throw Error(ErrorKind::InvalidK, "k = " + std::to_string(gp.k) + " outside [1, min(d1, d2)]");
  }
  const CholeskyFactor chol = cholesky(gp.rhs, jitter);
  // L^-1 A L^-T = L^-1 (L^-1 A)^T for symmetric A.
  const DenseMatrix half = chol.solve_lower(gp.lhs.matrix());
  const SymMatrix reduced(chol.solve_lower(half.transpose()));
  const SymEig eig = sym_eig(reduced);
  const DenseMatrix p = chol.solve_upper(eig.vectors.leftCols(gp.k));
  ProjectionPair out;
  out.p1 = p.topRows(gp.d1);
  out.p2 = p.bottomRows(n - gp.d1);
  out.per_column_values.assign(eig.values.data(), eig.values.data() + gp.k);
  out.objective = 0.5 * eig.values.head(gp.k).sum();
  return out;
}

}  // namespace uspl
