#include <doctest.h>

#include <numbers>

#include "support/fixtures.hpp"
#include "uspl/trs.hpp"

using namespace uspl;

namespace {

SymMatrix diag(std::initializer_list<double> v) {
  DenseMatrix m = DenseMatrix::Zero(static_cast<Eigen::Index>(v.size()),
                                    static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) m(i, i) = x, ++i;
  return SymMatrix(m);
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// Maximum over `steps` equally spaced angles of the unit circle.
double circle_grid(const DenseMatrix& a, const Vector& b, int steps) {
  double best = -INFINITY;
  for (int i = 0; i < steps; ++i) {
    const double th = 2.0 * std::numbers::pi * i / steps;
    const Eigen::Vector2d x(std::cos(th), std::sin(th));
    best = std::max(best, x.dot(a * x) + 2.0 * b.dot(x));
  }
  return best;
}

void check_contract(const SymMatrix& a, const Vector& b, const TrsSolution& s) {
  CHECK(std::abs(s.x.norm() - 1.0) <= 1e-10);
  CHECK(trs_kkt_residual(a, b, s) <= 1e-8 * (a.frobenius_norm() + b.norm()));
  CHECK(s.multiplier >= sym_eig(a).values(0) - 1e-8);
  CHECK(std::abs(s.value - trs_objective(a, b, s.x)) <= 1e-10 * (1.0 + std::abs(s.value)));
}

// Banded SPD matrix with random entries.
DenseMatrix banded_spd(std::mt19937_64& rng, Eigen::Index n, int bandwidth) {
  std::normal_distribution<double> nd(0.0, 1.0);
  DenseMatrix m = DenseMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < std::min(n, i + bandwidth + 1); ++j) {
      m(i, j) = m(j, i) = nd(rng);
    }
  }
  m += (m.cwiseAbs().rowwise().sum().maxCoeff() + 0.1) * DenseMatrix::Identity(n, n);
  return m;
}

}  // namespace

TEST_CASE("dense TRS: b = 0 returns the top eigenvector") {
  const SymMatrix a = diag({2, 1});
  const TrsSolution s = solve_trs_dense({a, Vector::Zero(2)});
  CHECK(std::abs(std::abs(s.x(0)) - 1.0) <= 1e-12);
  CHECK(s.value == doctest::Approx(2.0));
  CHECK(s.hard_case);
  check_contract(a, Vector::Zero(2), s);
}

TEST_CASE("dense TRS: linear term only") {
  const SymMatrix a = SymMatrix::zero(2);
  const Vector b = vec({3, 4});
  const TrsSolution s = solve_trs_dense({a, b});
  CHECK(s.x(0) == doctest::Approx(0.6));
  CHECK(s.x(1) == doctest::Approx(0.8));
  CHECK(s.value == doctest::Approx(10.0));
  CHECK(s.multiplier == doctest::Approx(5.0));
  CHECK_FALSE(s.hard_case);
  check_contract(a, b, s);
}

TEST_CASE("dense TRS: hard case against a 1e6-angle grid") {
  const SymMatrix a = diag({1, 0});
  const Vector b = vec({0, 0.5});
  const TrsSolution s = solve_trs_dense({a, b});
  CHECK(s.hard_case);
  CHECK(s.multiplier == doctest::Approx(1.0));
  CHECK(std::abs(std::abs(s.x(0)) - std::sqrt(0.75)) <= 1e-12);
  CHECK(s.x(1) == doctest::Approx(0.5));
  CHECK(s.value == doctest::Approx(1.25));
  const double grid = circle_grid(a.matrix(), b, 1000000);
  CHECK(std::abs(s.value - grid) <= 1e-8);
  check_contract(a, b, s);
}

TEST_CASE("dense TRS: 100 random d = 2 problems against the grid, hard cases included") {
  std::mt19937_64 rng(2024);
  int hard = 0;
  for (int trial = 0; trial < 100; ++trial) {
    DenseMatrix a = fixtures::random_symmetric(rng, 2);
    Vector b = fixtures::random_vector(rng, 2);
    if (trial % 4 == 0) {
      // b orthogonal to the top eigenvector and small enough to stay hard.
      Eigen::SelfAdjointEigenSolver<DenseMatrix> es(a);
      const double gap = es.eigenvalues()(1) - es.eigenvalues()(0);
      b = 0.4 * gap * es.eigenvectors().col(0);
    }
    const SymMatrix sa(a);
    const TrsSolution s = solve_trs_dense({sa, b});
    if (s.hard_case) ++hard;
    const double grid = circle_grid(sa.matrix(), b, 1000000);
    // Grid error is quadratic in the angle step; the grid is a lower bound.
    CHECK(s.value >= grid - 1e-9);
    CHECK(s.value - grid <= 1e-8);
    check_contract(sa, b, s);
  }
  CHECK(hard >= 25);
}

TEST_CASE("TRS global optimality on d in {2, 3} against random search and eigendirections") {
  std::mt19937_64 rng(99);
  for (int d : {2, 3}) {
    for (int trial = 0; trial < 10; ++trial) {
      const SymMatrix a(fixtures::random_symmetric(rng, d));
      const Vector b = fixtures::random_vector(rng, d);
      const TrsSolution s = solve_trs({a, b});
      double search = -INFINITY;
      for (int i = 0; i < 100000; ++i) {
        search = std::max(search, trs_objective(a, b, fixtures::random_unit(rng, d)));
      }
      CHECK(s.value >= search - 1e-9);
      const SymEig e = sym_eig(a);
      for (Eigen::Index i = 0; i < d; ++i) {
        CHECK(s.value >= trs_objective(a, b, e.vectors.col(i)) - 1e-9);
        CHECK(s.value >= trs_objective(a, b, -e.vectors.col(i)) - 1e-9);
      }
    }
  }
}

TEST_CASE("TRS KKT contract and monotone dependence on the scale of b") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index d = 2 + trial % 20;
    const SymMatrix a(fixtures::random_symmetric(rng, d));
    const Vector b = fixtures::random_vector(rng, d);
    double previous = -INFINITY;
    for (double t : {0.0, 0.5, 1.0, 2.0}) {
      const TrsSolution s = solve_trs({a, Vector(t * b)});
      check_contract(a, t * b, s);
      CHECK(s.value >= previous - 1e-12);
      previous = s.value;
    }
  }
}

TEST_CASE("dense TRS matches the bisection oracle") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index d = 3 + trial;
    const DenseMatrix a = fixtures::random_symmetric(rng, d);
    const Vector b = fixtures::random_vector(rng, d);
    const TrsSolution s = solve_trs_dense({SymMatrix(a), b});
    const double oracle = fixtures::trs_bisect_oracle(a, b);
    CHECK(std::abs(s.value - oracle) <= 1e-9 * (1.0 + std::abs(oracle)));
  }
}

TEST_CASE("dense TRS reports dimension mismatch") {
  CHECK_THROWS_AS(solve_trs_dense({SymMatrix::identity(3), Vector::Zero(2)}), Error);
}

TEST_CASE("Lanczos TRS: e1 on diag(2,1,0,...,0) with d = 600") {
  DenseMatrix a = DenseMatrix::Zero(600, 600);
  a(0, 0) = 2.0;
  a(1, 1) = 1.0;
  Vector b = Vector::Zero(600);
  b(0) = 1.0;
  const TrsSolution s = solve_trs_lanczos({SymMatrix(a), b});
  const TrsSolution small =
      solve_trs_dense({diag({2, 1, 0}), vec({1, 0, 0})});
  CHECK(std::abs(s.value - small.value) <= 1e-6);
  CHECK(std::abs(s.multiplier - small.multiplier) <= 1e-6);
}

TEST_CASE("Lanczos TRS: b along the top eigenvector") {
  std::mt19937_64 rng(8);
  const DenseMatrix a = banded_spd(rng, 40, 3);
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(a);
  const Vector b = 0.7 * es.eigenvectors().col(39);
  const SymMatrix sa(a);
  const TrsSolution s = solve_trs_lanczos({sa, b});
  const TrsSolution dense = solve_trs_dense({sa, b});
  CHECK(std::abs(s.value - dense.value) <= 1e-6 * (1.0 + std::abs(dense.value)));
  CHECK(std::abs(std::abs(s.x.dot(b.normalized())) - 1.0) <= 1e-6);
}

TEST_CASE("Lanczos TRS: random banded SPD with d = 800 against the oracle") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 3; ++trial) {
    const DenseMatrix a = banded_spd(rng, 800, 4);
    const Vector b = fixtures::random_vector(rng, 800);
    const SymMatrix sa(a);
    const TrsSolution s = solve_trs_lanczos({sa, b});
    const double oracle = fixtures::trs_bisect_oracle(a, b);
    CHECK(std::abs(s.value - oracle) <= 1e-6 * std::abs(oracle));
    CHECK(trs_kkt_residual(sa, b, s) <= 1e-6 * (sa.frobenius_norm() + b.norm()));
  }
}

TEST_CASE("Lanczos TRS recovers a hard case after breakdown") {
  // b lives in the span of the bottom eigenvectors; Krylov space closes early.
  DenseMatrix a = DenseMatrix::Zero(30, 30);
  for (int i = 0; i < 30; ++i) a(i, i) = (i == 0) ? 5.0 : -1.0 - 0.1 * i;
  Vector b = Vector::Zero(30);
  b(3) = 0.2;
  const SymMatrix sa(a);
  const TrsSolution s = solve_trs_lanczos({sa, b});
  const TrsSolution dense = solve_trs_dense({sa, b});
  CHECK(dense.hard_case);
  CHECK(std::abs(s.value - dense.value) <= 1e-6 * (1.0 + std::abs(dense.value)));
}

TEST_CASE("solve_trs dispatch") {
  std::mt19937_64 rng(4);
  SUBCASE("dim 10 uses the dense path") {
    const SymMatrix a(fixtures::random_symmetric(rng, 10));
    const Vector b = fixtures::random_vector(rng, 10);
    const TrsSolution s = solve_trs({a, b});
    const TrsSolution d = solve_trs_dense({a, b});
    CHECK((s.x - d.x).norm() == 0.0);
    CHECK(s.value == d.value);
  }
  SUBCASE("dim 501 uses the Lanczos path") {
    const SymMatrix a(banded_spd(rng, 501, 2));
    const Vector b = fixtures::random_vector(rng, 501);
    const TrsSolution s = solve_trs({a, b});
    const TrsSolution l = solve_trs_lanczos({a, b}, TrsOptions{}.lanczos_tol);
    CHECK(s.value == doctest::Approx(l.value).epsilon(1e-12));
    CHECK(s.iterations == l.iterations);
  }
  SUBCASE("threshold 5 on dim 10 agrees with dense") {
    const SymMatrix a(fixtures::random_symmetric(rng, 10));
    const Vector b = fixtures::random_vector(rng, 10);
    TrsOptions opts;
    opts.dense_threshold = 5;
    const TrsSolution s = solve_trs({a, b}, opts);
    const TrsSolution d = solve_trs_dense({a, b});
    CHECK(std::abs(s.value - d.value) <= 1e-6);
  }
}
