#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "lindyn/gamma.hpp"
#include "lindyn/spaces.hpp"

using namespace lindyn;

namespace {

SparseVector random_vector(Rng& rng, IndexDomain d, int max_support,
                           std::int64_t index_range) {
  SparseVector v(d);
  const int n = static_cast<int>(rng.uniform_int(0, max_support));
  for (int i = 0; i < n; ++i) {
    std::int64_t idx = rng.uniform_int(d == IndexDomain::Integers ? -index_range : 0,
                                       index_range);
    v.set(idx, Complex(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)));
  }
  return v;
}

// brute-force oracle for the full-plane minimization: dense grid over
// [-2,2]^2 followed by one local refinement
double grid_search_distance(const SparseVector& u, const SparseVector& y,
                            const SpaceSpec& space, Complex* best_gamma) {
  double best = kPosInf;
  Complex bg(0, 0);
  const int N = 201;
  for (int a = 0; a < N; ++a) {
    for (int b = 0; b < N; ++b) {
      const Complex g(-2.0 + 4.0 * a / (N - 1), -2.0 + 4.0 * b / (N - 1));
      const double d = scaled_distance(g, u, y, space);
      if (d < best) {
        best = d;
        bg = g;
      }
    }
  }
  // local refinement around the grid winner
  double step = 4.0 / (N - 1);
  for (int pass = 0; pass < 40; ++pass) {
    bool improved = false;
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        const Complex g = bg + Complex(dx * step, dy * step);
        const double d = scaled_distance(g, u, y, space);
        if (d < best) {
          best = d;
          bg = g;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  if (best_gamma) *best_gamma = bg;
  return best;
}

}  // namespace

TEST_CASE("norms: stated examples") {
  const SpaceSpec l2 = SpaceSpec::lp(2.0);

  SparseVector zero(IndexDomain::NonNegative);
  CHECK(norm(zero, l2) == 0.0);
  CHECK(norm(zero, SpaceSpec::c0()) == 0.0);

  // 3 e0 + 4 e1 in l2(N) has norm 5
  SparseVector v(IndexDomain::NonNegative);
  v.set(0, Complex(3.0, 0.0));
  v.set(1, Complex(4.0, 0.0));
  CHECK(norm(v, l2) == Catch::Approx(5.0).epsilon(1e-14));

  // sum-space norm: ||x|| = 2, |lambda| = 3 gives 5
  DirectSumVector p;
  p.x = SparseVector(IndexDomain::NonNegative);
  p.x.set(7, Complex(2.0, 0.0));
  p.lambda = Complex(0.0, 3.0);
  CHECK(norm(p, SpaceSpec::sum_with_c(l2)) == 5.0);
}

TEST_CASE("norms: axioms on random vectors") {
  Rng rng(42);
  const SpaceSpec spaces[] = {SpaceSpec::lp(1.0), SpaceSpec::lp(2.0),
                              SpaceSpec::lp(3.5), SpaceSpec::c0()};
  for (int trial = 0; trial < 200; ++trial) {
    const SpaceSpec& sp = spaces[rng.uniform_int(0, 3)];
    SparseVector a = random_vector(rng, IndexDomain::NonNegative, 8, 30);
    SparseVector b = random_vector(rng, IndexDomain::NonNegative, 8, 30);
    const double na = norm(a, sp), nb = norm(b, sp);
    // triangle inequality
    const double ns = norm(axpy(Complex(1, 0), a, b), sp);
    CHECK(ns <= na + nb + 1e-12 * (na + nb + 1.0));
    // absolute homogeneity
    const Complex c(rng.uniform(-3, 3), rng.uniform(-3, 3));
    const double nc = norm(a.scaled(c), sp);
    CHECK(nc == Catch::Approx(std::abs(c) * na).margin(1e-12 * (1.0 + na)));
    // definiteness
    CHECK((na == 0.0) == a.empty());
  }
}

TEST_CASE("norms: lp monotone under support restriction") {
  Rng rng(7);
  const SpaceSpec sp = SpaceSpec::lp(2.5);
  for (int trial = 0; trial < 100; ++trial) {
    SparseVector a = random_vector(rng, IndexDomain::NonNegative, 10, 40);
    if (a.empty()) continue;
    SparseVector b(IndexDomain::NonNegative);
    for (const auto& [i, z] : a.entries()) {
      if (rng.uniform01() < 0.5) b.set(i, z);
    }
    CHECK(norm(b, sp) <= norm(a, sp) + 1e-15);
  }
}

TEST_CASE("direct-sum norm additivity is exact") {
  Rng rng(11);
  const SpaceSpec inner = SpaceSpec::lp(2.0);
  const SpaceSpec sum = SpaceSpec::sum_with_c(inner);
  for (int trial = 0; trial < 50; ++trial) {
    DirectSumVector p;
    p.x = random_vector(rng, IndexDomain::NonNegative, 6, 20);
    p.lambda = Complex(rng.uniform(-2, 2), rng.uniform(-2, 2));
    CHECK(norm(p, sum) == norm(p.x, inner) + std::abs(p.lambda));
  }
}

TEST_CASE("axpy: stated examples and pruning") {
  SparseVector e0 = SparseVector::basis(0, IndexDomain::NonNegative);
  SparseVector e1 = SparseVector::basis(1, IndexDomain::NonNegative);
  SparseVector e2 = SparseVector::basis(2, IndexDomain::NonNegative);

  // a = 0 returns y
  SparseVector y = axpy(Complex(0, 0), e0, e1);
  CHECK(y.same_support_and_close(e1, 0.0));

  // exact cancellation leaves the zero vector
  SparseVector me0 = e0.scaled(Complex(-1, 0));
  CHECK(axpy(Complex(1, 0), e0, me0).empty());

  // 2 e1 + e2
  SparseVector r = axpy(Complex(2, 0), e1, e2);
  CHECK(r.at(1) == Complex(2, 0));
  CHECK(r.at(2) == Complex(1, 0));

  // near-cancellation below 1e-30 is pruned
  SparseVector tiny = e0.scaled(Complex(1.0 + 1e-31, 0.0));
  CHECK(axpy(Complex(-1, 0), e0, tiny).empty());
}

TEST_CASE("axpy: domain mismatch is a conformance error") {
  SparseVector a(IndexDomain::NonNegative);
  SparseVector b(IndexDomain::Integers);
  a.set(0, Complex(1, 0));
  b.set(-1, Complex(1, 0));
  CHECK_THROWS_AS(axpy(Complex(1, 0), a, b), Error);
  CHECK_THROWS_AS(norm(b, SpaceSpec::lp(2.0)), Error);
}

TEST_CASE("best_scalar_distance: stated examples") {
  const SpaceSpec l2 = SpaceSpec::lp(2.0);
  SparseVector e0 = SparseVector::basis(0, IndexDomain::NonNegative);

  // u = y = e0 with Gamma = {1}
  auto r1 = best_scalar_distance(e0, e0, l2, GammaSpec::finite({Complex(1, 0)}));
  CHECK(r1.gamma_star == Complex(1, 0));
  CHECK(r1.dist == 0.0);

  // full plane on l2: exact least squares
  auto r2 = best_scalar_distance(e0, e0.scaled(Complex(2, 0)), l2,
                                 GammaSpec::full_plane());
  CHECK(r2.gamma_star.real() == Catch::Approx(2.0).epsilon(1e-14));
  CHECK(r2.dist <= 1e-14);

  // u = e0 + e1, y = e0: gamma* = 1/2, dist = 1/sqrt(2);
  // verified against the dense grid-search oracle
  SparseVector u = e0;
  u.set(1, Complex(1, 0));
  Complex oracle_gamma;
  const double oracle = grid_search_distance(u, e0, l2, &oracle_gamma);
  CHECK(oracle == Catch::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-6));
  CHECK(oracle_gamma.real() == Catch::Approx(0.5).margin(1e-4));
  auto r3 = best_scalar_distance(u, e0, l2, GammaSpec::full_plane());
  CHECK(r3.gamma_star.real() == Catch::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(r3.gamma_star.imag()) < 1e-12);
  CHECK(r3.dist == Catch::Approx(oracle).epsilon(1e-9));
}

TEST_CASE("best_scalar_distance: full-plane least squares is a global min") {
  Rng rng(1234);
  const SpaceSpec l2 = SpaceSpec::lp(2.0);
  SparseVector u = random_vector(rng, IndexDomain::NonNegative, 6, 10);
  u.set(0, Complex(1.0, -0.5));  // ensure nonzero
  SparseVector y = random_vector(rng, IndexDomain::NonNegative, 6, 10);
  auto r = best_scalar_distance(u, y, l2, GammaSpec::full_plane());
  for (int i = 0; i < 100; ++i) {
    const Complex d(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5));
    CHECK(scaled_distance(r.gamma_star + d, u, y, l2) >= r.dist - 1e-12);
  }
}

TEST_CASE("best_scalar_distance: u = 0 and empty Gamma") {
  const SpaceSpec l2 = SpaceSpec::lp(2.0);
  SparseVector zero(IndexDomain::NonNegative);
  SparseVector y = SparseVector::basis(3, IndexDomain::NonNegative,
                                       Complex(0, 2));
  auto r = best_scalar_distance(zero, y, l2, GammaSpec::geometric(Complex(1, 0), 0.5));
  CHECK(r.dist == Catch::Approx(2.0));
  CHECK_THROWS_AS(GammaSpec::finite({}), Error);
}

TEST_CASE("best_scalar_distance: grid path on non-l2 spaces") {
  // same minimizer story on l1, judged against the oracle
  const SpaceSpec l1 = SpaceSpec::lp(1.0);
  SparseVector u(IndexDomain::NonNegative);
  u.set(0, Complex(1, 0));
  u.set(1, Complex(0.5, 0.5));
  SparseVector y(IndexDomain::NonNegative);
  y.set(0, Complex(0.8, 0.1));
  Complex og;
  const double oracle = grid_search_distance(u, y, l1, &og);
  auto r = best_scalar_distance(u, y, l1, GammaSpec::full_plane());
  // the 64x64 grid with one refinement must come close to the dense oracle
  CHECK(r.dist <= oracle * 1.05 + 1e-9);
  CHECK(r.dist >= oracle - 1e-9);
}

TEST_CASE("sparse vector invariants") {
  SparseVector v(IndexDomain::NonNegative);
  v.set(3, Complex(1, 0));
  v.set(3, Complex(0, 0));  // setting zero erases
  CHECK(v.empty());
  CHECK_THROWS_AS(v.set(-1, Complex(1, 0)), Error);
  CHECK_THROWS_AS(v.set(1, Complex(std::nan(""), 0)), Error);
}
