#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "lindyn/operators.hpp"

using namespace lindyn;

namespace {

SparseVector random_pseudo_vector(Rng& rng, int max_support,
                                  std::int64_t index_range) {
  SparseVector v(IndexDomain::NonNegative);
  const int n = static_cast<int>(rng.uniform_int(1, max_support));
  for (int i = 0; i < n; ++i) {
    v.set(rng.uniform_int(1, index_range),
          Complex(rng.uniform(-2, 2), rng.uniform(-2, 2)));
  }
  return v;
}

SparseVector random_bilateral_vector(Rng& rng, int max_support,
                                     std::int64_t index_range) {
  SparseVector v(IndexDomain::Integers);
  const int n = static_cast<int>(rng.uniform_int(1, max_support));
  for (int i = 0; i < n; ++i) {
    v.set(rng.uniform_int(-index_range, index_range),
          Complex(rng.uniform(-2, 2), rng.uniform(-2, 2)));
  }
  return v;
}

// directly coded backward weighted shift on N-indexed vectors:
// (B_v x)_n = v_n x_{n+1} for n >= 1
SparseVector direct_backward_shift(const std::vector<double>& v,
                                   const SparseVector& x) {
  SparseVector out(IndexDomain::NonNegative);
  for (const auto& [i, z] : x.entries()) {
    if (i >= 2 && i - 1 <= static_cast<std::int64_t>(v.size())) {
      out.set(i - 1, v[static_cast<std::size_t>(i - 2)] * z);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("phi specs: validation, evaluation, inversion") {
  PhiSpec aff = PhiSpec::affine(3);
  CHECK(aff.eval(1) == 4);
  CHECK(aff.invert(4) == 1);
  CHECK(aff.invert(3) == 0);  // no preimage

  PhiSpec tab = PhiSpec::with_table({3, 5, 6}, 4);
  CHECK(tab.eval(1) == 3);
  CHECK(tab.eval(2) == 5);
  CHECK(tab.eval(4) == 8);  // tail: n + 4
  CHECK(tab.invert(5) == 2);
  CHECK(tab.invert(4) == 0);
  CHECK(tab.invert(8) == 4);
  CHECK(tab.invert(7) == 0);  // 7 = 3 + 4 collides with the table region

  CHECK_THROWS_AS(PhiSpec::with_table({2, 2}, 1), Error);
  CHECK_THROWS_AS(PhiSpec::with_table({1}, 1), Error);
}

TEST_CASE("phi_iterate: stated examples") {
  PhiSpec p1 = PhiSpec::affine(1);
  CHECK(phi_iterate(p1, 5, 0) == 5);
  CHECK(phi_iterate(p1, 5, 7) == 12);  // phi^m(n) = n + m

  PhiSpec pk = PhiSpec::affine(4);
  // Phi(n) = phi^n(n) = n + n*k
  for (std::int64_t n = 1; n <= 20; ++n) {
    CHECK(phi_capital(pk, n) == n + n * 4);
  }
  CHECK(phi_capital(pk, 0) == 0);

  CHECK_THROWS_AS(phi_iterate(PhiSpec::affine((std::int64_t(1) << 40)), 1,
                              std::int64_t(1) << 30),
                  Error);

  // table iteration matches step-by-step evaluation
  PhiSpec tab = PhiSpec::with_table({4, 6, 7, 9}, 5);
  for (std::int64_t n = 1; n <= 4; ++n) {
    std::int64_t v = n;
    for (int m = 0; m <= 6; ++m) {
      CHECK(phi_iterate(tab, n, m) == v);
      v = tab.eval(v);
    }
  }
}

TEST_CASE("apply_T: pseudo-shift basis action") {
  PseudoShiftSpec s;
  s.phi = PhiSpec::affine(2);
  s.weights = WeightRule::table({2.0, 0.5, 3.0, 1.5}, 1.25);
  s.space = SpaceSpec::lp(2.0);
  s.weight_bound = 3.0;
  OperatorHandle op = OperatorHandle::pseudo_shift(s);

  // T e_{phi(n)} = w_{phi(n)} e_n
  for (std::int64_t n = 1; n <= 6; ++n) {
    const std::int64_t t = s.phi.eval(n);
    SparseVector r = apply_T(op, SparseVector::basis(t, IndexDomain::NonNegative));
    CHECK(r.support_size() == 1);
    CHECK(r.at(n) == Complex(s.weights.w(t), 0));
  }

  // indices outside range(phi) are annihilated: here range = {3, 4, ...}
  CHECK(apply_T(op, SparseVector::basis(1, IndexDomain::NonNegative)).empty());
  CHECK(apply_T(op, SparseVector::basis(2, IndexDomain::NonNegative)).empty());

  // index 0 is outside the operator's coordinate system
  CHECK_THROWS_AS(apply_T(op, SparseVector::basis(0, IndexDomain::NonNegative)),
                  Error);
}

TEST_CASE("backward-shift recovery: phi(n) = n+1 with w = (1, v1, v2, ...)") {
  Rng rng(2024);
  std::vector<double> v;
  for (int i = 0; i < 40; ++i) v.push_back(rng.uniform(0.2, 2.5));
  std::vector<double> w = {1.0};
  w.insert(w.end(), v.begin(), v.end());

  PseudoShiftSpec s;
  s.phi = PhiSpec::affine(1);
  s.weights = WeightRule::table(w, 1.0);
  s.space = SpaceSpec::lp(2.0);
  s.weight_bound = 2.5;
  OperatorHandle op = OperatorHandle::pseudo_shift(s);

  // T e_{m+1} = v_m e_m
  for (std::int64_t m = 1; m <= 10; ++m) {
    SparseVector r =
        apply_T(op, SparseVector::basis(m + 1, IndexDomain::NonNegative));
    CHECK(r.at(m) == Complex(v[static_cast<std::size_t>(m - 1)], 0));
  }

  for (int trial = 0; trial < 1000; ++trial) {
    SparseVector x = random_pseudo_vector(rng, 6, 40);
    SparseVector got = apply_T(op, x);
    SparseVector want = direct_backward_shift(v, x);
    CHECK(got.same_support_and_close(want, 1e-14));
  }
}

TEST_CASE("apply_S: right inverse identities") {
  Rng rng(77);
  OperatorHandle op = make_cor22c(2.0);

  // S e_n = w_{phi(n)}^{-1} e_{phi(n)}
  for (std::int64_t n = 1; n <= 8; ++n) {
    SparseVector r = apply_S(op, SparseVector::basis(n, IndexDomain::NonNegative));
    CHECK(r.support_size() == 1);
    CHECK(std::abs(r.at(n + 1) -
                   Complex(1.0 / op.pseudo->weights.w(n + 1), 0)) < 1e-15);
  }

  // T S y = y for random finite-support y
  for (int trial = 0; trial < 200; ++trial) {
    SparseVector y = random_pseudo_vector(rng, 6, 50);
    SparseVector tsy = apply_T(op, apply_S(op, y));
    const double ny = norm(y, op.space());
    const double err = scaled_distance(Complex(1, 0), tsy, y, op.space());
    CHECK(err <= 1e-12 * (1.0 + ny));
  }

  // bilateral eta-shift: S e_0 = eta^{-1} e_1, and T e_0 = e_{-1}
  OperatorHandle bop = make_prop59(2.0);
  SparseVector se0 = apply_S(bop, SparseVector::basis(0, IndexDomain::Integers));
  CHECK(se0.at(1) == Complex(0.5, 0));
  SparseVector te0 = apply_T(bop, SparseVector::basis(0, IndexDomain::Integers));
  CHECK(te0.at(-1) == Complex(1.0, 0));
  for (int trial = 0; trial < 200; ++trial) {
    SparseVector y = random_bilateral_vector(rng, 6, 30);
    SparseVector tsy = apply_T(bop, apply_S(bop, y));
    CHECK(scaled_distance(Complex(1, 0), tsy, y, bop.space()) <=
          1e-12 * (1.0 + norm(y, bop.space())));
  }
}

TEST_CASE("powers: match repeated application") {
  Rng rng(5150);
  PseudoShiftSpec s;
  s.phi = PhiSpec::with_table({3, 5, 6, 8}, 4);
  s.weights = WeightRule::table({1.5, 0.7, 2.0, 0.9, 1.1, 1.3}, 1.0);
  s.space = SpaceSpec::lp(2.0);
  s.weight_bound = 2.0;
  OperatorHandle op = OperatorHandle::pseudo_shift(s);

  for (int trial = 0; trial < 50; ++trial) {
    SparseVector x = random_pseudo_vector(rng, 4, 25);
    CHECK(apply_T_power(op, x, 0).same_support_and_close(x, 0.0));
    SparseVector it = x;
    for (std::int64_t m = 1; m <= 20; ++m) {
      it = apply_T(op, it);
      SparseVector pw = apply_T_power(op, x, m);
      CHECK(pw.same_support_and_close(it, 1e-12));
    }
    SparseVector is = x;
    for (std::int64_t m = 1; m <= 20; ++m) {
      is = apply_S(op, is);
      SparseVector pw = apply_S_power(op, x, m);
      CHECK(pw.same_support_and_close(is, 1e-12));
    }
  }
}

TEST_CASE("powers: nilpotency, bilateral closed forms, consistency") {
  OperatorHandle op = make_geometric(2.0, SpaceSpec::lp(2.0));
  SparseVector y(IndexDomain::NonNegative);
  y.set(2, Complex(1, 1));
  y.set(5, Complex(-1, 0));
  // m beyond the max support index kills the vector
  CHECK(apply_T_power(op, y, 6).empty());
  CHECK_FALSE(apply_T_power(op, y, 4).empty());

  // bilateral eta-shift: S^m e_0 = eta^{-m} e_m
  OperatorHandle bop = make_prop59(2.0);
  SparseVector e0 = SparseVector::basis(0, IndexDomain::Integers);
  for (std::int64_t m = 1; m <= 30; ++m) {
    SparseVector sm = apply_S_power(bop, e0, m);
    CHECK(sm.support_size() == 1);
    CHECK(std::abs(sm.at(m) - Complex(std::exp2(-double(m)), 0)) <=
          1e-12 * std::exp2(-double(m)));
    // and T^m e_0 stays on the weight-1 side: T^m e_0 = e_{-m}
    SparseVector tm = apply_T_power(bop, e0, m);
    CHECK(tm.at(-m) == Complex(1, 0));
  }

  // T^q S^q y = y on the same support, to 1e-12 relative even at q = 200
  // (the weight products cancel; only the materialization round-trips cost
  // ulps)
  OperatorHandle cexact = make_cor22c(2.0);
  SparseVector yy(IndexDomain::NonNegative);
  yy.set(1, Complex(0.5, -0.25));
  yy.set(4, Complex(-1, 2));
  for (std::int64_t q : {1, 7, 40, 200}) {
    SparseVector r = apply_T_power(cexact, apply_S_power(cexact, yy, q), q);
    CHECK(r.same_support_and_close(yy, 1e-12 * norm(yy, cexact.space())));
  }

  // power consistency: T^{a+b} = T^a T^b
  Rng rng(9);
  OperatorHandle cop = make_cor22c(2.0);
  for (int trial = 0; trial < 30; ++trial) {
    SparseVector x = random_pseudo_vector(rng, 5, 60);
    const std::int64_t a = rng.uniform_int(0, 50);
    const std::int64_t b = rng.uniform_int(0, 50);
    SparseVector lhs = apply_T_power(cop, x, a + b);
    SparseVector rhs = apply_T_power(cop, apply_T_power(cop, x, b), a);
    CHECK(lhs.same_support_and_close(rhs, 1e-12));
    SparseVector ls = apply_S_power(cop, x, a + b);
    SparseVector rs = apply_S_power(cop, apply_S_power(cop, x, b), a);
    CHECK(ls.same_support_and_close(rs, 1e-12));
  }
}

TEST_CASE("linearity and norm bound") {
  Rng rng(314);
  OperatorHandle op = make_cor22c(2.0);
  const SpaceSpec sp = op.space();
  for (int trial = 0; trial < 100; ++trial) {
    SparseVector u = random_pseudo_vector(rng, 5, 30);
    SparseVector v = random_pseudo_vector(rng, 5, 30);
    const Complex a(rng.uniform(-2, 2), rng.uniform(-2, 2));
    const Complex b(rng.uniform(-2, 2), rng.uniform(-2, 2));
    SparseVector lhs = apply_T(op, axpy(a, u, v.scaled(b)));
    SparseVector rhs = axpy(a, apply_T(op, u), apply_T(op, v).scaled(b));
    CHECK(scaled_distance(Complex(1, 0), lhs, rhs, sp) <= 1e-12);
    CHECK(norm(apply_T(op, u), sp) <=
          op.weight_bound() * norm(u, sp) * (1.0 + 1e-12));
  }
}

TEST_CASE("direct sum with the identity coordinate") {
  OperatorHandle inner = make_geometric(2.0, SpaceSpec::lp(2.0));
  OperatorHandle op = OperatorHandle::direct_sum_id(inner);
  CHECK_THROWS_AS(OperatorHandle::direct_sum_id(op), Error);

  DirectSumVector v;
  v.x = SparseVector::basis(3, IndexDomain::NonNegative, Complex(2, 0));
  v.lambda = Complex(0.5, -0.5);
  DirectSumVector tv = apply_T(op, v);
  CHECK(tv.lambda == v.lambda);
  CHECK(tv.x.at(2) == Complex(4, 0));
  DirectSumVector sv = apply_S(op, v);
  CHECK(sv.lambda == v.lambda);
  CHECK(sv.x.at(4) == Complex(1, 0));
  DirectSumVector pw = apply_T_power(op, v, 2);
  CHECK(std::abs(pw.x.at(1) - Complex(8, 0)) <= 8e-14);
  CHECK(pw.lambda == v.lambda);
}

TEST_CASE("preset catalog") {
  // cor22c: w_k = ((k+1)/k)^{1/p}; w_1 = sqrt(2) at p = 2
  OperatorHandle c = make_cor22c(2.0);
  CHECK(c.pseudo->weights.w(1) == Catch::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(c.pseudo->weights.w(3) ==
        Catch::Approx(std::pow(4.0 / 3.0, 0.5)).epsilon(1e-14));

  // prop59: bilateral, w_1 = 2, w_0 = 1, w_{-1} = 1
  OperatorHandle b = make_prop59(2.0);
  CHECK(b.bilateral->weights.w(1) == 2.0);
  CHECK(b.bilateral->weights.w(0) == 1.0);
  CHECK(b.bilateral->weights.w(-1) == 1.0);

  // tu with u_n = 2^{-n}: w = (u_1, u_1, u_2, ...) = (1/2, 1/2, 1/4, ...)
  OperatorHandle t = make_tu(0.5, 0.5, SpaceSpec::lp(2.0));
  CHECK(t.pseudo->weights.w(1) == Catch::Approx(0.5));
  CHECK(t.pseudo->weights.w(2) == Catch::Approx(0.5));
  CHECK(t.pseudo->weights.w(3) == Catch::Approx(0.25));
  CHECK(t.pseudo->weights.w(4) == Catch::Approx(0.125));

  CHECK_THROWS_AS(make_eta_bilateral(1.0), Error);
  CHECK_THROWS_AS(WeightRule::cor22c(0.5), Error);
}

TEST_CASE("weight prefix sums over Z") {
  WeightRule r = WeightRule::eta_step(2.0);
  WeightPrefix wp(r);
  // sum over (a, b] of log w
  CHECK(wp.range_z(0, 3) == Catch::Approx(3.0 * std::log(2.0)));
  CHECK(wp.range_z(-3, 0) == Catch::Approx(0.0));
  CHECK(wp.range_z(-2, 2) == Catch::Approx(2.0 * std::log(2.0)));
  CHECK(wp.range_pos(1, 4) == Catch::Approx(4.0 * std::log(2.0)));
}
