// Hypercyclicity-criterion machinery: the tail-ratio sequence (a_k), witness
// selection for unbounded scalar sets, the three-condition criterion check,
// the explicit construction of a vector whose scaled orbit re-visits every
// target along scheduled index sets, exponential subsequence extraction,
// covers of bounded scalar sets, scalar-set diagnostics, and weight-series
// diagnostics.

#ifndef LINDYN_CRITERION_HPP
#define LINDYN_CRITERION_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lindyn/families.hpp"
#include "lindyn/gamma.hpp"
#include "lindyn/operators.hpp"
#include "lindyn/spaces.hpp"

namespace lindyn {

// ---------------------------------------------------------------------------
// The sequence (a_k): a_0 = 1/2 and a_{k+1} = s_k / (1 + 2^{-(k+1)}) where
// s_k = 1 - a_0 - ... - a_k.  This closed form gives
//     (s_k - a_{k+1}) / a_{k+1} = 2^{-(k+1)}        exactly,
// hence s_k = 2^{-k} a_k and the finite tails obey
//     a_k^{-1} * sum_{n=k+1..K} a_n <= 2^{-k}.
// Everything is tracked in log domain: a_k decays like 2^{-k^2/2} and leaves
// the double range near k = 45.
// ---------------------------------------------------------------------------

class AkTable {
 public:
  AkTable() {
    log_a_.push_back(-std::log(2.0));  // a_0 = 1/2
    log_s_.push_back(-std::log(2.0));  // s_0 = 1/2
  }

  void ensure(std::int64_t k) const {
    while (static_cast<std::int64_t>(log_a_.size()) <= k) {
      const std::int64_t kk = static_cast<std::int64_t>(log_a_.size());
      const double la = log_s_.back() - std::log1p(std::exp2(-double(kk)));
      const double ls = la - double(kk) * std::log(2.0);
      log_a_.push_back(la);
      log_s_.push_back(ls);
    }
  }

  double log_a(std::int64_t k) const {
    ensure(k);
    return log_a_[static_cast<std::size_t>(k)];
  }
  double log_s(std::int64_t k) const {
    ensure(k);
    return log_s_[static_cast<std::size_t>(k)];
  }
  // log of sum_{j >= k} a_j  (= a_k + s_k, since the tail sum telescopes)
  double log_tail_from(std::int64_t k) const {
    return log_add(log_a(k), log_s(k));
  }

 private:
  mutable std::vector<double> log_a_;
  mutable std::vector<double> log_s_;
};

struct AkSequence {
  std::vector<double> log_a;  // a_0 .. a_K
  int K = 0;

  double a(int k) const { return std::exp(log_a[static_cast<std::size_t>(k)]); }
};

inline AkSequence gen_ak_sequence(int K) {
  require(K >= 1 && K <= 500, ErrorKind::InvalidArgument,
          "K out of range [1, 500]");
  AkTable t;
  t.ensure(K);
  AkSequence s;
  s.K = K;
  s.log_a.resize(static_cast<std::size_t>(K) + 1);
  for (int k = 0; k <= K; ++k) s.log_a[static_cast<std::size_t>(k)] = t.log_a(k);
  return s;
}

// ---------------------------------------------------------------------------
// Gamma sequences.  alphas are the chosen elements of Gamma; the criterion
// scalars are gamma_n = alpha_n^{-1} when gammas_are_inverses is set.
// Moduli are kept in log-polar form: witness moduli grow like 2^{k_n^2/2}.
// ---------------------------------------------------------------------------

struct GammaSequence {
  std::vector<LogComplex> alphas;
  bool gammas_are_inverses = true;
  std::vector<std::int64_t> k_indices;   // witness walk only
  std::shared_ptr<AkTable> ak;           // witness walk only

  std::size_t size() const { return alphas.size(); }
  LogComplex gamma(std::size_t n) const {
    return gammas_are_inverses ? alphas[n].inv() : alphas[n];
  }
  double log_gamma_mod(std::size_t n) const {
    return gammas_are_inverses ? -alphas[n].lmod : alphas[n].lmod;
  }
  bool has_ak_majorant() const { return ak != nullptr && !k_indices.empty(); }
  // log of sum_{n >= m} a_{k_n}; valid because (k_n) is strictly increasing
  double log_ak_tail(std::size_t m) const {
    return ak->log_tail_from(k_indices[m]);
  }
};

inline GammaSequence geometric_gamma_sequence(Complex alpha0, double ratio,
                                              std::size_t count) {
  require(std::abs(alpha0) > 0.0 && ratio > 0.0 && ratio < 1.0,
          ErrorKind::InvalidGamma, "geometric sequence needs alpha0 != 0, "
          "ratio in (0,1)");
  GammaSequence g;
  g.gammas_are_inverses = true;
  const double l0 = std::log(std::abs(alpha0));
  const double a0 = std::arg(alpha0);
  const double lr = std::log(ratio);
  g.alphas.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    g.alphas.push_back(LogComplex(l0 + double(n) * lr, a0));
  }
  return g;
}

// Witness selection for an unbounded Gamma.  With v_i = min(w_i, 1), picks
// alpha_n in Gamma and k_0 < k_1 < ... such that, in log domain,
//   1/(a_{k_n} * prod_{i<=Phi(n)} v_i^n)  <  |alpha_n|  <
//   1/(a_{k_{n+1}} * prod_{i<=Phi(n+1)} v_i^{n+1}),          Phi(n) = phi^n(n).
// The products collapse to prefix sums of log v_i, so the walk costs
// O(Phi(N)) regardless of N.
inline GammaSequence select_gamma_witnesses(const GammaSpec& gamma,
                                            const OperatorHandle& op,
                                            std::int64_t N) {
  require(op.kind == OperatorKind::PseudoShift, ErrorKind::InvalidArgument,
          "witness selection targets unilateral pseudo-shifts");
  require(gamma.kind == GammaKind::UNBOUNDED_GEN ||
              gamma.kind == GammaKind::FULL_PLANE,
          ErrorKind::InvalidGamma,
          "witness selection needs an unbounded scalar set");
  require(N >= 0, ErrorKind::InvalidArgument, "N must be >= 0");

  const PseudoShiftSpec& ps = *op.pseudo;

  // prefix sums of log v_i; identically zero when every weight is >= 1
  std::vector<double> sv;
  const bool all_ge_one = ps.weights.all_weights_ge_one();
  const std::int64_t phiN = phi_capital(ps.phi, N + 1);
  require(phiN <= std::int64_t(100000000), ErrorKind::NumericRange,
          "Phi(N) too large for prefix products");
  if (!all_ge_one) {
    sv.resize(static_cast<std::size_t>(phiN) + 1, 0.0);
    CompensatedSum acc;
    for (std::int64_t i = 1; i <= phiN; ++i) {
      acc.add(std::min(0.0, ps.weights.log_w(i)));
      sv[static_cast<std::size_t>(i)] = acc.value();
    }
  }
  auto log_V = [&](std::int64_t n) -> double {
    // log prod_{i <= Phi(n)} v_i^n
    if (all_ge_one || n == 0) return 0.0;
    const std::int64_t ph = phi_capital(ps.phi, n);
    return double(n) * sv[static_cast<std::size_t>(ph)];
  };

  GammaSequence out;
  out.gammas_are_inverses = true;
  out.ak = std::make_shared<AkTable>();
  out.k_indices.reserve(static_cast<std::size_t>(N) + 2);
  out.alphas.reserve(static_cast<std::size_t>(N) + 1);

  const AkTable& ak = *out.ak;
  std::int64_t k = 0;
  out.k_indices.push_back(k);
  const double lbase = gamma.kind == GammaKind::UNBOUNDED_GEN
                           ? std::log(gamma.base)
                           : 0.0;

  for (std::int64_t n = 0; n <= N; ++n) {
    const double log_lower = -(ak.log_a(k) + log_V(n));
    double lalpha;
    if (gamma.kind == GammaKind::UNBOUNDED_GEN) {
      std::int64_t m = static_cast<std::int64_t>(std::floor(log_lower / lbase)) + 1;
      if (m < 0) m = 0;
      while (double(m) * lbase <= log_lower) ++m;
      if (gamma.max_exponent && m > *gamma.max_exponent) {
        fail(ErrorKind::InvalidGamma,
             "unboundedness violated: generator exhausted its modulus range "
             "at n = " + std::to_string(n));
      }
      lalpha = double(m) * lbase;
    } else {
      lalpha = log_lower + std::log(2.0);
    }
    out.alphas.push_back(LogComplex(lalpha, gamma.gen_arg));

    // smallest k' > k with a_{k'} < 1 / (|alpha_n| prod v^{n+1})
    const double bound = -(lalpha + log_V(n + 1));
    std::int64_t k2 = k + 1;
    while (ak.log_a(k2) >= bound) {
      ++k2;
      require(k2 < std::int64_t(5000000), ErrorKind::NumericRange,
              "witness index walk ran away");
    }
    k = k2;
    out.k_indices.push_back(k);
  }

  // re-verify the sandwich strictly, in log domain
  for (std::int64_t n = 0; n <= N; ++n) {
    const double lo = -(ak.log_a(out.k_indices[n]) + log_V(n));
    const double hi = -(ak.log_a(out.k_indices[n + 1]) + log_V(n + 1));
    const double la = out.alphas[static_cast<std::size_t>(n)].lmod;
    require(lo < la && la < hi, ErrorKind::Construction,
            "witness sandwich violated at n = " + std::to_string(n));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Criterion check: for each test vector y,
//   (i)   sum_n ||gamma_n S^n y||                       -> finite tails
//   (ii)  sup_{r>=m} sum_{n<=r-m} ||(g_n/g_r) T^{r-n}y||
//         + sup_{r>=1} sum_{n>=m+r} ||(g_n/g_r) S^{n-r}y||   -> 0 in m
//   (iii) ||T S y - y|| = 0
// evaluated with r truncated at m_max + tail_len and inner tails of length
// tail_len, all in log domain.
// ---------------------------------------------------------------------------

struct CriterionTolerances {
  double tol_i = 1e-6;
  double tol_ii = 1e-3;
  double tol_iii = 1e-9;
};

struct GeometricFit {
  double ratio = 0.0;
  double r2 = 0.0;
  bool valid = false;
};

// Least-squares fit of log(values[m]) ~ a + m*log(ratio) over m in [lo, hi]
// (indices into a curve whose m-th entry corresponds to m = index + base_m).
inline GeometricFit fit_geometric(const std::vector<double>& curve, int base_m,
                                  int lo, int hi) {
  GeometricFit f;
  std::vector<double> xs, ys;
  for (int m = lo; m <= hi; ++m) {
    const int idx = m - base_m;
    if (idx < 0 || idx >= static_cast<int>(curve.size())) continue;
    const double v = curve[static_cast<std::size_t>(idx)];
    if (!(v > 0.0) || !std::isfinite(v)) continue;
    xs.push_back(double(m));
    ys.push_back(std::log(v));
  }
  if (xs.size() < 3) return f;
  const std::size_t n = xs.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return f;
  const double slope = sxy / sxx;
  double ssres = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double pred = my + slope * (xs[i] - mx);
    ssres += (ys[i] - pred) * (ys[i] - pred);
  }
  f.ratio = std::exp(slope);
  f.r2 = 1.0 - ssres / syy;
  f.valid = true;
  return f;
}

struct CriterionVectorReport {
  SparseVector y;
  std::vector<double> cond_i_tail;     // m = 0..m_max
  std::vector<double> cond_ii_first;   // m = 1..m_max
  std::vector<double> cond_ii_second;  // m = 1..m_max
  std::vector<double> cond_ii_curve;   // sum of the two
  double cond_iii_residual = 0.0;
  bool pass_i = false, pass_ii = false, pass_iii = false;
  GeometricFit curve_fit;              // over m in [fit_lo, fit_hi]
};

struct CriterionReport {
  std::vector<CriterionVectorReport> per_vector;
  CriterionTolerances tol;
  int m_max = 0;
  int tail_len = 0;
  int fit_lo = 5, fit_hi = 40;
  bool pass = false;
};

namespace detail {

// log ||T^j y|| and log ||S^j y|| for j = 0..jmax, one incremental trajectory
// per support point.
struct PowerNormTables {
  std::vector<double> logT;        // -inf once the orbit has died
  std::vector<double> logS;
  std::int64_t death_T = 0;        // smallest j with T^j y = 0 (jmax+1 if none)
};

inline PowerNormTables power_norm_tables(const OperatorHandle& op,
                                         const SparseVector& y,
                                         std::int64_t jmax) {
  const SpaceSpec space = op.space();
  PowerNormTables t;
  t.logT.assign(static_cast<std::size_t>(jmax) + 1, kNegInf);
  t.logS.assign(static_cast<std::size_t>(jmax) + 1, kNegInf);
  t.death_T = jmax + 1;

  struct Walker {
    std::int64_t idx;
    double lc;
    bool alive;
  };
  std::vector<Walker> tw, sw;
  std::vector<double> mods;
  for (const auto& [i, z] : y.entries()) {
    tw.push_back({i, std::log(std::abs(z)), true});
    sw.push_back({i, std::log(std::abs(z)), true});
  }
  auto norm_of = [&](const std::vector<Walker>& ws) {
    mods.clear();
    for (const auto& w : ws) {
      if (w.alive) mods.push_back(w.lc);
    }
    if (space.kind == SpaceKind::C0_N) return log_norm_sup(mods);
    return log_norm_p(mods, space.p);
  };

  t.logT[0] = norm_of(tw);
  t.logS[0] = t.logT[0];
  const bool pseudo = op.kind == OperatorKind::PseudoShift;
  bool t_dead = false;
  for (std::int64_t j = 1; j <= jmax; ++j) {
    if (!t_dead) {
      bool any = false;
      for (auto& w : tw) {
        if (!w.alive) continue;
        if (pseudo) {
          const std::int64_t prev = op.pseudo->phi.invert(w.idx);
          if (prev == 0) {
            w.alive = false;
            continue;
          }
          w.lc += op.pseudo->weights.log_w(w.idx);
          w.idx = prev;
        } else {
          w.lc += op.bilateral->weights.log_w(w.idx);
          w.idx -= 1;
        }
        any = true;
      }
      if (any) {
        t.logT[static_cast<std::size_t>(j)] = norm_of(tw);
      } else {
        t_dead = true;
        t.death_T = j;
      }
    }
    for (auto& w : sw) {
      if (pseudo) {
        w.idx = op.pseudo->phi.eval(w.idx);
        w.lc -= op.pseudo->weights.log_w(w.idx);
      } else {
        w.idx += 1;
        w.lc -= op.bilateral->weights.log_w(w.idx);
      }
    }
    t.logS[static_cast<std::size_t>(j)] = norm_of(sw);
  }
  return t;
}

}  // namespace detail

inline CriterionReport check_criterion(const OperatorHandle& op,
                                       const GammaSequence& gseq,
                                       const std::vector<SparseVector>& vectors,
                                       int m_max, int tail_len,
                                       CriterionTolerances tol = {},
                                       int fit_lo = 5, int fit_hi = 40) {
  require(op.kind == OperatorKind::PseudoShift ||
              op.kind == OperatorKind::Bilateral,
          ErrorKind::InvalidArgument, "criterion check needs a shift operator");
  require(m_max >= 1 && tail_len >= 1, ErrorKind::InvalidArgument,
          "m_max and tail_len must be >= 1");
  const int R = m_max + tail_len;
  require(static_cast<int>(gseq.size()) >= 2 * R + 1,
          ErrorKind::TruncationBudget,
          "gamma sequence too short: need 2*(m_max + tail_len) + 1 = " +
              std::to_string(2 * R + 1) + " terms");

  const SpaceSpec space = op.space();
  CriterionReport rep;
  rep.tol = tol;
  rep.m_max = m_max;
  rep.tail_len = tail_len;
  rep.fit_lo = fit_lo;
  rep.fit_hi = std::min(fit_hi, m_max);
  rep.pass = true;

  for (const SparseVector& y : vectors) {
    check_conforms(y, space);
    require(!y.empty(), ErrorKind::InvalidArgument,
            "criterion test vectors must be nonzero");
    if (op.kind == OperatorKind::PseudoShift) {
      require(y.domain() == IndexDomain::NonNegative && y.min_index() >= 1,
              ErrorKind::Conformance,
              "pseudo-shift test vectors live on indices >= 1");
    } else {
      require(y.domain() == IndexDomain::Integers, ErrorKind::Conformance,
              "bilateral test vectors must be Z-indexed");
    }
    CriterionVectorReport vr;
    vr.y = y;

    const auto tables = detail::power_norm_tables(op, y, R);
    auto lg = [&](int n) { return gseq.log_gamma_mod(static_cast<std::size_t>(n)); };

    // (i) tail sums
    vr.cond_i_tail.reserve(static_cast<std::size_t>(m_max) + 1);
    for (int m = 0; m <= m_max; ++m) {
      LogSum s;
      for (int n = m; n <= m + tail_len; ++n) {
        s.add(lg(n) + tables.logS[static_cast<std::size_t>(n)]);
      }
      vr.cond_i_tail.push_back(s.linear());
    }
    vr.pass_i = vr.cond_i_tail.back() <= tol.tol_i;
    for (std::size_t m = 1; m < vr.cond_i_tail.size() && vr.pass_i; ++m) {
      if (vr.cond_i_tail[m] > vr.cond_i_tail[m - 1] * (1.0 + 1e-9) + 1e-300) {
        vr.pass_i = false;
      }
    }

    // (ii) the two sups
    for (int m = 1; m <= m_max; ++m) {
      LogSum bestA;
      for (int r = m; r <= R; ++r) {
        LogSum s;
        for (int n = 0; n <= r - m; ++n) {
          s.add(lg(n) - lg(r) + tables.logT[static_cast<std::size_t>(r - n)]);
        }
        if (s.value() > bestA.value()) bestA = s;
      }
      LogSum bestB;
      for (int r = 1; r <= R; ++r) {
        LogSum s;
        for (int n = m + r; n <= m + r + tail_len; ++n) {
          s.add(lg(n) - lg(r) + tables.logS[static_cast<std::size_t>(n - r)]);
        }
        if (s.value() > bestB.value()) bestB = s;
      }
      const double a = bestA.linear();
      const double b = bestB.linear();
      vr.cond_ii_first.push_back(a);
      vr.cond_ii_second.push_back(b);
      vr.cond_ii_curve.push_back(a + b);
    }
    vr.pass_ii = vr.cond_ii_curve.back() <= tol.tol_ii;

    // (iii) exact right-inverse residual
    const SparseVector tsy = apply_T(op, apply_S(op, y));
    vr.cond_iii_residual = scaled_distance(Complex(1.0, 0.0), tsy, y, space);
    vr.pass_iii = vr.cond_iii_residual < tol.tol_iii;

    vr.curve_fit = fit_geometric(vr.cond_ii_curve, 1, rep.fit_lo, rep.fit_hi);
    rep.pass = rep.pass && vr.pass_i && vr.pass_ii && vr.pass_iii;
    rep.per_vector.push_back(std::move(vr));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Construction of the scheduled vector x = sum_{n in A} gamma_n S^n z_n.
// ---------------------------------------------------------------------------

struct ConstructionOptions {
  double slack_budget = 1e-6;
  std::uint64_t seed = 12345;
  int certificate_draws = 200;
};

struct ConstructionPlan {
  std::vector<int> chosen_k;          // 1-based schedule indices, increasing
  ScheduleFamily schedules;           // the chosen sets, in slot order
  std::vector<SparseVector> dense_seq;
  LogVector x_log;
  SparseVector x;                     // materializable truncation of x_log
  std::int64_t horizon = 0;
  std::vector<double> residuals;        // per target index l = 1..L
  std::vector<double> residual_bounds;  // 2^{3-l} + 2^{-l}
  std::vector<double> residual_tails;   // scalar majorants folded into residuals
  std::vector<std::int64_t> schedule_counts;  // |A_{k_l} cap [1, horizon]|
  double certificate_max_norm = 0.0;  // finite unconditional-convergence witness
  int certificate_draws = 0;
  double slack_budget = 0.0;
};

namespace detail {

struct TermScan {
  double log_sum = kNegInf;   // certified upper bound of the scanned sum
  bool exceeded = false;      // early-exit: sum already above the target
};

// Sum exp(term_log(e)) over the elements of `elems` starting at `begin`,
// walking in one direction.  Stops when the remaining tail is provably
// negligible (term below cutoff and last ratio <= 0.9, tail folded in) or the
// running sum exceeds exp(log_bound).
template <typename TermFn>
TermScan scan_terms(const std::vector<std::int64_t>& elems, std::int64_t begin,
                    int dir, double log_bound, TermFn&& term_log) {
  TermScan r;
  LogSum s;
  double prev = kPosInf;
  const double cutoff = log_bound - 46.0;  // bound * 1e-20
  std::int64_t i = begin;
  while (i >= 0 && i < static_cast<std::int64_t>(elems.size())) {
    const double t = term_log(elems[static_cast<std::size_t>(i)]);
    if (t != kNegInf) {
      s.add(t);
      if (s.value() > log_bound) {
        r.exceeded = true;
        r.log_sum = s.value();
        return r;
      }
      if (t < cutoff && prev != kPosInf && t < prev) {
        const double rho = std::exp(t - prev);
        if (rho <= 0.9) {
          s.add(t + std::log(rho / (1.0 - rho)));  // geometric tail majorant
          break;
        }
      }
      prev = t;
    }
    i += dir;
  }
  r.log_sum = s.value();
  return r;
}

}  // namespace detail

// Picks increasing schedule indices k_1 < ... < k_L such that, for each l,
// the scheduled series and cross terms obey the per-step budgets
//   (head)      sum_{n in A_{k_j}, n >= k_l} ||g_n S^n y_j||        <= 1/(l 2^l)
//   (crosstalk) sup_q sum_{n in A_{k_l}, n != q} ||(g_n/g_q) T^q S^n y_l||
//                                                                   <= 1/2^l
//   (prior)     sup_{q in A_{k_l}} sum_{n in A_{k_j}} (j < l) ...   <= 1/(l 2^l)
//   (inverse)   T^q S^q y_l = y_l exactly,
// then assembles x and verifies the per-target residuals
//   sup_{q in A_{k_l}} || gamma_q^{-1} T^q x - y_l ||.
inline ConstructionPlan construct_hypercyclic_vector(
    const OperatorHandle& op, const GammaSequence& gseq,
    const ScheduleFamily& schedules, const std::vector<SparseVector>& dense_seq,
    int L, std::int64_t horizon, ConstructionOptions opts = {}) {
  require(op.kind == OperatorKind::PseudoShift ||
              op.kind == OperatorKind::Bilateral,
          ErrorKind::InvalidArgument, "construction needs a shift operator");
  require(L >= 1, ErrorKind::InvalidArgument, "L must be >= 1");
  require(!dense_seq.empty(), ErrorKind::InvalidArgument,
          "dense sequence must be nonempty");
  require(horizon >= 100 && horizon <= schedules.horizon,
          ErrorKind::InvalidArgument,
          "horizon must lie in [100, schedule horizon]");
  require(verify_separation(schedules), ErrorKind::InvalidArgument,
          "schedule family fails the separation certificate");
  require(static_cast<std::int64_t>(gseq.size()) > horizon,
          ErrorKind::TruncationBudget,
          "gamma sequence must cover every n <= horizon");

  const SpaceSpec space = op.space();
  const int K = static_cast<int>(schedules.sets.size());

  // resolve the targets y_1..y_L (dense sequence cycled)
  std::vector<SparseVector> targets;
  targets.reserve(static_cast<std::size_t>(L));
  for (int l = 0; l < L; ++l) {
    const SparseVector& y = dense_seq[static_cast<std::size_t>(l) % dense_seq.size()];
    check_conforms(y, space);
    require(!y.empty(), ErrorKind::InvalidArgument, "targets must be nonzero");
    if (op.kind == OperatorKind::PseudoShift) {
      require(y.min_index() >= 1, ErrorKind::Conformance,
              "pseudo-shift targets must be supported on indices >= 1");
    }
    targets.push_back(y);
  }

  // per-target power-norm tables up to the horizon
  std::vector<detail::PowerNormTables> tables;
  std::vector<double> l1norms;
  for (const auto& y : targets) {
    tables.push_back(detail::power_norm_tables(op, y, horizon));
    CompensatedSum s;
    for (const auto& [i, z] : y.entries()) s.add(std::abs(z));
    l1norms.push_back(s.value());
  }

  // schedule elements clipped to [1, horizon]; allQ = union over all sets
  std::vector<std::vector<std::int64_t>> sets(K);
  std::vector<std::int64_t> allq;
  for (int k = 0; k < K; ++k) {
    for (std::int64_t e : schedules.sets[static_cast<std::size_t>(k)].elems) {
      if (e >= 1 && e <= horizon) {
        sets[static_cast<std::size_t>(k)].push_back(e);
        allq.push_back(e);
      }
    }
  }
  std::sort(allq.begin(), allq.end());

  auto lg = [&](std::int64_t n) {
    return gseq.log_gamma_mod(static_cast<std::size_t>(n));
  };

  // head sums: sum_{n in set, n >= thr} ||gamma_n S^n y||  + horizon tail
  auto head_sum = [&](const std::vector<std::int64_t>& set, int yi,
                      std::int64_t thr, double log_bound) -> detail::TermScan {
    const auto& tb = tables[static_cast<std::size_t>(yi)];
    auto it = std::lower_bound(set.begin(), set.end(), thr);
    detail::TermScan r = detail::scan_terms(
        set, it - set.begin(), +1, log_bound, [&](std::int64_t n) {
          return lg(n) + tb.logS[static_cast<std::size_t>(n)];
        });
    if (!r.exceeded && gseq.has_ak_majorant()) {
      // ideal-series tail beyond the horizon:  ||y||_1 * sum_{n>horizon} a_{k_n}
      const double t = std::log(l1norms[static_cast<std::size_t>(yi)]) +
                       gseq.log_ak_tail(static_cast<std::size_t>(horizon) + 1);
      r.log_sum = log_add(r.log_sum, t);
      r.exceeded = r.log_sum > log_bound;
    }
    return r;
  };

  // crosstalk at q against one scheduled set:
  //   sum over n in set, n != q of ||(g_n/g_q) T^q S^n y||
  // using T^q S^n = T^{q-n} (n < q) and S^{n-q} (n > q) exactly.  The n < q
  // side only reaches back to the death index of T on y.
  auto cross_sum_at = [&](std::int64_t q, const std::vector<std::int64_t>& set,
                          int yi, double log_bound) -> detail::TermScan {
    const auto& tb = tables[static_cast<std::size_t>(yi)];
    const double lq = lg(q);
    auto up = std::upper_bound(set.begin(), set.end(), q);
    detail::TermScan hi = detail::scan_terms(
        set, up - set.begin(), +1, log_bound, [&](std::int64_t n) {
          return lg(n) - lq + tb.logS[static_cast<std::size_t>(n - q)];
        });
    if (hi.exceeded) return hi;
    auto lo = std::lower_bound(set.begin(), set.end(), q - tb.death_T + 1);
    auto at = std::lower_bound(set.begin(), set.end(), q);
    detail::TermScan dn;
    {
      LogSum s;
      for (auto it = lo; it != at; ++it) {
        const std::int64_t n = *it;
        if (n == q) continue;
        s.add(lg(n) - lq + tb.logT[static_cast<std::size_t>(q - n)]);
        if (s.value() > log_bound) {
          dn.exceeded = true;
          break;
        }
      }
      dn.log_sum = s.value();
    }
    detail::TermScan r;
    r.log_sum = log_add(hi.log_sum, dn.log_sum);
    r.exceeded = dn.exceeded || r.log_sum > log_bound;
    return r;
  };

  // candidate selection
  std::vector<int> chosen;  // 0-based set indices
  std::string reject_log;
  for (int l = 1; l <= L; ++l) {
    const int yi = l - 1;
    const double log_b_head = std::log(1.0 / (double(l) * std::exp2(double(l))));
    const double log_b_cross = -double(l) * std::log(2.0);
    // inverse exactness: T^q S^q y = y holds identically for these shifts;
    // spot check one application pair in materialized arithmetic.
    {
      const SparseVector tsy = apply_T(op, apply_S(op, targets[yi]));
      const double res =
          scaled_distance(Complex(1.0, 0.0), tsy, targets[yi], space);
      require(res <= std::exp2(-double(l)), ErrorKind::Construction,
              "right-inverse exactness failed for target " + std::to_string(l));
    }
    int pick = -1;
    const int start = chosen.empty() ? 0 : chosen.back() + 1;
    for (int cand = start; cand < K && pick < 0; ++cand) {
      const auto& A = sets[static_cast<std::size_t>(cand)];
      if (A.empty()) {
        reject_log += " [l=" + std::to_string(l) + " k=" +
                      std::to_string(cand + 1) + ": empty within horizon]";
        continue;
      }
      const std::int64_t thr = cand + 1;
      bool ok = true;
      // head bound for every j <= l (j = l uses the candidate set)
      for (int j = 1; j <= l && ok; ++j) {
        const auto& S = (j == l) ? A : sets[static_cast<std::size_t>(chosen[j - 1])];
        auto r = head_sum(S, j - 1, thr, log_b_head);
        if (r.exceeded) {
          ok = false;
          reject_log += " [l=" + std::to_string(l) + " k=" +
                        std::to_string(cand + 1) + ": head bound]";
        }
      }
      // crosstalk bound over every q in the whole family
      for (std::size_t qi = 0; qi < allq.size() && ok; ++qi) {
        auto r = cross_sum_at(allq[qi], A, yi, log_b_cross);
        if (r.exceeded) {
          ok = false;
          reject_log += " [l=" + std::to_string(l) + " k=" +
                        std::to_string(cand + 1) + ": crosstalk bound at q=" +
                        std::to_string(allq[qi]) + "]";
        }
      }
      // prior-target interference: q in candidate, n in earlier sets
      for (int j = 1; j < l && ok; ++j) {
        const auto& S = sets[static_cast<std::size_t>(chosen[j - 1])];
        for (std::int64_t q : A) {
          auto r = cross_sum_at(q, S, j - 1, log_b_head);
          if (r.exceeded) {
            ok = false;
            reject_log += " [l=" + std::to_string(l) + " k=" +
                          std::to_string(cand + 1) + ": prior-target bound]";
            break;
          }
        }
      }
      if (ok) pick = cand;
    }
    if (pick < 0) {
      fail(ErrorKind::Construction,
           "no schedule satisfies the budgets for target " + std::to_string(l) +
               ";" + reject_log);
    }
    chosen.push_back(pick);
  }

  // ---- assembly: x = sum_l sum_{n in A_{k_l}} gamma_n S^n y_l --------------
  ConstructionPlan plan;
  plan.horizon = horizon;
  plan.dense_seq = targets;
  plan.slack_budget = opts.slack_budget;
  for (int c : chosen) plan.chosen_k.push_back(c + 1);

  // merged scheduled indices with their target
  std::vector<std::pair<std::int64_t, int>> sched;  // (n, target index)
  plan.schedules.horizon = horizon;
  for (int l = 0; l < L; ++l) {
    const auto& chosen_set = sets[static_cast<std::size_t>(chosen[l])];
    for (std::int64_t n : chosen_set) {
      sched.emplace_back(n, l);
    }
    plan.schedule_counts.push_back(static_cast<std::int64_t>(chosen_set.size()));
    IndexSet A;
    A.horizon = horizon;
    A.elems = chosen_set;
    plan.schedules.sets.push_back(std::move(A));
    plan.schedules.target_densities.push_back(
        schedules.target_densities[static_cast<std::size_t>(chosen[l])]);
  }
  std::sort(sched.begin(), sched.end());

  std::map<std::int64_t, LogComplexAccumulator> acc;
  LogVector xlog(space.index_domain());
  for (const auto& [n, l] : sched) {
    const LogComplex g = gseq.gamma(static_cast<std::size_t>(n));
    for (const auto& [i, z] : targets[static_cast<std::size_t>(l)].entries()) {
      const BasisImage b = power_basis(op, false, i, n);
      acc[b.index].add(
          g.mul(LogComplex::from_complex(z)).scale_log(b.log_coeff));
    }
  }
  for (const auto& [idx, a] : acc) xlog.set(idx, a.value());
  plan.x_log = xlog;
  plan.x = xlog.materialize_truncated();

  // ---- residuals: sup_{q in A_{k_l}} || g_q^{-1} T^q x - y_l || ------------
  // gamma_q^{-1} T^q x - y_l = sum_{n != q} (g_n/g_q) T^q S^n z_n, since the
  // n = q term reproduces y_l exactly.  Scan n around q; the far tail is
  // majorized geometrically and folded into the reported residual.
  std::vector<std::int64_t> sched_n;
  sched_n.reserve(sched.size());
  for (const auto& [n, l] : sched) sched_n.push_back(n);
  auto target_of = [&](std::int64_t n) {
    const auto it = std::lower_bound(sched.begin(), sched.end(),
                                     std::make_pair(n, -1));
    return it->second;
  };

  plan.residuals.assign(static_cast<std::size_t>(L), 0.0);
  plan.residual_tails.assign(static_cast<std::size_t>(L), 0.0);
  plan.residual_bounds.resize(static_cast<std::size_t>(L));
  for (int l = 0; l < L; ++l) {
    plan.residual_bounds[static_cast<std::size_t>(l)] =
        std::exp2(3.0 - double(l + 1)) + std::exp2(-double(l + 1));
  }

  const double term_cutoff = std::log(1e-20);
  std::int64_t max_death = 0;
  for (const auto& tb : tables) max_death = std::max(max_death, tb.death_T);
  for (int l = 0; l < L; ++l) {
    double worst = 0.0, worst_tail = 0.0;
    for (std::int64_t q : sets[static_cast<std::size_t>(chosen[l])]) {
      const LogComplex gq = gseq.gamma(static_cast<std::size_t>(q));
      std::map<std::int64_t, LogComplexAccumulator> racc;
      double tail = 0.0;
      auto add_terms = [&](std::int64_t begin, int dir) {
        double prev = kPosInf;
        std::int64_t i = begin;
        while (i >= 0 && i < static_cast<std::int64_t>(sched_n.size())) {
          const std::int64_t n = sched_n[static_cast<std::size_t>(i)];
          if (dir < 0 && q - n >= max_death) break;  // T^{q-n} z_n = 0 from here
          const int tl = target_of(n);
          const auto& y = targets[static_cast<std::size_t>(tl)];
          const auto& tb = tables[static_cast<std::size_t>(tl)];
          // norm-level size of this term, for the stopping rule
          const double tsize =
              lg(n) - lg(q) +
              (n > q ? tb.logS[static_cast<std::size_t>(n - q)]
                     : tb.logT[static_cast<std::size_t>(q - n)]);
          if (tsize != kNegInf) {
            for (const auto& [ii, z] : y.entries()) {
              BasisImage b;
              if (n > q) {
                b = power_basis(op, false, ii, n - q);
              } else {
                b = power_basis(op, true, ii, q - n);
                if (!b.alive) continue;
              }
              const LogComplex t = gseq.gamma(static_cast<std::size_t>(n))
                                       .div(gq)
                                       .mul(LogComplex::from_complex(z))
                                       .scale_log(b.log_coeff);
              racc[b.index].add(t);
            }
            if (tsize < term_cutoff && prev != kPosInf && tsize < prev) {
              const double rho = std::exp(tsize - prev);
              if (rho <= 0.9) {
                tail += std::exp(tsize) * rho / (1.0 - rho);
                break;
              }
            }
            prev = tsize;
          }
          i += dir;
        }
      };
      const auto pos = std::lower_bound(sched_n.begin(), sched_n.end(), q);
      add_terms((pos - sched_n.begin()) + 1, +1);
      add_terms((pos - sched_n.begin()) - 1, -1);

      SparseVector rv(space.index_domain());
      for (const auto& [idx, a] : racc) {
        const LogComplex v = a.value();
        if (v.is_zero()) continue;
        require(v.materializable(), ErrorKind::NumericRange,
                "residual term overflow");
        const Complex c = v.to_complex();
        if (std::abs(c) >= kPruneThreshold) rv.set(idx, c);
      }
      const double r = norm(rv, space) + tail;
      if (r > worst) {
        worst = r;
        worst_tail = tail;
      }
    }
    plan.residuals[static_cast<std::size_t>(l)] = worst;
    plan.residual_tails[static_cast<std::size_t>(l)] = worst_tail;
  }

  // ---- finite unconditional-convergence certificate ------------------------
  // max over random finite F subset of [N, horizon] of ||sum_{n in F cap A}
  // gamma_n S^n z_n||, reported with the draw count.
  {
    std::int64_t nmax = 1;
    for (const auto& y : targets) {
      nmax = std::max(nmax, std::abs(y.max_index()));
      nmax = std::max(nmax, std::abs(y.min_index()));
    }
    Rng rng(opts.seed);
    double cert = 0.0;
    for (int d = 0; d < opts.certificate_draws; ++d) {
      const int fsize = static_cast<int>(rng.uniform_int(1, 32));
      std::map<std::int64_t, LogComplexAccumulator> facc;
      for (int t = 0; t < fsize; ++t) {
        const std::int64_t pickpos =
            rng.uniform_int(0, static_cast<std::int64_t>(sched.size()) - 1);
        const auto& [n, l] = sched[static_cast<std::size_t>(pickpos)];
        if (n < nmax) continue;
        const LogComplex g = gseq.gamma(static_cast<std::size_t>(n));
        for (const auto& [i, z] : targets[static_cast<std::size_t>(l)].entries()) {
          const BasisImage b = power_basis(op, false, i, n);
          facc[b.index].add(
              g.mul(LogComplex::from_complex(z)).scale_log(b.log_coeff));
        }
      }
      std::vector<double> lmods;
      for (const auto& [idx, a] : facc) {
        const LogComplex v = a.value();
        if (!v.is_zero()) lmods.push_back(v.lmod);
      }
      const double ln = space.kind == SpaceKind::C0_N
                            ? log_norm_sup(lmods)
                            : log_norm_p(lmods, space.p);
      cert = std::max(cert, std::exp(ln));
    }
    plan.certificate_max_norm = cert;
    plan.certificate_draws = opts.certificate_draws;
  }

  return plan;
}

// ---------------------------------------------------------------------------
// Exponential subsequence extraction: given strictly decreasing moduli whose
// consecutive ratios stay >= delta, greedily pick k_0 = 0 and the smallest
// next index with ratio <= delta; every selected consecutive ratio then lies
// in [delta^2, delta].
// ---------------------------------------------------------------------------

struct ExtractionResult {
  std::vector<std::size_t> indices;
  double delta_used = 0.0;
};

inline ExtractionResult extract_exponential_subsequence(
    const std::vector<double>& moduli, std::optional<double> delta = {}) {
  require(moduli.size() >= 3, ErrorKind::InvalidArgument,
          "need at least 3 moduli");
  for (std::size_t i = 0; i < moduli.size(); ++i) {
    require(moduli[i] > 0.0, ErrorKind::InvalidArgument,
            "moduli must be positive");
    if (i > 0) {
      require(moduli[i] < moduli[i - 1], ErrorKind::InvalidArgument,
              "moduli must be strictly decreasing");
    }
  }
  double d;
  if (delta) {
    d = *delta;
    require(d > 0.0 && d < 1.0, ErrorKind::InvalidArgument,
            "delta must lie in (0,1)");
  } else {
    // sampled limsup proxy: max consecutive ratio over the last third
    d = 0.0;
    for (std::size_t i = moduli.size() - moduli.size() / 3; i < moduli.size();
         ++i) {
      d = std::max(d, moduli[i] / moduli[i - 1]);
    }
    d = std::min(d, 1.0 - 1e-12);
  }
  for (std::size_t i = 1; i < moduli.size(); ++i) {
    const double r = moduli[i] / moduli[i - 1];
    if (r < d * (1.0 - 1e-12)) {
      fail(ErrorKind::HypothesisNotMet,
           "consecutive ratio " + std::to_string(r) + " at index " +
               std::to_string(i) + " falls below delta = " + std::to_string(d));
    }
  }
  ExtractionResult res;
  res.delta_used = d;
  res.indices.push_back(0);
  std::size_t cur = 0;
  for (std::size_t i = 1; i < moduli.size(); ++i) {
    if (moduli[i] / moduli[cur] <= d * (1.0 + 1e-15)) {
      res.indices.push_back(i);
      cur = i;
    }
  }
  return res;
}

inline ExtractionResult extract_exponential_subsequence(
    const std::vector<Complex>& alphas, std::optional<double> delta = {}) {
  std::vector<double> m;
  m.reserve(alphas.size());
  for (const Complex& a : alphas) m.push_back(std::abs(a));
  return extract_exponential_subsequence(m, delta);
}

// ---------------------------------------------------------------------------
// Finite delta-cover of a bounded scalar set with centers inside the set.
// ---------------------------------------------------------------------------

struct CoverCell {
  Complex center;
  double delta = 0.0;
  std::vector<Complex> member_samples;  // discrete kinds only
};

inline std::vector<CoverCell> cover_gamma(const GammaSpec& gamma, double delta) {
  require(delta > 0.0, ErrorKind::InvalidArgument, "delta must be > 0");
  require(gamma.is_bounded(), ErrorKind::NotApplicable,
          "cover requires a bounded scalar set");
  std::vector<CoverCell> cover;
  auto greedy = [&](const std::vector<Complex>& pts) {
    for (const Complex& p : pts) {
      bool placed = false;
      for (auto& c : cover) {
        if (std::abs(p - c.center) < delta) {
          c.member_samples.push_back(p);
          placed = true;
          break;
        }
      }
      if (!placed) {
        cover.push_back(CoverCell{p, delta, {p}});
      }
    }
  };
  switch (gamma.kind) {
    case GammaKind::FINITE:
      greedy(gamma.samples);
      break;
    case GammaKind::GEOMETRIC: {
      // a center of modulus < delta/2 covers the whole accumulation tail
      std::vector<Complex> pts;
      Complex a = gamma.alpha0;
      while (std::abs(a) >= delta / 2.0) {
        pts.push_back(a);
        a *= gamma.ratio;
        require(pts.size() < 100000, ErrorKind::NumericRange,
                "geometric cover enumeration ran away");
      }
      cover.push_back(CoverCell{a, delta, {a}});  // tail center first
      greedy(pts);
      break;
    }
    case GammaKind::ANNULUS: {
      // ring grid with radial pitch 0.7*delta and arc pitch 0.7*delta
      const double pitch = 0.7 * delta;
      const double span = gamma.r_max - gamma.r_min;
      const int nr = std::max(1, static_cast<int>(std::ceil(span / pitch)));
      for (int j = 0; j < nr; ++j) {
        double r = gamma.r_min + (j + 0.5) * span / nr;
        if (nr == 1) r = 0.5 * (gamma.r_min + gamma.r_max);
        const int na =
            std::max(4, static_cast<int>(std::ceil(2.0 * M_PI * r / pitch)));
        for (int t = 0; t < na; ++t) {
          const double th = 2.0 * M_PI * t / na;
          cover.push_back(
              CoverCell{Complex(r * std::cos(th), r * std::sin(th)), delta, {}});
        }
      }
      break;
    }
    default:
      fail(ErrorKind::NotApplicable, "cover requires a bounded scalar set");
  }
  return cover;
}

// ---------------------------------------------------------------------------
// Scalar-set diagnostics: boundedness, distance from zero, and the behaviour
// of decreasing-modulus sequences inside the set (consecutive-ratio limits).
// ---------------------------------------------------------------------------

struct GammaDiagnostics {
  bool bounded = false;
  bool bounded_away_from_zero = false;
  double sup_modulus = 0.0;  // +inf when unbounded
  double inf_modulus = 0.0;  // over nonzero elements / samples
  bool satisfies_condition_i = false;  // nonempty, bounded, away from zero

  bool has_c0_sequence = false;   // a decreasing-to-zero modulus sequence
  double c0_ratio_first = 0.0;    // consecutive-ratio profile of that sequence
  double c0_ratio_last = 0.0;
  bool c0_in_ratio_class = false;  // ratios heading to 0
  bool scalar_set_obstruction = false;  // c0 sequence with ratios bounded below
  double extraction_delta = 0.0;  // witness delta when the obstruction holds
  std::string notes;
};

inline GammaDiagnostics gamma_diagnostics(const GammaSpec& gamma,
                                          int sample_budget = 200) {
  require(sample_budget >= 100, ErrorKind::InvalidArgument,
          "sample budget must be >= 100");
  GammaDiagnostics d;
  switch (gamma.kind) {
    case GammaKind::FINITE: {
      double sup = 0.0, inf = kPosInf;
      std::vector<double> mods;
      for (const Complex& s : gamma.samples) {
        const double m = std::abs(s);
        sup = std::max(sup, m);
        if (m > 0.0) {
          inf = std::min(inf, m);
          mods.push_back(m);
        }
      }
      d.bounded = true;
      d.sup_modulus = sup;
      d.inf_modulus = inf == kPosInf ? 0.0 : inf;
      d.bounded_away_from_zero = !mods.empty();
      d.satisfies_condition_i = d.bounded_away_from_zero;
      // sampled ratio profile of the decreasing arrangement
      std::sort(mods.begin(), mods.end(), std::greater<double>());
      mods.erase(std::unique(mods.begin(), mods.end()), mods.end());
      if (mods.size() >= 3) {
        d.c0_ratio_first = mods[1] / mods[0];
        d.c0_ratio_last = mods.back() / mods[mods.size() - 2];
        d.c0_in_ratio_class =
            d.c0_ratio_last < 0.25 * d.c0_ratio_first || d.c0_ratio_last < 0.01;
        d.notes = "finite sample: ratio profile of the sorted moduli reported";
      }
      break;
    }
    case GammaKind::GEOMETRIC: {
      d.bounded = true;
      d.sup_modulus = std::abs(gamma.alpha0);
      d.inf_modulus = 0.0;  // moduli accumulate at zero
      d.bounded_away_from_zero = false;
      d.satisfies_condition_i = false;
      d.has_c0_sequence = true;
      d.c0_ratio_first = gamma.ratio;
      d.c0_ratio_last = gamma.ratio;
      d.c0_in_ratio_class = false;  // constant ratio > 0
      d.scalar_set_obstruction = true;
      // the extraction lemma applies with delta = ratio: the canonical
      // sequence itself has every consecutive ratio equal to ratio
      std::vector<double> mods;
      double m = std::abs(gamma.alpha0);
      for (int i = 0; i < std::min(sample_budget, 2000); ++i) {
        mods.push_back(m);
        m *= gamma.ratio;
        if (m < 1e-300) break;
      }
      const auto ex = extract_exponential_subsequence(mods, gamma.ratio);
      d.extraction_delta = ex.delta_used;
      d.notes =
          "decreasing sequence with ratio bounded below exists; the set "
          "cannot be a hypercyclic scalar set for density-type families";
      break;
    }
    case GammaKind::ANNULUS:
      d.bounded = true;
      d.sup_modulus = gamma.r_max;
      d.inf_modulus = gamma.r_min;
      d.bounded_away_from_zero = true;
      d.satisfies_condition_i = true;
      d.notes = "no decreasing-to-zero sequence exists in an annulus";
      break;
    case GammaKind::UNBOUNDED_GEN: {
      d.bounded = false;
      d.sup_modulus = kPosInf;
      d.inf_modulus = 1.0;  // base^0
      d.bounded_away_from_zero = true;
      d.satisfies_condition_i = false;
      d.notes = "unbounded generator: boundedness fails";
      break;
    }
    case GammaKind::FULL_PLANE:
      d.bounded = false;
      d.sup_modulus = kPosInf;
      d.inf_modulus = 0.0;
      d.bounded_away_from_zero = false;
      d.satisfies_condition_i = false;
      d.notes = "full plane: unbounded and not bounded away from zero";
      break;
  }
  return d;
}

// ---------------------------------------------------------------------------
// Weight-series diagnostics: partial sums of (1/(w_1...w_n))^p and, for
// bilateral shifts, (w_{-1}...w_n)^p on the negative side.  Classification is
// heuristic and says so.
// ---------------------------------------------------------------------------

enum class SeriesClass { Converging, Diverging, Inconclusive };

inline const char* series_class_name(SeriesClass c) {
  switch (c) {
    case SeriesClass::Converging: return "converging";
    case SeriesClass::Diverging: return "diverging";
    case SeriesClass::Inconclusive: return "inconclusive";
  }
  return "?";
}

struct SeriesSideReport {
  double partial_quarter = 0.0;
  double partial_half = 0.0;
  double partial_full = 0.0;
  double last_term = 0.0;
  double fitted_ratio = 0.0;   // per-step geometric ratio of the terms
  double min_scaled_term = 0.0;  // min of t_n * (n+1) over the tail grid
  SeriesClass cls = SeriesClass::Inconclusive;
};

enum class SeriesSide { Unilateral, Bilateral };

struct SeriesReport {
  SeriesSideReport positive;
  SeriesSideReport negative;  // bilateral only
  SeriesSide side = SeriesSide::Unilateral;
  SeriesClass overall = SeriesClass::Inconclusive;
};

namespace detail {

template <typename LogTermFn>
SeriesSideReport series_scan(std::int64_t N, LogTermFn&& log_term) {
  SeriesSideReport r;
  CompensatedSum sum;
  std::vector<std::pair<double, double>> grid;  // (n, log t_n)
  const int grid_points = 64;
  std::int64_t next_grid = 1;
  int gi = 0;
  double lt = 0.0;
  for (std::int64_t n = 1; n <= N; ++n) {
    lt = log_term(n);
    sum.add(std::exp(lt));
    if (n == next_grid) {
      grid.emplace_back(double(n), lt);
      ++gi;
      next_grid = std::max<std::int64_t>(
          n + 1, static_cast<std::int64_t>(
                     std::pow(double(N), double(gi) / double(grid_points - 1))));
    }
    if (n == N / 4) r.partial_quarter = sum.value();
    if (n == N / 2) r.partial_half = sum.value();
  }
  r.partial_full = sum.value();
  r.last_term = std::exp(lt);

  // geometric fit of log t over the second half of the grid
  std::vector<double> xs, ys;
  for (const auto& [n, l] : grid) {
    if (n >= double(N) / 2.0 && std::isfinite(l)) {
      xs.push_back(n);
      ys.push_back(l);
    }
  }
  double slope = 0.0;
  if (xs.size() >= 3) {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      mx += xs[i];
      my += ys[i];
    }
    mx /= double(xs.size());
    my /= double(xs.size());
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxx += (xs[i] - mx) * (xs[i] - mx);
      sxy += (xs[i] - mx) * (ys[i] - my);
    }
    slope = sxx > 0.0 ? sxy / sxx : 0.0;
  }
  r.fitted_ratio = std::exp(slope);

  double minz = kPosInf;
  for (const auto& [n, l] : grid) {
    if (n >= double(N) / 2.0) minz = std::min(minz, std::exp(l) * (n + 1.0));
  }
  r.min_scaled_term = minz == kPosInf ? 0.0 : minz;

  if (r.fitted_ratio < 0.999) {
    r.cls = SeriesClass::Converging;
  } else if (r.min_scaled_term >= 1e-9) {
    r.cls = SeriesClass::Diverging;
  } else {
    r.cls = SeriesClass::Inconclusive;
  }
  return r;
}

}  // namespace detail

inline SeriesReport weight_series_check(const WeightRule& weights, double p,
                                        SeriesSide side, std::int64_t N) {
  require(N >= 64 && N <= 10000000, ErrorKind::InvalidArgument,
          "N must lie in [64, 1e7]");
  require(p >= 1.0, ErrorKind::InvalidArgument, "p must be >= 1");
  SeriesReport rep;
  rep.side = side;
  {
    // t_n = (1 / (w_1 ... w_n))^p
    CompensatedSum prefix;
    rep.positive = detail::series_scan(N, [&](std::int64_t n) {
      prefix.add(weights.log_w(n));
      return -p * prefix.value();
    });
  }
  if (side == SeriesSide::Bilateral) {
    // t_m = (w_{-1} ... w_{-m})^p   (the negative-side products)
    CompensatedSum prefix;
    rep.negative = detail::series_scan(N, [&](std::int64_t m) {
      prefix.add(weights.log_w(-m));
      return p * prefix.value();
    });
    if (rep.positive.cls == SeriesClass::Converging &&
        rep.negative.cls == SeriesClass::Converging) {
      rep.overall = SeriesClass::Converging;
    } else if (rep.positive.cls == SeriesClass::Diverging ||
               rep.negative.cls == SeriesClass::Diverging) {
      rep.overall = SeriesClass::Diverging;
    } else {
      rep.overall = SeriesClass::Inconclusive;
    }
  } else {
    rep.overall = rep.positive.cls;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Dense-sequence enumeration: finite-support vectors with dyadic-rational
// coordinates, support in [1, B] (N0 spaces) or [-B, B] (Z spaces), ordered
// by (max |support index|, coordinate complexity, lexicographic) and cycled.
// ---------------------------------------------------------------------------

inline std::vector<SparseVector> dense_sequence(int B, int resolution, int L,
                                                IndexDomain domain) {
  require(B >= 1 && B <= 4, ErrorKind::InvalidArgument,
          "dense sequence supports B in [1, 4]");
  require(resolution >= 0 && resolution <= 3, ErrorKind::InvalidArgument,
          "dense sequence resolution in [0, 3]");
  require(L >= 1, ErrorKind::InvalidArgument, "L must be >= 1");

  const std::int64_t M = std::int64_t(1) << resolution;  // numerators in [-M, M]
  const double step = 1.0 / double(M);
  std::vector<std::int64_t> indices;
  if (domain == IndexDomain::NonNegative) {
    for (std::int64_t i = 1; i <= B; ++i) indices.push_back(i);
  } else {
    for (std::int64_t i = -B; i <= B; ++i) indices.push_back(i);
  }

  struct Item {
    SparseVector v;
    std::int64_t max_abs_idx;
    std::int64_t complexity;
    std::vector<std::int64_t> code;
  };
  std::vector<Item> items;
  // enumerate coordinate tuples over the index list
  const std::int64_t per = (2 * M + 1) * (2 * M + 1);
  std::int64_t total = 1;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    total *= per;
    require(total <= 4000000, ErrorKind::InvalidArgument,
            "dense lattice too large; reduce B or resolution");
  }
  for (std::int64_t code = 1; code < total; ++code) {
    Item it;
    it.v = SparseVector(domain);
    std::int64_t c = code;
    it.max_abs_idx = 0;
    it.complexity = 0;
    for (std::size_t i = 0; i < indices.size(); ++i) {
      const std::int64_t cell = c % per;
      c /= per;
      const std::int64_t a = cell % (2 * M + 1) - M;
      const std::int64_t b = cell / (2 * M + 1) - M;
      if (a == 0 && b == 0) continue;
      it.v.set(indices[i], Complex(double(a) * step, double(b) * step));
      it.max_abs_idx = std::max(it.max_abs_idx, std::abs(indices[i]));
      it.complexity += std::abs(a) + std::abs(b);
      it.code.push_back(indices[i]);
      it.code.push_back(-a);  // positive coefficients first within a level
      it.code.push_back(-b);
    }
    if (it.v.empty()) continue;
    items.push_back(std::move(it));
  }
  std::stable_sort(items.begin(), items.end(), [](const Item& x, const Item& y) {
    if (x.max_abs_idx != y.max_abs_idx) return x.max_abs_idx < y.max_abs_idx;
    if (x.complexity != y.complexity) return x.complexity < y.complexity;
    return x.code < y.code;
  });

  std::vector<SparseVector> out;
  out.reserve(static_cast<std::size_t>(L));
  for (int l = 0; l < L; ++l) {
    out.push_back(items[static_cast<std::size_t>(l) % items.size()].v);
  }
  return out;
}

}  // namespace lindyn

#endif  // LINDYN_CRITERION_HPP
