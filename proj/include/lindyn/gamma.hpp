// Scalar-set representations (finite samples, geometric sequences, unbounded
// modulus generators, annuli, the full plane) and the inner minimization
//   inf_{gamma in Gamma} || gamma * u - y ||
// shared by best_scalar_distance and the orbit hit tests.  The engine works
// on a state view (entries in log-polar form) so the same code runs on
// materialized vectors and on lazily represented orbit iterates; identical
// code is what makes incremental probes and per-step brute force agree
// exactly.

#ifndef LINDYN_GAMMA_HPP
#define LINDYN_GAMMA_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "lindyn/spaces.hpp"

namespace lindyn {

enum class GammaKind { FINITE, GEOMETRIC, UNBOUNDED_GEN, ANNULUS, FULL_PLANE };

// Gamma subset of C.
//  FINITE        explicit nonempty sample list
//  GEOMETRIC     alpha0 * ratio^k, k >= 0, ratio in (0,1)  (moduli decrease to 0)
//  UNBOUNDED_GEN gen_arg-phased modulus grid base^m, m >= 0, base > 1;
//                optionally capped at max_exponent (a generator that can
//                exhaust its range)
//  ANNULUS       { z : r_min <= |z| <= r_max }
//  FULL_PLANE    all of C
struct GammaSpec {
  GammaKind kind = GammaKind::FULL_PLANE;
  std::vector<Complex> samples;
  Complex alpha0{1.0, 0.0};
  double ratio = 0.5;
  double base = 2.0;
  double gen_arg = 0.0;
  std::optional<std::int64_t> max_exponent;
  double r_min = 1.0;
  double r_max = 2.0;

  static GammaSpec finite(std::vector<Complex> s) {
    require(!s.empty(), ErrorKind::InvalidGamma, "empty Gamma sample");
    GammaSpec g;
    g.kind = GammaKind::FINITE;
    g.samples = std::move(s);
    return g;
  }
  static GammaSpec geometric(Complex alpha0, double ratio) {
    require(ratio > 0.0 && ratio < 1.0, ErrorKind::InvalidGamma,
            "geometric Gamma needs ratio in (0,1)");
    require(std::abs(alpha0) > 0.0, ErrorKind::InvalidGamma,
            "geometric Gamma needs alpha0 != 0");
    GammaSpec g;
    g.kind = GammaKind::GEOMETRIC;
    g.alpha0 = alpha0;
    g.ratio = ratio;
    return g;
  }
  static GammaSpec unbounded_pow(double base, double arg = 0.0,
                                 std::optional<std::int64_t> max_exp = {}) {
    require(base > 1.0, ErrorKind::InvalidGamma,
            "unbounded generator needs base > 1");
    GammaSpec g;
    g.kind = GammaKind::UNBOUNDED_GEN;
    g.base = base;
    g.gen_arg = arg;
    g.max_exponent = max_exp;
    return g;
  }
  static GammaSpec annulus(double r_min, double r_max) {
    require(r_min > 0.0 && r_min <= r_max, ErrorKind::InvalidGamma,
            "annulus needs 0 < r_min <= r_max");
    GammaSpec g;
    g.kind = GammaKind::ANNULUS;
    g.r_min = r_min;
    g.r_max = r_max;
    return g;
  }
  static GammaSpec full_plane() { return GammaSpec{}; }

  bool is_bounded() const {
    return kind == GammaKind::FINITE || kind == GammaKind::GEOMETRIC ||
           kind == GammaKind::ANNULUS;
  }
};

// The discrete candidate policy: elements of Gamma whose log-modulus lies
// near `target_lmod`, kept in log-polar form (witness scalars routinely
// leave the double range).
inline std::vector<LogComplex> discrete_candidates(const GammaSpec& g,
                                                   double target_lmod) {
  std::vector<LogComplex> cands;
  auto near_geometric = [&](double t) {
    const double lr = std::log(g.ratio);
    const double l0 = std::log(std::abs(g.alpha0));
    double kf = (t - l0) / lr;
    if (!std::isfinite(kf)) kf = 0.0;
    const std::int64_t k =
        std::llround(std::clamp(kf, 0.0, 4.0e6));
    const double a0 = std::arg(g.alpha0);
    for (std::int64_t j = std::max<std::int64_t>(0, k - 2); j <= k + 2; ++j) {
      cands.push_back(LogComplex(l0 + double(j) * lr, a0));
    }
  };
  switch (g.kind) {
    case GammaKind::FINITE:
      for (const Complex& s : g.samples) {
        const LogComplex l = LogComplex::from_complex(s);
        if (!l.is_zero()) cands.push_back(l);
      }
      break;
    case GammaKind::GEOMETRIC:
      near_geometric(target_lmod);
      near_geometric(target_lmod - 2.0);
      cands.push_back(LogComplex::from_complex(g.alpha0));
      break;
    case GammaKind::UNBOUNDED_GEN: {
      const double lb = std::log(g.base);
      double mf = target_lmod / lb;
      if (!std::isfinite(mf)) mf = 0.0;
      std::int64_t m = std::llround(std::clamp(mf, 0.0, 9.0e15));
      std::int64_t hi = m + 2;
      if (g.max_exponent) hi = std::min(hi, *g.max_exponent);
      for (std::int64_t j = std::max<std::int64_t>(0, m - 2); j <= hi; ++j) {
        cands.push_back(LogComplex(double(j) * lb, g.gen_arg));
      }
      break;
    }
    case GammaKind::ANNULUS:
    case GammaKind::FULL_PLANE:
      break;  // continuous kinds use the grid paths
  }
  return cands;
}

struct OffMassResult {
  double log_mass = kNegInf;  // p-mass (log) outside the window; sup for c0
  bool exceeded = false;      // early exit: mass already above the cap
  bool capped = false;        // scan budget ran out; value is a lower bound
};

inline constexpr std::size_t kStateScanCap = 65536;

// State view over a materialized log vector; the reference engine.
class MapStateView {
 public:
  explicit MapStateView(const LogVector& v) : v_(v) {}

  LogComplex at(std::int64_t j) const { return v_.at(j); }
  bool empty() const { return v_.empty(); }

  double sup_entry_lmod() const {
    double m = kNegInf;
    for (const auto& [i, z] : v_.entries()) m = std::max(m, z.lmod);
    return m;
  }

  // log of the full p-mass (or sup) of |u| — used by the grid paths
  double log_mass_total(const SpaceSpec& space) const {
    return v_.log_norm(space) * (space.kind == SpaceKind::C0_N ? 1.0 : space.p);
  }

  OffMassResult off_window_mass(double lgamma, std::int64_t wlo,
                                std::int64_t whi, const SpaceSpec& space,
                                double log_mass_cap) const {
    OffMassResult r;
    const bool sup = space.kind == SpaceKind::C0_N;
    const double p = sup ? 1.0 : space.p;
    LogSum mass;
    std::size_t scanned = 0;
    auto feed = [&](double lmod) {
      const double t = p * (lgamma + lmod);
      if (sup) {
        mass.lsum = std::max(mass.lsum, t);
      } else {
        mass.add(t);
      }
      return mass.value() > log_mass_cap;
    };
    const auto& em = v_.entries();
    for (auto it = em.begin(); it != em.end(); ++it) {
      if (it->first >= wlo && it->first <= whi) continue;
      if (++scanned > kStateScanCap) {
        r.capped = true;
        break;
      }
      if (feed(it->second.lmod)) {
        r.exceeded = true;
        break;
      }
    }
    r.log_mass = mass.value();
    return r;
  }

 private:
  const LogVector& v_;
};

struct BestScalar {
  Complex gamma_star{0.0, 0.0};
  double dist = 0.0;
};

struct GammaHit {
  double dist = kPosInf;
  LogComplex witness;
  bool capped = false;
};

namespace detail {

inline constexpr int kGridModulusPoints = 64;
inline constexpr int kGridPhasePoints = 64;

// || gamma * u - y || evaluated as (window part) + (off-window mass), where
// the window covers the target support with one index of margin.  Exact when
// the view's off-window scan completes.
template <typename View>
double eval_distance(const View& view, const SparseVector& y,
                     const SpaceSpec& space, const LogComplex& g,
                     std::int64_t wlo, std::int64_t whi, double log_mass_cap,
                     bool* capped, Complex state_lambda, Complex target_lambda,
                     bool direct_sum) {
  const bool sup = space.kind == SpaceKind::C0_N;
  const double p = sup ? 1.0 : space.p;
  CompensatedSum acc;
  double mx = 0.0;
  for (std::int64_t j = wlo; j <= whi; ++j) {
    const LogComplex v = view.at(j);
    Complex gv(0.0, 0.0);
    if (!v.is_zero()) {
      const LogComplex t = g.mul(v);
      if (!t.materializable()) return kPosInf;  // distance is astronomical
      gv = t.to_complex();
    }
    const Complex d = gv - y.at(j);
    if (sup) {
      mx = std::max(mx, std::abs(d));
    } else {
      acc.add(std::pow(std::abs(d), p));
    }
  }
  const OffMassResult off =
      view.off_window_mass(g.lmod, wlo, whi, space, log_mass_cap);
  if (off.capped && capped) *capped = true;
  if (off.exceeded || off.capped) return kPosInf;
  double dist;
  if (sup) {
    dist = std::max(mx, std::exp(off.log_mass));
  } else {
    dist = std::pow(acc.value() + std::exp(off.log_mass), 1.0 / p);
  }
  if (direct_sum) {
    const LogComplex gl = g.mul(LogComplex::from_complex(state_lambda));
    if (!gl.materializable()) return kPosInf;
    dist += std::abs(gl.to_complex() - target_lambda);
  }
  return dist;
}

// Exact least squares over the full plane on an l2 space:
// gamma* = <y, u> / <u, u>, assembled from the window inner product and the
// total mass; the distance is then re-evaluated directly.
template <typename View>
bool full_plane_l2(const View& view, const SparseVector& y,
                   const SpaceSpec& space, std::int64_t wlo, std::int64_t whi,
                   GammaHit* out) {
  LogComplexAccumulator ip;  // <y, u> = sum y_j conj(u_j)
  for (const auto& [j, z] : y.entries()) {
    const LogComplex u = view.at(j);
    if (u.is_zero()) continue;
    ip.add(LogComplex(u.lmod + std::log(std::abs(z)), std::arg(z) - u.arg));
  }
  // <u, u> over everything: window entries plus the off-window scan
  LogSum mass;
  for (std::int64_t j = wlo; j <= whi; ++j) {
    const LogComplex u = view.at(j);
    if (!u.is_zero()) mass.add(2.0 * u.lmod);
  }
  const OffMassResult off =
      view.off_window_mass(0.0, wlo, whi, space, kPosInf);
  if (off.capped) {
    out->capped = true;
    return false;
  }
  mass.add(off.log_mass);
  const LogComplex num = ip.value();
  LogComplex gstar = num.is_zero()
                         ? LogComplex::zero()
                         : LogComplex(num.lmod - mass.value(), num.arg);
  bool capped = false;
  const double d =
      gstar.is_zero()
          ? eval_distance(view, y, space, LogComplex::zero(), wlo, whi, kPosInf,
                          &capped, Complex(0, 0), Complex(0, 0), false)
          : eval_distance(view, y, space, gstar, wlo, whi, kPosInf, &capped,
                          Complex(0, 0), Complex(0, 0), false);
  if (capped) {
    out->capped = true;
    return false;
  }
  out->dist = d;
  out->witness = gstar;
  return true;
}

// One pass of local 3-point descent in a scalar coordinate.
template <typename F>
void refine_3point(double& x, double step, F&& f) {
  double best = f(x);
  for (int pass = 0; pass < 2; ++pass) {
    const double lo = x - step, hi = x + step;
    const double flo = f(lo), fhi = f(hi);
    if (flo < best && flo <= fhi) {
      x = lo;
      best = flo;
    } else if (fhi < best) {
      x = hi;
      best = fhi;
    }
    step *= 0.5;
  }
}

}  // namespace detail

// The shared minimization engine.  eps_cap bounds the distances of interest:
// anything provably above 4 * eps_cap may come back as +inf (hit decisions
// below eps_cap are unaffected).  Pass kPosInf to obtain true distances.
template <typename View>
GammaHit gamma_distance(const View& view, const SparseVector& y,
                        const SpaceSpec& space, const GammaSpec& gamma,
                        double eps_cap, Complex state_lambda = Complex(0, 0),
                        Complex target_lambda = Complex(0, 0),
                        bool direct_sum = false) {
  if (gamma.kind == GammaKind::FINITE && gamma.samples.empty()) {
    fail(ErrorKind::InvalidGamma, "empty Gamma sample");
  }
  const bool sup_space = space.kind == SpaceKind::C0_N;
  const double p = sup_space ? 1.0 : space.p;
  const double ny = norm(y, space);

  std::int64_t wlo = 0, whi = -1;  // empty window when y = 0
  if (!y.empty()) {
    wlo = y.min_index() - 1;
    whi = y.max_index() + 1;
  }

  GammaHit best;
  const double log_mass_cap =
      eps_cap == kPosInf ? kPosInf : p * std::log(4.0 * eps_cap + 1e-300);

  // zero state (or dead orbit): || gamma*0 - y || = ||y|| for every gamma
  const double sup_u = view.sup_entry_lmod();
  if ((sup_u == kNegInf) &&
      (!direct_sum || std::abs(state_lambda) == 0.0)) {
    Complex g0(0.0, 0.0);
    switch (gamma.kind) {
      case GammaKind::FINITE: g0 = gamma.samples.front(); break;
      case GammaKind::GEOMETRIC: g0 = gamma.alpha0; break;
      case GammaKind::UNBOUNDED_GEN:
        g0 = LogComplex(0.0, gamma.gen_arg).to_complex();
        break;
      case GammaKind::ANNULUS: g0 = Complex(gamma.r_min, 0.0); break;
      case GammaKind::FULL_PLANE: break;
    }
    best.dist = ny + (direct_sum ? std::abs(target_lambda) : 0.0);
    best.witness = LogComplex::from_complex(g0);
    return best;
  }

  if (gamma.kind == GammaKind::FULL_PLANE && space.is_lp() && space.p == 2.0 &&
      !direct_sum) {
    if (detail::full_plane_l2(view, y, space, wlo, whi, &best)) return best;
    return best;  // capped
  }

  auto consider = [&](const LogComplex& g) {
    bool capped = false;
    const double d =
        detail::eval_distance(view, y, space, g, wlo, whi, log_mass_cap,
                              &capped, state_lambda, target_lambda, direct_sum);
    if (capped) best.capped = true;
    if (d < best.dist) {
      best.dist = d;
      best.witness = g;
    }
    return d;
  };

  double ref = sup_u;
  if (direct_sum && std::abs(state_lambda) > 0.0) {
    ref = std::max(ref, std::log(std::abs(state_lambda)));
  }
  const double target = (ny > 0.0 ? std::log(ny) : 0.0) - ref;

  switch (gamma.kind) {
    case GammaKind::FINITE:
    case GammaKind::GEOMETRIC:
    case GammaKind::UNBOUNDED_GEN: {
      for (const LogComplex& g : discrete_candidates(gamma, target)) {
        consider(g);
      }
      break;
    }
    case GammaKind::ANNULUS:
    case GammaKind::FULL_PLANE: {
      double llo, lhi;
      if (gamma.kind == GammaKind::ANNULUS) {
        llo = std::log(gamma.r_min);
        lhi = std::log(gamma.r_max);
      } else {
        // modulus span [ ||y|| / (4 sup|u|), 4 ||y|| / ||u|| ]
        const double lnu = view.log_mass_total(space) / p;
        llo = (ny > 0.0 ? std::log(ny) : -6.0) - std::log(4.0) - sup_u;
        lhi = (ny > 0.0 ? std::log(ny) : 0.0) + std::log(4.0) - lnu;
        if (lhi <= llo) lhi = llo + std::log(2.0);
      }
      double bm = llo, bp = 0.0;
      for (int a = 0; a < detail::kGridModulusPoints; ++a) {
        const double lm =
            llo + (lhi - llo) * a / double(detail::kGridModulusPoints - 1);
        for (int b = 0; b < detail::kGridPhasePoints; ++b) {
          const double ph = 2.0 * M_PI * b / double(detail::kGridPhasePoints);
          const double d = consider(LogComplex(lm, ph));
          if (d == best.dist) {
            bm = lm;
            bp = ph;
          }
        }
      }
      if (gamma.kind == GammaKind::FULL_PLANE) {
        // gamma = 0 distance ||y|| is the relevant limit for tiny targets
        bool capped = false;
        const double d = detail::eval_distance(
            view, y, space, LogComplex::zero(), wlo, whi, log_mass_cap, &capped,
            state_lambda, target_lambda, direct_sum);
        if (d < best.dist) {
          best.dist = d;
          best.witness = LogComplex::zero();
        }
      }
      if (direct_sum && std::abs(state_lambda) > 0.0 &&
          std::abs(target_lambda) > 0.0) {
        // the lambda-matching scalar is exact on the identity coordinate
        consider(LogComplex::from_complex(target_lambda / state_lambda));
      }
      const double mstep =
          (lhi - llo) / double(detail::kGridModulusPoints - 1);
      const double pstep = 2.0 * M_PI / double(detail::kGridPhasePoints);
      detail::refine_3point(bm, mstep, [&](double l) {
        double lm = l;
        if (gamma.kind == GammaKind::ANNULUS) lm = std::clamp(lm, llo, lhi);
        bool capped = false;
        return detail::eval_distance(view, y, space, LogComplex(lm, bp), wlo,
                                     whi, log_mass_cap, &capped, state_lambda,
                                     target_lambda, direct_sum);
      });
      if (gamma.kind == GammaKind::ANNULUS) bm = std::clamp(bm, llo, lhi);
      detail::refine_3point(bp, pstep, [&](double ph) {
        bool capped = false;
        return detail::eval_distance(view, y, space, LogComplex(bm, ph), wlo,
                                     whi, log_mass_cap, &capped, state_lambda,
                                     target_lambda, direct_sum);
      });
      consider(LogComplex(bm, bp));
      break;
    }
  }
  return best;
}

// inf_{gamma in Gamma} || gamma*u - y || on a materialized vector.  Full
// plane on l2 is exact least squares; discrete kinds search the documented
// candidate grid; annulus / full plane elsewhere use the 64 x 64
// modulus-phase grid with one local refinement.
inline BestScalar best_scalar_distance(const SparseVector& u,
                                       const SparseVector& y,
                                       const SpaceSpec& space,
                                       const GammaSpec& gamma) {
  check_conforms(u, space);
  check_conforms(y, space);
  const LogVector lu = LogVector::lift(u);
  MapStateView view(lu);
  const GammaHit hit = gamma_distance(view, y, space, gamma, kPosInf);
  BestScalar r;
  r.dist = hit.dist;
  r.gamma_star = hit.witness.materializable() ? hit.witness.to_complex()
                                              : Complex(0.0, 0.0);
  return r;
}

}  // namespace lindyn

#endif  // LINDYN_GAMMA_HPP
