// Orbit simulation and visit-set analytics: iterate v_{n+1} = T v_n, test
// whether some gamma in Gamma lands gamma * v_n inside an epsilon-ball of a
// target, and hand the visit sets to the density estimators.
//
// Orbit states are kept in log-polar form per entry: constructed start
// vectors carry coefficients spanning thousands of orders of magnitude, and
// the scalars gamma that produce hits are correspondingly extreme.  Two
// engines produce identical visit sets:
//   - a generic engine that applies the shift entry-wise per step,
//   - a lazy engine for affine pseudo-shifts and bilateral shifts, which
//     reads T^n x off the start vector and weight prefix sums in O(window)
//     per step.
// Hit tests go through the same gamma_distance engine as
// best_scalar_distance, so incremental probes and per-step brute-force
// recomputation decide hits identically.

#ifndef LINDYN_ORBIT_HPP
#define LINDYN_ORBIT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lindyn/families.hpp"
#include "lindyn/gamma.hpp"
#include "lindyn/operators.hpp"
#include "lindyn/spaces.hpp"

namespace lindyn {

struct OrbitProbe {
  OperatorHandle op;
  LogVector start;                      // plain part (lifted if materialized)
  Complex start_lambda{0.0, 0.0};       // direct-sum probes only
  bool direct_sum = false;
  GammaSpec gamma;
  std::vector<SparseVector> targets;    // plain parts
  std::vector<Complex> target_lambdas;  // direct-sum probes only
  std::vector<double> epsilons;
  std::int64_t horizon = 100;
  std::int64_t banach_s = 0;            // 0 = default window
  bool force_generic = false;           // disable the lazy engine (testing)
};

struct VisitRecord {
  int target_index = 0;
  double epsilon = 0.0;
  IndexSet visits;
  DensityReport density;
  std::map<std::int64_t, Complex> witnesses;  // materializable witnesses only
  std::map<std::int64_t, LogComplex> witnesses_log;
  std::vector<double> distances;  // per n; +inf when provably above the cap
  std::optional<std::int64_t> death_index;  // orbit became identically zero
  bool truncated = false;  // some hit test exceeded the scan budget
};

namespace detail {

// One orbit step in log form; shifts never merge entries (the index maps are
// injective), so this is exact.
inline LogVector step_log(const OperatorHandle& op, const LogVector& v) {
  LogVector out(v.domain());
  if (op.kind == OperatorKind::PseudoShift) {
    const auto& ps = *op.pseudo;
    for (const auto& [s, z] : v.entries()) {
      if (s < 1) continue;  // outside the operator's coordinates
      const std::int64_t n = ps.phi.invert(s);
      if (n == 0) continue;
      out.set(n, z.scale_log(ps.weights.log_w(s)));
    }
  } else {
    const auto& bs = *op.bilateral;
    for (const auto& [k, z] : v.entries()) {
      out.set(k - 1, z.scale_log(bs.weights.log_w(k)));
    }
  }
  return out;
}

// State of T^n start for the shared distance engine.
class OrbitView {
 public:
  OrbitView(const OperatorHandle& op, const LogVector& start, bool lazy)
      : op_(op), lazy_(lazy), state_(start) {
    if (lazy_) {
      for (const auto& [i, z] : start.entries()) {
        src_idx_.push_back(i);
        src_val_.push_back(z);
      }
    }
  }

  std::int64_t step() const { return n_; }

  void advance() {
    ++n_;
    if (!lazy_) state_ = step_log(op_, state_);
  }

  bool dead() const {
    if (!lazy_) return state_.empty();
    if (op_.kind == OperatorKind::PseudoShift) {
      const std::int64_t c = op_.pseudo->phi.offset;
      return src_idx_.empty() || src_idx_.back() - n_ * c < 1;
    }
    return false;  // bilateral orbits never die
  }

  // value at output index j of T^n start
  LogComplex at(std::int64_t j) const {
    if (!lazy_) return state_.at(j);
    if (op_.kind == OperatorKind::PseudoShift) {
      if (j < 1) return LogComplex::zero();
      const std::int64_t s = j + n_ * op_.pseudo->phi.offset;
      const LogComplex z = lookup(s);
      if (z.is_zero()) return z;
      return z.scale_log(coeff_pseudo(j, s));
    }
    const std::int64_t s = j + n_;
    const LogComplex z = lookup(s);
    if (z.is_zero()) return z;
    return z.scale_log(op_.prefix->range_z(j, s));
  }

  double sup_entry_lmod() const {
    if (!lazy_) return MapStateView(state_).sup_entry_lmod();
    // live entries of constructed vectors decay away from the low end;
    // scan ascending with a generous decay cut
    double best = kNegInf;
    std::size_t scanned = 0;
    auto it = std::lower_bound(src_idx_.begin(), src_idx_.end(), first_src());
    for (; it != src_idx_.end(); ++it) {
      const std::int64_t s = *it;
      const std::int64_t j = out_index(s);
      if (op_.kind == OperatorKind::PseudoShift && j < 1) continue;
      const double l =
          src_val_[static_cast<std::size_t>(it - src_idx_.begin())].lmod +
          coeff_at(j, s);
      best = std::max(best, l);
      if (++scanned >= 16 && l < best - 120.0) break;
      if (scanned > kStateScanCap) break;
    }
    if (op_.kind == OperatorKind::Bilateral) {
      // bilateral sources extend downward as well
      auto rit = std::lower_bound(src_idx_.begin(), src_idx_.end(), first_src());
      std::size_t down = 0;
      while (rit != src_idx_.begin()) {
        --rit;
        const std::int64_t s = *rit;
        const double l =
            src_val_[static_cast<std::size_t>(rit - src_idx_.begin())].lmod +
            coeff_at(out_index(s), s);
        best = std::max(best, l);
        if (++down >= 16 && l < best - 120.0) break;
        if (down > kStateScanCap) break;
      }
    }
    return best;
  }

  double log_mass_total(const SpaceSpec& space) const {
    if (!lazy_) return MapStateView(state_).log_mass_total(space);
    const bool sup = space.kind == SpaceKind::C0_N;
    const double p = sup ? 1.0 : space.p;
    LogSum s;
    for (std::size_t i = 0; i < src_idx_.size(); ++i) {
      const std::int64_t j = out_index(src_idx_[i]);
      if (op_.kind == OperatorKind::PseudoShift && j < 1) continue;
      const double l = src_val_[i].lmod + coeff_at(j, src_idx_[i]);
      if (sup) {
        s.lsum = std::max(s.lsum, l);
      } else {
        s.add(p * l);
      }
    }
    return s.value();
  }

  OffMassResult off_window_mass(double lgamma, std::int64_t wlo,
                                std::int64_t whi, const SpaceSpec& space,
                                double log_mass_cap) const {
    if (!lazy_) {
      return MapStateView(state_).off_window_mass(lgamma, wlo, whi, space,
                                                  log_mass_cap);
    }
    OffMassResult r;
    const bool sup = space.kind == SpaceKind::C0_N;
    const double p = sup ? 1.0 : space.p;
    LogSum mass;
    std::size_t scanned = 0;
    auto walk = [&](std::int64_t from_src, int dir) {
      auto it = std::lower_bound(src_idx_.begin(), src_idx_.end(), from_src);
      std::int64_t i = it - src_idx_.begin();
      if (dir < 0) --i;
      double prev = kPosInf;
      while (i >= 0 && i < static_cast<std::int64_t>(src_idx_.size())) {
        if (++scanned > kStateScanCap) {
          r.capped = true;
          return;
        }
        const std::int64_t s = src_idx_[static_cast<std::size_t>(i)];
        const std::int64_t j = out_index(s);
        if (op_.kind == OperatorKind::PseudoShift && j < 1) {
          if (dir < 0) return;  // everything below is annihilated
          i += dir;
          continue;
        }
        if (j >= wlo && j <= whi) {
          i += dir;
          continue;
        }
        const double lmod =
            src_val_[static_cast<std::size_t>(i)].lmod + coeff_at(j, s);
        const double t = p * (lgamma + lmod);
        if (sup) {
          mass.lsum = std::max(mass.lsum, t);
        } else {
          mass.add(t);
        }
        if (mass.value() > log_mass_cap) {
          r.exceeded = true;
          return;
        }
        if (t < mass.value() - 46.0 && prev != kPosInf && t < prev) {
          const double rho = std::exp(t - prev);
          if (rho <= 0.9) {
            if (!sup) mass.add(t + std::log(rho / (1.0 - rho)));
            return;  // geometric tail folded in
          }
        }
        prev = t;
        i += dir;
      }
    };
    walk(src_of(whi + 1), +1);
    if (!r.exceeded && !r.capped) walk(src_of(wlo), -1);
    r.log_mass = mass.value();
    return r;
  }

  double log_norm(const SpaceSpec& space) const {
    return log_mass_total(space) /
           (space.kind == SpaceKind::C0_N ? 1.0 : space.p);
  }

 private:
  std::int64_t out_index(std::int64_t s) const {
    if (op_.kind == OperatorKind::PseudoShift) {
      return s - n_ * op_.pseudo->phi.offset;
    }
    return s - n_;
  }
  std::int64_t src_of(std::int64_t j) const {
    if (op_.kind == OperatorKind::PseudoShift) {
      return j + n_ * op_.pseudo->phi.offset;
    }
    return j + n_;
  }
  std::int64_t first_src() const {
    // smallest source with a live output
    if (op_.kind == OperatorKind::PseudoShift) return 1 + n_ * op_.pseudo->phi.offset;
    return std::numeric_limits<std::int64_t>::min();
  }
  double coeff_pseudo(std::int64_t j, std::int64_t s) const {
    // prod_{t=1..n} w_{j + t*c}: per-residue prefix sums over stride c
    const std::int64_t c = op_.pseudo->phi.offset;
    if (c == 1) return op_.prefix->range_pos(j + 1, s);
    const std::int64_t r = j % c;
    auto& cum = stride_cache_[r];  // cum[m] = sum_{u=1..m} log w_{r + u*c}
    if (cum.empty()) cum.push_back(0.0);
    const std::int64_t hi = (s - r) / c;
    while (static_cast<std::int64_t>(cum.size()) <= hi) {
      const std::int64_t u = static_cast<std::int64_t>(cum.size());
      cum.push_back(cum.back() + op_.pseudo->weights.log_w(r + u * c));
    }
    const std::int64_t lo = (j - r) / c;
    return cum[static_cast<std::size_t>(hi)] - cum[static_cast<std::size_t>(lo)];
  }
  double coeff_at(std::int64_t j, std::int64_t s) const {
    if (op_.kind == OperatorKind::PseudoShift) return coeff_pseudo(j, s);
    return op_.prefix->range_z(j, s);
  }
  LogComplex lookup(std::int64_t s) const {
    auto it = std::lower_bound(src_idx_.begin(), src_idx_.end(), s);
    if (it == src_idx_.end() || *it != s) return LogComplex::zero();
    return src_val_[static_cast<std::size_t>(it - src_idx_.begin())];
  }

  const OperatorHandle& op_;
  bool lazy_;
  std::int64_t n_ = 0;
  LogVector state_;                      // generic engine
  std::vector<std::int64_t> src_idx_;    // lazy engine
  std::vector<LogComplex> src_val_;
  mutable std::map<std::int64_t, std::vector<double>> stride_cache_;
};

}  // namespace detail

inline std::vector<VisitRecord> run_probe(const OrbitProbe& probe) {
  const bool direct_sum = probe.direct_sum;
  require(direct_sum == (probe.op.kind == OperatorKind::DirectSumId),
          ErrorKind::Conformance, "probe shape does not match the operator");
  const OperatorHandle& shift = direct_sum ? *probe.op.inner : probe.op;
  const SpaceSpec space = shift.space();
  // density analytics kick in from horizon 100; shorter probes still produce
  // exact visit sets
  require(probe.horizon >= 1, ErrorKind::InvalidArgument,
          "probe horizon must be >= 1");
  require(!probe.targets.empty() && !probe.epsilons.empty(),
          ErrorKind::InvalidArgument, "probe needs targets and epsilons");
  for (const auto& y : probe.targets) check_conforms(y, space);
  if (shift.kind == OperatorKind::PseudoShift && !probe.start.empty()) {
    require(probe.start.entries().begin()->first >= 1, ErrorKind::Conformance,
            "pseudo-shift probe start must be supported on indices >= 1");
  }
  if (direct_sum) {
    require(probe.target_lambdas.size() == probe.targets.size(),
            ErrorKind::InvalidArgument,
            "direct-sum probes need one lambda per target");
  }
  double eps_cap = 0.0;
  for (double e : probe.epsilons) {
    require(e > 0.0, ErrorKind::InvalidArgument, "epsilons must be positive");
    eps_cap = std::max(eps_cap, e);
  }

  const bool lazy = !probe.force_generic &&
                    (shift.kind == OperatorKind::Bilateral ||
                     (shift.kind == OperatorKind::PseudoShift &&
                      shift.pseudo->phi.kind == PhiSpec::Kind::Affine));
  detail::OrbitView view(shift, probe.start, lazy);

  const std::size_t T = probe.targets.size();
  std::vector<std::vector<double>> dist(T);
  std::vector<std::map<std::int64_t, LogComplex>> wits(T);
  std::vector<bool> capped(T, false);
  std::optional<std::int64_t> death;
  std::vector<GammaHit> dead_hit(T);
  bool dead_hit_ready = false;

  for (std::int64_t n = 0; n <= probe.horizon; ++n) {
    if (n > 0) view.advance();
    const bool is_dead = view.dead();
    // the identity coordinate keeps a sum-space pair alive
    const bool orbit_dead =
        is_dead && (!direct_sum || std::abs(probe.start_lambda) == 0.0);
    if (orbit_dead && !death) death = view.step();
    for (std::size_t t = 0; t < T; ++t) {
      GammaHit h;
      if (is_dead && dead_hit_ready) {
        h = dead_hit[t];  // constant from the death index onward
      } else {
        h = gamma_distance(
            view, probe.targets[t], space, probe.gamma, eps_cap,
            direct_sum ? probe.start_lambda : Complex(0, 0),
            direct_sum ? probe.target_lambdas[t] : Complex(0, 0), direct_sum);
        if (is_dead) dead_hit[t] = h;
      }
      if (h.capped) capped[t] = true;
      dist[t].push_back(h.dist);
      if (h.dist < eps_cap) wits[t][n] = h.witness;
    }
    if (is_dead) dead_hit_ready = true;
  }

  std::vector<VisitRecord> out;
  const std::int64_t s =
      probe.banach_s > 0 ? probe.banach_s : default_banach_window(probe.horizon);
  for (std::size_t t = 0; t < T; ++t) {
    for (double eps : probe.epsilons) {
      VisitRecord r;
      r.target_index = static_cast<int>(t);
      r.epsilon = eps;
      r.visits.horizon = probe.horizon;
      for (std::int64_t n = 0; n <= probe.horizon; ++n) {
        if (dist[t][static_cast<std::size_t>(n)] < eps) {
          r.visits.elems.push_back(n);
          const LogComplex w = wits[t][n];
          r.witnesses_log[n] = w;
          if (w.materializable()) r.witnesses[n] = w.to_complex();
        }
      }
      r.distances = dist[t];
      if (probe.horizon >= 100) {
        r.density = analyze_density(r.visits, s);
      } else {
        r.density.horizon = probe.horizon;
        r.density.window_s = s;
      }
      r.death_index = death;
      r.truncated = capped[t];
      out.push_back(std::move(r));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sum-space lifting: the forward direction of the X (+) C comparison is the
// algebraic identity
//   || beta (T (+) Id)^m (z0, 1) - (z, beta) || = |beta| * || T^m z0 - z/beta ||,
// verified numerically row by row.
// ---------------------------------------------------------------------------

struct LiftRow {
  std::int64_t m = 0;
  double dist_x = 0.0;     // || T^m z0 - beta^{-1} z ||_X
  double dist_sum = 0.0;   // || beta (T (+) Id)^m (z0,1) - (z,beta) ||
  bool qualifies = false;  // dist_x < eps / |beta|
  bool implied = false;    // dist_sum < eps
  double identity_residual = 0.0;
};

struct LiftTargetReport {
  Complex beta;
  std::vector<LiftRow> rows;
  bool implication_holds = true;  // qualifies => implied, for every m
  bool inclusion_exact = true;    // the two qualifying sets coincide
  double max_identity_residual = 0.0;
};

struct LiftReport {
  std::vector<LiftTargetReport> targets;
  double eps = 0.0;
  bool all_hold = true;
};

inline LiftReport lift_and_compare(
    const OperatorHandle& op, const SparseVector& z0, const IndexSet& schedule,
    const std::vector<std::pair<SparseVector, Complex>>& targets, double eps) {
  require(op.kind != OperatorKind::DirectSumId, ErrorKind::InvalidArgument,
          "pass the plain operator; the lift adds the identity coordinate");
  require(eps > 0.0, ErrorKind::InvalidArgument, "eps must be positive");
  const SpaceSpec space = op.space();
  check_conforms(z0, space);
  LiftReport rep;
  rep.eps = eps;
  for (const auto& [z, beta] : targets) {
    require(std::abs(beta) > 0.0, ErrorKind::InvalidArgument,
            "invalid target: beta = 0 admits no scaled approximation");
    check_conforms(z, space);
    LiftTargetReport tr;
    tr.beta = beta;
    for (std::int64_t m : schedule.elems) {
      const SparseVector tm = apply_T_power(op, z0, m);
      LiftRow row;
      row.m = m;
      const SparseVector zb = z.scaled(Complex(1.0, 0.0) / beta);
      row.dist_x = scaled_distance(Complex(1.0, 0.0), tm, zb, space);
      // (+)-norm: the C coordinate of beta*(T (+) Id)^m (z0,1) - (z,beta)
      // is beta - beta = 0 exactly
      row.dist_sum = scaled_distance(beta, tm, z, space);
      row.qualifies = row.dist_x < eps / std::abs(beta);
      row.implied = row.dist_sum < eps;
      row.identity_residual =
          std::abs(row.dist_sum - std::abs(beta) * row.dist_x);
      tr.max_identity_residual =
          std::max(tr.max_identity_residual, row.identity_residual);
      if (row.qualifies && !row.implied) tr.implication_holds = false;
      if (row.qualifies != row.implied) tr.inclusion_exact = false;
      tr.rows.push_back(row);
    }
    rep.all_hold = rep.all_hold && tr.implication_holds;
    rep.targets.push_back(std::move(tr));
  }
  return rep;
}

// Consistency audit of a claimed scaled-approximation schedule for (x0,
// lambda0): each witness lambda_m must satisfy
//   || lambda_m T^m x0 - y || + |lambda_m lambda0 - lambda0| <= 1/j
// and consequently |lambda_m|^{-1} <= j|lambda0| / (j|lambda0| - 1).
struct ScaledScheduleAudit {
  std::vector<std::int64_t> failing_m;
  bool combined_bound_holds = true;
  bool derived_bound_holds = true;
};

inline ScaledScheduleAudit audit_scaled_schedule(
    const OperatorHandle& op, const SparseVector& x0, Complex lambda0,
    const std::map<std::int64_t, Complex>& witnesses, const SparseVector& y,
    int j) {
  require(j >= 1, ErrorKind::InvalidArgument, "j must be >= 1");
  require(std::abs(lambda0) > 0.0, ErrorKind::InvalidArgument,
          "lambda0 must be nonzero");
  const SpaceSpec space = op.space();
  ScaledScheduleAudit audit;
  const double jl = double(j) * std::abs(lambda0);
  for (const auto& [m, lam] : witnesses) {
    const SparseVector tm = apply_T_power(op, x0, m);
    const double lhs = scaled_distance(lam, tm, y, space) +
                       std::abs(lam * lambda0 - lambda0);
    bool ok = lhs <= 1.0 / double(j) + 1e-12;
    if (ok && jl > 1.0) {
      ok = 1.0 / std::abs(lam) <= jl / (jl - 1.0) + 1e-12;
      if (!ok) audit.derived_bound_holds = false;
    } else if (!ok) {
      audit.combined_bound_holds = false;
    }
    if (!ok) audit.failing_m.push_back(m);
  }
  return audit;
}

// ---------------------------------------------------------------------------
// Norm profile || T^n start || for n <= horizon, log-domain internally.
// Values that leave the double range come back as 0 / +inf.
// ---------------------------------------------------------------------------

struct NormProfile {
  std::vector<double> norms;
  std::vector<double> log_norms;
};

inline NormProfile orbit_norm_profile(const OperatorHandle& op,
                                      const LogVector& start,
                                      std::int64_t horizon) {
  require(op.kind != OperatorKind::DirectSumId, ErrorKind::InvalidArgument,
          "norm profiles run on plain shifts");
  require(horizon >= 0, ErrorKind::InvalidArgument, "horizon must be >= 0");
  const SpaceSpec space = op.space();
  NormProfile prof;
  prof.norms.reserve(static_cast<std::size_t>(horizon) + 1);
  LogVector v = start;
  for (std::int64_t n = 0; n <= horizon; ++n) {
    if (n > 0) v = detail::step_log(op, v);
    const double ln = v.log_norm(space);
    prof.log_norms.push_back(ln);
    prof.norms.push_back(ln == kNegInf ? 0.0 : std::exp(ln));
  }
  return prof;
}

inline NormProfile orbit_norm_profile(const OperatorHandle& op,
                                      const SparseVector& start,
                                      std::int64_t horizon) {
  return orbit_norm_profile(op, LogVector::lift(start), horizon);
}

}  // namespace lindyn

#endif  // LINDYN_ORBIT_HPP
