// Density functionals on subsets of N0 and generation of pairwise-separated
// schedule families.
//
// All estimators are finite-horizon: a report always carries the horizon and
// the Banach window actually used, so no estimate can be mistaken for a
// limit.  The liminf/limsup windows are [ceil(h/2), h]; early ratios are
// transient and the half-horizon window is stable under horizon doubling.

#ifndef LINDYN_FAMILIES_HPP
#define LINDYN_FAMILIES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "lindyn/logscale.hpp"

namespace lindyn {

// Subset of N0 known on [0, horizon].
struct IndexSet {
  std::vector<std::int64_t> elems;  // strictly increasing, all in [0, horizon]
  std::int64_t horizon = 0;

  void validate() const {
    require(horizon >= 0, ErrorKind::InvalidArgument, "negative horizon");
    for (std::size_t i = 0; i < elems.size(); ++i) {
      require(elems[i] >= 0, ErrorKind::InvalidArgument,
              "IndexSet element below 0");
      require(elems[i] <= horizon, ErrorKind::InvalidArgument,
              "IndexSet element beyond horizon");
      if (i > 0) {
        require(elems[i] > elems[i - 1], ErrorKind::InvalidArgument,
                "IndexSet must be strictly increasing");
      }
    }
  }

  std::size_t size() const { return elems.size(); }

  // #(E cap [0, n])
  std::int64_t count_upto(std::int64_t n) const {
    return std::upper_bound(elems.begin(), elems.end(), n) - elems.begin();
  }
};

struct DensityReport {
  double lower_est = 0.0;
  double upper_est = 0.0;
  double banach_upper_est = 0.0;
  std::int64_t horizon = 0;
  std::int64_t window_s = 1;
};

enum class FamilyKind { A_INF, D_LOWER, D_UPPER, B_UPPER };

inline const char* family_kind_name(FamilyKind k) {
  switch (k) {
    case FamilyKind::A_INF: return "A_inf";
    case FamilyKind::D_LOWER: return "D_lower";
    case FamilyKind::D_UPPER: return "D_upper";
    case FamilyKind::B_UPPER: return "B_upper";
  }
  return "?";
}

namespace detail {

// min/max of #(E cap [0,n]) / n over n in [ceil(h/2), h], clamped to [0,1].
inline std::pair<double, double> density_window(const IndexSet& E) {
  require(E.horizon >= 100, ErrorKind::InsufficientHorizon,
          "density estimation needs horizon >= 100, got " +
              std::to_string(E.horizon));
  const std::int64_t lo = (E.horizon + 1) / 2;
  double mn = 1.0, mx = 0.0;
  std::size_t idx = static_cast<std::size_t>(
      std::upper_bound(E.elems.begin(), E.elems.end(), lo - 1) -
      E.elems.begin());
  std::int64_t count = static_cast<std::int64_t>(idx);
  for (std::int64_t n = lo; n <= E.horizon; ++n) {
    while (idx < E.elems.size() && E.elems[idx] <= n) {
      ++idx;
      ++count;
    }
    const double r = std::min(1.0, double(count) / double(n));
    mn = std::min(mn, r);
    mx = std::max(mx, r);
  }
  return {mn, mx};
}

}  // namespace detail

inline double lower_density_est(const IndexSet& E) {
  return detail::density_window(E).first;
}

inline double upper_density_est(const IndexSet& E) {
  return detail::density_window(E).second;
}

// max over k in [0, horizon - s] of #(E cap [k+1, k+s]) / s.
// Two-pointer sweep over the elements: O(#E + 1).
inline double banach_upper_density_est(const IndexSet& E, std::int64_t s) {
  require(s >= 1 && s <= E.horizon / 10, ErrorKind::InvalidArgument,
          "Banach window s must satisfy 1 <= s <= horizon/10");
  if (E.elems.empty()) return 0.0;
  // window (k, k+s], k in [0, horizon-s]; anchor each window at an element.
  // Index 0 is never inside any window, and for elems[hi] < s the anchor
  // clamps to the k = 0 window [1, s].
  std::size_t lo = 0;
  std::int64_t best = 0;
  for (std::size_t hi = 0; hi < E.elems.size(); ++hi) {
    const std::int64_t k = std::max<std::int64_t>(E.elems[hi] - s, 0);
    // element 0 is never inside a window, so lo may pass hi
    while (lo <= hi && E.elems[lo] <= k) ++lo;
    if (lo > hi) continue;
    best = std::max(best, static_cast<std::int64_t>(hi - lo + 1));
  }
  return std::min(1.0, double(best) / double(s));
}

inline DensityReport analyze_density(const IndexSet& E, std::int64_t s) {
  DensityReport r;
  auto [mn, mx] = detail::density_window(E);
  r.lower_est = mn;
  r.upper_est = mx;
  r.banach_upper_est = banach_upper_density_est(E, s);
  r.horizon = E.horizon;
  r.window_s = s;
  return r;
}

// Default Banach window: the slack relation
//   upper_est <= banach_upper_est + 2/s
// is a theorem for s <= sqrt(horizon); keep defaults inside that regime.
inline std::int64_t default_banach_window(std::int64_t horizon) {
  std::int64_t s = static_cast<std::int64_t>(std::sqrt(double(horizon)));
  s = std::min(s, horizon / 10);
  return std::max<std::int64_t>(1, s);
}

struct VisitClassification {
  bool member = false;
  double estimate = 0.0;
};

// Finite-horizon membership test against one of the four canonical families.
// The estimate travels with the verdict so borderline cases stay judgeable.
inline VisitClassification classify_visit_set(const IndexSet& E,
                                              FamilyKind kind,
                                              double threshold) {
  require(threshold > 0.0, ErrorKind::InvalidArgument, "threshold must be > 0");
  VisitClassification c;
  switch (kind) {
    case FamilyKind::A_INF:
      c.estimate = double(E.size());
      c.member = c.estimate >= threshold * std::sqrt(double(E.horizon));
      break;
    case FamilyKind::D_LOWER:
      c.estimate = lower_density_est(E);
      c.member = c.estimate >= threshold;
      break;
    case FamilyKind::D_UPPER:
      c.estimate = upper_density_est(E);
      c.member = c.estimate >= threshold;
      break;
    case FamilyKind::B_UPPER:
      c.estimate = banach_upper_density_est(E, default_banach_window(E.horizon));
      c.member = c.estimate >= threshold;
      break;
  }
  return c;
}

// Pairwise disjoint sets A_1..A_K with the separation certificate
// |j - j'| >= max{k, k'} for j in A_k, j' in A_k', j != j', and A_k in [k, inf).
struct ScheduleFamily {
  std::vector<IndexSet> sets;
  std::vector<double> target_densities;
  std::int64_t horizon = 0;
};

// Exact separation check: one merged sweep.  Adjacent pairs suffice: for any
// pair (j < j'), the immediate predecessor p of j' satisfies
// j' - p >= max{k_p, k_{j'}} >= k_{j'} and the successor of j bounds k_j.
inline bool verify_separation(const ScheduleFamily& fam) {
  std::vector<std::pair<std::int64_t, std::int64_t>> all;  // (element, k)
  for (std::size_t k = 0; k < fam.sets.size(); ++k) {
    const auto& A = fam.sets[k];
    const std::int64_t kk = static_cast<std::int64_t>(k) + 1;
    for (std::int64_t e : A.elems) {
      if (e < kk) return false;  // A_k subset of [k, inf)
      all.emplace_back(e, kk);
    }
  }
  std::sort(all.begin(), all.end());
  for (std::size_t i = 1; i < all.size(); ++i) {
    if (all[i].first == all[i - 1].first) return false;  // not disjoint
    const std::int64_t gap = all[i].first - all[i - 1].first;
    if (gap < std::max(all[i].second, all[i - 1].second)) return false;
  }
  return true;
}

// Deterministic greedy scheduler.  Sweeps n = 1..horizon, keeps the per-set
// deficit d_k*n - #(A_k cap [0,n]), and gives each admissible slot to the
// largest positive deficit (ties to smaller k).  Admissibility against
// already placed elements only needs the last placement per set: earlier
// elements are farther away.
inline ScheduleFamily generate_schedules(int K, std::int64_t horizon,
                                         double base_density) {
  require(K >= 1, ErrorKind::InvalidArgument, "K must be >= 1");
  require(base_density > 0.0 && base_density <= 0.25, ErrorKind::InvalidArgument,
          "base_density must lie in (0, 1/4]");
  require(horizon >= 100 * static_cast<std::int64_t>(K),
          ErrorKind::InsufficientHorizon,
          "schedule horizon too small for K sets");

  ScheduleFamily fam;
  fam.horizon = horizon;
  fam.sets.assign(K, IndexSet{});
  fam.target_densities.resize(K);
  for (int k = 0; k < K; ++k) {
    fam.sets[k].horizon = horizon;
    fam.target_densities[k] = std::pow(base_density, double(k + 1));
  }

  std::vector<std::int64_t> last(K, -1);
  std::vector<std::int64_t> count(K, 0);
  for (std::int64_t n = 1; n <= horizon; ++n) {
    int pick = -1;
    double pick_deficit = 0.0;
    for (int k = 0; k < K; ++k) {
      const double deficit =
          fam.target_densities[k] * double(n) - double(count[k]);
      if (deficit <= 0.0) continue;
      if (pick >= 0 && deficit <= pick_deficit) continue;
      if (n < k + 1) continue;
      bool ok = true;
      for (int j = 0; j < K; ++j) {
        if (last[j] < 0) continue;
        if (n - last[j] < std::max(k, j) + 1) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      pick = k;
      pick_deficit = deficit;
    }
    if (pick >= 0) {
      fam.sets[pick].elems.push_back(n);
      last[pick] = n;
      ++count[pick];
    }
  }

  for (int k = 0; k < K; ++k) {
    const double got = lower_density_est(fam.sets[k]);
    if (got < fam.target_densities[k] / 2.0) {
      fail(ErrorKind::Generation,
           "schedule generation starved: set " + std::to_string(k + 1) +
               " reached lower density " + std::to_string(got) +
               " < half of target " +
               std::to_string(fam.target_densities[k]));
    }
  }
  return fam;
}

}  // namespace lindyn

#endif  // LINDYN_FAMILIES_HPP
