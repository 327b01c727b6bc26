// Concrete operators: unilateral pseudo-shifts T_{phi,w} with their right
// inverses, bilateral weighted shifts on lp(Z), and direct sums with the
// identity on C.
//
// Conventions.  Pseudo-shifts act on the coordinates n >= 1 of an
// N0-indexed space: phi : N -> N is strictly increasing with phi(1) > 1,
// weights w_n > 0 are indexed from 1, and
//     (T x)_n = w_{phi(n)} * x_{phi(n)},      S e_n = w_{phi(n)}^{-1} e_{phi(n)}.
// Index 0 lies outside the pseudo-shift's coordinate system; vectors with
// index-0 support are a conformance error for T and S.
// Bilateral shifts act on all of Z:
//     (T x)_k = w_{k+1} * x_{k+1},            S e_k = w_{k+1}^{-1} e_{k+1},
// so that T S = Id on finitely supported vectors.

#ifndef LINDYN_OPERATORS_HPP
#define LINDYN_OPERATORS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "lindyn/spaces.hpp"

namespace lindyn {

inline constexpr std::int64_t kPhiRangeLimit = std::int64_t(1) << 62;

// Strictly increasing phi : N -> N with phi(1) > 1.  TABLE specs carry an
// affine tail rule so iteration and inversion always terminate.
struct PhiSpec {
  enum class Kind { Affine, Table };
  Kind kind = Kind::Affine;
  std::int64_t offset = 1;             // Affine: phi(n) = n + offset
  std::vector<std::int64_t> table;     // Table: phi(n) = table[n-1] for n <= size
  std::int64_t tail_offset = 1;        // Table: phi(n) = n + tail_offset beyond

  static PhiSpec affine(std::int64_t offset) {
    require(offset >= 1, ErrorKind::InvalidArgument, "phi offset must be >= 1");
    PhiSpec p;
    p.kind = Kind::Affine;
    p.offset = offset;
    return p;
  }
  static PhiSpec with_table(std::vector<std::int64_t> t, std::int64_t tail) {
    PhiSpec p;
    p.kind = Kind::Table;
    p.table = std::move(t);
    p.tail_offset = tail;
    p.validate();
    return p;
  }

  void validate() const {
    if (kind == Kind::Affine) {
      require(offset >= 1, ErrorKind::InvalidArgument, "phi offset must be >= 1");
      return;
    }
    require(!table.empty(), ErrorKind::InvalidArgument, "empty phi table");
    require(tail_offset >= 1, ErrorKind::InvalidArgument,
            "phi tail offset must be >= 1");
    for (std::size_t i = 0; i < table.size(); ++i) {
      const std::int64_t n = static_cast<std::int64_t>(i) + 1;
      require(table[i] >= n + 1, ErrorKind::InvalidArgument,
              "phi(n) must exceed n");
      if (i > 0) {
        require(table[i] > table[i - 1], ErrorKind::InvalidArgument,
                "phi table must be strictly increasing");
      }
    }
    const std::int64_t m = static_cast<std::int64_t>(table.size());
    require(m + 1 + tail_offset > table.back(), ErrorKind::InvalidArgument,
            "phi tail rule breaks monotonicity at the table boundary");
  }

  std::int64_t eval(std::int64_t n) const {
    require(n >= 1, ErrorKind::InvalidArgument, "phi is defined on n >= 1");
    if (kind == Kind::Affine) return n + offset;
    if (n <= static_cast<std::int64_t>(table.size())) return table[n - 1];
    return n + tail_offset;
  }

  // n with phi(n) == target, if any.
  std::int64_t invert(std::int64_t target) const {  // 0 = no preimage
    if (kind == Kind::Affine) {
      const std::int64_t n = target - offset;
      return n >= 1 ? n : 0;
    }
    auto it = std::lower_bound(table.begin(), table.end(), target);
    if (it != table.end() && *it == target) {
      return static_cast<std::int64_t>(it - table.begin()) + 1;
    }
    const std::int64_t n = target - tail_offset;
    if (n >= 1 && n > static_cast<std::int64_t>(table.size()) &&
        target > table.back()) {
      return n;
    }
    return 0;
  }
};

// phi^m(n); overflow past 2^62 is a range error.
inline std::int64_t phi_iterate(const PhiSpec& phi, std::int64_t n,
                                std::int64_t m) {
  require(n >= 1, ErrorKind::InvalidArgument, "phi_iterate needs n >= 1");
  require(m >= 0, ErrorKind::InvalidArgument, "phi_iterate needs m >= 0");
  if (phi.kind == PhiSpec::Kind::Affine) {
    if (m > 0 && phi.offset > (kPhiRangeLimit - n) / m) {
      fail(ErrorKind::NumericRange, "phi iterate exceeds 2^62");
    }
    return n + m * phi.offset;
  }
  std::int64_t v = n;
  for (std::int64_t q = 0; q < m; ++q) {
    if (v > static_cast<std::int64_t>(phi.table.size())) {
      // affine from here on
      const std::int64_t rest = m - q;
      if (phi.tail_offset > (kPhiRangeLimit - v) / rest) {
        fail(ErrorKind::NumericRange, "phi iterate exceeds 2^62");
      }
      return v + rest * phi.tail_offset;
    }
    v = phi.eval(v);
    require(v < kPhiRangeLimit, ErrorKind::NumericRange,
            "phi iterate exceeds 2^62");
  }
  return v;
}

// Phi(n) := phi^n(n), with the empty-iteration convention Phi(0) = 0.
inline std::int64_t phi_capital(const PhiSpec& phi, std::int64_t n) {
  if (n == 0) return 0;
  return phi_iterate(phi, n, n);
}

// Positive weight rules.  log_w is the primitive; prefix sums over
// consecutive indices are cached per rule instance by WeightPrefix.
struct WeightRule {
  enum class Kind { Const, Cor22c, EtaStep, Table, TuGeometric };
  Kind kind = Kind::Const;
  double c = 2.0;        // Const: w_k = c
  double p = 2.0;        // Cor22c: w_k = ((k+1)/k)^{1/p}
  double eta = 2.0;      // EtaStep: w_k = eta for k > 0, 1 otherwise
  std::vector<double> values;  // Table (k = 1..size), then tail_value
  double tail_value = 1.0;
  double u0 = 0.5;       // TuGeometric: u_n = u0 * uratio^{n-1}; w = (u1, u1, u2, ...)
  double uratio = 0.5;

  static WeightRule constant(double c) {
    require(c > 0.0, ErrorKind::InvalidArgument, "weights must be positive");
    WeightRule r;
    r.kind = Kind::Const;
    r.c = c;
    return r;
  }
  static WeightRule cor22c(double p) {
    require(p >= 1.0, ErrorKind::InvalidArgument, "cor22c needs p >= 1");
    WeightRule r;
    r.kind = Kind::Cor22c;
    r.p = p;
    return r;
  }
  static WeightRule eta_step(double eta) {
    require(eta > 1.0, ErrorKind::InvalidArgument, "eta weights need eta > 1");
    WeightRule r;
    r.kind = Kind::EtaStep;
    r.eta = eta;
    return r;
  }
  static WeightRule table(std::vector<double> v, double tail) {
    require(!v.empty(), ErrorKind::InvalidArgument, "empty weight table");
    for (double w : v) {
      require(w > 0.0, ErrorKind::InvalidArgument, "weights must be positive");
    }
    require(tail > 0.0, ErrorKind::InvalidArgument, "weights must be positive");
    WeightRule r;
    r.kind = Kind::Table;
    r.values = std::move(v);
    r.tail_value = tail;
    return r;
  }
  static WeightRule tu_geometric(double u0, double uratio) {
    require(u0 > 0.0 && uratio > 0.0 && uratio < 1.0, ErrorKind::InvalidArgument,
            "tu weights need u0 > 0 and ratio in (0,1)");
    WeightRule r;
    r.kind = Kind::TuGeometric;
    r.u0 = u0;
    r.uratio = uratio;
    return r;
  }

  // k ranges over Z for bilateral use; unilateral rules are queried at k >= 1.
  double log_w(std::int64_t k) const {
    switch (kind) {
      case Kind::Const:
        return std::log(c);
      case Kind::Cor22c:
        require(k >= 1, ErrorKind::InvalidArgument, "cor22c weights need k >= 1");
        return std::log1p(1.0 / double(k)) / p;
      case Kind::EtaStep:
        return k > 0 ? std::log(eta) : 0.0;
      case Kind::Table: {
        require(k >= 1, ErrorKind::InvalidArgument, "table weights need k >= 1");
        if (k <= static_cast<std::int64_t>(values.size())) {
          return std::log(values[k - 1]);
        }
        return std::log(tail_value);
      }
      case Kind::TuGeometric: {
        require(k >= 1, ErrorKind::InvalidArgument, "tu weights need k >= 1");
        // w_1 = u_1, w_k = u_{k-1} for k >= 2
        const std::int64_t n = k == 1 ? 1 : k - 1;
        return std::log(u0) + double(n - 1) * std::log(uratio);
      }
    }
    return 0.0;
  }

  double w(std::int64_t k) const { return std::exp(log_w(k)); }

  // Whether w_k >= 1 for every k in the rule's domain (decidable per rule).
  bool all_weights_ge_one() const {
    switch (kind) {
      case Kind::Const: return c >= 1.0;
      case Kind::Cor22c: return true;
      case Kind::EtaStep: return true;
      case Kind::Table: {
        if (tail_value < 1.0) return false;
        for (double v : values) {
          if (v < 1.0) return false;
        }
        return true;
      }
      case Kind::TuGeometric: return false;
    }
    return false;
  }
};

// Cached prefix sums of log w over consecutive indices.
//   pos(j)  = sum_{i=1..j} log w_i            (j >= 0)
//   neg(j)  = sum_{i=-j+1..0} log w_i         (j >= 0; bilateral only)
class WeightPrefix {
 public:
  explicit WeightPrefix(const WeightRule& rule) : rule_(rule) {
    pos_.push_back(0.0);
    neg_.push_back(0.0);
  }

  const WeightRule& rule() const { return rule_; }

  double pos(std::int64_t j) const {
    extend_pos(j);
    return pos_[static_cast<std::size_t>(j)];
  }
  double neg(std::int64_t j) const {
    extend_neg(j);
    return neg_[static_cast<std::size_t>(j)];
  }
  // sum_{i=a..b} log w_i for 1 <= a <= b (unilateral index range)
  double range_pos(std::int64_t a, std::int64_t b) const {
    if (b < a) return 0.0;
    return pos(b) - pos(a - 1);
  }
  // sum over i in (a, b] for arbitrary integers a <= b (bilateral)
  double range_z(std::int64_t a, std::int64_t b) const {
    if (b <= a) return 0.0;
    return cum_z(b) - cum_z(a);
  }

 private:
  // cumulative sum from 1 to j for j>0, minus sum from j+1 to 0 for j<0
  double cum_z(std::int64_t j) const {
    if (j >= 0) return pos(j);
    return -neg(-j);
  }
  void extend_pos(std::int64_t j) const {
    CompensatedSum s;
    s.sum = pos_.back();
    while (static_cast<std::int64_t>(pos_.size()) <= j) {
      s.add(rule_.log_w(static_cast<std::int64_t>(pos_.size())));
      pos_.push_back(s.value());
    }
  }
  void extend_neg(std::int64_t j) const {
    CompensatedSum s;
    s.sum = neg_.back();
    while (static_cast<std::int64_t>(neg_.size()) <= j) {
      s.add(rule_.log_w(1 - static_cast<std::int64_t>(neg_.size())));
      neg_.push_back(s.value());
    }
  }

  WeightRule rule_;
  mutable std::vector<double> pos_;
  mutable std::vector<double> neg_;
};

struct PseudoShiftSpec {
  PhiSpec phi;
  WeightRule weights;
  SpaceSpec space;          // C0_N or LP_N
  double weight_bound = 0.0;

  void validate() const {
    phi.validate();
    require(space.kind == SpaceKind::C0_N || space.kind == SpaceKind::LP_N,
            ErrorKind::InvalidArgument,
            "pseudo-shifts live on c0(N) or lp(N)");
    require(weight_bound > 0.0, ErrorKind::InvalidArgument,
            "declare a positive weight bound");
    for (std::int64_t k = 1; k <= 1000; ++k) {
      require(weights.w(k) <= weight_bound * (1.0 + 1e-12),
              ErrorKind::InvalidArgument,
              "sampled weight exceeds the declared bound at k=" +
                  std::to_string(k));
    }
  }
};

struct BilateralShiftSpec {
  WeightRule weights;
  double p = 2.0;
  double weight_bound = 0.0;

  void validate() const {
    require(p >= 1.0, ErrorKind::InvalidArgument, "bilateral shift needs p >= 1");
    require(weight_bound > 0.0, ErrorKind::InvalidArgument,
            "declare a positive weight bound");
    for (std::int64_t k = -500; k <= 500; ++k) {
      require(weights.w(k) <= weight_bound * (1.0 + 1e-12),
              ErrorKind::InvalidArgument, "sampled weight exceeds bound");
    }
  }
};

enum class OperatorKind { PseudoShift, Bilateral, DirectSumId };

struct OperatorHandle {
  OperatorKind kind = OperatorKind::PseudoShift;
  std::shared_ptr<PseudoShiftSpec> pseudo;
  std::shared_ptr<BilateralShiftSpec> bilateral;
  std::shared_ptr<OperatorHandle> inner;  // DirectSumId wraps inner (+) Id_C
  std::shared_ptr<WeightPrefix> prefix;   // shared weight-product cache

  static OperatorHandle pseudo_shift(PseudoShiftSpec s) {
    s.validate();
    OperatorHandle h;
    h.kind = OperatorKind::PseudoShift;
    h.pseudo = std::make_shared<PseudoShiftSpec>(std::move(s));
    h.prefix = std::make_shared<WeightPrefix>(h.pseudo->weights);
    return h;
  }
  static OperatorHandle bilateral_shift(BilateralShiftSpec s) {
    s.validate();
    OperatorHandle h;
    h.kind = OperatorKind::Bilateral;
    h.bilateral = std::make_shared<BilateralShiftSpec>(std::move(s));
    h.prefix = std::make_shared<WeightPrefix>(h.bilateral->weights);
    return h;
  }
  static OperatorHandle direct_sum_id(const OperatorHandle& in) {
    require(in.kind != OperatorKind::DirectSumId, ErrorKind::InvalidArgument,
            "direct-sum nesting depth must be <= 1");
    OperatorHandle h;
    h.kind = OperatorKind::DirectSumId;
    h.inner = std::make_shared<OperatorHandle>(in);
    return h;
  }

  SpaceSpec space() const {
    switch (kind) {
      case OperatorKind::PseudoShift:
        return pseudo->space;
      case OperatorKind::Bilateral:
        return SpaceSpec::lp_z(bilateral->p);
      case OperatorKind::DirectSumId:
        return SpaceSpec::sum_with_c(inner->space());
    }
    return SpaceSpec::lp(2.0);
  }

  double weight_bound() const {
    switch (kind) {
      case OperatorKind::PseudoShift:
        return pseudo->weight_bound;
      case OperatorKind::Bilateral:
        return bilateral->weight_bound;
      case OperatorKind::DirectSumId:
        return std::max(1.0, inner->weight_bound());
    }
    return 1.0;
  }
};

namespace detail {

inline void check_pseudo_domain(const SparseVector& v) {
  require(v.domain() == IndexDomain::NonNegative, ErrorKind::Conformance,
          "pseudo-shift input must be N0-indexed");
  if (!v.empty() && v.min_index() < 1) {
    fail(ErrorKind::Conformance,
         "pseudo-shift coordinates start at 1; index 0 is outside the "
         "operator's domain");
  }
}

inline void check_bilateral_domain(const SparseVector& v) {
  require(v.domain() == IndexDomain::Integers, ErrorKind::Conformance,
          "bilateral shift input must be Z-indexed");
}

}  // namespace detail

// -------- single application ------------------------------------------------

inline SparseVector apply_T(const OperatorHandle& op, const SparseVector& v);

inline DirectSumVector apply_T(const OperatorHandle& op,
                               const DirectSumVector& v) {
  require(op.kind == OperatorKind::DirectSumId, ErrorKind::Conformance,
          "direct-sum pair supplied to a plain shift");
  return DirectSumVector{apply_T(*op.inner, v.x), v.lambda};
}

inline SparseVector apply_T(const OperatorHandle& op, const SparseVector& v) {
  switch (op.kind) {
    case OperatorKind::PseudoShift: {
      detail::check_pseudo_domain(v);
      const auto& ps = *op.pseudo;
      SparseVector out(IndexDomain::NonNegative);
      for (const auto& [s, z] : v.entries()) {
        const std::int64_t n = ps.phi.invert(s);
        if (n == 0) continue;  // s not in range(phi): the entry dies
        out.set(n, ps.weights.w(s) * z);
      }
      return out;
    }
    case OperatorKind::Bilateral: {
      detail::check_bilateral_domain(v);
      const auto& bs = *op.bilateral;
      SparseVector out(IndexDomain::Integers);
      for (const auto& [k, z] : v.entries()) {
        out.set(k - 1, bs.weights.w(k) * z);
      }
      return out;
    }
    case OperatorKind::DirectSumId:
      fail(ErrorKind::Conformance, "plain vector supplied to a direct sum");
  }
  return v;
}

inline SparseVector apply_S(const OperatorHandle& op, const SparseVector& v);

inline DirectSumVector apply_S(const OperatorHandle& op,
                               const DirectSumVector& v) {
  require(op.kind == OperatorKind::DirectSumId, ErrorKind::Conformance,
          "direct-sum pair supplied to a plain shift");
  return DirectSumVector{apply_S(*op.inner, v.x), v.lambda};
}

inline SparseVector apply_S(const OperatorHandle& op, const SparseVector& v) {
  switch (op.kind) {
    case OperatorKind::PseudoShift: {
      detail::check_pseudo_domain(v);
      const auto& ps = *op.pseudo;
      SparseVector out(IndexDomain::NonNegative);
      for (const auto& [n, z] : v.entries()) {
        const std::int64_t t = ps.phi.eval(n);
        out.set(t, z / ps.weights.w(t));
      }
      return out;
    }
    case OperatorKind::Bilateral: {
      detail::check_bilateral_domain(v);
      const auto& bs = *op.bilateral;
      SparseVector out(IndexDomain::Integers);
      for (const auto& [k, z] : v.entries()) {
        out.set(k + 1, z / bs.weights.w(k + 1));
      }
      return out;
    }
    case OperatorKind::DirectSumId:
      fail(ErrorKind::Conformance, "plain vector supplied to a direct sum");
  }
  return v;
}

// -------- powers on the basis decomposition ---------------------------------

// log coefficient and destination index of T^m e_s (pseudo-shift), or
// "dead" when s leaves range(phi^m).
struct BasisImage {
  bool alive = false;
  std::int64_t index = 0;
  double log_coeff = 0.0;  // weights are positive; no phase change
};

inline BasisImage pseudo_T_power_basis(const PseudoShiftSpec& ps,
                                       const WeightPrefix& wp, std::int64_t s,
                                       std::int64_t m) {
  BasisImage r;
  std::int64_t cur = s;
  double lc = 0.0;
  if (ps.phi.kind == PhiSpec::Kind::Affine && ps.phi.offset == 1) {
    // backward-shift family: trajectory is s, s-1, ..., s-m
    if (s - m < 1) return r;
    lc = wp.range_pos(s - m + 1, s);
    cur = s - m;
  } else {
    for (std::int64_t q = 0; q < m; ++q) {
      const std::int64_t prev = ps.phi.invert(cur);
      if (prev == 0) return r;
      lc += ps.weights.log_w(cur);
      cur = prev;
    }
  }
  r.alive = true;
  r.index = cur;
  r.log_coeff = lc;
  return r;
}

inline BasisImage pseudo_S_power_basis(const PseudoShiftSpec& ps,
                                       const WeightPrefix& wp, std::int64_t n,
                                       std::int64_t m) {
  BasisImage r;
  r.alive = true;
  if (ps.phi.kind == PhiSpec::Kind::Affine && ps.phi.offset == 1) {
    r.index = n + m;
    r.log_coeff = -wp.range_pos(n + 1, n + m);
    return r;
  }
  std::int64_t cur = n;
  double lc = 0.0;
  for (std::int64_t q = 0; q < m; ++q) {
    cur = ps.phi.eval(cur);
    require(cur < kPhiRangeLimit, ErrorKind::NumericRange,
            "phi iterate exceeds 2^62");
    lc -= ps.weights.log_w(cur);
  }
  r.index = cur;
  r.log_coeff = lc;
  return r;
}

inline BasisImage bilateral_T_power_basis(const WeightPrefix& wp,
                                          std::int64_t k, std::int64_t m) {
  // T^m e_k = (prod_{i=k-m+1..k} w_i) e_{k-m}
  BasisImage r;
  r.alive = true;
  r.index = k - m;
  r.log_coeff = wp.range_z(k - m, k);
  return r;
}

inline BasisImage bilateral_S_power_basis(const WeightPrefix& wp,
                                          std::int64_t k, std::int64_t m) {
  // S^m e_k = (prod_{i=k+1..k+m} w_i)^{-1} e_{k+m}
  BasisImage r;
  r.alive = true;
  r.index = k + m;
  r.log_coeff = -wp.range_z(k, k + m);
  return r;
}

inline constexpr std::int64_t kMaxPower = 1000000;

inline BasisImage power_basis(const OperatorHandle& op, bool forward,
                              std::int64_t index, std::int64_t m) {
  if (op.kind == OperatorKind::PseudoShift) {
    return forward ? pseudo_T_power_basis(*op.pseudo, *op.prefix, index, m)
                   : pseudo_S_power_basis(*op.pseudo, *op.prefix, index, m);
  }
  return forward ? bilateral_T_power_basis(*op.prefix, index, m)
                 : bilateral_S_power_basis(*op.prefix, index, m);
}

namespace detail {

inline SparseVector apply_power(const OperatorHandle& op,
                                const SparseVector& v, std::int64_t m,
                                bool forward) {
  require(m >= 0 && m <= kMaxPower, ErrorKind::InvalidArgument,
          "power must lie in [0, 1e6]");
  if (op.kind == OperatorKind::PseudoShift) {
    check_pseudo_domain(v);
  } else {
    check_bilateral_domain(v);
  }
  if (m == 0) return v;  // T^0 x = x
  SparseVector out(v.domain());
  for (const auto& [i, z] : v.entries()) {
    const BasisImage b = power_basis(op, forward, i, m);
    if (!b.alive) continue;
    const LogComplex c = LogComplex::from_complex(z).scale_log(b.log_coeff);
    if (c.is_zero()) continue;
    require(c.materializable(), ErrorKind::NumericRange,
            "weight product overflows the double range; keep to log domain");
    Complex w = c.to_complex();
    if (std::abs(w) > 0.0) out.set(b.index, w);
  }
  return out;
}

}  // namespace detail

inline SparseVector apply_T_power(const OperatorHandle& op,
                                  const SparseVector& v, std::int64_t m) {
  if (op.kind == OperatorKind::DirectSumId) {
    fail(ErrorKind::Conformance, "plain vector supplied to a direct sum");
  }
  return detail::apply_power(op, v, m, true);
}

inline SparseVector apply_S_power(const OperatorHandle& op,
                                  const SparseVector& v, std::int64_t m) {
  if (op.kind == OperatorKind::DirectSumId) {
    fail(ErrorKind::Conformance, "plain vector supplied to a direct sum");
  }
  return detail::apply_power(op, v, m, false);
}

inline DirectSumVector apply_T_power(const OperatorHandle& op,
                                     const DirectSumVector& v, std::int64_t m) {
  require(op.kind == OperatorKind::DirectSumId, ErrorKind::Conformance,
          "direct-sum pair supplied to a plain shift");
  return DirectSumVector{apply_T_power(*op.inner, v.x, m), v.lambda};
}

inline DirectSumVector apply_S_power(const OperatorHandle& op,
                                     const DirectSumVector& v, std::int64_t m) {
  require(op.kind == OperatorKind::DirectSumId, ErrorKind::Conformance,
          "direct-sum pair supplied to a plain shift");
  return DirectSumVector{apply_S_power(*op.inner, v.x, m), v.lambda};
}

// log ||T^m y|| and log ||S^m y|| without materializing coefficients.
inline double log_norm_T_power(const OperatorHandle& op, const SparseVector& y,
                               std::int64_t m, const SpaceSpec& space) {
  std::vector<double> lmods;
  for (const auto& [i, z] : y.entries()) {
    const BasisImage b = power_basis(op, true, i, m);
    if (!b.alive) continue;
    lmods.push_back(std::log(std::abs(z)) + b.log_coeff);
  }
  if (space.kind == SpaceKind::C0_N) return log_norm_sup(lmods);
  return log_norm_p(lmods, space.p);
}

inline double log_norm_S_power(const OperatorHandle& op, const SparseVector& y,
                               std::int64_t m, const SpaceSpec& space) {
  std::vector<double> lmods;
  for (const auto& [i, z] : y.entries()) {
    const BasisImage b = power_basis(op, false, i, m);
    lmods.push_back(std::log(std::abs(z)) + b.log_coeff);
  }
  if (space.kind == SpaceKind::C0_N) return log_norm_sup(lmods);
  return log_norm_p(lmods, space.p);
}

// -------- preset catalog -----------------------------------------------------

// cor22c:        unilateral backward shift on lp(N), w_k = ((k+1)/k)^{1/p}
// prop59:        bilateral shift on l2(Z), w_k = eta (k > 0) else 1, eta = 2
// eta-bilateral: the same shape with a free eta parameter
// tu:            unilateral pseudo-shift with phi(n) = n+1 and
//                w = (u_1, u_1, u_2, u_3, ...) for a summable u
// geometric:     unilateral backward shift with constant weight c
inline OperatorHandle make_cor22c(double p) {
  PseudoShiftSpec s;
  s.phi = PhiSpec::affine(1);
  s.weights = WeightRule::cor22c(p);
  s.space = SpaceSpec::lp(p);
  s.weight_bound = std::pow(2.0, 1.0 / p) + 1e-9;
  return OperatorHandle::pseudo_shift(s);
}

inline OperatorHandle make_eta_bilateral(double eta, double p = 2.0) {
  BilateralShiftSpec s;
  s.weights = WeightRule::eta_step(eta);
  s.p = p;
  s.weight_bound = eta;
  return OperatorHandle::bilateral_shift(s);
}

inline OperatorHandle make_prop59(double eta = 2.0) {
  return make_eta_bilateral(eta, 2.0);
}

inline OperatorHandle make_geometric(double c, const SpaceSpec& space) {
  PseudoShiftSpec s;
  s.phi = PhiSpec::affine(1);
  s.weights = WeightRule::constant(c);
  s.space = space;
  s.weight_bound = c;
  return OperatorHandle::pseudo_shift(s);
}

inline OperatorHandle make_tu(double u0, double uratio, const SpaceSpec& space) {
  PseudoShiftSpec s;
  s.phi = PhiSpec::affine(1);
  s.weights = WeightRule::tu_geometric(u0, uratio);
  s.space = space;
  s.weight_bound = u0 + 1e-12;
  return OperatorHandle::pseudo_shift(s);
}

}  // namespace lindyn

#endif  // LINDYN_OPERATORS_HPP
