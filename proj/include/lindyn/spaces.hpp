// Sequence-space vector model: finitely supported complex sequences over
// N0 or Z, the Banach-space norms used throughout (c0 sup norm, lp norms,
// X (+) C sum norm), and the basic linear operations.

#ifndef LINDYN_SPACES_HPP
#define LINDYN_SPACES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <sstream>
#include <vector>

#include "lindyn/logscale.hpp"

namespace lindyn {

enum class IndexDomain { NonNegative, Integers };

// Entries with modulus below this are dropped after additive operations so
// that support stays genuinely finite under cancellation.
inline constexpr double kPruneThreshold = 1e-30;

// Finitely supported complex sequence.  Only nonzero entries are stored;
// the map keeps support sorted, which all sweeps rely on.
class SparseVector {
 public:
  using EntryMap = std::map<std::int64_t, Complex>;

  SparseVector() : domain_(IndexDomain::NonNegative) {}
  explicit SparseVector(IndexDomain d) : domain_(d) {}

  static SparseVector basis(std::int64_t index, IndexDomain d,
                            Complex coeff = Complex(1.0, 0.0)) {
    SparseVector v(d);
    v.set(index, coeff);
    return v;
  }

  IndexDomain domain() const { return domain_; }
  const EntryMap& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::size_t support_size() const { return entries_.size(); }

  std::int64_t min_index() const { return entries_.begin()->first; }
  std::int64_t max_index() const { return entries_.rbegin()->first; }

  Complex at(std::int64_t i) const {
    auto it = entries_.find(i);
    return it == entries_.end() ? Complex(0.0, 0.0) : it->second;
  }

  void set(std::int64_t i, Complex z) {
    check_index(i);
    require(is_finite(z), ErrorKind::InvalidArgument,
            "non-finite coefficient at index " + std::to_string(i));
    if (std::abs(z) == 0.0) {
      entries_.erase(i);
    } else {
      entries_[i] = z;
    }
  }

  void add(std::int64_t i, Complex z) {
    check_index(i);
    auto it = entries_.find(i);
    Complex r = (it == entries_.end()) ? z : it->second + z;
    require(is_finite(r), ErrorKind::NumericRange,
            "coefficient overflow at index " + std::to_string(i));
    if (std::abs(r) < kPruneThreshold) {
      if (it != entries_.end()) entries_.erase(it);
    } else {
      entries_[i] = r;
    }
  }

  SparseVector scaled(Complex a) const {
    SparseVector r(domain_);
    if (std::abs(a) == 0.0) return r;
    for (const auto& [i, z] : entries_) {
      Complex w = a * z;
      require(is_finite(w), ErrorKind::NumericRange, "scale overflow");
      if (std::abs(w) > 0.0) r.entries_[i] = w;
    }
    return r;
  }

  bool same_support_and_close(const SparseVector& o, double tol) const {
    if (entries_.size() != o.entries_.size()) return false;
    auto a = entries_.begin();
    auto b = o.entries_.begin();
    for (; a != entries_.end(); ++a, ++b) {
      if (a->first != b->first) return false;
      if (std::abs(a->second - b->second) > tol) return false;
    }
    return true;
  }

 private:
  void check_index(std::int64_t i) const {
    if (domain_ == IndexDomain::NonNegative && i < 0) {
      fail(ErrorKind::Conformance,
           "negative index " + std::to_string(i) + " in an N0-indexed vector");
    }
  }

  EntryMap entries_;
  IndexDomain domain_;
};

enum class SpaceKind { C0_N, LP_N, LP_Z, DIRECT_SUM_WITH_C };

struct SpaceSpec {
  SpaceKind kind = SpaceKind::LP_N;
  double p = 2.0;                          // LP kinds only
  std::shared_ptr<SpaceSpec> inner;        // direct-sum kind only

  static SpaceSpec c0() { return SpaceSpec{SpaceKind::C0_N, 2.0, nullptr}; }
  static SpaceSpec lp(double p) {
    require(p >= 1.0, ErrorKind::InvalidArgument, "lp space needs p >= 1");
    return SpaceSpec{SpaceKind::LP_N, p, nullptr};
  }
  static SpaceSpec lp_z(double p) {
    require(p >= 1.0, ErrorKind::InvalidArgument, "lp space needs p >= 1");
    return SpaceSpec{SpaceKind::LP_Z, p, nullptr};
  }
  static SpaceSpec sum_with_c(const SpaceSpec& in) {
    require(in.kind != SpaceKind::DIRECT_SUM_WITH_C, ErrorKind::InvalidArgument,
            "direct-sum nesting depth must be <= 1");
    SpaceSpec s;
    s.kind = SpaceKind::DIRECT_SUM_WITH_C;
    s.inner = std::make_shared<SpaceSpec>(in);
    return s;
  }

  bool is_lp() const { return kind == SpaceKind::LP_N || kind == SpaceKind::LP_Z; }
  IndexDomain index_domain() const {
    return kind == SpaceKind::LP_Z ? IndexDomain::Integers
                                   : IndexDomain::NonNegative;
  }
};

// Pair (x, lambda) in X (+) C.
struct DirectSumVector {
  SparseVector x;
  Complex lambda{0.0, 0.0};
};

inline void check_conforms(const SparseVector& v, const SpaceSpec& space) {
  require(space.kind != SpaceKind::DIRECT_SUM_WITH_C, ErrorKind::Conformance,
          "plain vector supplied where a direct-sum pair is required");
  if (space.index_domain() == IndexDomain::NonNegative && !v.empty() &&
      v.min_index() < 0) {
    fail(ErrorKind::Conformance,
         "Z-indexed support in an N0-indexed space (min index " +
             std::to_string(v.min_index()) + ")");
  }
}

inline void check_conforms(const DirectSumVector& v, const SpaceSpec& space) {
  require(space.kind == SpaceKind::DIRECT_SUM_WITH_C, ErrorKind::Conformance,
          "direct-sum pair supplied to a plain sequence space");
  check_conforms(v.x, *space.inner);
}

inline double norm(const SparseVector& v, const SpaceSpec& space) {
  check_conforms(v, space);
  if (space.kind == SpaceKind::C0_N) {
    double m = 0.0;
    for (const auto& [i, z] : v.entries()) m = std::max(m, std::abs(z));
    return m;
  }
  // lp norm, compensated accumulation of |z|^p
  CompensatedSum s;
  for (const auto& [i, z] : v.entries()) {
    s.add(std::pow(std::abs(z), space.p));
  }
  const double t = s.value();
  if (t == 0.0) return 0.0;
  return std::pow(t, 1.0 / space.p);
}

inline double norm(const DirectSumVector& v, const SpaceSpec& space) {
  check_conforms(v, space);
  return norm(v.x, *space.inner) + std::abs(v.lambda);
}

// a*x + y with cancellation pruning.
inline SparseVector axpy(Complex a, const SparseVector& x,
                         const SparseVector& y) {
  require(x.domain() == y.domain(), ErrorKind::Conformance,
          "axpy operands live in different index domains");
  SparseVector r = y;
  if (std::abs(a) == 0.0) return r;
  for (const auto& [i, z] : x.entries()) {
    r.add(i, a * z);
  }
  return r;
}

// || a*u - y ||  evaluated directly over the support union.
inline double scaled_distance(Complex a, const SparseVector& u,
                              const SparseVector& y, const SpaceSpec& space) {
  check_conforms(u, space);
  check_conforms(y, space);
  auto iu = u.entries().begin();
  auto iy = y.entries().begin();
  const bool sup = (space.kind == SpaceKind::C0_N);
  CompensatedSum s;
  double m = 0.0;
  auto feed = [&](Complex d) {
    const double mod = std::abs(d);
    if (sup) {
      m = std::max(m, mod);
    } else {
      s.add(std::pow(mod, space.p));
    }
  };
  while (iu != u.entries().end() || iy != y.entries().end()) {
    if (iy == y.entries().end() ||
        (iu != u.entries().end() && iu->first < iy->first)) {
      feed(a * iu->second);
      ++iu;
    } else if (iu == u.entries().end() || iy->first < iu->first) {
      feed(-iy->second);
      ++iy;
    } else {
      feed(a * iu->second - iy->second);
      ++iu;
      ++iy;
    }
  }
  if (sup) return m;
  const double t = s.value();
  return t == 0.0 ? 0.0 : std::pow(t, 1.0 / space.p);
}

inline Complex inner_product(const SparseVector& y, const SparseVector& u) {
  // <y, u> = sum y_i conj(u_i)
  CompensatedSum re, im;
  auto iy = y.entries().begin();
  auto iu = u.entries().begin();
  while (iy != y.entries().end() && iu != u.entries().end()) {
    if (iy->first < iu->first) {
      ++iy;
    } else if (iu->first < iy->first) {
      ++iu;
    } else {
      const Complex t = iy->second * std::conj(iu->second);
      re.add(t.real());
      im.add(t.imag());
      ++iy;
      ++iu;
    }
  }
  return Complex(re.value(), im.value());
}

// Sparse vector whose coefficients are kept in log-polar form.  Constructed
// hypercyclic vectors have coefficients spanning thousands of orders of
// magnitude, so they never exist as plain doubles.
class LogVector {
 public:
  using EntryMap = std::map<std::int64_t, LogComplex>;

  LogVector() : domain_(IndexDomain::NonNegative) {}
  explicit LogVector(IndexDomain d) : domain_(d) {}

  static LogVector lift(const SparseVector& v) {
    LogVector r(v.domain());
    for (const auto& [i, z] : v.entries()) {
      r.entries_[i] = LogComplex::from_complex(z);
    }
    return r;
  }

  IndexDomain domain() const { return domain_; }
  const EntryMap& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  LogComplex at(std::int64_t i) const {
    auto it = entries_.find(i);
    return it == entries_.end() ? LogComplex::zero() : it->second;
  }

  void set(std::int64_t i, const LogComplex& z) {
    if (domain_ == IndexDomain::NonNegative && i < 0) {
      fail(ErrorKind::Conformance, "negative index in N0-indexed log vector");
    }
    if (z.is_zero()) {
      entries_.erase(i);
    } else {
      entries_[i] = z;
    }
  }

  // Entries representable as doubles; coefficients that underflow or
  // overflow the double range are truncated away.
  SparseVector materialize_truncated() const {
    SparseVector r(domain_);
    for (const auto& [i, z] : entries_) {
      if (!z.materializable()) continue;
      Complex c = z.to_complex();
      if (std::abs(c) > 0.0) r.set(i, c);
    }
    return r;
  }

  double log_norm(const SpaceSpec& space) const {
    if (space.kind == SpaceKind::C0_N) {
      double m = kNegInf;
      for (const auto& [i, z] : entries_) m = std::max(m, z.lmod);
      return m;
    }
    LogSum s;
    for (const auto& [i, z] : entries_) s.add(space.p * z.lmod);
    return s.value() == kNegInf ? kNegInf : s.value() / space.p;
  }

 private:
  EntryMap entries_;
  IndexDomain domain_;
};

}  // namespace lindyn

#endif  // LINDYN_SPACES_HPP
