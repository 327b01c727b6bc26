// Log-domain scalar helpers.
//
// Weight products such as eta^n or prod((k+1)/k)^(1/p) over 1e5 iterates
// leave the double range long before the quantities of interest (ratios,
// norms of residuals) do.  Everything that multiplies many weights works on
// log-modulus + argument pairs and only rematerializes at the end.

#ifndef LINDYN_LOGSCALE_HPP
#define LINDYN_LOGSCALE_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace lindyn {

using Complex = std::complex<double>;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();

// exp(lmod) stays a normal double below this; above ~709.78 it overflows.
inline constexpr double kLogOverflowLimit = 709.0;
inline constexpr double kLogUnderflowLimit = -708.0;

inline bool is_finite(const Complex& z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}

// log(exp(a) + exp(b)) for magnitudes; -inf encodes zero.
inline double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = a > b ? a : b;
  const double lo = a > b ? b : a;
  return hi + std::log1p(std::exp(lo - hi));
}

// Sequential log-sum-exp accumulator for nonnegative magnitudes.
struct LogSum {
  double lsum = kNegInf;
  void add(double l) { lsum = log_add(lsum, l); }
  double value() const { return lsum; }
  double linear() const { return std::exp(lsum); }
};

// Neumaier-compensated summation.
struct CompensatedSum {
  double sum = 0.0;
  double comp = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + comp; }
};

// Complex number in log-polar form: z = exp(lmod) * e^{i arg}.
// Zero is lmod == -inf (arg irrelevant, kept 0).
struct LogComplex {
  double lmod = kNegInf;
  double arg = 0.0;

  LogComplex() = default;
  LogComplex(double lmod_, double arg_) : lmod(lmod_), arg(arg_) {}

  static LogComplex zero() { return LogComplex(); }
  static LogComplex one() { return LogComplex(0.0, 0.0); }

  static LogComplex from_complex(const Complex& z) {
    const double m = std::abs(z);
    if (m == 0.0) return zero();
    return LogComplex(std::log(m), std::arg(z));
  }
  static LogComplex from_log_modulus(double l) { return LogComplex(l, 0.0); }

  bool is_zero() const { return lmod == kNegInf; }
  bool materializable() const { return lmod < kLogOverflowLimit; }

  // Underflow quietly becomes 0; callers that care about overflow must
  // check materializable() first.
  Complex to_complex() const {
    if (is_zero()) return Complex(0.0, 0.0);
    const double m = std::exp(lmod);
    return Complex(m * std::cos(arg), m * std::sin(arg));
  }

  LogComplex mul(const LogComplex& o) const {
    if (is_zero() || o.is_zero()) return zero();
    return LogComplex(lmod + o.lmod, arg + o.arg);
  }
  LogComplex div(const LogComplex& o) const {
    return LogComplex(lmod - o.lmod, arg - o.arg);
  }
  LogComplex inv() const { return LogComplex(-lmod, -arg); }
  LogComplex scale_log(double l) const {
    if (is_zero()) return zero();
    return LogComplex(lmod + l, arg);
  }
};

// Accumulates a sum of LogComplex terms.  Terms are combined relative to the
// largest modulus seen, so huge common scales cancel without materializing.
class LogComplexAccumulator {
 public:
  void add(const LogComplex& t) {
    if (t.is_zero()) return;
    if (scale_ == kNegInf) {
      scale_ = t.lmod;
    } else if (t.lmod > scale_ + 40.0) {
      // rescale: previous partial sum is negligible at the new scale only if
      // the gap is extreme; fold it in exactly otherwise
      const double shift = scale_ - t.lmod;
      re_ *= std::exp(shift);
      im_ *= std::exp(shift);
      scale_ = t.lmod;
    }
    const double rel = std::exp(t.lmod - scale_);
    re_ += rel * std::cos(t.arg);
    im_ += rel * std::sin(t.arg);
  }

  LogComplex value() const {
    if (scale_ == kNegInf) return LogComplex::zero();
    const double m = std::hypot(re_, im_);
    if (m == 0.0) return LogComplex::zero();
    return LogComplex(scale_ + std::log(m), std::atan2(im_, re_));
  }

 private:
  double scale_ = kNegInf;
  double re_ = 0.0;
  double im_ = 0.0;
};

// log of the p-norm / sup-norm of a list of magnitudes given in log form.
inline double log_norm_p(const std::vector<double>& lmods, double p) {
  LogSum s;
  for (double l : lmods) {
    if (l != kNegInf) s.add(p * l);
  }
  if (s.value() == kNegInf) return kNegInf;
  return s.value() / p;
}

inline double log_norm_sup(const std::vector<double>& lmods) {
  double m = kNegInf;
  for (double l : lmods) m = std::max(m, l);
  return m;
}

// Deterministic RNG helpers.  std::uniform_real_distribution is
// implementation-defined, so tests and sampling draws use these instead.
struct Rng {
  std::uint64_t state;

  explicit Rng(std::uint64_t seed) : state(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

  std::uint64_t next() {
    // splitmix64
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    // inclusive bounds
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<std::int64_t>(next() % span);
  }
};

// Error taxonomy shared by all modules.  The CLI maps kinds to exit codes.
enum class ErrorKind {
  Conformance,
  InvalidArgument,
  InvalidGamma,
  InsufficientHorizon,
  NumericRange,
  Generation,
  Construction,
  HypothesisNotMet,
  NotApplicable,
  Parse,
  TruncationBudget,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

inline void require(bool cond, ErrorKind kind, const std::string& msg) {
  if (!cond) fail(kind, msg);
}

}  // namespace lindyn

#endif  // LINDYN_LOGSCALE_HPP
