#pragma once

// Domain types shared by the decision engine and the solver: exact rational
// time points, the nonlocal condition itself, and dense complex polynomials.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "nonlocal/error.hpp"

namespace nonlocal {

using Complex = std::complex<double>;
using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

inline constexpr double kPi = 3.14159265358979323846;

inline bool is_finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

// ---------------------------------------------------------------------------
// Rational time points
// ---------------------------------------------------------------------------

/// Reduced fraction num/den with den > 0.
struct RationalTime {
  std::int64_t num = 0;
  std::int64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  BigRational exact() const { return BigRational(BigInt(num), BigInt(den)); }

  friend bool operator==(const RationalTime&, const RationalTime&) = default;
};

inline RationalTime normalize_rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw InvalidInput("rational time with zero denominator");
  BigInt n(num), d(den);
  if (d < 0) {
    n = -n;
    d = -d;
  }
  const BigInt g = boost::multiprecision::gcd(boost::multiprecision::abs(n), d);
  if (g > 1) {
    n /= g;
    d /= g;
  }
  constexpr auto lim = std::numeric_limits<std::int64_t>::max();
  if (boost::multiprecision::abs(n) > lim || d > lim)
    throw InvalidInput("rational time does not fit in 64-bit integers");
  return RationalTime{static_cast<std::int64_t>(n), static_cast<std::int64_t>(d)};
}

/// Continued-fraction convergents of t with denominators <= max_den, ordered by
/// increasing accuracy. The expansion runs on the exact binary value of t, so a
/// double that is itself a short fraction (0.5, 1.5, 0.1) terminates exactly.
/// Convergents are the best approximations of the second kind, hence the last
/// element is the best such approximation within the denominator limit.
inline std::vector<RationalTime> rationalize(double t, std::int64_t max_den) {
  if (!(t > 0.0) || !std::isfinite(t)) throw InvalidInput("rationalize: time must be positive and finite");
  if (max_den < 1) throw InvalidInput("rationalize: max_den must be >= 1");

  int exponent = 0;
  const double mantissa = std::frexp(t, &exponent);
  // t = m * 2^(exponent - 53) with integral m.
  BigInt num(static_cast<std::int64_t>(std::ldexp(mantissa, 53)));
  BigInt den(1);
  const int shift = exponent - 53;
  if (shift >= 0)
    num <<= shift;
  else
    den <<= -shift;

  std::vector<RationalTime> out;
  BigInt p_prev(0), q_prev(1), p(1), q(0);
  // Euclid on num/den; each quotient extends the convergent recurrence.
  while (den != 0) {
    const BigInt a = num / den;
    const BigInt rem = num - a * den;
    const BigInt p_next = a * p + p_prev;
    const BigInt q_next = a * q + q_prev;
    if (q_next > max_den) break;
    p_prev = p;
    q_prev = q;
    p = p_next;
    q = q_next;
    if (p > std::numeric_limits<std::int64_t>::max()) break;
    // t < 1 opens with 0/1, which is not a usable time.
    if (p != 0) out.push_back(RationalTime{static_cast<std::int64_t>(p), static_cast<std::int64_t>(q)});
    num = den;
    den = rem;
  }
  if (out.empty()) throw InvalidInput("rationalize: no convergent fits the denominator limit");
  return out;
}

/// How a real-valued time point is replaced by rationals.
struct RationalizationPolicy {
  std::int64_t max_den = 10000;
  std::size_t depth = 64;  // cap on the number of convergents taken from the expansion

  friend bool operator==(const RationalizationPolicy&, const RationalizationPolicy&) = default;
};

/// A time point: either an exact rational, or a real carrying its own
/// rationalization policy and the resulting convergent sequence.
class TimePoint {
 public:
  static TimePoint exact(RationalTime r) {
    if (r.den <= 0) throw InvalidInput("time point denominator must be positive");
    TimePoint tp;
    tp.rational_ = normalize_rational(r.num, r.den);
    tp.value_ = tp.rational_->value();
    return tp;
  }

  static TimePoint exact(std::int64_t num, std::int64_t den) { return exact(normalize_rational(num, den)); }

  /// Reals whose best convergent reproduces the double exactly are stored as
  /// exact rationals (1.5 -> 3/2); every other real keeps its convergents.
  static TimePoint from_real(double t, RationalizationPolicy policy = {}) {
    if (policy.depth == 0) throw InvalidInput("rationalization depth must be >= 1");
    auto conv = rationalize(t, policy.max_den);
    TimePoint tp;
    tp.value_ = t;
    tp.policy_ = policy;
    if (conv.back().value() == t) {
      tp.rational_ = conv.back();
      return tp;
    }
    if (conv.size() > policy.depth) conv.resize(policy.depth);
    tp.convergents_ = std::move(conv);
    return tp;
  }

  bool is_exact() const { return rational_.has_value(); }
  double value() const { return value_; }

  const RationalTime& rational() const {
    if (!rational_) throw ContractViolation("time point is irrational; rationalize it first");
    return *rational_;
  }

  const std::vector<RationalTime>& convergents() const { return convergents_; }
  const std::optional<RationalizationPolicy>& policy() const { return policy_; }

 private:
  TimePoint() = default;

  double value_ = 0.0;
  std::optional<RationalTime> rational_;
  std::optional<RationalizationPolicy> policy_;
  std::vector<RationalTime> convergents_;
};

namespace detail {

// Strict a < b, exact when both are rational.
inline bool time_less(const TimePoint& a, const TimePoint& b) {
  if (a.is_exact() && b.is_exact()) {
    const auto& x = a.rational();
    const auto& y = b.rational();
    return BigInt(x.num) * y.den < BigInt(y.num) * x.den;
  }
  return a.value() < b.value();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Nonlocal condition  psi(0) + sum_k alpha_k psi(t_k) = psi_1
// ---------------------------------------------------------------------------

class NonlocalSpec {
 public:
  NonlocalSpec(std::vector<TimePoint> times, std::vector<Complex> alphas, double strip_d)
      : times_(std::move(times)), alphas_(std::move(alphas)), strip_d_(strip_d) {
    if (times_.empty()) throw InvalidInput("nonlocal condition needs at least one time point");
    if (times_.size() != alphas_.size())
      throw InvalidInput("times and alphas must have the same length");
    if (!(strip_d_ >= 0.0) || !std::isfinite(strip_d_))
      throw InvalidInput("strip half-height d must be finite and nonnegative");
    for (const auto& a : alphas_)
      if (!is_finite(a)) throw InvalidInput("alpha coefficients must be finite");
    if (!(times_.front().value() > 0.0)) throw InvalidInput("time points must be positive");
    if (times_.front().is_exact() && times_.front().rational().num <= 0)
      throw InvalidInput("time points must be positive");
    for (std::size_t k = 1; k < times_.size(); ++k)
      if (!detail::time_less(times_[k - 1], times_[k]))
        throw InvalidInput("time points must be strictly increasing");
  }

  static NonlocalSpec rational(const std::vector<RationalTime>& times, std::vector<Complex> alphas,
                               double strip_d) {
    std::vector<TimePoint> tp;
    tp.reserve(times.size());
    for (const auto& t : times) tp.push_back(TimePoint::exact(t));
    return NonlocalSpec(std::move(tp), std::move(alphas), strip_d);
  }

  std::size_t size() const { return times_.size(); }
  const std::vector<TimePoint>& times() const { return times_; }
  const std::vector<Complex>& alphas() const { return alphas_; }
  double strip_d() const { return strip_d_; }

  bool all_exact() const {
    return std::all_of(times_.begin(), times_.end(), [](const TimePoint& t) { return t.is_exact(); });
  }

  std::vector<RationalTime> rational_times() const {
    std::vector<RationalTime> out;
    out.reserve(times_.size());
    for (const auto& t : times_) out.push_back(t.rational());
    return out;
  }

  double last_time() const { return times_.back().value(); }

 private:
  std::vector<TimePoint> times_;
  std::vector<Complex> alphas_;
  double strip_d_;
};

// ---------------------------------------------------------------------------
// Polynomials
// ---------------------------------------------------------------------------

/// P(u) = sum a_k u^k, ascending coefficients, exact-zero leading terms trimmed.
class ComplexPolynomial {
 public:
  explicit ComplexPolynomial(std::vector<Complex> coeffs) : a_(std::move(coeffs)) {
    for (const auto& c : a_)
      if (!is_finite(c)) throw InvalidInput("polynomial coefficients must be finite");
    while (!a_.empty() && a_.back() == Complex(0.0)) a_.pop_back();
    if (a_.empty()) throw InvalidInput("the zero polynomial has no degree");
  }

  ComplexPolynomial(std::initializer_list<Complex> coeffs) : ComplexPolynomial(std::vector<Complex>(coeffs)) {}

  std::size_t degree() const { return a_.size() - 1; }
  const std::vector<Complex>& coeffs() const { return a_; }
  Complex operator[](std::size_t k) const { return k < a_.size() ? a_[k] : Complex(0.0); }
  Complex leading() const { return a_.back(); }

  Complex operator()(Complex u) const {
    Complex acc(0.0);
    for (auto it = a_.rbegin(); it != a_.rend(); ++it) acc = acc * u + *it;
    return acc;
  }

  /// Value and first derivative by a single Horner pass.
  std::pair<Complex, Complex> eval_with_derivative(Complex u) const {
    Complex p(0.0), dp(0.0);
    for (auto it = a_.rbegin(); it != a_.rend(); ++it) {
      dp = dp * u + p;
      p = p * u + *it;
    }
    return {p, dp};
  }

  /// u^N P(1/u): coefficients a_{N-k}.
  ComplexPolynomial reversed() const { return ComplexPolynomial(std::vector<Complex>(a_.rbegin(), a_.rend())); }

  /// P(rho * u).
  ComplexPolynomial scaled(double rho) const {
    std::vector<Complex> b(a_);
    double pw = 1.0;
    for (auto& c : b) {
      c *= pw;
      pw *= rho;
    }
    return ComplexPolynomial(std::move(b));
  }

  double coefficient_norm() const {
    double s = 0.0;
    for (const auto& c : a_) s += std::norm(c);
    return std::sqrt(s);
  }

 private:
  std::vector<Complex> a_;
};

/// r(u) = 1 + sum_k alpha_k u^{c_k} together with the scale Q (c_k = Q t_k).
/// A vanishing trailing alpha lowers the degree below c_n.
struct ReducedPolynomial {
  ComplexPolynomial poly;
  BigRational q_scale;
  std::vector<std::uint64_t> exponents;

  double q() const { return q_scale.convert_to<double>(); }
};

}  // namespace nonlocal
