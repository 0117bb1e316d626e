#pragma once

// The characteristic function b(z) = 1 + sum_k alpha_k exp(-i t_k z) and its
// reduction, for rational t_k, to a polynomial r(u) under u = exp(-i z / Q).

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "nonlocal/model.hpp"

namespace nonlocal {

/// The image of the spectral strip |Im z| <= d under u = exp(-iz/Q).
struct StripAnnulus {
  double inner_radius = 1.0;
  double outer_radius = 1.0;

  static StripAnnulus from_strip(double d, double q) {
    return StripAnnulus{std::exp(-d / q), std::exp(d / q)};
  }

  /// Distance of a modulus from the closed annulus (0 inside it).
  double distance(double modulus) const {
    if (modulus < inner_radius) return inner_radius - modulus;
    if (modulus > outer_radius) return modulus - outer_radius;
    return 0.0;
  }

  bool contains(double modulus) const { return modulus >= inner_radius && modulus <= outer_radius; }
};

struct RootImage {
  Complex u;
  Complex principal_z;
  double imag_height = 0.0;  // |Im z|, the same for every branch m
};

inline constexpr double kExpSaturation = 700.0;

inline Complex eval_b(const NonlocalSpec& spec, Complex z) {
  const double t_n = spec.last_time();
  if (std::abs(z.imag()) * t_n > kExpSaturation)
    throw SaturationError("eval_b: |Im z| * t_n exceeds the exp saturation limit");
  Complex acc(1.0);
  const auto& alphas = spec.alphas();
  const auto& times = spec.times();
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double t = times[k].value();
    acc += alphas[k] * std::exp(Complex(0.0, -t) * z);
  }
  return acc;
}

struct ScaledExponents {
  BigRational q;
  std::vector<std::uint64_t> exponents;
};

/// Q = LCM(den) / GCD(num), c_k = Q t_k, with any residual common factor of
/// the c_k folded back into Q so that gcd(c) = 1.
inline ScaledExponents compute_Q(std::span<const RationalTime> times) {
  if (times.empty()) throw InvalidInput("compute_Q: empty time list");
  BigInt lcm_den(1), gcd_num(0);
  for (const auto& t : times) {
    if (t.den <= 0 || t.num <= 0) throw InvalidInput("compute_Q: times must be positive reduced fractions");
    lcm_den = boost::multiprecision::lcm(lcm_den, BigInt(t.den));
    gcd_num = boost::multiprecision::gcd(gcd_num, BigInt(t.num));
  }
  std::vector<BigInt> c;
  c.reserve(times.size());
  BigInt g(0);
  for (const auto& t : times) {
    // (lcm/den_k) * (num_k/gcd) is integral by construction.
    BigInt ck = (lcm_den / t.den) * (BigInt(t.num) / gcd_num);
    g = boost::multiprecision::gcd(g, ck);
    c.push_back(std::move(ck));
  }
  ScaledExponents out;
  out.q = BigRational(lcm_den, gcd_num * g);
  out.exponents.reserve(c.size());
  for (auto& ck : c) {
    ck /= g;
    if (ck > std::numeric_limits<std::uint64_t>::max())
      throw InvalidInput("compute_Q: exponent exceeds 64-bit range");
    out.exponents.push_back(static_cast<std::uint64_t>(ck));
  }
  return out;
}

struct Reduction {
  ReducedPolynomial reduced;
  StripAnnulus annulus;
};

inline Reduction reduce_to_polynomial(const NonlocalSpec& spec) {
  if (!spec.all_exact())
    throw ContractViolation("reduce_to_polynomial: irrational time point present; rationalize first");
  const auto times = spec.rational_times();
  auto scaled = compute_Q(times);
  const std::uint64_t top = scaled.exponents.back();
  if (top >= std::numeric_limits<std::size_t>::max() / sizeof(Complex))
    throw InvalidInput("reduce_to_polynomial: degree too large to allocate");
  std::vector<Complex> coeffs(static_cast<std::size_t>(top) + 1, Complex(0.0));
  coeffs[0] = 1.0;
  for (std::size_t k = 0; k < spec.size(); ++k) coeffs[scaled.exponents[k]] += spec.alphas()[k];
  ReducedPolynomial reduced{ComplexPolynomial(std::move(coeffs)), scaled.q, std::move(scaled.exponents)};
  const double q = reduced.q();
  return Reduction{std::move(reduced), StripAnnulus::from_strip(spec.strip_d(), q)};
}

/// Preimage z of u under u = exp(-iz/Q) on branch m:
///   z = Q [2 pi m - Arg(u) + i ln|u|].
inline Complex map_root_back(Complex u, double q, std::int64_t m) {
  if (u == Complex(0.0)) throw DomainError("map_root_back: exp(-iz/Q) never vanishes");
  return q * Complex(2.0 * kPi * static_cast<double>(m) - std::arg(u), std::log(std::abs(u)));
}

inline Complex map_root_back(Complex u, const BigRational& q, std::int64_t m) {
  return map_root_back(u, q.convert_to<double>(), m);
}

inline RootImage root_image(Complex u, double q) {
  const Complex z = map_root_back(u, q, 0);
  return RootImage{u, z, std::abs(z.imag())};
}

/// Self-test of the identity b(z) = r(exp(-iz/Q)); returns the largest
/// relative discrepancy over the sample points.
inline double reduction_identity_error(const NonlocalSpec& spec, std::span<const Complex> zs) {
  const auto red = reduce_to_polynomial(spec);
  const double q = red.reduced.q();
  double worst = 0.0;
  for (const auto& z : zs) {
    const Complex lhs = eval_b(spec, z);
    const Complex rhs = red.reduced.poly(std::exp(Complex(0.0, -1.0) * z / q));
    double scale = 1.0;
    for (std::size_t k = 0; k < spec.size(); ++k)
      scale += std::abs(spec.alphas()[k]) * std::exp(spec.times()[k].value() * z.imag());
    worst = std::max(worst, std::abs(lhs - rhs) / scale);
  }
  return worst;
}

}  // namespace nonlocal
