#pragma once

// Root-modulus machinery for ComplexPolynomial: two-sided modulus bounds,
// Schur-Cohn disk counting, the annulus-exclusion predicate built on it, and
// an Aberth-Ehrlich root finder that serves as the independent oracle.

#include <algorithm>
#include <cmath>
#include <string_view>
#include <vector>

#include "nonlocal/characteristic.hpp"
#include "nonlocal/model.hpp"

namespace nonlocal {

enum class BoundMethod { MilovanovicSQ, Fujiwara, Linden };

inline std::string_view to_string(BoundMethod m) {
  switch (m) {
    case BoundMethod::MilovanovicSQ: return "MilovanovicSQ";
    case BoundMethod::Fujiwara: return "Fujiwara";
    case BoundMethod::Linden: return "Linden";
  }
  return "?";
}

/// Every root modulus lies in [lower, upper]. lower == 0 with zero_root set
/// means P(0) = 0 and no positive lower bound exists.
struct ModulusBounds {
  double lower = 0.0;
  double upper = 0.0;
  BoundMethod method = BoundMethod::Fujiwara;
  bool zero_root = false;
};

namespace detail {

inline void require_degree(const ComplexPolynomial& p, std::size_t min_degree, const char* who) {
  if (p.degree() < min_degree)
    throw InvalidInput(std::string(who) + ": polynomial degree too small");
}

// Fujiwara upper bound on the root moduli of a formal coefficient vector
// (a.back() is the leading coefficient and must be nonzero).
inline double fujiwara_upper(const std::vector<Complex>& a) {
  const std::size_t n = a.size() - 1;
  const double lead = std::abs(a[n]);
  double m = std::pow(std::abs(a[0]) / (2.0 * lead), 1.0 / static_cast<double>(n));
  for (std::size_t k = 1; k < n; ++k)
    m = std::max(m, std::pow(std::abs(a[k]) / lead, 1.0 / static_cast<double>(n - k)));
  return 2.0 * m;
}

// Linden's V1 and V2 for a formal coefficient vector a_0..a_N (a_0, a_N != 0);
// both bound 1/|u| from above for every root u.
inline double linden_v1(const std::vector<Complex>& a) {
  const std::size_t n = a.size() - 1;
  const double an = std::abs(a[n]), a0 = std::abs(a[0]);
  double s = 1.0;
  for (std::size_t k = 1; k <= n - 1; ++k) s += std::norm(a[k]) / (an * an);
  return std::cos(kPi / static_cast<double>(n + 1)) + an / (2.0 * a0) * (std::abs(a[1]) / an + std::sqrt(s));
}

inline double linden_v2(const std::vector<Complex>& a) {
  const std::size_t n = a.size() - 1;
  const double an = std::abs(a[n]), a0 = std::abs(a[0]);
  const double r1 = std::abs(a[1]) / a0;
  const double c = std::cos(kPi / static_cast<double>(n));
  double s = 1.0;
  for (std::size_t k = 2; k <= n - 1; ++k) s += std::norm(a[k]) / (an * an);
  const double tail = 1.0 + an / a0 * std::sqrt(s);
  return 0.5 * (r1 + c) + 0.5 * std::sqrt((r1 - c) * (r1 - c) + tail * tail);
}

}  // namespace detail

/// Milovanovic-type Hoelder bound with exponents s, q = s/(s-1):
///   upper = (1 + (M/|a_N|)^q)^(1/q),      M  = (sum_{k<N} |a_k|^s)^(1/s)
///   lower = |a_0| / (|a_0|^q + M'^q)^(1/q), M' = (sum_{k>=1} |a_k|^s)^(1/s)
inline ModulusBounds bound_milovanovic(const ComplexPolynomial& p, double s = 2.0) {
  detail::require_degree(p, 1, "bound_milovanovic");
  if (!(s > 1.0)) throw InvalidInput("bound_milovanovic: s must exceed 1");
  const double q = s / (s - 1.0);
  const auto& a = p.coeffs();
  const std::size_t n = p.degree();
  double m_up = 0.0, m_low = 0.0;
  for (std::size_t k = 0; k < n; ++k) m_up += std::pow(std::abs(a[k]), s);
  for (std::size_t k = 1; k <= n; ++k) m_low += std::pow(std::abs(a[k]), s);
  m_up = std::pow(m_up, 1.0 / s);
  m_low = std::pow(m_low, 1.0 / s);

  ModulusBounds b;
  b.method = BoundMethod::MilovanovicSQ;
  b.upper = std::pow(1.0 + std::pow(m_up / std::abs(a[n]), q), 1.0 / q);
  const double a0 = std::abs(a[0]);
  if (a0 == 0.0) {
    b.zero_root = true;
    b.lower = 0.0;
  } else {
    b.lower = a0 / std::pow(std::pow(a0, q) + std::pow(m_low, q), 1.0 / q);
  }
  return b;
}

/// Fujiwara's bound; the lower side is the reciprocal of the Fujiwara upper
/// bound of the reversed polynomial.
inline ModulusBounds bound_fujiwara(const ComplexPolynomial& p) {
  detail::require_degree(p, 1, "bound_fujiwara");
  const auto& a = p.coeffs();
  ModulusBounds b;
  b.method = BoundMethod::Fujiwara;
  b.upper = detail::fujiwara_upper(a);
  if (a.front() == Complex(0.0)) {
    b.zero_root = true;
    b.lower = 0.0;
  } else {
    const std::vector<Complex> rev(a.rbegin(), a.rend());
    b.lower = 1.0 / detail::fujiwara_upper(rev);
  }
  return b;
}

/// Linden's companion-matrix bounds: max(1/V1, 1/V2) <= |u| <= min(V1', V2'),
/// where V' is V evaluated on the reversed coefficients.
inline ModulusBounds bound_linden(const ComplexPolynomial& p) {
  detail::require_degree(p, 2, "bound_linden");
  const auto& a = p.coeffs();
  if (a.front() == Complex(0.0))
    throw InvalidInput("bound_linden: a_0 = 0; deflate the root at the origin first");
  const std::vector<Complex> rev(a.rbegin(), a.rend());
  ModulusBounds b;
  b.method = BoundMethod::Linden;
  b.lower = std::max(1.0 / detail::linden_v1(a), 1.0 / detail::linden_v2(a));
  b.upper = std::min(detail::linden_v1(rev), detail::linden_v2(rev));
  return b;
}

// ---------------------------------------------------------------------------
// Schur-Cohn counting
// ---------------------------------------------------------------------------

struct DiskCount {
  double radius = 1.0;
  std::size_t inside = 0;
  bool on_boundary = false;
};

inline constexpr double kDefaultBoundaryTol = 1e-10;

/// Number of roots in |u| < radius by the Schur transform recursion
///   T p = conj(p_0) p - p_N p*,  p*(u) = u^N conj(p(1/conj(u))),
/// applied to p(u) = P(radius u). With gamma = |p_0|^2 - |p_N|^2, the count of
/// p equals that of T p for gamma > 0 and N minus it for gamma < 0. A relative
/// |gamma| below boundary_tol flags a possible root on the circle; the flag is
/// cleared when counts at radius (1 -/+ kSchurCohnProbe) agree cleanly.
namespace detail {

inline DiskCount schur_cohn_pass(const ComplexPolynomial& poly, double radius, double boundary_tol) {
  DiskCount result;
  result.radius = radius;

  // Scaled and normalized working copy; scale in log space to survive high degree.
  const auto& a = poly.coeffs();
  std::vector<Complex> p(a.size());
  const double log_r = std::log(radius);
  double log_max = -std::numeric_limits<double>::infinity();
  std::vector<double> logs(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    logs[k] = a[k] == Complex(0.0) ? -std::numeric_limits<double>::infinity()
                                    : std::log(std::abs(a[k])) + static_cast<double>(k) * log_r;
    log_max = std::max(log_max, logs[k]);
  }
  for (std::size_t k = 0; k < a.size(); ++k)
    p[k] = a[k] == Complex(0.0) ? Complex(0.0) : a[k] / std::abs(a[k]) * std::exp(logs[k] - log_max);

  std::size_t zero_roots = 0;
  while (p.size() > 1 && p.front() == Complex(0.0)) {
    p.erase(p.begin());
    ++zero_roots;
  }

  // Forward pass records (degree, sign of gamma); counts unwind afterwards.
  std::vector<std::pair<std::size_t, bool>> steps;
  std::vector<Complex> next;
  bool degenerate = false;
  while (p.size() > 1) {
    const std::size_t n = p.size() - 1;
    const Complex p0 = p.front(), pn = p.back();
    const double gamma = std::norm(p0) - std::norm(pn);
    const double scale = std::norm(p0) + std::norm(pn);
    if (std::abs(gamma) <= boundary_tol * scale) {
      degenerate = true;
      break;
    }
    next.assign(n, Complex(0.0));
    const Complex cp0 = std::conj(p0);
    double mx = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      next[k] = cp0 * p[k] - pn * std::conj(p[n - k]);
      mx = std::max(mx, std::abs(next[k]));
    }
    next[0] = Complex(gamma, 0.0);
    steps.emplace_back(n, gamma > 0.0);
    if (mx == 0.0) {
      degenerate = true;
      break;
    }
    for (auto& c : next) c /= mx;
    while (next.size() > 1 && next.back() == Complex(0.0)) next.pop_back();
    p.swap(next);
  }

  std::size_t count = 0;
  for (auto it = steps.rbegin(); it != steps.rend(); ++it) count = it->second ? count : it->first - count;
  result.inside = count + zero_roots;
  result.on_boundary = degenerate;
  return result;
}

}  // namespace detail

/// Relative radius offset used to resolve a vanishing gamma.
inline constexpr double kSchurCohnProbe = 1e-6;

inline DiskCount schur_cohn_count(const ComplexPolynomial& poly, double radius,
                                  double boundary_tol = kDefaultBoundaryTol) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidInput("schur_cohn_count: radius must be positive");
  auto result = detail::schur_cohn_pass(poly, radius, boundary_tol);
  if (!result.on_boundary) return result;
  // gamma also vanishes for self-inversive polynomials with no root on the
  // circle (u^2 - 2.5u + 1). Equal, clean counts just inside and just outside
  // show the thin shell between them is empty.
  const auto lo = detail::schur_cohn_pass(poly, radius * (1.0 - kSchurCohnProbe), boundary_tol);
  const auto hi = detail::schur_cohn_pass(poly, radius * (1.0 + kSchurCohnProbe), boundary_tol);
  if (!lo.on_boundary && !hi.on_boundary && lo.inside == hi.inside) {
    result.inside = lo.inside;
    result.on_boundary = false;
  }
  return result;
}

enum class AnnulusExclusion { Excluded, Intersects, Boundary };

inline std::string_view to_string(AnnulusExclusion e) {
  switch (e) {
    case AnnulusExclusion::Excluded: return "Excluded";
    case AnnulusExclusion::Intersects: return "Intersects";
    case AnnulusExclusion::Boundary: return "Boundary";
  }
  return "?";
}

struct AnnulusCounts {
  DiskCount inner;
  DiskCount outer;
  AnnulusExclusion verdict = AnnulusExclusion::Excluded;
};

/// No root lies in the closed annulus iff the disk counts at both radii agree.
inline AnnulusCounts annulus_counts(const ComplexPolynomial& p, const StripAnnulus& ann,
                                    double boundary_tol = kDefaultBoundaryTol) {
  AnnulusCounts out;
  if (p.degree() == 0) {
    out.inner.radius = ann.inner_radius;
    out.outer.radius = ann.outer_radius;
    return out;
  }
  out.inner = schur_cohn_count(p, ann.inner_radius, boundary_tol);
  out.outer = ann.outer_radius == ann.inner_radius ? out.inner
                                                   : schur_cohn_count(p, ann.outer_radius, boundary_tol);
  if (out.inner.on_boundary || out.outer.on_boundary)
    out.verdict = AnnulusExclusion::Boundary;
  else if (out.inner.inside != out.outer.inside)
    out.verdict = AnnulusExclusion::Intersects;
  else
    out.verdict = AnnulusExclusion::Excluded;
  return out;
}

inline AnnulusExclusion annulus_exclusion(const ComplexPolynomial& p, const StripAnnulus& ann,
                                          double boundary_tol = kDefaultBoundaryTol) {
  return annulus_counts(p, ann, boundary_tol).verdict;
}

// ---------------------------------------------------------------------------
// Root oracle
// ---------------------------------------------------------------------------

class ConvergenceError : public NumericalFailure {
 public:
  ConvergenceError(const std::string& what, std::vector<Complex> best, double residual)
      : NumericalFailure(what, residual), best_(std::move(best)) {}

  const std::vector<Complex>& best_iterate() const noexcept { return best_; }

 private:
  std::vector<Complex> best_;
};

/// Backward error |P(u)| / sum_k |a_k| |u|^k.
inline double relative_residual(const ComplexPolynomial& p, Complex u) {
  double scale = 0.0;
  const double r = std::abs(u);
  for (auto it = p.coeffs().rbegin(); it != p.coeffs().rend(); ++it) scale = scale * r + std::abs(*it);
  const double v = std::abs(p(u));
  return scale == 0.0 ? v : v / scale;
}

inline constexpr int kOracleIterationCap = 200;

/// All roots with multiplicity, by Aberth-Ehrlich simultaneous iteration from
/// rotated circle guesses of radius |a_0/a_N|^(1/N).
inline std::vector<Complex> roots_oracle(const ComplexPolynomial& poly, double tol = 1e-12) {
  detail::require_degree(poly, 1, "roots_oracle");
  std::vector<Complex> roots;
  std::vector<Complex> c = poly.coeffs();
  while (c.size() > 1 && c.front() == Complex(0.0)) {
    c.erase(c.begin());
    roots.emplace_back(0.0);
  }
  if (c.size() == 1) return roots;
  const Complex lead = c.back();
  for (auto& x : c) x /= lead;
  const ComplexPolynomial p(c);
  const std::size_t n = p.degree();
  if (n == 1) {
    roots.push_back(-c[0]);
    return roots;
  }

  double r0 = std::pow(std::abs(c[0]), 1.0 / static_cast<double>(n));
  if (!(r0 > 0.0) || !std::isfinite(r0)) r0 = 1.0;
  const double offset = kPi * (std::sqrt(2.0) - 1.0) / static_cast<double>(n);
  std::vector<Complex> z(n);
  for (std::size_t j = 0; j < n; ++j)
    z[j] = std::polar(r0, 2.0 * kPi * static_cast<double>(j) / static_cast<double>(n) + offset);

  constexpr double eps = std::numeric_limits<double>::epsilon();
  std::vector<bool> done(n, false);
  for (int iter = 0; iter < kOracleIterationCap; ++iter) {
    bool all_done = true;
    for (std::size_t j = 0; j < n; ++j) {
      if (done[j]) continue;
      const auto [pv, dpv] = p.eval_with_derivative(z[j]);
      if (pv == Complex(0.0) || relative_residual(p, z[j]) <= 0.5 * eps) {
        done[j] = true;
        continue;
      }
      Complex sum(0.0);
      for (std::size_t k = 0; k < n; ++k)
        if (k != j) sum += 1.0 / (z[j] - z[k]);
      const Complex ratio = pv / dpv;
      Complex w = ratio / (1.0 - ratio * sum);
      if (!is_finite(w)) w = Complex(1e-3 * (1.0 + std::abs(z[j])), 1e-3);
      z[j] -= w;
      if (std::abs(w) <= 4.0 * eps * std::abs(z[j]))
        done[j] = true;
      else
        all_done = false;
    }
    if (all_done) break;
  }

  double worst = 0.0;
  for (const auto& u : z) worst = std::max(worst, relative_residual(p, u));
  roots.insert(roots.end(), z.begin(), z.end());
  if (!(worst <= tol))
    throw ConvergenceError("roots_oracle: residual above tolerance after iteration cap", roots, worst);
  return roots;
}

}  // namespace nonlocal
