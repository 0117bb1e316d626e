#pragma once

// Well-posedness verdicts for the nonlocal problem. Sufficient-only tests can
// prove WellPosed or stay Undecided; only the Schur-Cohn annulus test (and
// the two-point closed form) can declare IllPosed.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nonlocal/characteristic.hpp"
#include "nonlocal/model.hpp"
#include "nonlocal/rootlocus.hpp"

namespace nonlocal {

enum class Decision { WellPosed, IllPosed, Undecided };

enum class Criterion {
  ClassicalSum,
  TwoPointClosedForm,
  BoundMilovanovic,
  BoundFujiwara,
  BoundLinden,
  SchurCohnExact,
  ConvergentSequence,
};

inline std::string_view to_string(Decision d) {
  switch (d) {
    case Decision::WellPosed: return "WellPosed";
    case Decision::IllPosed: return "IllPosed";
    case Decision::Undecided: return "Undecided";
  }
  return "?";
}

inline std::string_view to_string(Criterion c) {
  switch (c) {
    case Criterion::ClassicalSum: return "ClassicalSum";
    case Criterion::TwoPointClosedForm: return "TwoPointClosedForm";
    case Criterion::BoundMilovanovic: return "BoundMilovanovic";
    case Criterion::BoundFujiwara: return "BoundFujiwara";
    case Criterion::BoundLinden: return "BoundLinden";
    case Criterion::SchurCohnExact: return "SchurCohnExact";
    case Criterion::ConvergentSequence: return "ConvergentSequence";
  }
  return "?";
}

inline Criterion criterion_for(BoundMethod m) {
  switch (m) {
    case BoundMethod::MilovanovicSQ: return Criterion::BoundMilovanovic;
    case BoundMethod::Fujiwara: return Criterion::BoundFujiwara;
    case BoundMethod::Linden: return Criterion::BoundLinden;
  }
  return Criterion::BoundFujiwara;
}

/// Numeric evidence behind a verdict: named values, plus the offending root
/// (u-plane) when the problem is ill-posed.
struct Witness {
  std::vector<std::pair<std::string, double>> values;
  std::optional<Complex> root;

  std::optional<double> get(std::string_view key) const {
    for (const auto& [k, v] : values)
      if (k == key) return v;
    return std::nullopt;
  }
};

struct ConvergentStep {
  std::vector<RationalTime> times;
  Decision decision = Decision::Undecided;
  Criterion decided_by = Criterion::SchurCohnExact;
};

struct WellPosednessVerdict {
  Decision decision = Decision::Undecided;
  Criterion decided_by = Criterion::SchurCohnExact;
  std::optional<Witness> witness;
  std::optional<std::vector<ConvergentStep>> convergent_trace;
};

struct DecisionOptions {
  double boundary_tol = kDefaultBoundaryTol;
  // Oracle roots for the IllPosed witness are only computed up to this degree.
  std::size_t witness_max_degree = 512;
};

// ---------------------------------------------------------------------------

inline double classical_sum(const NonlocalSpec& spec) {
  double s = 0.0;
  for (std::size_t k = 0; k < spec.size(); ++k)
    s += std::abs(spec.alphas()[k]) * std::exp(spec.strip_d() * spec.times()[k].value());
  return s;
}

/// sum_k |alpha_k| e^{d t_k} <= 1 (sufficient only).
inline bool classical_sufficient(const NonlocalSpec& spec) { return classical_sum(spec) <= 1.0; }

/// Exact for n = 1: well-posed iff |alpha_1| avoids [e^{-t_1 d}, e^{t_1 d}].
inline Decision two_point_exact(Complex alpha1, double t1, double d) {
  if (!(t1 > 0.0)) throw InvalidInput("two_point_exact: t1 must be positive");
  const double m = std::abs(alpha1);
  return (m < std::exp(-t1 * d) || m > std::exp(t1 * d)) ? Decision::WellPosed : Decision::IllPosed;
}

/// Outcome of one modulus-bound method against the strip annulus.
struct BoundOutcome {
  ModulusBounds bounds;
  bool applicable = true;
  bool proves_well_posed = false;
};

inline std::vector<BoundOutcome> bound_outcomes(const ComplexPolynomial& poly, const StripAnnulus& ann,
                                                double milovanovic_s = 2.0) {
  std::vector<BoundOutcome> out;
  if (poly.degree() == 0) return out;
  auto judge = [&](ModulusBounds b) {
    BoundOutcome o{b};
    o.proves_well_posed = b.upper < ann.inner_radius || b.lower > ann.outer_radius;
    return o;
  };
  out.push_back(judge(bound_milovanovic(poly, milovanovic_s)));
  out.push_back(judge(bound_fujiwara(poly)));
  if (poly.degree() >= 2 && poly[0] != Complex(0.0)) {
    out.push_back(judge(bound_linden(poly)));
  } else {
    BoundOutcome o;
    o.bounds.method = BoundMethod::Linden;
    o.applicable = false;
    out.push_back(o);
  }
  return out;
}

inline WellPosednessVerdict bounds_sufficient(const NonlocalSpec& spec, double milovanovic_s = 2.0) {
  const auto red = reduce_to_polynomial(spec);
  const auto& poly = red.reduced.poly;
  WellPosednessVerdict v;
  Witness w;
  w.values = {{"inner_radius", red.annulus.inner_radius}, {"outer_radius", red.annulus.outer_radius}};
  if (poly.degree() == 0) {
    // r = 1 has no roots at all.
    v.decision = Decision::WellPosed;
    v.decided_by = Criterion::BoundMilovanovic;
    v.witness = std::move(w);
    return v;
  }
  v.decision = Decision::Undecided;
  v.decided_by = Criterion::BoundMilovanovic;
  for (const auto& o : bound_outcomes(poly, red.annulus, milovanovic_s)) {
    if (!o.applicable || !o.proves_well_posed) continue;
    v.decision = Decision::WellPosed;
    v.decided_by = criterion_for(o.bounds.method);
    w.values.emplace_back("lower", o.bounds.lower);
    w.values.emplace_back("upper", o.bounds.upper);
    break;
  }
  v.witness = std::move(w);
  return v;
}

/// Normative decision for rational times: Schur-Cohn counts at both annulus radii.
inline WellPosednessVerdict exact_decision(const NonlocalSpec& spec, const DecisionOptions& opt = {}) {
  const auto red = reduce_to_polynomial(spec);
  const auto& poly = red.reduced.poly;
  const auto counts = annulus_counts(poly, red.annulus, opt.boundary_tol);

  WellPosednessVerdict v;
  v.decided_by = Criterion::SchurCohnExact;
  switch (counts.verdict) {
    case AnnulusExclusion::Excluded: v.decision = Decision::WellPosed; break;
    case AnnulusExclusion::Intersects: v.decision = Decision::IllPosed; break;
    case AnnulusExclusion::Boundary: v.decision = Decision::Undecided; break;
  }

  Witness w;
  w.values = {{"inner_radius", red.annulus.inner_radius},
              {"outer_radius", red.annulus.outer_radius},
              {"inside_inner", static_cast<double>(counts.inner.inside)},
              {"inside_outer", static_cast<double>(counts.outer.inside)}};
  if (v.decision == Decision::IllPosed && poly.degree() >= 1 && poly.degree() <= opt.witness_max_degree) {
    try {
      const auto roots = roots_oracle(poly);
      auto best = std::min_element(roots.begin(), roots.end(), [&](Complex a, Complex b) {
        return red.annulus.distance(std::abs(a)) < red.annulus.distance(std::abs(b));
      });
      w.root = *best;
      w.values.emplace_back("root_modulus", std::abs(*best));
      w.values.emplace_back("root_imag_height", root_image(*best, red.reduced.q()).imag_height);
    } catch (const ConvergenceError&) {
      // The verdict stands on the counts alone.
    }
  }
  v.witness = std::move(w);
  return v;
}

namespace detail {

// Sorted, duplicate-free rational spec with the alphas of equal times summed.
inline NonlocalSpec merged_spec(const std::vector<RationalTime>& times, const std::vector<Complex>& alphas,
                                double d) {
  std::vector<std::pair<RationalTime, Complex>> terms;
  for (std::size_t k = 0; k < times.size(); ++k) terms.emplace_back(times[k], alphas[k]);
  auto less = [](const RationalTime& a, const RationalTime& b) { return BigInt(a.num) * b.den < BigInt(b.num) * a.den; };
  std::stable_sort(terms.begin(), terms.end(), [&](const auto& a, const auto& b) { return less(a.first, b.first); });
  std::vector<RationalTime> t;
  std::vector<Complex> a;
  for (const auto& [time, alpha] : terms) {
    if (!t.empty() && t.back() == time) {
      a.back() += alpha;
    } else {
      t.push_back(time);
      a.push_back(alpha);
    }
  }
  return NonlocalSpec::rational(t, std::move(a), d);
}

}  // namespace detail

/// Irrational times: exact_decision along the convergent sequence. Step l
/// substitutes the l-th convergent of every irrational time (clamped to its
/// last one). Substituted times that coincide or swap order are merged and
/// sorted: b(z) = 1 + sum alpha_k e^{-i t_k z} depends only on the multiset
/// of (t_k, alpha_k), so equal times simply add their alphas. WellPosed only
/// if every step is WellPosed; otherwise Undecided with the full trace.
inline WellPosednessVerdict convergent_decision(const NonlocalSpec& spec,
                                                std::optional<RationalizationPolicy> policy = std::nullopt,
                                                const DecisionOptions& opt = {}) {
  std::vector<std::vector<RationalTime>> sequences;
  sequences.reserve(spec.size());
  std::size_t steps = 1;
  bool any_irrational = false;
  for (const auto& t : spec.times()) {
    if (t.is_exact() && !policy) {
      sequences.push_back({t.rational()});
    } else {
      const auto tp = policy ? TimePoint::from_real(t.value(), *policy) : t;
      if (tp.is_exact()) {
        sequences.push_back({tp.rational()});
      } else {
        any_irrational = true;
        sequences.push_back(tp.convergents());
      }
    }
    steps = std::max(steps, sequences.back().size());
  }

  DecisionOptions trace_opt = opt;
  trace_opt.witness_max_degree = 0;

  WellPosednessVerdict v;
  v.decided_by = Criterion::ConvergentSequence;
  std::vector<ConvergentStep> trace;
  bool all_well = true;
  for (std::size_t l = 0; l < steps; ++l) {
    std::vector<RationalTime> times;
    times.reserve(spec.size());
    for (const auto& s : sequences) times.push_back(s[std::min(l, s.size() - 1)]);
    const auto step = exact_decision(detail::merged_spec(times, spec.alphas(), spec.strip_d()), trace_opt);
    all_well = all_well && step.decision == Decision::WellPosed;
    trace.push_back(ConvergentStep{std::move(times), step.decision, step.decided_by});
  }

  if (!any_irrational) {
    // Every time resolved exactly: the single step is the exact decision.
    return exact_decision(detail::merged_spec(trace.front().times, spec.alphas(), spec.strip_d()), opt);
  }
  v.decision = all_well ? Decision::WellPosed : Decision::Undecided;
  Witness w;
  w.values = {{"convergent_steps", static_cast<double>(trace.size())}};
  v.witness = std::move(w);
  v.convergent_trace = std::move(trace);
  return v;
}

/// Normative verdict for any spec: exact for rational times, convergent
/// sequence otherwise.
inline WellPosednessVerdict decide(const NonlocalSpec& spec, const DecisionOptions& opt = {}) {
  if (spec.all_exact()) return exact_decision(spec, opt);
  return convergent_decision(spec, std::nullopt, opt);
}

/// The two displayed inequality systems for 1 + a1 u + a2 u^2 (t = 1, 2),
/// evaluated verbatim on the moduli; returns their disjunction. Kept for
/// figure reproduction and cross-audit; exact_decision is normative.
inline bool three_point_inequalities(double a1, double a2, double d) {
  a1 = std::abs(a1);
  a2 = std::abs(a2);
  const double a1s = a1 * a1, a2s = a2 * a2;
  const bool first = a2s < std::exp(-4.0 * d) &&
                     std::exp(4.0 * d) * a1s * a2s - std::exp(6.0 * d) * a2s * a2s -
                             2.0 * std::exp(4.0 * d) * a2 * (a1s - a2) + a1s <
                         std::exp(-2.0 * d);
  const bool second = a2s > std::exp(4.0 * d) &&
                      std::exp(-4.0 * d) * a1s * a2s - std::exp(-6.0 * d) * a2s * a2s -
                              2.0 * std::exp(-2.0 * d) * a2 * (a1s - a2) + a1s >
                          std::exp(2.0 * d);
  return first || second;
}

}  // namespace nonlocal
