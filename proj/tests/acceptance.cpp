// Acceptance run: one [PASS]/[FAIL] line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include "nonlocal/nonlocal.hpp"
#include "test_support.hpp"

using namespace nonlocal;
using namespace nonlocal::testing;

namespace {

constexpr double kD = kPi / 40.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome two_point_equivalence() {
  std::mt19937_64 rng(1001);
  std::uniform_real_distribution<double> mod(0.0, 3.0), ang(-kPi, kPi), dd(0.0, 0.5);
  std::uniform_int_distribution<int> num(1, 64), den(1, 16);
  int checked = 0, disagree = 0;
  while (checked < 1000) {
    const auto t = normalize_rational(num(rng), den(rng));
    if (t.value() > 4.0) continue;
    const double d = dd(rng);
    const Complex alpha = std::polar(mod(rng), ang(rng));
    const double lo = std::exp(-t.value() * d), hi = std::exp(t.value() * d);
    if (std::abs(std::abs(alpha) - lo) < 1e-6 || std::abs(std::abs(alpha) - hi) < 1e-6) continue;
    const auto verdict = exact_decision(NonlocalSpec::rational({t}, {alpha}, d));
    disagree += verdict.decision != two_point_exact(alpha, t.value(), d);
    ++checked;
  }
  return {disagree == 0, fmt("%d cases, %d disagreements", checked, disagree)};
}

// The 201 x 201 grid over [-3, 3]^2 for t = (1, 2), d = pi/40, shared by 2 and 3.
struct Grid {
  Axis axis{-3.0, 3.0, 201};
  std::vector<Decision> exact;
  std::vector<bool> classical;
  std::size_t index(std::size_t i, std::size_t j) const { return i * axis.count + j; }
};

const Grid& three_point_grid() {
  static const Grid g = [] {
    Grid g;
    const std::size_t n = g.axis.count;
    g.exact.resize(n * n);
    g.classical.resize(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const auto spec =
            NonlocalSpec::rational({{1, 1}, {2, 1}}, {Complex(g.axis.at(i)), Complex(g.axis.at(j))}, kD);
        g.exact[g.index(i, j)] = exact_decision(spec).decision;
        g.classical[g.index(i, j)] = classical_sufficient(spec);
      }
    return g;
  }();
  return g;
}

Decision decide_at(double a1, double a2) {
  return exact_decision(NonlocalSpec::rational({{1, 1}, {2, 1}}, {Complex(a1), Complex(a2)}, kD)).decision;
}

Outcome three_point_region() {
  const Grid& g = three_point_grid();
  const std::size_t n = g.axis.count;
  const auto ann = StripAnnulus::from_strip(kD, 1.0);

  std::size_t compared = 0, skipped = 0, disagree = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const ComplexPolynomial p({1.0, g.axis.at(i), g.axis.at(j)});
      Decision oracle = Decision::WellPosed;
      double boundary_gap = INFINITY;
      if (p.degree() > 0) {
        for (const auto& u : roots_oracle(p)) {
          const double m = std::abs(u);
          boundary_gap = std::min({boundary_gap, std::abs(m - ann.inner_radius), std::abs(m - ann.outer_radius)});
          if (ann.contains(m)) oracle = Decision::IllPosed;
        }
      }
      if (boundary_gap < 1e-6) {
        ++skipped;
        continue;
      }
      ++compared;
      disagree += g.exact[g.index(i, j)] != oracle;
    }

  // Components of the WellPosed set by 4-neighbour flood fill. The ill-posed
  // band thins below the grid step near the double-root corners (at a2 = 0.84
  // it spans only a1 in [-1.858, -1.833]), so a step between two WellPosed
  // cells only connects them when the segment between them stays WellPosed.
  auto segment_clear = [&](double a1, double a2, double b1, double b2) {
    constexpr int kSub = 16;
    for (int k = 1; k < kSub; ++k) {
      const double s = static_cast<double>(k) / kSub;
      if (decide_at(a1 + s * (b1 - a1), a2 + s * (b2 - a2)) != Decision::WellPosed) return false;
    }
    return true;
  };
  std::vector<int> comp(n * n, -1);
  std::vector<bool> touches_edge;
  for (std::size_t s = 0; s < n * n; ++s) {
    if (comp[s] >= 0 || g.exact[s] != Decision::WellPosed) continue;
    const int id = static_cast<int>(touches_edge.size());
    touches_edge.push_back(false);
    std::queue<std::size_t> q;
    q.push(s);
    comp[s] = id;
    while (!q.empty()) {
      const std::size_t c = q.front();
      q.pop();
      const std::size_t i = c / n, j = c % n;
      if (i == 0 || j == 0 || i + 1 == n || j + 1 == n) touches_edge[id] = true;
      auto visit = [&](std::size_t k) {
        if (comp[k] >= 0 || g.exact[k] != Decision::WellPosed) return;
        if (!segment_clear(g.axis.at(i), g.axis.at(j), g.axis.at(k / n), g.axis.at(k % n))) return;
        comp[k] = id;
        q.push(k);
      };
      if (i > 0) visit(c - n);
      if (i + 1 < n) visit(c + n);
      if (j > 0) visit(c - 1);
      if (j + 1 < n) visit(c + 1);
    }
  }
  const std::size_t mid = n / 2;  // axis.at(100) == 0
  const int origin = comp[g.index(mid, mid)];
  const int top = comp[g.index(mid, n - 1)];  // (0, 3)
  const bool bounded_origin = origin >= 0 && !touches_edge[origin];
  const bool unbounded_top = top >= 0 && touches_edge[top] && top != origin;

  // Along (s, s) the real root -m near -1 reaches the inner radius m = e^{-d}
  // at s = 1 / (m (1 - m)) = 14.32, so the ray is sampled inside the component
  // over s in [1.2, 12].
  // Unboundedness itself is sampled along the steeper ray (k, 3k).
  bool ray_ok = true;
  for (int k = 0; k <= 54; ++k) {
    const double s = 1.2 + 0.2 * k;
    ray_ok = ray_ok && decide_at(s, s) == Decision::WellPosed;
  }
  for (double k : {1.0, 3.0, 10.0, 100.0, 1000.0}) ray_ok = ray_ok && decide_at(k, 3.0 * k) == Decision::WellPosed;
  double crossover = 0.0;
  for (double s = 12.0; s < 20.0 && crossover == 0.0; s += 1e-3)
    if (decide_at(s, s) != Decision::WellPosed) crossover = s;
  const bool top_ok = decide_at(0.0, 3.0) == Decision::WellPosed;
  const bool ill_ok = decide_at(0.0, 1.0) == Decision::IllPosed;

  const bool pass = disagree == 0 && bounded_origin && unbounded_top && ray_ok && top_ok && ill_ok;
  return {pass, fmt("%zu compared, %zu near boundary skipped, %zu disagreements; bounded origin component %s, "
                    "(0,3) WellPosed %s and unbounded %s, ray samples %s (diagonal leaves at s = %.3f), "
                    "(0,1) IllPosed %s",
                    compared, skipped, disagree, bounded_origin ? "yes" : "no", top_ok ? "yes" : "no",
                    unbounded_top ? "yes" : "no", ray_ok ? "WellPosed" : "FAILED", crossover,
                    ill_ok ? "yes" : "no")};
}

Outcome classical_inclusion() {
  const Grid& g = three_point_grid();
  std::size_t violations = 0, classical = 0, strict = 0;
  for (std::size_t k = 0; k < g.exact.size(); ++k) {
    const bool well = g.exact[k] == Decision::WellPosed;
    classical += g.classical[k];
    violations += g.classical[k] && !well;
    strict += well && !g.classical[k];
  }
  return {violations == 0 && strict >= 100,
          fmt("%zu classical points, %zu violations, %zu WellPosed but classical-false", classical, violations, strict)};
}

// The random polynomial family shared by 4 and 5.
std::vector<ComplexPolynomial> polynomial_family() {
  std::mt19937_64 rng(1004);
  std::uniform_int_distribution<int> deg(1, 8);
  std::uniform_real_distribution<double> rad(0.5, 5.0);
  std::vector<ComplexPolynomial> out;
  for (int k = 0; k < 1000; ++k) out.push_back(random_poly(rng, static_cast<std::size_t>(deg(rng)), rad(rng)));
  return out;
}

Outcome bound_soundness() {
  std::size_t roots_checked = 0, violations = 0;
  for (const auto& p : polynomial_family()) {
    const auto roots = roots_oracle(p);
    std::vector<ModulusBounds> bounds{bound_milovanovic(p), bound_fujiwara(p)};
    if (p.degree() >= 2) bounds.push_back(bound_linden(p));
    for (const auto& b : bounds) {
      for (const auto& u : roots) {
        const double m = std::abs(u);
        violations += m < b.lower - 1e-9 * std::max(1.0, b.lower) || m > b.upper + 1e-9 * std::max(1.0, b.upper);
        ++roots_checked;
      }
    }
  }
  return {violations == 0, fmt("%zu (root, method) pairs, %zu violations", roots_checked, violations)};
}

Outcome schur_cohn_vs_oracle() {
  std::size_t compared = 0, banded = 0, disagree = 0, flagged = 0;
  for (const auto& p : polynomial_family()) {
    const auto roots = roots_oracle(p);
    for (double r : {0.5, 1.0, 2.0}) {
      bool near = false;
      for (const auto& u : roots) near = near || std::abs(std::abs(u) - r) < 1e-10;
      if (near) {
        ++banded;
        continue;
      }
      const auto c = schur_cohn_count(p, r);
      flagged += c.on_boundary;
      disagree += c.on_boundary || c.inside != count_inside(roots, r);
      ++compared;
    }
  }
  return {disagree == 0,
          fmt("%zu counts compared, %zu in boundary band, %zu disagreements (%zu flagged)", compared, banded,
              disagree, flagged)};
}

// A random WellPosed three-point spec with quarter-integer times.
NonlocalSpec random_wellposed_spec(std::mt19937_64& rng, double d, double min_margin = 0.0) {
  std::normal_distribution<double> g;
  for (;;) {
    const auto a = static_cast<std::int64_t>(1 + rng() % 4);
    const auto b = a + 1 + static_cast<std::int64_t>(rng() % 4);
    const auto c = b + 1 + static_cast<std::int64_t>(rng() % 4);
    std::vector<Complex> al;
    for (int k = 0; k < 3; ++k) al.push_back(0.4 * Complex(g(rng), g(rng)));
    auto spec = NonlocalSpec::rational({normalize_rational(a, 4), normalize_rational(b, 4), normalize_rational(c, 4)},
                                       al, d);
    if (decide(spec).decision != Decision::WellPosed) continue;
    if (min_margin > 0.0) {
      const auto red = reduce_to_polynomial(spec);
      double margin = INFINITY;
      for (const auto& u : roots_oracle(red.reduced.poly)) margin = std::min(margin, red.annulus.distance(std::abs(u)));
      if (margin < min_margin) continue;
    }
    return spec;
  }
}

// Random certified H: Hermitian or diagonalizable with spectrum inside the strip.
FiniteHamiltonian random_certified(std::mt19937_64& rng, Eigen::Index n, double d, bool hermitian) {
  for (;;) {
    const Matrix m = hermitian ? random_hermitian(rng, n, 1.0 / std::sqrt(static_cast<double>(n)))
                               : random_nonnormal(rng, n, 0.9 * d);
    FiniteHamiltonian h(m, d);
    if (h.certified()) return h;
  }
}

Outcome solver_residual() {
  std::mt19937_64 rng(1006);
  std::uniform_real_distribution<double> dd(0.01, 0.2);
  double worst_verify = 0.0, worst_fd = 0.0;
  int solves = 0;
  for (int c = 0; c < 20; ++c) {
    const auto n = static_cast<Eigen::Index>(4 + rng() % 13);
    const double d = dd(rng);
    const auto h = random_certified(rng, n, d, c % 2 == 0);
    const auto spec = random_wellposed_spec(rng, d);
    State psi1 = random_state(rng, n);
    psi1 /= psi1.norm();
    State w = random_state(rng, n);
    w /= w.norm();
    const SourceTerm sources[] = {ZeroSource{}, ExponentialSource{Complex(-0.3, 0.8), w}};
    for (const auto& v : sources) {
      const double horizon = spec.last_time();
      const auto sol = solve_nonlocal(h, spec, psi1, v, horizon);
      worst_verify = std::max(worst_verify, verify_nonlocal(spec, sol, psi1));
      // Fourth-order central differences for i psi' = H psi + i v.
      const double dt = 1e-3;
      for (int k = 1; k <= 5; ++k) {
        const double t = horizon * k / 6.0;
        const State dpsi = (-sol.evaluate(t + 2 * dt) + 8.0 * sol.evaluate(t + dt) - 8.0 * sol.evaluate(t - dt) +
                            sol.evaluate(t - 2 * dt)) /
                           (12.0 * dt);
        const State r =
            Complex(0, 1) * dpsi - h.matrix() * sol.evaluate(t) - Complex(0, 1) * source_value(v, t, n);
        worst_fd = std::max(worst_fd, r.norm());
      }
      ++solves;
    }
  }
  return {worst_verify <= 1e-8 && worst_fd <= 1e-6,
          fmt("%d solves, max nonlocal residual %.3g, max equation residual %.3g", solves, worst_verify, worst_fd)};
}

Outcome contour_fidelity() {
  std::mt19937_64 rng(1007);
  std::uniform_real_distribution<double> dd(0.01, 0.2);
  constexpr double kFloor = 1e-12;  // below this, successive errors are roundoff
  double worst128 = 0.0;
  int non_monotone = 0;
  std::string errors;
  for (int c = 0; c < 10; ++c) {
    const auto n = static_cast<Eigen::Index>(4 + rng() % 9);
    const double d = dd(rng);
    const auto h = random_certified(rng, n, d, c % 2 == 0);
    const auto spec = random_wellposed_spec(rng, d, 1e-2);
    const Matrix direct = assemble_B(h, spec).partialPivLu().inverse();
    double prev = INFINITY;
    bool mono = true;
    for (int nodes : {32, 64, 128}) {
      ContourSpec cs;
      cs.nodes_per_side = nodes;
      const double e = (invert_B_contour(h, spec, cs) - direct).norm() / direct.norm();
      mono = mono && (e <= prev || e <= kFloor);
      prev = e;
    }
    worst128 = std::max(worst128, prev);
    non_monotone += !mono;
  }
  return {worst128 <= 1e-6 && non_monotone == 0,
          fmt("10 cases, max relative error at 128 nodes %.3g, %d non-monotone (roundoff floor %.0e)", worst128,
              non_monotone, kFloor)};
}

Outcome illposedness_witness() {
  // t = (1, 2); alpha chosen so that a root of 1 + a1 u + a2 u^2 sits inside the annulus.
  const auto spec = NonlocalSpec::rational({{1, 1}, {2, 1}}, {Complex(0.3, 0.2), Complex(0.95)}, kD);
  const auto red = reduce_to_polynomial(spec);
  Complex u_star;
  bool found = false;
  for (const auto& u : roots_oracle(red.reduced.poly))
    if (red.annulus.contains(std::abs(u))) {
      u_star = u;
      found = true;
    }
  if (!found || exact_decision(spec).decision != Decision::IllPosed) return {false, "no root inside the annulus"};
  const Complex z_star = map_root_back(u_star, red.reduced.q(), 0);

  std::mt19937_64 rng(1008);
  const Eigen::Index n = 5;
  const Matrix v = Eigen::HouseholderQR<Matrix>(random_hermitian(rng, n)).householderQ();  // unitary
  auto hamiltonian = [&](Complex lambda0) {
    Matrix dg = Matrix::Zero(n, n);
    dg(0, 0) = lambda0;
    for (Eigen::Index i = 1; i < n; ++i) dg(i, i) = Complex(0.7 * static_cast<double>(i) - 1.1);
    return FiniteHamiltonian(v * dg * v.adjoint(), kD);
  };
  const State e1 = v.col(0);

  const Eigen::JacobiSVD<Matrix> svd(assemble_B(hamiltonian(z_star), spec));
  const double sigma_min = svd.singularValues()(n - 1);

  std::vector<double> norms;
  for (double delta : {1e-2, 1e-4, 1e-6}) {
    const Matrix b = assemble_B(hamiltonian(z_star + delta), spec);
    norms.push_back(b.partialPivLu().solve(e1).norm());
  }
  const bool growth = norms[1] >= 100.0 * norms[0] && norms[2] >= 100.0 * norms[1];
  return {sigma_min <= 1e-10 && growth,
          fmt("z* = %.6f%+.6fi, sigma_min(B) = %.3g, ||B^-1 psi1|| = %.3g, %.3g, %.3g", z_star.real(), z_star.imag(),
              sigma_min, norms[0], norms[1], norms[2])};
}

Outcome irrational_stability() {
  RationalizationPolicy policy;
  policy.max_den = 10000;
  const NonlocalSpec spec({TimePoint::exact(1, 1), TimePoint::from_real(std::sqrt(2.0), policy)}, {0.1, 0.1}, kD);
  const auto v = decide(spec);
  const auto expected = rationalize(std::sqrt(2.0), 10000).size();
  bool all_well = v.convergent_trace.has_value();
  std::size_t steps = 0;
  std::int64_t last_den = 0;
  if (v.convergent_trace) {
    for (const auto& s : *v.convergent_trace) all_well = all_well && s.decision == Decision::WellPosed;
    steps = v.convergent_trace->size();
    last_den = v.convergent_trace->back().times[1].den;
  }
  const bool pass = all_well && steps == expected && last_den <= 10000 && v.decision == Decision::WellPosed &&
                    v.decided_by == Criterion::ConvergentSequence;
  return {pass, fmt("%zu of %zu convergents WellPosed (last denominator %lld), verdict %s via %s", steps, expected,
                    static_cast<long long>(last_den), std::string(to_string(v.decision)).c_str(),
                    std::string(to_string(v.decided_by)).c_str())};
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* name;
    std::function<Outcome()> run;
    double time_limit;  // seconds, 0 = none
  };
  const std::vector<Entry> entries{
      {1, "two-point criterion equivalence", two_point_equivalence, 5.0},
      {2, "three-point exact region", three_point_region, 60.0},
      {3, "classical-condition inclusion", classical_inclusion, 0.0},
      {4, "bound soundness", bound_soundness, 0.0},
      {5, "Schur-Cohn vs oracle", schur_cohn_vs_oracle, 0.0},
      {6, "solver residual", solver_residual, 0.0},
      {7, "contour-quadrature fidelity", contour_fidelity, 0.0},
      {8, "ill-posedness witness", illposedness_witness, 0.0},
      {9, "irrational-time stability", irrational_stability, 0.0},
  };

  int failures = 0;
  for (const auto& e : entries) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = e.run();
    } catch (const std::exception& ex) {
      o = {false, std::string("exception: ") + ex.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (e.time_limit > 0.0 && secs >= e.time_limit) {
      o.pass = false;
      o.detail += fmt("; over the %.0f s limit", e.time_limit);
    }
    failures += !o.pass;
    std::printf("[%s] %d %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", e.id, e.name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
