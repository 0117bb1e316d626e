#pragma once

// Finite-dimensional realization of the nonlocal Schroedinger problem
//   i psi' - H psi = i v(t),   psi(0) + sum_k alpha_k psi(t_k) = psi_1
// with dense complex H whose spectrum lies in the strip |Im z| <= d.

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "nonlocal/characteristic.hpp"
#include "nonlocal/model.hpp"
#include "nonlocal/rootlocus.hpp"
#include "nonlocal/wellposedness.hpp"

namespace nonlocal {

using Matrix = Eigen::MatrixXcd;
using State = Eigen::VectorXcd;

inline constexpr double kStripSlack = 1e-10;

struct StripCheck {
  bool certified = false;
  std::vector<Complex> eigenvalues;
  double max_imag = 0.0;
};

inline StripCheck spectrum_strip_check(const Matrix& h, double d) {
  if (h.rows() != h.cols()) throw DimensionMismatch("spectrum_strip_check: matrix is not square");
  if (!(d >= 0.0)) throw InvalidInput("spectrum_strip_check: d must be nonnegative");
  Eigen::ComplexEigenSolver<Matrix> es(h, false);
  if (es.info() != Eigen::Success) throw NumericalFailure("spectrum_strip_check: eigensolver failed", 0.0);
  StripCheck out;
  out.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  for (const auto& l : out.eigenvalues) out.max_imag = std::max(out.max_imag, std::abs(l.imag()));
  out.certified = out.max_imag <= d + kStripSlack;
  return out;
}

/// Dense Hamiltonian with a cached spectral decomposition for e^{-iHt}.
/// Hermitian input uses the unitary eigenbasis; other matrices use the
/// general eigenbasis when it is well conditioned and Pade scaling-and-squaring
/// otherwise.
class FiniteHamiltonian {
 public:
  static constexpr double kMaxEigenbasisCondition = 1e6;

  FiniteHamiltonian(Matrix h, double strip_d) : h_(std::move(h)), d_(strip_d) {
    if (h_.rows() == 0) throw InvalidInput("Hamiltonian must be nonempty");
    if (!h_.allFinite()) throw InvalidInput("Hamiltonian entries must be finite");
    auto check = spectrum_strip_check(h_, d_);
    certified_ = check.certified;
    max_imag_ = check.max_imag;
    eigenvalues_ = std::move(check.eigenvalues);

    const double scale = std::max(1.0, h_.norm());
    hermitian_ = (h_ - h_.adjoint()).norm() <= 1e-14 * scale;
    if (hermitian_) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(h_);
      lambda_ = es.eigenvalues().cast<Complex>();
      basis_ = es.eigenvectors();
      basis_inv_ = basis_.adjoint();
      diagonal_ = true;
    } else {
      Eigen::ComplexEigenSolver<Matrix> es(h_);
      Eigen::JacobiSVD<Matrix> svd(es.eigenvectors());
      const auto& sv = svd.singularValues();
      const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : INFINITY;
      if (es.info() == Eigen::Success && cond <= kMaxEigenbasisCondition) {
        lambda_ = es.eigenvalues();
        basis_ = es.eigenvectors();
        basis_inv_ = basis_.inverse();
        diagonal_ = true;
      }
    }
  }

  const Matrix& matrix() const { return h_; }
  Eigen::Index dim() const { return h_.rows(); }
  double strip_d() const { return d_; }
  bool certified() const { return certified_; }
  bool hermitian() const { return hermitian_; }
  double max_imag() const { return max_imag_; }
  const std::vector<Complex>& eigenvalues() const { return eigenvalues_; }

  void require_certified() const {
    if (!certified_) throw ContractViolation("Hamiltonian spectrum is not certified inside the strip");
  }

  /// e^{-iHt}.
  Matrix propagator(double t) const {
    if (diagonal_) {
      const Eigen::VectorXcd phase = (Complex(0.0, -t) * lambda_).array().exp();
      return basis_ * phase.asDiagonal() * basis_inv_;
    }
    const Matrix a = Complex(0.0, -t) * h_;
    return a.exp();
  }

  /// e^{-iHt} psi without forming the matrix when the eigenbasis is available.
  State apply_propagator(double t, const State& psi) const {
    if (diagonal_) {
      const Eigen::VectorXcd phase = (Complex(0.0, -t) * lambda_).array().exp();
      return basis_ * (phase.asDiagonal() * (basis_inv_ * psi));
    }
    return propagator(t) * psi;
  }

 private:
  Matrix h_;
  double d_;
  bool certified_ = false;
  bool hermitian_ = false;
  bool diagonal_ = false;
  double max_imag_ = 0.0;
  std::vector<Complex> eigenvalues_;
  Eigen::VectorXcd lambda_;
  Matrix basis_, basis_inv_;
};

inline Matrix propagator(const FiniteHamiltonian& h, double t) {
  h.require_certified();
  return h.propagator(t);
}

/// B = I + sum_k alpha_k U(t_k).
inline Matrix assemble_B(const FiniteHamiltonian& h, const NonlocalSpec& spec) {
  h.require_certified();
  if (spec.strip_d() + kStripSlack < h.strip_d())
    throw ContractViolation("assemble_B: nonlocal spec strip is narrower than the Hamiltonian's");
  Matrix b = Matrix::Identity(h.dim(), h.dim());
  for (std::size_t k = 0; k < spec.size(); ++k) b += spec.alphas()[k] * h.propagator(spec.times()[k].value());
  return b;
}

// ---------------------------------------------------------------------------
// Contour quadrature of B^{-1} = (1/2 pi i) \oint (1/b(z)) (zI - H)^{-1} dz
// ---------------------------------------------------------------------------

enum class ContourLayout {
  Clusters,   // one rectangle per group of eigenvalues closer than 2w in Re
  Enclosing,  // a single rectangle around the whole spectrum
};

/// Rectangles spanning Im z in [-h, h] and extending w beyond the real parts
/// of the eigenvalues they enclose. An unset half-height is placed midway
/// between max(d, max |Im lambda|) and the nearest zero of b; an unset w is
/// h for the cluster layout and 1 for the enclosing one. Each side carries
/// nodes_per_side Gauss-Legendre nodes.
struct ContourSpec {
  ContourLayout layout = ContourLayout::Clusters;
  std::optional<double> rect_halfwidth;
  std::optional<double> rect_halfheight;
  int nodes_per_side = 64;
};

class GeometryError : public Error {
 public:
  GeometryError(const std::string& what, Complex point) : Error(what), point_(point) {}
  Complex point() const noexcept { return point_; }

 private:
  Complex point_;
};

namespace detail {

// Gauss-Legendre nodes and weights on [-1, 1] by Newton on P_n.
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  std::vector<double> x(n), w(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return {x, w};
}

inline double point_segment_distance(Complex p, Complex a, Complex b) {
  const Complex ab = b - a;
  const double t = std::clamp(((p - a) * std::conj(ab)).real() / std::norm(ab), 0.0, 1.0);
  return std::abs(p - (a + t * ab));
}

}  // namespace detail

/// Zeros of b(z) in a horizontal band, from the roots of r(u).
struct CharacteristicZeros {
  std::vector<Complex> u_roots;
  double q = 1.0;
  double min_height = INFINITY;  // smallest |Im z| over all zeros
};

inline CharacteristicZeros characteristic_zeros(const NonlocalSpec& spec) {
  const auto red = reduce_to_polynomial(spec);
  CharacteristicZeros out;
  out.q = red.reduced.q();
  if (red.reduced.poly.degree() == 0) return out;
  out.u_roots = roots_oracle(red.reduced.poly);
  for (const auto& u : out.u_roots) out.min_height = std::min(out.min_height, root_image(u, out.q).imag_height);
  return out;
}

struct ContourRectangle {
  double re_min = 0.0, re_max = 0.0;
};

struct ContourGeometry {
  double half_height = 0.0;
  double half_width = 0.0;
  std::vector<ContourRectangle> rectangles;  // disjoint, sorted by re_min
};

// Counterclockwise from the lower left.
inline std::array<Complex, 4> contour_corners(const ContourGeometry& g, const ContourRectangle& r) {
  return {Complex(r.re_min, -g.half_height), Complex(r.re_max, -g.half_height), Complex(r.re_max, g.half_height),
          Complex(r.re_min, g.half_height)};
}

inline ContourGeometry contour_geometry(const FiniteHamiltonian& h, const CharacteristicZeros& zeros,
                                        const ContourSpec& contour) {
  if (contour.nodes_per_side < 4) throw InvalidInput("contour: nodes_per_side must be >= 4");
  ContourGeometry g;
  if (contour.rect_halfheight) {
    g.half_height = *contour.rect_halfheight;
    if (!(g.half_height > h.strip_d())) throw InvalidInput("contour: half-height must exceed the strip d");
  } else {
    const double floor = std::max(h.strip_d(), h.max_imag());
    g.half_height = std::isfinite(zeros.min_height) ? std::min(floor + 1.0, 0.5 * (floor + zeros.min_height))
                                                    : floor + 1.0;
  }
  const bool clusters = contour.layout == ContourLayout::Clusters;
  g.half_width = contour.rect_halfwidth.value_or(clusters ? g.half_height : 1.0);
  if (!(g.half_width > 0.0)) throw InvalidInput("contour: half-width must be positive");

  std::vector<double> re;
  for (const auto& l : h.eigenvalues()) re.push_back(l.real());
  std::sort(re.begin(), re.end());
  for (double x : re) {
    if (!g.rectangles.empty() && (!clusters || x - g.half_width <= g.rectangles.back().re_max))
      g.rectangles.back().re_max = x + g.half_width;
    else
      g.rectangles.push_back({x - g.half_width, x + g.half_width});
  }

  constexpr double kClearance = 1e-8;
  auto check_point = [&](Complex p, const char* what) {
    for (const auto& r : g.rectangles) {
      const auto c = contour_corners(g, r);
      for (std::size_t s = 0; s < 4; ++s)
        if (detail::point_segment_distance(p, c[s], c[(s + 1) % 4]) < kClearance)
          throw GeometryError(std::string("contour passes through ") + what, p);
    }
  };
  auto enclosed = [&](Complex p) {
    if (std::abs(p.imag()) >= g.half_height) return false;
    return std::any_of(g.rectangles.begin(), g.rectangles.end(),
                       [&](const ContourRectangle& r) { return p.real() > r.re_min && p.real() < r.re_max; });
  };
  for (const auto& l : h.eigenvalues()) {
    if (!enclosed(l)) throw GeometryError("contour does not enclose an eigenvalue", l);
    check_point(l, "an eigenvalue");
  }
  // Zeros of b sit on horizontal lines with period 2 pi Q in Re z.
  const double period = 2.0 * kPi * zeros.q;
  const double span_lo = g.rectangles.front().re_min, span_hi = g.rectangles.back().re_max;
  for (const auto& u : zeros.u_roots) {
    const Complex z0 = map_root_back(u, zeros.q, 0);
    if (std::abs(z0.imag()) > g.half_height + 1.0) continue;
    const auto m_lo = static_cast<std::int64_t>(std::floor((span_lo - 1.0 - z0.real()) / period));
    const auto m_hi = static_cast<std::int64_t>(std::ceil((span_hi + 1.0 - z0.real()) / period));
    for (std::int64_t m = m_lo; m <= m_hi; ++m) {
      const Complex z = z0 + Complex(period * static_cast<double>(m), 0.0);
      check_point(z, "a zero of b");
      if (enclosed(z)) throw GeometryError("contour encloses a zero of b", z);
    }
  }
  return g;
}

inline Matrix invert_B_contour(const FiniteHamiltonian& h, const NonlocalSpec& spec, const ContourSpec& contour = {}) {
  h.require_certified();
  const auto zeros = characteristic_zeros(spec);
  const auto g = contour_geometry(h, zeros, contour);
  const auto [x, w] = detail::gauss_legendre(contour.nodes_per_side);
  const Eigen::Index n = h.dim();
  const Matrix eye = Matrix::Identity(n, n);
  Matrix acc = Matrix::Zero(n, n);
  for (const auto& r : g.rectangles) {
    const auto c = contour_corners(g, r);
    for (std::size_t s = 0; s < 4; ++s) {
      const Complex a = c[s], b = c[(s + 1) % 4];
      const Complex mid = 0.5 * (a + b), half = 0.5 * (b - a);
      for (int j = 0; j < contour.nodes_per_side; ++j) {
        const Complex z = mid + half * x[j];
        const Matrix shifted = z * eye - h.matrix();
        const Matrix resolvent = shifted.partialPivLu().solve(eye);
        acc += (w[j] * half / eval_b(spec, z)) * resolvent;
      }
    }
  }
  return acc / Complex(0.0, 2.0 * kPi);
}

// ---------------------------------------------------------------------------
// Sources v(t)
// ---------------------------------------------------------------------------

struct ZeroSource {};

/// v(t) = e^{gamma t} w.
struct ExponentialSource {
  Complex gamma;
  State w;
};

/// Piecewise-polynomial interpolation of samples (order 1 = linear).
struct SampledSource {
  std::vector<double> times;
  std::vector<State> values;
  int order = 1;
};

using SourceTerm = std::variant<ZeroSource, ExponentialSource, SampledSource>;

namespace detail {

inline void validate_source(const SourceTerm& v, Eigen::Index dim) {
  if (const auto* e = std::get_if<ExponentialSource>(&v)) {
    if (!is_finite(e->gamma)) throw InvalidInput("exponential source: gamma must be finite");
    if (e->w.size() != dim) throw DimensionMismatch("exponential source: vector dimension mismatch");
  } else if (const auto* s = std::get_if<SampledSource>(&v)) {
    if (s->times.size() < 2 || s->times.size() != s->values.size())
      throw InvalidInput("sampled source: need >= 2 samples with matching values");
    for (std::size_t k = 1; k < s->times.size(); ++k)
      if (!(s->times[k] > s->times[k - 1])) throw InvalidInput("sampled source: grid must be strictly increasing");
    for (const auto& x : s->values)
      if (x.size() != dim) throw DimensionMismatch("sampled source: vector dimension mismatch");
    if (s->order < 1 || static_cast<std::size_t>(s->order) >= s->times.size())
      throw InvalidInput("sampled source: interpolation order out of range");
  }
}

// Lagrange interpolation on the order+1 samples nearest to interval i.
inline State sampled_value(const SampledSource& s, std::size_t interval, double t) {
  const std::size_t npts = static_cast<std::size_t>(s.order) + 1;
  const std::size_t count = s.times.size();
  std::size_t first = interval >= (npts - 1) / 2 ? interval - (npts - 1) / 2 : 0;
  first = std::min(first, count - npts);
  State out = State::Zero(s.values[0].size());
  for (std::size_t a = first; a < first + npts; ++a) {
    double l = 1.0;
    for (std::size_t b = first; b < first + npts; ++b)
      if (b != a) l *= (t - s.times[b]) / (s.times[a] - s.times[b]);
    out += l * s.values[a];
  }
  return out;
}

}  // namespace detail

inline State source_value(const SourceTerm& v, double t, Eigen::Index dim) {
  if (std::holds_alternative<ZeroSource>(v)) return State::Zero(dim);
  if (const auto* e = std::get_if<ExponentialSource>(&v)) return std::exp(e->gamma * t) * e->w;
  const auto& s = std::get<SampledSource>(v);
  const auto it = std::upper_bound(s.times.begin(), s.times.end(), t);
  std::size_t i = it == s.times.begin() ? 0 : static_cast<std::size_t>(it - s.times.begin()) - 1;
  i = std::min(i, s.times.size() - 2);
  return detail::sampled_value(s, i, t);
}

namespace detail {

// Adaptive 15-point Gauss-Legendre panels for int_a^b U(t - s) v(s) ds.
struct PanelIntegrator {
  const FiniteHamiltonian& h;
  const SampledSource& src;
  std::size_t interval;
  double t_end;
  std::vector<double> x, w;

  State panel(double a, double b) const {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    State acc = State::Zero(h.dim());
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double s = mid + half * x[j];
      acc += (w[j] * half) * h.apply_propagator(t_end - s, sampled_value(src, interval, s));
    }
    return acc;
  }

  State adaptive(double a, double b, const State& whole, double tol, int depth, double& err) const {
    const double m = 0.5 * (a + b);
    const State left = panel(a, m), right = panel(m, b);
    const double diff = (left + right - whole).norm();
    if (diff <= tol || depth >= 30) {
      err += diff;
      return left + right;
    }
    return adaptive(a, m, left, 0.5 * tol, depth + 1, err) + adaptive(m, b, right, 0.5 * tol, depth + 1, err);
  }
};

}  // namespace detail

/// int_0^t U(t - s) v(s) ds.
inline State source_integral(const FiniteHamiltonian& h, const SourceTerm& v, double t_end, double tol = 1e-12) {
  h.require_certified();
  if (!(t_end >= 0.0)) throw InvalidInput("source_integral: t must be nonnegative");
  detail::validate_source(v, h.dim());
  const Eigen::Index n = h.dim();
  if (std::holds_alternative<ZeroSource>(v) || t_end == 0.0) return State::Zero(n);

  if (const auto* e = std::get_if<ExponentialSource>(&v)) {
    // (gamma I + iH) x = (e^{gamma t} - U(t)) w, unless gamma I + iH is near singular.
    const Matrix a = e->gamma * Matrix::Identity(n, n) + Complex(0.0, 1.0) * h.matrix();
    const Eigen::PartialPivLU<Matrix> lu(a);
    const double rcond = lu.rcond();
    if (rcond > 1e-8) return lu.solve(std::exp(e->gamma * t_end) * e->w - h.apply_propagator(t_end, e->w));
    // Augmented exponential: the top-right block of exp([[-iH, w], [0, gamma]] t).
    Matrix aug = Matrix::Zero(n + 1, n + 1);
    aug.topLeftCorner(n, n) = Complex(0.0, -1.0) * h.matrix();
    aug.topRightCorner(n, 1) = e->w;
    aug(n, n) = e->gamma;
    const Matrix ex = (t_end * aug).exp();
    return ex.topRightCorner(n, 1);
  }

  const auto& s = std::get<SampledSource>(v);
  if (s.times.front() > 0.0 || s.times.back() < t_end)
    throw InvalidInput("sampled source: grid must cover [0, t]");
  const auto [x, w] = detail::gauss_legendre(15);
  State acc = State::Zero(n);
  double err = 0.0;
  for (std::size_t i = 0; i + 1 < s.times.size(); ++i) {
    const double a = std::max(0.0, s.times[i]);
    const double b = std::min(t_end, s.times[i + 1]);
    if (!(b > a)) continue;
    const detail::PanelIntegrator integ{h, s, i, t_end, x, w};
    const State whole = integ.panel(a, b);
    const double share = tol * (b - a) / t_end;
    acc += integ.adaptive(a, b, whole, share, 0, err);
  }
  if (err > tol * std::max(1.0, acc.norm()))
    throw NumericalFailure("source_integral: quadrature did not reach tolerance", err);
  return acc;
}

// ---------------------------------------------------------------------------
// Nonlocal solution
// ---------------------------------------------------------------------------

class NonlocalSolution {
 public:
  NonlocalSolution(std::shared_ptr<const FiniteHamiltonian> h, SourceTerm v, State psi0, double horizon,
                   double tol)
      : h_(std::move(h)), v_(std::move(v)), psi0_(std::move(psi0)), horizon_(horizon), tol_(tol) {}

  const State& psi0() const { return psi0_; }
  double horizon() const { return horizon_; }
  double residual() const { return residual_; }
  const FiniteHamiltonian& hamiltonian() const { return *h_; }
  const SourceTerm& source() const { return v_; }

  /// psi(t) = U(t) psi_0 + int_0^t U(t - s) v(s) ds.
  State evaluate(double t) const {
    if (t < 0.0 || t > horizon_ * (1.0 + 1e-12))
      throw InvalidInput("NonlocalSolution::evaluate: t outside [0, T]");
    return h_->apply_propagator(t, psi0_) + source_integral(*h_, v_, t, tol_);
  }

  void set_residual(double r) { residual_ = r; }

 private:
  std::shared_ptr<const FiniteHamiltonian> h_;
  SourceTerm v_;
  State psi0_;
  double horizon_;
  double tol_;
  double residual_ = 0.0;
};

class RefusalError : public Error {
 public:
  RefusalError(const std::string& what, WellPosednessVerdict verdict) : Error(what), verdict_(std::move(verdict)) {}
  const WellPosednessVerdict& verdict() const noexcept { return verdict_; }

 private:
  WellPosednessVerdict verdict_;
};

/// ||psi(0) + sum_k alpha_k psi(t_k) - psi_1||_2.
inline double verify_nonlocal(const NonlocalSpec& spec, const NonlocalSolution& sol, const State& psi1) {
  State defect = sol.evaluate(0.0) - psi1;
  for (std::size_t k = 0; k < spec.size(); ++k) defect += spec.alphas()[k] * sol.evaluate(spec.times()[k].value());
  return defect.norm();
}

enum class InverseMode { Direct, Contour };

struct SolveOptions {
  double tol = 1e-8;
  InverseMode inverse = InverseMode::Direct;
  ContourSpec contour;
  DecisionOptions decision;
};

inline NonlocalSolution solve_nonlocal(const FiniteHamiltonian& h, const NonlocalSpec& spec, const State& psi1,
                                       const SourceTerm& v, double horizon, const SolveOptions& opt = {}) {
  h.require_certified();
  if (psi1.size() != h.dim()) throw DimensionMismatch("solve_nonlocal: psi_1 dimension mismatch");
  detail::validate_source(v, h.dim());
  if (horizon < spec.last_time()) throw InvalidInput("solve_nonlocal: horizon T must be >= t_n");
  auto verdict = decide(spec, opt.decision);
  if (verdict.decision != Decision::WellPosed)
    throw RefusalError("solve_nonlocal: nonlocal problem is not well-posed", std::move(verdict));

  const Matrix b_inv = opt.inverse == InverseMode::Direct ? Matrix(assemble_B(h, spec).partialPivLu().inverse())
                                                          : invert_B_contour(h, spec, opt.contour);
  const double q_tol = std::min(opt.tol, 1e-12);
  State rhs = psi1;
  for (std::size_t k = 0; k < spec.size(); ++k)
    rhs -= spec.alphas()[k] * source_integral(h, v, spec.times()[k].value(), q_tol);
  NonlocalSolution sol(std::make_shared<const FiniteHamiltonian>(h), v, b_inv * rhs, horizon, q_tol);
  const double residual = verify_nonlocal(spec, sol, psi1);
  sol.set_residual(residual);
  if (!(residual <= opt.tol)) throw NumericalFailure("solve_nonlocal: nonlocal residual above tolerance", residual);
  return sol;
}

}  // namespace nonlocal
