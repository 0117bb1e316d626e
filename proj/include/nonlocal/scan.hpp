#pragma once

// Classification of a real (alpha_1, alpha_2) grid for a fixed pair of times,
// under every criterion at once. Rows are emitted alpha_1-major.

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "nonlocal/io.hpp"
#include "nonlocal/wellposedness.hpp"

namespace nonlocal {

inline constexpr std::uint64_t kMaxScanPoints = 10'000'000;

struct Axis {
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 1;

  double at(std::size_t i) const {
    if (count == 1) return min;
    if (i + 1 == count) return max;
    return min + (max - min) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
};

struct ScanLabel {
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  bool classical = false;
  bool milovanovic = false;
  bool fujiwara = false;
  bool linden = false;
  Decision exact = Decision::Undecided;
  bool inequalities_3pt = false;
};

struct RegionScan {
  Axis alpha1, alpha2;
  double d = 0.0;
  std::vector<RationalTime> times;
  std::vector<ScanLabel> labels;  // alpha1.count * alpha2.count, alpha_1 outer
};

/// "a1min:a1max:n1,a2min:a2max:n2".
inline std::pair<Axis, Axis> parse_grid(const std::string& text) {
  const auto parts = detail::split(text, ',');
  if (parts.size() != 2) throw ConfigError("grid: expected 'a1min:a1max:n1,a2min:a2max:n2'");
  auto axis = [](const std::string& s) {
    const auto f = detail::split(s, ':');
    if (f.size() != 3) throw ConfigError("grid: axis must be 'min:max:count'");
    Axis a{detail::parse_cell(f[0]), detail::parse_cell(f[1]), 0};
    const double n = detail::parse_cell(f[2]);
    if (!(n >= 1.0) || n != std::floor(n) || n > static_cast<double>(kMaxScanPoints))
      throw ConfigError("grid: count must be a positive integer");
    if (!std::isfinite(a.min) || !std::isfinite(a.max)) throw ConfigError("grid: bounds must be finite");
    a.count = static_cast<std::size_t>(n);
    return a;
  };
  return {axis(parts[0]), axis(parts[1])};
}

inline ScanLabel classify_point(double a1, double a2, const std::vector<RationalTime>& times, double d,
                                const DecisionOptions& opt = {}) {
  ScanLabel l;
  l.alpha1 = a1;
  l.alpha2 = a2;
  const auto spec = NonlocalSpec::rational(times, {Complex(a1), Complex(a2)}, d);
  l.classical = classical_sufficient(spec);
  const auto red = reduce_to_polynomial(spec);
  if (red.reduced.poly.degree() == 0) {
    l.milovanovic = l.fujiwara = l.linden = true;
  } else {
    for (const auto& o : bound_outcomes(red.reduced.poly, red.annulus)) {
      const bool ok = o.applicable && o.proves_well_posed;
      switch (o.bounds.method) {
        case BoundMethod::MilovanovicSQ: l.milovanovic = ok; break;
        case BoundMethod::Fujiwara: l.fujiwara = ok; break;
        case BoundMethod::Linden: l.linden = ok; break;
      }
    }
  }
  l.exact = exact_decision(spec, opt).decision;
  // The inequality systems are written for 1 + a1 u + a2 u^2; any time pair
  // reducing to exponents (1, 2) uses them with the rescaled strip d / Q.
  if (red.reduced.exponents == std::vector<std::uint64_t>{1, 2})
    l.inequalities_3pt = three_point_inequalities(a1, a2, d / red.reduced.q());
  return l;
}

inline RegionScan run_scan(const Axis& a1, const Axis& a2, const std::vector<RationalTime>& times, double d,
                           const DecisionOptions& opt = {}) {
  if (times.size() != 2) throw InvalidInput("scan: exactly two time points are required");
  if (a1.count == 0 || a2.count == 0) throw InvalidInput("scan: axis counts must be positive");
  const auto total = static_cast<unsigned __int128>(a1.count) * a2.count;
  if (total > kMaxScanPoints) throw InvalidInput("scan: grid exceeds 10^7 points");
  // Validates times and d once before the sweep.
  (void)NonlocalSpec::rational(times, {Complex(0.0), Complex(0.0)}, d);

  RegionScan scan{a1, a2, d, times, {}};
  scan.labels.reserve(static_cast<std::size_t>(total));
  for (std::size_t i = 0; i < a1.count; ++i)
    for (std::size_t j = 0; j < a2.count; ++j) scan.labels.push_back(classify_point(a1.at(i), a2.at(j), times, d, opt));
  return scan;
}

inline void write_csv(std::ostream& out, const RegionScan& scan) {
  out << "alpha1,alpha2,classical,milovanovic,fujiwara,linden,exact,inequalities_3pt\n";
  for (const auto& l : scan.labels) {
    out << format_double(l.alpha1) << ',' << format_double(l.alpha2) << ',' << l.classical << ',' << l.milovanovic
        << ',' << l.fujiwara << ',' << l.linden << ',' << to_string(l.exact) << ',' << l.inequalities_3pt << '\n';
  }
}

inline Json to_json(const Axis& a) { return Json{{"min", a.min}, {"max", a.max}, {"count", a.count}}; }

inline Json to_json(const RegionScan& scan) {
  Json times = Json::array();
  for (const auto& t : scan.times) times.push_back(to_json(t));
  Json labels = Json::array();
  for (const auto& l : scan.labels)
    labels.push_back(Json{{"alpha1", l.alpha1},
                          {"alpha2", l.alpha2},
                          {"classical", l.classical},
                          {"milovanovic", l.milovanovic},
                          {"fujiwara", l.fujiwara},
                          {"linden", l.linden},
                          {"exact", std::string(to_string(l.exact))},
                          {"inequalities_3pt", l.inequalities_3pt}});
  return Json{{"grid", {{"alpha1", to_json(scan.alpha1)}, {"alpha2", to_json(scan.alpha2)}}},
              {"d", scan.d},
              {"times", times},
              {"labels", labels}};
}

}  // namespace nonlocal
