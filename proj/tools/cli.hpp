#pragma once

// The nonlocal command-line front end, callable in-process so tests can drive
// it with captured streams.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nonlocal/nonlocal.hpp"

namespace nonlocal::cli {

enum ExitCode : int {
  kWellPosed = 0,
  kIllPosed = 1,  // also: refusal to solve
  kUndecided = 2,
  kMalformed = 64,
  kDimension = 65,
  kFailure = 70,
};

inline int exit_code(Decision d) {
  switch (d) {
    case Decision::WellPosed: return kWellPosed;
    case Decision::IllPosed: return kIllPosed;
    case Decision::Undecided: return kUndecided;
  }
  return kFailure;
}

struct Options {
  std::string config;
  std::string out;
  std::string format;  // empty: csv for scan, json otherwise
  int nodes_per_side = 64;
  double boundary_tol = kDefaultBoundaryTol;
  std::optional<std::int64_t> max_den;
  std::string grid;
  // solve
  std::string hamiltonian, psi1, source;
  double horizon = 0.0;
  double tol = 1e-8;
  std::size_t samples = 101;
  std::string inverse = "direct";
};

namespace detail {

// Writes to --out when given, otherwise to the command's stdout.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : out_(&fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw ConfigError("cannot open '" + path + "' for writing");
      out_ = &file_;
    }
  }
  std::ostream& stream() { return *out_; }

 private:
  std::ofstream file_;
  std::ostream* out_;
};

inline void emit_json(const Json& j, const Options& o, std::ostream& out) {
  Sink sink(o.out, out);
  sink.stream() << j.dump(2) << '\n';
}

inline DecisionOptions decision_options(const Options& o) {
  DecisionOptions d;
  d.boundary_tol = o.boundary_tol;
  return d;
}

inline NonlocalSpec load_spec(const Options& o) { return spec_from_json(read_json_file(o.config), o.max_den); }

// Flattened key,value rows for --format csv.
inline void flatten(const Json& j, const std::string& prefix, std::ostream& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it)
      flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "." + std::to_string(i), out);
  } else if (j.is_number_float()) {
    out << prefix << ',' << format_double(j.get<double>()) << '\n';
  } else if (j.is_string()) {
    out << prefix << ',' << j.get<std::string>() << '\n';
  } else {
    out << prefix << ',' << j.dump() << '\n';
  }
}

inline void emit(const Json& j, const Options& o, std::ostream& out) {
  if (o.format == "csv") {
    Sink sink(o.out, out);
    sink.stream() << "key,value\n";
    flatten(j, "", sink.stream());
  } else {
    emit_json(j, o, out);
  }
}

}  // namespace detail

inline int cmd_check(const Options& o, std::ostream& out) {
  const auto spec = detail::load_spec(o);
  const auto verdict = decide(spec, detail::decision_options(o));

  Json sufficient{{"classical", {{"sum", classical_sum(spec)}, {"holds", classical_sufficient(spec)}}}};
  if (spec.size() == 1) {
    sufficient["two_point"] =
        std::string(to_string(two_point_exact(spec.alphas()[0], spec.times()[0].value(), spec.strip_d())));
  }
  if (spec.all_exact()) {
    const auto red = reduce_to_polynomial(spec);
    Json bounds = Json::array();
    for (const auto& b : bound_outcomes(red.reduced.poly, red.annulus)) bounds.push_back(to_json(b));
    sufficient["bounds"] = std::move(bounds);
  } else {
    sufficient["bounds"] = nullptr;
  }
  detail::emit(Json{{"spec", to_json(spec)}, {"verdict", to_json(verdict)}, {"sufficient", sufficient}}, o, out);
  return exit_code(verdict.decision);
}

inline int cmd_roots(const Options& o, std::ostream& out) {
  const auto spec = detail::load_spec(o);
  const auto red = reduce_to_polynomial(spec);
  const double q = red.reduced.q();
  Json roots = Json::array();
  if (red.reduced.poly.degree() > 0) {
    for (const auto& u : roots_oracle(red.reduced.poly)) {
      const auto img = root_image(u, q);
      roots.push_back(Json{{"u", to_json(u)},
                           {"modulus", std::abs(u)},
                           {"z", to_json(img.principal_z)},
                           {"imag_height", img.imag_height},
                           {"in_annulus", red.annulus.contains(std::abs(u))}});
    }
  }
  Json rep{{"reduced", to_json(red.reduced)},
           {"annulus", {{"inner_radius", red.annulus.inner_radius}, {"outer_radius", red.annulus.outer_radius}}},
           {"roots", roots}};

  if (o.format == "csv") {
    // One row per root.
    detail::Sink sink(o.out, out);
    auto& s = sink.stream();
    s << "re_u,im_u,modulus,re_z,im_z,imag_height,in_annulus\n";
    for (const auto& r : roots)
      s << format_double(r["u"]["re"].get<double>()) << ',' << format_double(r["u"]["im"].get<double>()) << ','
        << format_double(r["modulus"].get<double>()) << ',' << format_double(r["z"]["re"].get<double>()) << ','
        << format_double(r["z"]["im"].get<double>()) << ',' << format_double(r["imag_height"].get<double>()) << ','
        << r["in_annulus"].get<bool>() << '\n';
  } else {
    detail::emit_json(rep, o, out);
  }
  return 0;
}

inline int cmd_scan(const Options& o, std::ostream& out) {
  const Json cfg = read_json_file(o.config);
  const auto& times_j = nonlocal::detail::require(cfg, "times", "scan");
  if (!times_j.is_array()) throw ConfigError("scan: 'times' must be an array");
  std::vector<RationalTime> times;
  for (const auto& t : times_j) {
    if (t.is_object()) {
      times.push_back(normalize_rational(nonlocal::detail::integer(nonlocal::detail::require(t, "num", "time"), "num"),
                                         nonlocal::detail::integer(nonlocal::detail::require(t, "den", "time"), "den")));
    } else {
      RationalizationPolicy p;
      if (o.max_den) p.max_den = *o.max_den;
      const auto tp = TimePoint::from_real(nonlocal::detail::number(t, "time"), p);
      if (!tp.is_exact()) throw ConfigError("scan: times must be rational");
      times.push_back(tp.rational());
    }
  }
  const double d = nonlocal::detail::number(nonlocal::detail::require(cfg, "d", "scan"), "scan d");
  std::string grid = o.grid;
  if (grid.empty()) {
    if (!cfg.contains("grid") || !cfg.at("grid").is_string()) throw ConfigError("scan: no grid given");
    grid = cfg.at("grid").get<std::string>();
  }
  const auto [a1, a2] = parse_grid(grid);
  const auto scan = run_scan(a1, a2, times, d, detail::decision_options(o));
  detail::Sink sink(o.out, out);
  if (o.format == "json")
    sink.stream() << to_json(scan).dump(2) << '\n';
  else
    write_csv(sink.stream(), scan);
  return 0;
}

inline int cmd_solve(const Options& o, std::ostream& out, std::ostream& err) {
  const auto spec = detail::load_spec(o);
  const FiniteHamiltonian h(load_matrix(o.hamiltonian), spec.strip_d());
  const State psi1 = load_state(o.psi1);
  const SourceTerm v = o.source.empty() ? SourceTerm(ZeroSource{}) : source_from_json(read_json_file(o.source));
  if (psi1.size() != h.dim()) throw DimensionMismatch("solve: psi_1 and Hamiltonian dimensions differ");
  if (!h.certified()) throw ContractViolation("solve: Hamiltonian spectrum leaves the strip |Im z| <= d");

  SolveOptions so;
  so.tol = o.tol;
  so.decision = detail::decision_options(o);
  so.inverse = o.inverse == "contour" ? InverseMode::Contour : InverseMode::Direct;
  so.contour.nodes_per_side = o.nodes_per_side;
  const double horizon = o.horizon > 0.0 ? o.horizon : spec.last_time();
  try {
    const auto sol = solve_nonlocal(h, spec, psi1, v, horizon, so);
    if (o.out.empty()) {
      write_trajectory_csv(out, sol, o.samples);
      err << "residual " << format_double(sol.residual()) << '\n';
    } else {
      detail::Sink sink(o.out, out);
      write_trajectory_csv(sink.stream(), sol, o.samples);
      out << "residual " << format_double(sol.residual()) << '\n';
    }
    return 0;
  } catch (const RefusalError& e) {
    out << Json{{"refused", e.what()}, {"verdict", to_json(e.verdict())}}.dump(2) << '\n';
    return kIllPosed;
  }
}

/// Runs one command line (without the program name). Never throws.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Well-posedness of multipoint nonlocal Schrodinger problems", "nonlocal"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "Nonlocal spec (JSON)")->required();
    sub->add_option("--out", o.out, "Output file (default: stdout)");
    sub->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--boundary-tol", o.boundary_tol, "Schur-Cohn boundary tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--max-den", o.max_den, "Largest denominator for rationalizing real times")
        ->check(CLI::PositiveNumber);
  };
  auto* check = app.add_subcommand("check", "Decide well-posedness and report every criterion");
  common(check);
  auto* roots = app.add_subcommand("roots", "Report the reduced polynomial, its roots and their z-images");
  common(roots);
  auto* scan = app.add_subcommand("scan", "Classify a real (alpha1, alpha2) grid");
  common(scan);
  scan->add_option("--grid", o.grid, "a1min:a1max:n1,a2min:a2max:n2");
  auto* solve = app.add_subcommand("solve", "Solve the nonlocal problem and write the trajectory as CSV");
  common(solve);
  solve->add_option("--hamiltonian", o.hamiltonian, "Hamiltonian matrix (JSON or CSV)")->required();
  solve->add_option("--psi1", o.psi1, "Right-hand side psi_1 (JSON or CSV)")->required();
  solve->add_option("--source", o.source, "Source term (JSON); zero when omitted");
  solve->add_option("-T,--horizon", o.horizon, "Time horizon T (default: t_n)");
  solve->add_option("--tol", o.tol, "Residual tolerance")->check(CLI::PositiveNumber);
  solve->add_option("--samples", o.samples, "Trajectory samples")->check(CLI::Range(2, 1000000));
  solve->add_option("--inverse", o.inverse, "How to invert B")->check(CLI::IsMember({"direct", "contour"}));
  solve->add_option("--nodes-per-side", o.nodes_per_side, "Contour nodes per side")->check(CLI::Range(4, 1 << 20));

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : kMalformed;
  }

  try {
    if (*check) return cmd_check(o, out);
    if (*roots) return cmd_roots(o, out);
    if (*scan) return cmd_scan(o, out);
    return cmd_solve(o, out, err);
  } catch (const DimensionMismatch& e) {
    err << "error: " << e.what() << '\n';
    return kDimension;
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << '\n';
    return kMalformed;
  } catch (const ContractViolation& e) {
    // From the command line this is always a bad input file (e.g. an
    // uncertified Hamiltonian), not a programming error.
    err << "error: " << e.what() << '\n';
    return kMalformed;
  } catch (const Json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kMalformed;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace nonlocal::cli
