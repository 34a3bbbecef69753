#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "glperiod/error.hpp"
#include "glperiod/forcing.hpp"
#include "glperiod/harness/config.hpp"
#include "glperiod/harness/manifest.hpp"
#include "glperiod/harness/report_io.hpp"
#include "glperiod/parallel.hpp"
#include "glperiod/periodic_solver.hpp"
#include "glperiod/stability.hpp"
#include "glperiod/verification.hpp"

namespace glperiod::harness {

inline constexpr int kExitOk = 0;
inline constexpr int kExitChecksFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDivergence = 3;

/// Divergence is exit 3; every other failure to run is a config problem (exit 2).
inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const NonFiniteField*>(&e)) return kExitDivergence;
  return kExitConfig;
}

/// Runs a command body, reporting any escaping exception on `err` and mapping
/// it to an exit code.
template <typename Body>
int guarded(Body&& body, std::ostream& err) {
  try {
    return body();
  } catch (const std::exception& e) {
    err << "glperiod: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

struct SolveOutcome {
  RunSetup setup;
  RealizedForcing forcing;
  PeriodicSolution solution;
  double equation_residual = 0.0;
  double seconds = 0.0;
};

inline SolveOutcome run_solve(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  RunSetup setup = make_setup(cfg);
  RealizedForcing forcing = realize_forcing(setup.forcing, setup.grid, cfg.solve.m_t);
  PeriodicSolution sol = solve_periodic(forcing.g, setup.op, setup.cutoffs, cfg.solve);
  double eq = std::numeric_limits<double>::quiet_NaN();
  if (sol.report.status != SolveStatus::non_finite)
    eq = equation_residual(sol.u, forcing.g, setup.op, cfg.solve.nonlinearity_enabled);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(setup), std::move(forcing), std::move(sol), eq, secs};
}

namespace detail {

inline std::string fmt(double v) {
  if (!std::isfinite(v)) return "null";
  std::ostringstream s;
  s << std::setprecision(6) << v;
  return s.str();
}

inline std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : "null"; }

inline void row(std::ostream& log, const std::string& key, const std::string& value) {
  log << "  " << std::left << std::setw(24) << key << value << '\n';
}

inline json solve_report_json(const SolveOutcome& o) {
  json j = to_json(o.solution.report);
  j["equation_residual"] = num(o.equation_residual);
  j["cutoffs"] = {{"r1", o.setup.cutoffs.r1}, {"r_inf", o.setup.cutoffs.r_inf}};
  j["forcing_checks"] = {{"oddness", num(o.forcing.oddness)}, {"seam_ratio", num(o.forcing.seam)}};
  return j;
}

inline void solve_headline(json& h, const PeriodicSolveReport& r) {
  h["status"] = to_string(r.status);
  h["iterations"] = r.iterations;
  h["c_estimate"] = num(r.c_estimate);
  h["z_norm"] = r.z_norm;
  h["contraction_factor"] = num(r.contraction_factor);
  h["periodicity_residual"] = num(r.periodicity_residual);
}

inline void print_solve(std::ostream& log, const SolveOutcome& o) {
  const auto& r = o.solution.report;
  row(log, "status", to_string(r.status));
  row(log, "iterations", std::to_string(r.iterations));
  row(log, "last residual (Z)", r.residual_history.empty() ? "null" : fmt(r.residual_history.back()));
  row(log, "periodicity residual", fmt(r.periodicity_residual));
  row(log, "equation residual", fmt(o.equation_residual));
  row(log, "||u||_Z", fmt(r.z_norm));
  row(log, "[g]", fmt(r.g_bracket));
  row(log, "c_estimate", fmt(r.c_estimate));
  row(log, "contraction factor", fmt(r.contraction_factor));
  row(log, "max oddness", fmt(r.max_oddness));
  if (!r.message.empty()) row(log, "note", r.message);
}

inline std::string node_name(std::size_t m) {
  std::ostringstream s;
  s << "solution/u_" << std::setw(4) << std::setfill('0') << m << ".glpf";
  return s.str();
}

}  // namespace detail

/// glperiod solve-periodic
inline int cmd_solve_periodic(const RunConfig& cfg, const std::optional<fs::path>& out_dir, std::ostream& log) {
  SolveOutcome o = run_solve(cfg);
  RunRecorder rec(out_dir ? *out_dir : fs::path(cfg.output_dir), "solve-periodic", cfg);
  rec.add_json("report.json", detail::solve_report_json(o));
  const bool ok = o.solution.report.converged;
  if (cfg.snapshots && ok) {
    json nodes = json::array();
    for (std::size_t m = 0; m < o.solution.u.size(); ++m) {
      rec.add_snapshot(detail::node_name(m), o.solution.u[m]);
      nodes.push_back(detail::node_name(m));
    }
    rec.manifest()["solution"] = {{"period", o.solution.u.period()}, {"m_t", o.solution.u.intervals()}, {"nodes", nodes}};
  }
  detail::solve_headline(rec.headline(), o.solution.report);
  const int code = ok ? kExitOk : kExitDivergence;
  const fs::path manifest = rec.finish(to_string(o.solution.report.status), code);
  log << "solve-periodic: " << manifest.string() << '\n';
  detail::print_solve(log, o);
  return code;
}

/// Loads the converged periodic solution referenced by a solve-periodic
/// manifest, after re-checking every artifact hash.
inline std::pair<RunConfig, FieldSeries> load_base_run(const fs::path& manifest_path) {
  const auto problems = verify_manifest(manifest_path);
  if (!problems.empty()) throw IoError("base run is corrupt: " + problems.front());
  const json m = load_manifest(manifest_path);
  if (m.value("status", "") != "converged") throw IoError("base run did not converge");
  if (!m.contains("solution")) throw IoError("base run stored no solution snapshots");
  RunConfig base = config_from_json(m.at("config"));
  const GridPtr grid = make_grid(base.grid);
  std::vector<SpectralField> nodes;
  for (const auto& p : m["solution"]["nodes"])
    nodes.push_back(read_snapshot(manifest_path.parent_path() / p.get<std::string>(), grid));
  return {base, FieldSeries(std::move(nodes), m["solution"]["period"].get<double>(), true)};
}

/// glperiod stability
inline int cmd_stability(const RunConfig& cfg, const std::optional<fs::path>& base_manifest,
                         const std::optional<fs::path>& out_dir, std::ostream& log) {
  RunConfig run_cfg = cfg;
  FieldSeries v_per;
  if (base_manifest) {
    try {
      auto [base, series] = load_base_run(*base_manifest);
      run_cfg.grid = base.grid;
      run_cfg.period = base.period;
      run_cfg.cutoffs = base.cutoffs;
      run_cfg.forcing_amplitude = base.forcing_amplitude;
      run_cfg.temporal = base.temporal;
      run_cfg.forcing_profile = base.forcing_profile;
      run_cfg.solve = base.solve;
      v_per = std::move(series);
    } catch (const IoError& e) {
      log << "stability: " << e.what() << '\n';
      return kExitDivergence;
    }
  } else {
    SolveOutcome o = run_solve(run_cfg);
    if (!o.solution.report.converged) {
      log << "stability: base periodic solve did not converge (" << to_string(o.solution.report.status) << ")\n";
      return kExitDivergence;
    }
    v_per = std::move(o.solution.u);
  }
  const RunSetup setup = make_setup(run_cfg);

  StabilityRunConfig sc;
  sc.t_max = run_cfg.stability.t_max ? *run_cfg.stability.t_max : default_t_max(run_cfg);
  sc.record_stride = run_cfg.stability.record_stride;
  sc.v_per = std::move(v_per);
  sc.integrator = run_cfg.stability.integrator;
  sc.nonlinear = run_cfg.stability.nonlinear;
  sc.w0 = realize_perturbation(
      PerturbationSpec{run_cfg.stability.perturbation_amplitude, run_cfg.stability.perturbation.realize_spec(setup.grid)},
      setup.grid);
  const DecayReport rep = run_stability(sc, setup.op, setup.cutoffs);

  RunRecorder rec(out_dir ? *out_dir : fs::path(cfg.output_dir) / "stability", "stability", run_cfg);
  if (base_manifest) rec.manifest()["base_manifest"] = fs::absolute(*base_manifest).string();
  rec.add_text("decay.csv", decay_csv(rep));
  json summary = to_json(rep);
  summary["t_max"] = sc.t_max;
  rec.add_json("decay.json", summary);
  auto& h = rec.headline();
  h["slope_l2"] = num(rep.fitted_slope_l0());
  h["slope_grad"] = num(rep.fitted_slope_l1());
  h["fit_window"] = {rep.fit_window.lo, std::min(rep.fit_window.hi, sc.t_max)};
  h["escaped"] = rep.escaped;
  const fs::path manifest = rec.finish(rep.escaped ? "escaped" : "ok", kExitOk);

  log << "stability: " << manifest.string() << '\n';
  detail::row(log, "t_max", detail::fmt(sc.t_max));
  detail::row(log, "fit window",
              "[" + detail::fmt(rep.fit_window.lo) + ", " + detail::fmt(std::min(rep.fit_window.hi, sc.t_max)) + "]");
  detail::row(log, "slope log||w||", detail::fmt(rep.fitted_slope_l0()));
  detail::row(log, "slope log||grad w||", detail::fmt(rep.fitted_slope_l1()));
  detail::row(log, "N(t_end)", rep.n_series.empty() ? "null" : detail::fmt(rep.n_series.back()));
  detail::row(log, "max oddness", detail::fmt(rep.max_oddness));
  if (rep.escaped) log << "warning: perturbation escaped at t = " << detail::fmt(rep.escape_time) << '\n';
  return kExitOk;
}

/// glperiod verify
inline int cmd_verify(const RunConfig& cfg, const std::optional<std::uint64_t>& seed,
                      const std::optional<fs::path>& out_dir, std::ostream& log) {
  RunConfig run_cfg = cfg;
  if (seed) run_cfg.seed = *seed;
  SolveOutcome o = run_solve(run_cfg);
  if (!o.solution.report.converged) {
    log << "verify: periodic solve for the energy and nonlinear batteries did not converge\n";
    return kExitDivergence;
  }
  VerifyOptions vo;
  vo.samples = run_cfg.verify.samples;
  vo.seed = run_cfg.seed;
  vo.tamper_cutoff = run_cfg.verify.tamper_cutoff;
  const auto reports = run_verification(o.setup.op, o.setup.cutoffs, vo, &o.solution.u, &o.forcing.g);
  const bool ok = all_passed(reports);

  RunRecorder rec(out_dir ? *out_dir : fs::path(run_cfg.output_dir) / "verify", "verify", run_cfg);
  rec.add_json("verify.json", to_json(reports));
  auto& h = rec.headline();
  h["all_passed"] = ok;
  for (const auto& r : reports) h[r.check_name] = r.passed;
  const int code = ok ? kExitOk : kExitChecksFailed;
  const fs::path manifest = rec.finish(ok ? "passed" : "failed", code);

  log << "verify: " << manifest.string() << '\n';
  for (const auto& r : reports) {
    log << "  " << std::left << std::setw(26) << r.check_name << (r.passed ? "PASS" : "FAIL") << "  C="
        << detail::fmt(r.fitted_constant) << "  ceiling=" << detail::fmt(r.ceiling)
        << "  worst_ratio=" << detail::fmt(r.worst_ratio) << "  samples=" << r.samples << '\n';
  }
  return code;
}

struct SweepRow {
  double value = 0.0;
  std::string status = "error";
  int iterations = 0;
  std::optional<double> c_estimate, contraction_factor;
  double periodicity_residual = std::numeric_limits<double>::quiet_NaN();
  double equation_residual = std::numeric_limits<double>::quiet_NaN();
  double seconds = 0.0;
  std::string error;
};

inline RunConfig sweep_variant(const RunConfig& cfg, const std::string& axis, double value) {
  RunConfig c = cfg;
  if (axis == "epsilon") c.forcing_amplitude = value;
  else if (axis == "m_t") c.solve.m_t = static_cast<int>(value);
  else if (axis == "n") c.grid.n_per_axis = static_cast<int>(value);
  validate(c);
  return c;
}

/// glperiod sweep
inline int cmd_sweep(const RunConfig& cfg, const std::string& axis, const std::optional<fs::path>& out_dir,
                     std::ostream& log) {
  std::vector<double> values;
  if (axis == "epsilon") values = cfg.sweep.epsilon;
  else if (axis == "m_t") values.assign(cfg.sweep.m_t.begin(), cfg.sweep.m_t.end());
  else if (axis == "n") values.assign(cfg.sweep.n.begin(), cfg.sweep.n.end());
  else throw ConfigError("sweep axis must be epsilon, m_t or n (got '" + axis + "')");
  if (values.empty()) throw ConfigError("sweep." + axis + " lists no values");
  for (double v : values) sweep_variant(cfg, axis, v);

  std::vector<SweepRow> rows(values.size());
  parallel_for(values.size(), [&](std::size_t i) {
    SweepRow& row = rows[i];
    row.value = values[i];
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const SolveOutcome o = run_solve(sweep_variant(cfg, axis, values[i]));
      const auto& r = o.solution.report;
      row.status = to_string(r.status);
      row.iterations = r.iterations;
      row.c_estimate = r.c_estimate;
      row.contraction_factor = r.contraction_factor;
      row.periodicity_residual = r.periodicity_residual;
      row.equation_residual = o.equation_residual;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  });

  std::ostringstream csv;
  csv.precision(17);
  csv << "value,status,iterations,c_estimate,contraction_factor,periodicity_residual,equation_residual,runtime_s,error\n";
  json table = json::array();
  int good = 0;
  for (const auto& r : rows) {
    if (r.error.empty() && r.status == "converged") ++good;
    auto opt = [](const std::optional<double>& v) {
      if (!v || !std::isfinite(*v)) return std::string();
      std::ostringstream s;
      s.precision(17);
      s << *v;
      return s.str();
    };
    std::string err = r.error;
    for (auto& ch : err)
      if (ch == ',' || ch == '\n') ch = ';';
    csv << r.value << ',' << r.status << ',' << r.iterations << ',' << opt(r.c_estimate) << ','
        << opt(r.contraction_factor) << ',' << r.periodicity_residual << ',' << r.equation_residual << ','
        << r.seconds << ',' << err << '\n';
    table.push_back({{"value", r.value},
                     {"status", r.status},
                     {"iterations", r.iterations},
                     {"c_estimate", num(r.c_estimate)},
                     {"contraction_factor", num(r.contraction_factor)},
                     {"periodicity_residual", num(r.periodicity_residual)},
                     {"equation_residual", num(r.equation_residual)},
                     {"error", r.error}});
  }

  RunRecorder rec(out_dir ? *out_dir : fs::path(cfg.output_dir) / ("sweep_" + axis), "sweep", cfg);
  rec.manifest()["axis"] = axis;
  rec.add_text("sweep_" + axis + ".csv", csv.str(), false);  // runtime column varies
  rec.add_json("sweep_" + axis + ".json", table);
  rec.headline()["rows"] = rows.size();
  rec.headline()["converged_rows"] = good;
  const int code = good > 0 ? kExitOk : kExitDivergence;
  const fs::path manifest = rec.finish(good > 0 ? "ok" : "all_rows_failed", code);

  log << "sweep " << axis << ": " << manifest.string() << '\n';
  log << "  " << std::left << std::setw(12) << "value" << std::setw(16) << "status" << std::setw(14) << "c_estimate"
      << std::setw(16) << "contraction" << std::setw(14) << "periodicity" << std::setw(14) << "eq_residual"
      << "runtime_s\n";
  for (const auto& r : rows) {
    log << "  " << std::left << std::setw(12) << detail::fmt(r.value) << std::setw(16) << r.status << std::setw(14)
        << detail::fmt(r.c_estimate) << std::setw(16) << detail::fmt(r.contraction_factor) << std::setw(14)
        << detail::fmt(r.periodicity_residual) << std::setw(14) << detail::fmt(r.equation_residual)
        << detail::fmt(r.seconds) << '\n';
    if (!r.error.empty()) log << "    error: " << r.error << '\n';
  }
  return code;
}

}  // namespace glperiod::harness
