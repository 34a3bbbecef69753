#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "glperiod/harness/config.hpp"
#include "glperiod/periodic_solver.hpp"
#include "glperiod/stability.hpp"
#include "glperiod/verification.hpp"

namespace glperiod::harness {

using json = nlohmann::ordered_json;

/// Non-finite numbers become null.
inline json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json num(const std::optional<double>& v) { return v ? num(*v) : json(nullptr); }

inline json profile_json(const ProfileConfig& p) {
  json j{{"kind", p.kind}};
  if (p.kind == "snapshot") {
    j["path"] = p.path;
  } else {
    j["sigma"] = p.sigma;
    if (p.kind == "dipole") j["axis"] = p.axis;
  }
  return j;
}

inline json to_json(const RunConfig& c) {
  const char* temporal = c.temporal.kind == TemporalKind::sin_fundamental   ? "sin"
                         : c.temporal.kind == TemporalKind::cos_fundamental ? "cos"
                                                                            : "harmonic";
  json j;
  j["grid"] = {{"dim", c.grid.dim},
               {"n", c.grid.n_per_axis},
               {"box_length", c.grid.box_length},
               {"dealias_fraction", c.grid.dealias_fraction}};
  j["period"] = c.period;
  if (c.cutoffs) j["cutoffs"] = {{"r1", c.cutoffs->r1}, {"r_inf", c.cutoffs->r_inf}};
  else j["cutoffs"] = "auto";
  j["forcing"] = {{"amplitude", c.forcing_amplitude},
                  {"temporal", temporal},
                  {"harmonic", c.temporal.harmonic},
                  {"spatial", profile_json(c.forcing_profile)}};
  j["solve"] = {{"m_t", c.solve.m_t},
                {"max_iterations", c.solve.max_iterations},
                {"min_iterations", c.solve.min_iterations},
                {"z_tolerance", c.solve.z_tolerance},
                {"zero_mode_tol", c.solve.zero_mode_tol},
                {"nonlinearity", c.solve.nonlinearity_enabled},
                {"track_oddness", c.solve.track_oddness}};
  j["stability"] = {{"t_max", c.stability.t_max ? json(*c.stability.t_max) : json("auto")},
                    {"record_stride", c.stability.record_stride},
                    {"scheme", to_string(c.stability.integrator.scheme)},
                    {"corrector_sweeps", c.stability.integrator.corrector_sweeps},
                    {"nonlinear", c.stability.nonlinear},
                    {"perturbation",
                     {{"amplitude", c.stability.perturbation_amplitude},
                      {"spatial", profile_json(c.stability.perturbation)}}}};
  j["verify"] = {{"samples", c.verify.samples}, {"tamper_cutoff", c.verify.tamper_cutoff}};
  j["sweep"] = {{"epsilon", c.sweep.epsilon}, {"m_t", c.sweep.m_t}, {"n", c.sweep.n}};
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["snapshots"] = c.snapshots;
  return j;
}

/// Inverse of to_json(RunConfig): re-reads an echoed config through the YAML
/// loader (JSON is a YAML subset), so the same validation applies.
inline RunConfig config_from_json(const json& j) { return config_from_string(j.dump()); }

inline json to_json(const SpaceTimeNorms& n) {
  return {{"x_norm", num(n.x_norm)},
          {"y_norm", num(n.y_norm)},
          {"z_norm", num(n.z_norm)},
          {"g_bracket", num(n.g_bracket)},
          {"x_parts",
           {{"l2", num(n.x_parts.l2)}, {"x_gradient", num(n.x_parts.x_gradient)}, {"dt_weighted", num(n.x_parts.dt_weighted)}}},
          {"y_parts",
           {{"sup_h2", num(n.y_parts.sup_h2)}, {"l2_h3", num(n.y_parts.l2_h3)}, {"h1_h1", num(n.y_parts.h1_h1)}}}};
}

inline json to_json(const PeriodicSolveReport& r) {
  json hist = json::array();
  for (double v : r.residual_history) hist.push_back(num(v));
  return {{"converged", r.converged},
          {"status", to_string(r.status)},
          {"message", r.message},
          {"iterations", r.iterations},
          {"residual_history", hist},
          {"periodicity_residual", num(r.periodicity_residual)},
          {"z_norm", num(r.z_norm)},
          {"g_bracket", num(r.g_bracket)},
          {"c_estimate", num(r.c_estimate)},
          {"contraction_factor", num(r.contraction_factor)},
          {"max_oddness", num(r.max_oddness)},
          {"norms", to_json(r.norms)}};
}

inline json to_json(const std::optional<DecayFit>& f) {
  if (!f) return nullptr;
  return {{"slope", num(f->slope)}, {"intercept", num(f->intercept)}, {"r2", num(f->r2)}, {"samples", f->samples}};
}

/// Summary of a decay run (the time series go to CSV).
inline json to_json(const DecayReport& r) {
  auto last = [](const std::vector<double>& v) { return v.empty() ? json(nullptr) : num(v.back()); };
  auto first = [](const std::vector<double>& v) { return v.empty() ? json(nullptr) : num(v.front()); };
  return {{"samples", r.times.size()},
          {"t_end", last(r.times)},
          {"fit_window", {{"lo", r.fit_window.lo}, {"hi", r.fit_window.hi}}},
          {"slope_l2", num(r.fitted_slope_l0())},
          {"slope_grad", num(r.fitted_slope_l1())},
          {"fit_l2", to_json(r.fit_l0)},
          {"fit_grad", to_json(r.fit_l1)},
          {"fit_hessian", to_json(r.fit_l2)},
          {"n_start", first(r.n_series)},
          {"n_end", last(r.n_series)},
          {"n1_end", last(r.n1_series)},
          {"n2_end", last(r.n2_series)},
          {"escaped", r.escaped},
          {"escape_time", num(r.escape_time)},
          {"max_oddness", num(r.max_oddness)},
          {"w0_l1", num(r.w0_l1)},
          {"w0_h1", num(r.w0_h1)}};
}

inline std::string decay_csv(const DecayReport& r) {
  std::ostringstream out;
  out.precision(17);
  out << "t,l2_w,h1_grad_w,h2_grad_w,n1,n2,n\n";
  for (std::size_t i = 0; i < r.times.size(); ++i)
    out << r.times[i] << ',' << r.l2_w[i] << ',' << r.h1_grad_w[i] << ',' << r.h2_grad_w[i] << ','
        << r.n1_series[i] << ',' << r.n2_series[i] << ',' << r.n_series[i] << '\n';
  return out.str();
}

inline json to_json(const CheckReport& r) {
  json extras = json::object();
  for (const auto& [k, v] : r.extras) extras[k] = num(v);
  return {{"check_name", r.check_name},
          {"samples", r.samples},
          {"fitted_constant", num(r.fitted_constant)},
          {"ceiling", num(r.ceiling)},
          {"worst_ratio", num(r.worst_ratio)},
          {"passed", r.passed},
          {"battery", r.battery},
          {"extras", extras}};
}

inline json to_json(const std::vector<CheckReport>& reports) {
  json arr = json::array();
  for (const auto& r : reports) arr.push_back(to_json(r));
  return arr;
}

}  // namespace glperiod::harness
