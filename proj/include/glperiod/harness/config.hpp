#pragma once

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "glperiod/error.hpp"
#include "glperiod/forcing.hpp"
#include "glperiod/grid.hpp"
#include "glperiod/operators.hpp"
#include "glperiod/periodic_solver.hpp"
#include "glperiod/snapshot.hpp"
#include "glperiod/stability.hpp"
#include "glperiod/verification.hpp"

namespace glperiod::harness {

struct CutoffOverride {
  double r1 = 0.0;
  double r_inf = 0.0;
};

/// Spatial profile as written in a config file. kind = dipole | bump | snapshot.
struct ProfileConfig {
  std::string kind = "dipole";
  double sigma = 4.0;
  int axis = 0;
  std::string path;  // snapshot file, kind == snapshot

  SpatialProfile realize_spec(const GridPtr& grid) const {
    if (kind == "dipole") return GaussDipole{sigma, axis};
    if (kind == "bump") return GaussBump{sigma};
    return read_snapshot(path, grid);
  }
};

struct StabilitySettings {
  std::optional<double> t_max;  // empty: max(10 T, 0.25 (L / 2 pi)^2)
  int record_stride = 8;
  IntegratorOptions integrator;
  bool nonlinear = true;
  double perturbation_amplitude = 1e-2;
  ProfileConfig perturbation{"dipole", 3.5, 0, {}};
};

struct VerifySettings {
  int samples = 200;
  bool tamper_cutoff = false;
};

struct SweepSettings {
  std::vector<double> epsilon{1e-3, 3e-3, 1e-2};
  std::vector<int> m_t{32, 64, 128};
  std::vector<int> n{16, 32};
};

struct RunConfig {
  GridConfig grid;
  double period = 1.0;
  std::optional<CutoffOverride> cutoffs;  // empty: automatic
  double forcing_amplitude = 1e-2;
  TemporalProfile temporal;
  ProfileConfig forcing_profile{"dipole", 4.0, 0, {}};
  SolveOptions solve;
  StabilitySettings stability;
  VerifySettings verify;
  SweepSettings sweep;
  std::uint64_t seed = 20240601;
  std::string output_dir = "runs/reference";
  bool snapshots = true;
};

/// Everything a run needs, built from a config.
struct RunSetup {
  GridPtr grid;
  LinearOperator op;
  CutoffSpec cutoffs;
  ForcingSpec forcing;
};

inline double default_t_max(const RunConfig& c) {
  const double scale = c.grid.box_length / (2.0 * std::numbers::pi);
  return std::max(10.0 * c.period, 0.25 * scale * scale);
}

inline void validate(const RunConfig& c) {
  validate(c.grid);
  if (!(c.period > 0.0)) throw ConfigError("period must be positive");
  if (c.cutoffs) {
    if (!(c.cutoffs->r1 > 0.0)) throw ConfigError("cutoffs.r1 must be positive");
    if (!(c.cutoffs->r1 < c.cutoffs->r_inf))
      throw ConfigError("cutoffs.r1 must be smaller than cutoffs.r_inf (r1 < r_inf violated: r1=" +
                        sci(c.cutoffs->r1) + ", r_inf=" + sci(c.cutoffs->r_inf) + ")");
    if (c.period * c.cutoffs->r_inf * c.cutoffs->r_inf > 1.0 + 1e-12)
      throw ConfigError("cutoffs violate T*r_inf^2 <= 1 (T*r_inf^2 = " +
                        sci(c.period * c.cutoffs->r_inf * c.cutoffs->r_inf) + ")");
  }
  if (!(c.forcing_amplitude >= 0.0)) throw ConfigError("forcing.amplitude must be non-negative");
  for (const auto* p : {&c.forcing_profile, &c.stability.perturbation}) {
    if (p->kind != "dipole" && p->kind != "bump" && p->kind != "snapshot")
      throw ConfigError("spatial.kind must be dipole, bump or snapshot (got '" + p->kind + "')");
    if (p->kind != "snapshot" && !(p->sigma > 0.0)) throw ConfigError("spatial.sigma must be positive");
    if (p->kind == "snapshot" && p->path.empty()) throw ConfigError("spatial.path is required for kind snapshot");
    if (p->kind == "dipole" && (p->axis < 0 || p->axis >= c.grid.dim))
      throw ConfigError("spatial.axis must lie in 0..dim-1");
  }
  if (c.forcing_profile.kind == "bump") throw ConfigError("forcing.spatial.kind bump is even; forcing must be odd");
  validate(c.solve);
  if (c.stability.t_max && *c.stability.t_max < 10.0 * c.period - 1e-12)
    throw ConfigError("stability.t_max must be at least 10 T");
  if (c.stability.record_stride < 1) throw ConfigError("stability.record_stride must be >= 1");
  if (c.stability.integrator.corrector_sweeps < 1) throw ConfigError("stability.corrector_sweeps must be >= 1");
  if (c.verify.samples < 1) throw ConfigError("verify.samples must be >= 1");
}

inline RunSetup make_setup(const RunConfig& c) {
  validate(c);
  GridPtr grid = make_grid(c.grid);
  LinearOperator op(grid, c.period);
  CutoffSpec cutoffs = c.cutoffs ? make_cutoffs(c.cutoffs->r1, c.cutoffs->r_inf, grid) : default_cutoffs(grid, c.period);
  check_period_regime(cutoffs, c.period);
  ForcingSpec forcing;
  forcing.amplitude = c.forcing_amplitude;
  forcing.temporal = c.temporal;
  forcing.period = c.period;
  forcing.spatial = c.forcing_profile.realize_spec(grid);
  return RunSetup{grid, std::move(op), std::move(cutoffs), std::move(forcing)};
}

namespace detail {

/// Tracks the key path for error messages and rejects unknown keys.
class Reader {
 public:
  Reader(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) throw ConfigError(where() + " must be a mapping");
  }

  bool has(const std::string& key) const { return node_ && node_.IsMap() && node_[key]; }

  Reader child(const std::string& key) {
    seen_.insert(key);
    return Reader(has(key) ? node_[key] : YAML::Node(), join(key));
  }

  YAML::Node raw(const std::string& key) {
    seen_.insert(key);
    return has(key) ? node_[key] : YAML::Node();
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!has(key)) return;
    try {
      out = node_[key].as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError(join(key) + " has the wrong type");
    }
  }

  template <typename T>
  void get_list(const std::string& key, std::vector<T>& out) {
    seen_.insert(key);
    if (!has(key)) return;
    const YAML::Node n = node_[key];
    if (!n.IsSequence()) throw ConfigError(join(key) + " must be a list");
    out.clear();
    try {
      for (const auto& v : n) out.push_back(v.as<T>());
    } catch (const YAML::Exception&) {
      throw ConfigError(join(key) + " has an entry of the wrong type");
    }
  }

  void finish() const {
    if (!node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!seen_.count(key)) throw ConfigError("unknown config key " + join(key));
    }
  }

  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  std::string where() const { return path_.empty() ? "config root" : path_; }

 private:
  YAML::Node node_;
  std::string path_;
  std::set<std::string> seen_;
};

inline void read_profile(Reader r, ProfileConfig& p) {
  r.get("kind", p.kind);
  r.get("sigma", p.sigma);
  r.get("axis", p.axis);
  r.get("path", p.path);
  r.finish();
}

}  // namespace detail

inline RunConfig config_from_yaml(const YAML::Node& root, const std::filesystem::path& base_dir = {}) {
  RunConfig c;
  detail::Reader top(root, "");

  auto grid = top.child("grid");
  grid.get("dim", c.grid.dim);
  grid.get("n", c.grid.n_per_axis);
  grid.get("box_length", c.grid.box_length);
  grid.get("dealias_fraction", c.grid.dealias_fraction);
  grid.finish();

  top.get("period", c.period);

  const YAML::Node cut = top.raw("cutoffs");
  if (cut && !cut.IsNull() && !(cut.IsScalar() && cut.as<std::string>() == "auto")) {
    detail::Reader r(cut, "cutoffs");
    CutoffOverride o;
    if (!r.has("r1") || !r.has("r_inf")) throw ConfigError("cutoffs must be 'auto' or give both r1 and r_inf");
    r.get("r1", o.r1);
    r.get("r_inf", o.r_inf);
    r.finish();
    c.cutoffs = o;
  }

  auto forcing = top.child("forcing");
  forcing.get("amplitude", c.forcing_amplitude);
  std::string temporal = "sin";
  forcing.get("temporal", temporal);
  forcing.get("harmonic", c.temporal.harmonic);
  if (temporal == "sin") c.temporal.kind = TemporalKind::sin_fundamental;
  else if (temporal == "cos") c.temporal.kind = TemporalKind::cos_fundamental;
  else if (temporal == "harmonic") c.temporal.kind = TemporalKind::harmonic;
  else throw ConfigError("forcing.temporal must be sin, cos or harmonic (got '" + temporal + "')");
  detail::read_profile(forcing.child("spatial"), c.forcing_profile);
  forcing.finish();

  auto solve = top.child("solve");
  solve.get("m_t", c.solve.m_t);
  solve.get("max_iterations", c.solve.max_iterations);
  solve.get("min_iterations", c.solve.min_iterations);
  solve.get("z_tolerance", c.solve.z_tolerance);
  solve.get("zero_mode_tol", c.solve.zero_mode_tol);
  solve.get("nonlinearity", c.solve.nonlinearity_enabled);
  solve.get("track_oddness", c.solve.track_oddness);
  solve.finish();

  auto stab = top.child("stability");
  const YAML::Node t_max = stab.raw("t_max");
  if (t_max && !t_max.IsNull() && !(t_max.IsScalar() && t_max.as<std::string>() == "auto")) {
    try {
      c.stability.t_max = t_max.as<double>();
    } catch (const YAML::Exception&) {
      throw ConfigError("stability.t_max must be a number or 'auto'");
    }
  }
  stab.get("record_stride", c.stability.record_stride);
  std::string scheme = "etd2";
  stab.get("scheme", scheme);
  if (scheme == "etd2") c.stability.integrator.scheme = Scheme::etd2;
  else if (scheme == "exponential_euler") c.stability.integrator.scheme = Scheme::exponential_euler;
  else throw ConfigError("stability.scheme must be etd2 or exponential_euler (got '" + scheme + "')");
  stab.get("corrector_sweeps", c.stability.integrator.corrector_sweeps);
  stab.get("nonlinear", c.stability.nonlinear);
  auto pert = stab.child("perturbation");
  pert.get("amplitude", c.stability.perturbation_amplitude);
  detail::read_profile(pert.child("spatial"), c.stability.perturbation);
  pert.finish();
  stab.finish();

  auto verify = top.child("verify");
  verify.get("samples", c.verify.samples);
  verify.get("tamper_cutoff", c.verify.tamper_cutoff);
  verify.finish();

  auto sweep = top.child("sweep");
  sweep.get_list("epsilon", c.sweep.epsilon);
  sweep.get_list("m_t", c.sweep.m_t);
  sweep.get_list("n", c.sweep.n);
  sweep.finish();

  top.get("seed", c.seed);
  top.get("output_dir", c.output_dir);
  top.get("snapshots", c.snapshots);
  top.finish();

  for (auto* p : {&c.forcing_profile, &c.stability.perturbation})
    if (p->kind == "snapshot" && !p->path.empty() && std::filesystem::path(p->path).is_relative())
      p->path = (base_dir / p->path).string();
  validate(c);
  return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::BadFile&) {
    throw ConfigError("cannot read config file " + path.string());
  } catch (const YAML::Exception& e) {
    throw ConfigError("malformed config " + path.string() + ": " + e.what());
  }
  return config_from_yaml(root, path.parent_path());
}

inline RunConfig config_from_string(const std::string& text) {
  try {
    return config_from_yaml(YAML::Load(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
}

}  // namespace glperiod::harness
