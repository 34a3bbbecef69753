#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "glperiod/decay_fit.hpp"
#include "glperiod/error.hpp"
#include "glperiod/field.hpp"
#include "glperiod/forcing.hpp"
#include "glperiod/norms.hpp"
#include "glperiod/operators.hpp"
#include "glperiod/periodic_solver.hpp"
#include "glperiod/spectral.hpp"

namespace glperiod {

/// Right-hand side of the perturbation equation about v:
///   2|v|^2 w + v^2 conj(w) + 2|w|^2 v + conj(v) w^2 + |w|^2 w,
/// evaluated pointwise and returned dealiased in frequency space.
inline SpectralField perturbation_rhs(const SpectralField& w, const SpectralField& v) {
  if (w.grid().config() != v.grid().config()) throw GridMismatch("perturbation_rhs: w and v on different grids");
  return dealias(to_frequency(cubic_increment(to_physical(w), to_physical(v))));
}

enum class Scheme { exponential_euler, etd2 };

inline const char* to_string(Scheme s) { return s == Scheme::etd2 ? "etd2" : "exponential_euler"; }

struct IntegratorOptions {
  Scheme scheme = Scheme::etd2;
  /// Trapezoidal corrector sweeps for etd2. One sweep is the classical
  /// predictor-corrector ETD2; more sweeps converge to the implicit
  /// trapezoidal exponential rule used by the periodic solver.
  int corrector_sweeps = 8;
  double corrector_tol = 1e-14;
};

/// One exponential step of  w' + A w = F(w, t)  on the node grid.
/// `rhs(state, node)` returns F in frequency space at time node `node`.
///
/// exponential_euler:  w+ = e^{-hA} w + h phi1(-h lambda) F(w, m)
/// etd2:               predictor as above, then
///                     w+ = e^{-hA} w + h(phi1 - phi2) F(w, m) + h phi2 F(w+, m+1)
template <typename Rhs>
SpectralField exponential_step(const SpectralField& w, Rhs&& rhs, long node, const StepCoefficients& c,
                               const IntegratorOptions& opts) {
  w.require(Representation::frequency, "exponential_step");
  const SpectralField f_old = rhs(w, node);
  const auto d = c.decay(), we = c.weight_euler();
  SpectralField next(w.grid_ptr(), Representation::frequency);
  for (std::size_t i = 0; i < next.size(); ++i) next[i] = d[i] * w[i] + we[i] * f_old[i];
  zero_nyquist(next);
  if (!next.all_finite()) throw NonFiniteField("exponential step overflowed");
  if (opts.scheme == Scheme::exponential_euler) return next;

  const auto wo = c.weight_old(), wn = c.weight_new();
  SpectralField base(w.grid_ptr(), Representation::frequency);
  for (std::size_t i = 0; i < base.size(); ++i) base[i] = d[i] * w[i] + wo[i] * f_old[i];
  for (int sweep = 0; sweep < std::max(1, opts.corrector_sweeps); ++sweep) {
    const SpectralField f_new = rhs(next, node + 1);
    SpectralField corrected = base;
    for (std::size_t i = 0; i < corrected.size(); ++i) corrected[i] += wn[i] * f_new[i];
    zero_nyquist(corrected);
    if (!corrected.all_finite()) throw NonFiniteField("exponential step overflowed");
    const double change = l2_norm(corrected - next);
    const double size = l2_norm(corrected);
    next = std::move(corrected);
    if (change <= opts.corrector_tol * size) break;
  }
  return next;
}

/// One step of the perturbation equation about v (v_now at t, v_next at t+h).
inline SpectralField exp_step(const SpectralField& w, const SpectralField& v_now, const SpectralField& v_next,
                              double h, const LinearOperator& op, const IntegratorOptions& opts = {}) {
  if (!(h > 0.0)) throw ConfigError("exp_step needs h > 0");
  const StepCoefficients c(op, h);
  const SpectralField vp0 = to_physical(v_now), vp1 = to_physical(v_next);
  auto rhs = [&](const SpectralField& state, long node) {
    return perturbation_rhs(state, node == 0 ? vp0 : vp1);
  };
  return exponential_step(to_frequency(w), rhs, 0, c, opts);
}

struct StabilityRunConfig {
  double t_max = 0.0;        // >= 10 T
  int record_stride = 8;     // steps between recorded samples
  FieldSeries v_per;         // periodic background; step h = T / M_t
  SpectralField w0;
  IntegratorOptions integrator;
  bool nonlinear = true;     // false: pure linear flow w' + A w = 0
  bool track_oddness = true;
  double escape_factor = 1e6;  // escaped once ||w|| exceeds this multiple of ||w0||
};

struct FitWindow {
  double lo = 1.0;
  double hi = 0.0;
};

/// [1, 0.25 (L / 2 pi)^2]: times at which the slowest torus mode has decayed
/// by at most e^{-1/4}, so the algebraic free-space decay is still visible.
inline FitWindow box_validity_window(const Grid& grid) {
  const double scale = grid.box_length() / (2.0 * std::numbers::pi);
  return {1.0, 0.25 * scale * scale};
}

struct DecayReport {
  std::vector<double> times;
  std::vector<double> l2_w;       // ||w||_{L2}
  std::vector<double> h1_grad_w;  // ||grad w||_{L2}
  std::vector<double> h2_grad_w;  // ||grad^2 w||_{L2} (recorded, not asserted)
  std::vector<double> n1_series, n2_series, n_series;
  std::optional<DecayFit> fit_l0, fit_l1, fit_l2;
  FitWindow fit_window;
  bool escaped = false;
  std::optional<double> escape_time;
  double max_oddness = 0.0;
  double w0_l1 = 0.0, w0_h1 = 0.0;

  std::optional<double> fitted_slope_l0() const { return fit_l0 ? std::optional(fit_l0->slope) : std::nullopt; }
  std::optional<double> fitted_slope_l1() const { return fit_l1 ? std::optional(fit_l1->slope) : std::nullopt; }
};

namespace detail {

struct GradientNorms {
  double l2 = 0.0, grad = 0.0, hess = 0.0;
};

inline GradientNorms gradient_norms(const SpectralField& hat) {
  const auto s = sobolev_order_sums(hat, 2, false);
  return {std::sqrt(s[0]), std::sqrt(s[1]), std::sqrt(s[2])};
}

}  // namespace detail

/// Integrates  w' + A w = |v+w|^2 (v+w) - |v|^2 v  from w0,
/// with v sampled at the stored nodes of v_per (wrapped periodically).
inline DecayReport run_stability(const StabilityRunConfig& cfg, const LinearOperator& op, const CutoffSpec& cutoffs) {
  const FieldSeries V = to_frequency(cfg.v_per);
  const double T = V.period();
  if (std::abs(T - op.period()) > 1e-12 * T) throw ConfigError("v_per period differs from the operator period");
  if (cfg.t_max < 10.0 * T - 1e-12) throw ConfigError("stability.t_max must be at least 10 T");
  if (cfg.record_stride < 1) throw ConfigError("stability.record_stride must be >= 1");
  if (V.grid().config() != cfg.w0.grid().config()) throw GridMismatch("w0 and v_per on different grids");

  const int M = V.intervals();
  const double h = V.time_step();
  const long steps = std::lround(cfg.t_max / h);
  const StepCoefficients coeffs(op, h);

  std::vector<SpectralField> v_phys(static_cast<std::size_t>(M));
  for (int m = 0; m < M; ++m) v_phys[static_cast<std::size_t>(m)] = to_physical(V[static_cast<std::size_t>(m)]);
  auto rhs = [&](const SpectralField& w, long node) {
    if (!cfg.nonlinear) return SpectralField(w.grid_ptr(), Representation::frequency);
    return perturbation_rhs(w, v_phys[static_cast<std::size_t>(node % M)]);
  };

  DecayReport rep;
  rep.fit_window = box_validity_window(V.grid());
  rep.w0_l1 = lp_norm(cfg.w0, 1, false);
  rep.w0_h1 = sobolev_norm(cfg.w0, 1, false);

  double n1 = 0.0, n2 = 0.0;
  auto record = [&](const SpectralField& w, double t) {
    const auto all = detail::gradient_norms(w);
    const auto low = detail::gradient_norms(project(w, Band::low, cutoffs));
    const SpectralField high = project(w, Band::high, cutoffs);
    const double high_h1 = sobolev_norm(high, 1, false);
    n1 = std::max(n1, std::pow(1 + t, 0.75) * low.l2 + std::pow(1 + t, 1.25) * low.grad);
    n2 = std::max(n2, std::pow(1 + t, 1.25) * high_h1);
    rep.times.push_back(t);
    rep.l2_w.push_back(all.l2);
    rep.h1_grad_w.push_back(all.grad);
    rep.h2_grad_w.push_back(all.hess);
    rep.n1_series.push_back(n1);
    rep.n2_series.push_back(n2);
    rep.n_series.push_back(n1 + n2);
    if (cfg.track_oddness) rep.max_oddness = std::max(rep.max_oddness, check_oddness(w));
  };

  SpectralField w = to_frequency(cfg.w0);
  zero_nyquist(w);
  record(w, 0.0);
  const double escape_level = cfg.escape_factor * l2_norm(w);
  for (long s = 0; s < steps; ++s) {
    try {
      w = exponential_step(w, rhs, s, coeffs, cfg.integrator);
    } catch (const NonFiniteField&) {
      rep.escaped = true;
      rep.escape_time = (s + 1) * h;
      break;
    }
    if ((s + 1) % cfg.record_stride == 0 || s + 1 == steps) record(w, (s + 1) * h);
    if (l2_norm(w) > escape_level) {
      rep.escaped = true;
      rep.escape_time = (s + 1) * h;
      break;
    }
  }
  if (!rep.escaped && rep.times.size() < 2) throw InsufficientData("stability run recorded fewer than two samples");

  const FitWindow win{rep.fit_window.lo, std::min(rep.fit_window.hi, rep.times.back())};
  if (rep.escaped) return rep;
  auto try_fit = [&](const std::vector<double>& values) -> std::optional<DecayFit> {
    try {
      return fit_decay_rate(rep.times, values, win.lo, win.hi);
    } catch (const Error&) {
      return std::nullopt;
    }
  };
  rep.fit_l0 = try_fit(rep.l2_w);
  rep.fit_l1 = try_fit(rep.h1_grad_w);
  rep.fit_l2 = try_fit(rep.h2_grad_w);
  return rep;
}

/// Integrates u' + A u = dealias(|u|^2 u) + g directly from u0 for `steps`
/// steps of h = T / M_t, with g sampled at its nodes. Returns the state after
/// each step (index 0 is u0).
inline std::vector<SpectralField> integrate_direct(const SpectralField& u0, const FieldSeries& g,
                                                   const LinearOperator& op, long steps,
                                                   const IntegratorOptions& opts = {}) {
  const FieldSeries G = to_frequency(g);
  const int M = G.intervals();
  const StepCoefficients coeffs(op, G.time_step());
  auto rhs = [&](const SpectralField& u, long node) {
    SpectralField f = dealias(to_frequency(cubic_nonlinearity(to_physical(u))));
    f += G[static_cast<std::size_t>(node % M)];
    return f;
  };
  std::vector<SpectralField> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  out.push_back(to_frequency(u0));
  for (long s = 0; s < steps; ++s) out.push_back(exponential_step(out.back(), rhs, s, coeffs, opts));
  return out;
}

/// max over steps of ||(v_per + w)(t) - u_direct(t)||_{L2} over `periods`
/// periods, both integrated with the same scheme and step.
inline double direct_vs_perturbation_gap(const FieldSeries& v_per, const FieldSeries& g, const SpectralField& w0,
                                         const LinearOperator& op, int periods, const IntegratorOptions& opts = {}) {
  const FieldSeries V = to_frequency(v_per);
  const int M = V.intervals();
  const long steps = static_cast<long>(periods) * M;
  const SpectralField W0 = to_frequency(w0);
  const auto direct = integrate_direct(V[0] + W0, g, op, steps, opts);

  std::vector<SpectralField> v_phys(static_cast<std::size_t>(M));
  for (int m = 0; m < M; ++m) v_phys[static_cast<std::size_t>(m)] = to_physical(V[static_cast<std::size_t>(m)]);
  const StepCoefficients coeffs(op, V.time_step());
  auto rhs = [&](const SpectralField& w, long node) {
    return perturbation_rhs(w, v_phys[static_cast<std::size_t>(node % M)]);
  };
  SpectralField w = W0;
  double gap = 0.0;
  for (long s = 0; s < steps; ++s) {
    w = exponential_step(w, rhs, s, coeffs, opts);
    const SpectralField sum = V[static_cast<std::size_t>((s + 1) % M)] + w;
    gap = std::max(gap, l2_norm(sum - direct[static_cast<std::size_t>(s) + 1]));
  }
  return gap;
}

}  // namespace glperiod
