#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "glperiod/error.hpp"
#include "glperiod/field.hpp"
#include "glperiod/forcing.hpp"
#include "glperiod/norms.hpp"
#include "glperiod/operators.hpp"
#include "glperiod/parallel.hpp"
#include "glperiod/phi.hpp"
#include "glperiod/spectral.hpp"

namespace glperiod {

struct SolveOptions {
  int max_iterations = 50;
  int min_iterations = 0;      // keep iterating below tolerance (contraction studies)
  double z_tolerance = 1e-10;  // on ||{u1,u_inf}^{(l+1)} - {u1,u_inf}^{(l)}||_Z
  int m_t = 64;
  double zero_mode_tol = kDefaultZeroModeTol;
  bool nonlinearity_enabled = true;
  bool track_oddness = true;
};

inline void validate(const SolveOptions& o) {
  if (o.m_t < 8) throw ConfigError("solve.m_t must be >= 8");
  if (o.max_iterations < 1) throw ConfigError("solve.max_iterations must be >= 1");
  if (o.min_iterations < 0 || o.min_iterations > o.max_iterations)
    throw ConfigError("solve.min_iterations must lie in 0..max_iterations");
  if (!(o.z_tolerance > 0.0)) throw ConfigError("solve.z_tolerance must be positive");
  if (!(o.zero_mode_tol > 0.0)) throw ConfigError("solve.zero_mode_tol must be positive");
}

/// Per-mode coefficients of one step of the exponential quadrature
///   I(t+h) = e^{-h lambda} I(t) + h (phi1 - phi2)(z) F(t) + h phi2(z) F(t+h),  z = -h lambda,
/// which integrates e^{-(t+h-s) lambda} exactly against the linear interpolant
/// of F on [t, t+h].
class StepCoefficients {
 public:
  StepCoefficients(const LinearOperator& op, double h) : h_(h) {
    const auto lambda = op.symbol();
    const std::size_t n = lambda.size();
    decay_.resize(n);
    old_.resize(n);
    new_.resize(n);
    euler_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Complex z = -h * lambda[i];
      const Complex p1 = phi1(z), p2 = phi2(z);
      decay_[i] = std::exp(z);
      old_[i] = h * (p1 - p2);
      new_[i] = h * p2;
      euler_[i] = h * p1;
    }
  }

  double step() const { return h_; }
  std::span<const Complex> decay() const { return decay_; }
  std::span<const Complex> weight_old() const { return old_; }
  std::span<const Complex> weight_new() const { return new_; }
  /// h phi1(z): the exponential-Euler weight.
  std::span<const Complex> weight_euler() const { return euler_; }

 private:
  double h_;
  std::vector<Complex> decay_, old_, new_, euler_;
};

namespace detail {

/// out = decay*prev + w_old*f_old + w_new*f_new, Nyquist cleared.
inline SpectralField quadrature_step(const StepCoefficients& c, const SpectralField& prev,
                                     const SpectralField& f_old, const SpectralField& f_new) {
  SpectralField out(prev.grid_ptr(), Representation::frequency);
  const auto d = c.decay(), wo = c.weight_old(), wn = c.weight_new();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = d[i] * prev[i] + wo[i] * f_old[i] + wn[i] * f_new[i];
  zero_nyquist(out);
  return out;
}

inline void require_frequency_series(const FieldSeries& F, const LinearOperator& op) {
  if (F.grid().config() != op.grid().config()) throw GridMismatch("series and operator grids differ");
}

/// Throws ZeroModeViolation if some node of F has a mean component above
/// tol * max_m ||F_m||.
inline void check_series_zero_mode(const FieldSeries& F, double tol) {
  double scale = 0.0;
  for (const auto& f : F.fields()) scale = std::max(scale, l2_norm(f));
  for (std::size_t m = 0; m < F.size(); ++m) {
    const double mean = mean_mode_l2(F[m]);
    if (mean > tol * scale)
      throw ZeroModeViolation("time node " + std::to_string(m) + ": mean mode " + sci(mean) +
                              " exceeds " + sci(tol) + " x " + sci(scale) +
                              " (forcing or nonlinearity is not odd)");
  }
}

}  // namespace detail

/// int_0^{t_m} e^{-(t_m - s)A} F(s) ds with F linear between nodes.
inline SpectralField duhamel_integral(const FieldSeries& F, int t_index, const LinearOperator& op) {
  if (t_index < 0 || t_index > F.intervals())
    throw ConfigError("duhamel_integral: time index " + std::to_string(t_index) + " outside 0.." +
                      std::to_string(F.intervals()));
  detail::require_frequency_series(F, op);
  const FieldSeries hat = to_frequency(F);
  const StepCoefficients c(op, hat.time_step());
  SpectralField acc(hat.grid_ptr(), Representation::frequency);
  for (int m = 0; m < t_index; ++m) acc = detail::quadrature_step(c, acc, hat[m], hat[m + 1]);
  return acc;
}

/// u0 = (1 - e^{-TA})^{-1} int_0^T e^{-(T-s)A} F(s) ds: the initial value whose
/// linear evolution under forcing F returns to itself after one period.
inline SpectralField periodic_initial_data(const FieldSeries& F, const LinearOperator& op,
                                           double zero_mode_tol = kDefaultZeroModeTol) {
  const FieldSeries hat = to_frequency(F);
  detail::check_series_zero_mode(hat, zero_mode_tol);
  SpectralField u0 = duhamel_integral(hat, hat.intervals(), op);
  const auto inv = period_inverse_symbol(op);
  for (std::size_t i = 0; i < u0.size(); ++i) u0[i] *= inv[i];
  zero_nyquist(u0);
  return u0;
}

/// u(t_m) = e^{-t_m A} u0 + int_0^{t_m} e^{-(t_m - s)A} F(s) ds at every node
/// (frequency representation, periodic series).
inline FieldSeries linear_period_map(const FieldSeries& F, const LinearOperator& op,
                                     double zero_mode_tol = kDefaultZeroModeTol) {
  const FieldSeries hat = to_frequency(F);
  const SpectralField u0 = periodic_initial_data(hat, op, zero_mode_tol);
  const StepCoefficients c(op, hat.time_step());
  std::vector<SpectralField> out;
  out.reserve(hat.size());
  out.push_back(u0);
  for (int m = 0; m < hat.intervals(); ++m)
    out.push_back(detail::quadrature_step(c, out.back(), hat[static_cast<std::size_t>(m)],
                                          hat[static_cast<std::size_t>(m) + 1]));
  return FieldSeries(std::move(out), hat.period(), true);
}

/// dealias(F[|u|^2 u]) at every node, frequency representation.
inline FieldSeries cubic_series(const FieldSeries& u) {
  std::vector<SpectralField> out(u.size());
  parallel_for(u.size(), [&](std::size_t m) {
    out[m] = dealias(to_frequency(cubic_nonlinearity(to_physical(u[m]))));
  });
  return FieldSeries(std::move(out), u.period(), u.periodic());
}

/// dealias(F[|u+d|^2 (u+d) - |u|^2 u]) at every node.
inline FieldSeries cubic_increment_series(const FieldSeries& delta, const FieldSeries& u) {
  delta.check_aligned(u);
  std::vector<SpectralField> out(u.size());
  parallel_for(u.size(), [&](std::size_t m) {
    out[m] = dealias(to_frequency(cubic_increment(to_physical(delta[m]), to_physical(u[m]))));
  });
  return FieldSeries(std::move(out), u.period(), u.periodic());
}

inline void require_finite(const FieldSeries& s, const char* what) {
  for (const auto& f : s.fields())
    if (!f.all_finite())
      throw NonFiniteField(std::string(what) + " produced non-finite values ([g] too large to contract?)");
}

/// One Picard step u -> P_1-map(F_1) + P_inf-map(F_inf), F = dealias(|u|^2 u) + g.
inline FieldSeries picard_step(const FieldSeries& u, const FieldSeries& g, const LinearOperator& op,
                               const CutoffSpec& cutoffs, const SolveOptions& opts) {
  FieldSeries F = to_frequency(g);
  if (opts.nonlinearity_enabled) {
    const FieldSeries U = to_frequency(u);
    U.check_aligned(F);
    F += cubic_series(U);
  }
  std::vector<SpectralField> low(F.size()), high(F.size());
  for (std::size_t m = 0; m < F.size(); ++m) {
    low[m] = project(F[m], Band::low, cutoffs);
    high[m] = project(F[m], Band::high, cutoffs);
  }
  FieldSeries next = linear_period_map(FieldSeries(std::move(low), F.period(), true), op, opts.zero_mode_tol);
  next += linear_period_map(FieldSeries(std::move(high), F.period(), true), op, opts.zero_mode_tol);
  require_finite(next, "picard_step");
  return next;
}

enum class SolveStatus { converged, max_iterations, diverged, non_finite };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iterations: return "max_iterations";
    case SolveStatus::diverged: return "diverged";
    case SolveStatus::non_finite: return "non_finite";
  }
  return "?";
}

struct PeriodicSolveReport {
  bool converged = false;
  SolveStatus status = SolveStatus::max_iterations;
  std::string message;
  int iterations = 0;
  std::vector<double> residual_history;  // Z-norms of successive iterate differences
  double periodicity_residual = 0.0;     // ||u(0) - u(T)||_{L2} / max_m ||u(t_m)||
  double z_norm = 0.0;
  SpaceTimeNorms norms;
  double g_bracket = 0.0;
  std::optional<double> c_estimate;          // z_norm / g_bracket; empty when [g] = 0
  std::optional<double> contraction_factor;  // needs >= 3 residuals
  double max_oddness = 0.0;                  // worst check_oddness over all iterates
};

/// Geometric mean of r_{l+1}/r_l over l >= 1 (the first ratio is dropped).
inline double contraction_estimate(const PeriodicSolveReport& report) {
  const auto& r = report.residual_history;
  if (r.size() < 3) throw InsufficientData("contraction_estimate needs at least three residuals");
  double log_sum = 0.0;
  int count = 0;
  for (std::size_t l = 1; l + 1 < r.size(); ++l) {
    if (r[l] == 0.0 || r[l + 1] == 0.0) return 0.0;
    log_sum += std::log(r[l + 1] / r[l]);
    ++count;
  }
  return std::exp(log_sum / count);
}

inline double periodicity_residual(const FieldSeries& u) {
  double scale = 0.0;
  for (const auto& f : u.fields()) scale = std::max(scale, l2_norm(f));
  const double gap = l2_norm(u[0] - u[u.size() - 1]);
  return gap / std::max(scale, 1e-300);
}

inline double series_oddness(const FieldSeries& u) {
  std::vector<double> r(u.size());
  parallel_for(u.size(), [&](std::size_t m) { r[m] = check_oddness(u[m]); });
  return *std::max_element(r.begin(), r.end());
}

struct PeriodicSolution {
  FieldSeries u;  // frequency representation, nodes 0..M_t
  PeriodicSolveReport report;
};

/// Picard iteration for the T-periodic solution.
///
/// Seeds with u^{(0)} = linear_period_map(g), then carries the increments
/// d_l = u^{(l)} - u^{(l-1)} directly:
///   d_1     = L[dealias(|u0|^2 u0)]
///   d_{l+1} = L[dealias(cubic_increment(d_l, u^{(l-1)}))]
/// which is algebraically identical to differencing picard_step outputs but
/// keeps full relative accuracy in d_l, so residuals far below round-off of u
/// stay meaningful. Stops when ||d_l||_Z <= z_tolerance, after max_iterations,
/// or after three consecutive residual increases. With min_iterations the
/// loop keeps going below tolerance until that many increments are recorded.
inline PeriodicSolution solve_periodic(const FieldSeries& g, const LinearOperator& op, const CutoffSpec& cutoffs,
                                       const SolveOptions& opts) {
  validate(opts);
  const FieldSeries G = to_frequency(g);
  detail::require_frequency_series(G, op);
  if (G.intervals() != opts.m_t)
    throw ConfigError("forcing has " + std::to_string(G.intervals()) + " intervals, options ask for " +
                      std::to_string(opts.m_t));

  PeriodicSolution out;
  PeriodicSolveReport& rep = out.report;
  rep.g_bracket = forcing_bracket(g);

  FieldSeries u = linear_period_map(G, op, opts.zero_mode_tol);
  if (opts.track_oddness) rep.max_oddness = series_oddness(u);

  auto zero_series = [&] { return FieldSeries::zeros(G.grid_ptr(), Representation::frequency, opts.m_t, G.period()); };
  auto map = [&](const FieldSeries& F) { return linear_period_map(F, op, opts.zero_mode_tol); };

  try {
    FieldSeries delta = opts.nonlinearity_enabled ? map(cubic_series(u)) : zero_series();
    int growth = 0;
    for (int l = 1; l <= opts.max_iterations; ++l) {
      require_finite(delta, "Picard increment");
      const double r = z_norm(delta, cutoffs).z_norm;
      if (!std::isfinite(r)) throw NonFiniteField("Picard residual is not finite");
      rep.residual_history.push_back(r);
      rep.iterations = l;

      const FieldSeries u_prev = u;
      u += delta;
      if (opts.track_oddness) rep.max_oddness = std::max(rep.max_oddness, series_oddness(u));

      if (r == 0.0 || (r <= opts.z_tolerance && l >= opts.min_iterations)) {
        rep.converged = true;
        rep.status = SolveStatus::converged;
        break;
      }
      const auto& h = rep.residual_history;
      growth = (h.size() >= 2 && h[h.size() - 1] > h[h.size() - 2]) ? growth + 1 : 0;
      if (growth >= 3) {
        rep.status = SolveStatus::diverged;
        rep.message = "residual grew for 3 consecutive iterations";
        break;
      }
      if (l == opts.max_iterations) {
        if (r <= opts.z_tolerance) {
          rep.converged = true;
          rep.status = SolveStatus::converged;
          break;
        }
        rep.status = SolveStatus::max_iterations;
        rep.message = "max_iterations reached before the Z-norm tolerance";
        break;
      }
      delta = map(cubic_increment_series(delta, u_prev));
    }
  } catch (const NonFiniteField& e) {
    rep.status = SolveStatus::non_finite;
    rep.converged = false;
    rep.message = e.what();
  }

  rep.periodicity_residual = periodicity_residual(u);
  if (rep.status != SolveStatus::non_finite) {
    rep.norms = z_norm(u, cutoffs);
    rep.norms.g_bracket = rep.g_bracket;
    rep.z_norm = rep.norms.z_norm;
  }
  if (rep.g_bracket > 0.0) rep.c_estimate = rep.z_norm / rep.g_bracket;
  if (rep.residual_history.size() >= 3) rep.contraction_factor = contraction_estimate(rep);
  if (rep.converged && rep.contraction_factor && *rep.contraction_factor >= 1.0) {
    rep.converged = false;
    rep.status = SolveStatus::diverged;
    rep.message = "tolerance met but the empirical contraction factor is >= 1";
  }
  out.u = std::move(u);
  return out;
}

struct EquationResidual {
  double full = 0.0;  // max over interior nodes of ||D_t u + Au - F(u,g)|| / (1 + ||u||)
  double low = 0.0;   // same for the P_1 split equation
  double high = 0.0;  // same for the P_inf split equation
};

/// Solver-independent certificate: centered time difference plus A u minus the
/// dealiased right-hand side, at interior nodes.
inline EquationResidual split_equation_residual(const FieldSeries& u, const FieldSeries& g, const LinearOperator& op,
                                                const CutoffSpec* cutoffs, bool nonlinear = true) {
  const FieldSeries U = to_frequency(u);
  const FieldSeries G = to_frequency(g);
  U.check_aligned(G);
  const int M = U.intervals();
  const double h = U.time_step();
  std::vector<EquationResidual> per(static_cast<std::size_t>(M + 1));
  parallel_for(static_cast<std::size_t>(M - 1), [&](std::size_t k) {
    const std::size_t m = k + 1;
    SpectralField r = op.apply(U[m]);
    r.axpy(1.0 / (2 * h), U[m + 1]).axpy(-1.0 / (2 * h), U[m - 1]);
    r -= G[m];
    if (nonlinear) r -= dealias(to_frequency(cubic_nonlinearity(to_physical(U[m]))));
    const double scale = 1.0 + l2_norm(U[m]);
    per[m].full = l2_norm(r) / scale;
    if (cutoffs) {
      per[m].low = l2_norm(project(r, Band::low, *cutoffs)) / scale;
      per[m].high = l2_norm(project(r, Band::high, *cutoffs)) / scale;
    }
  });
  EquationResidual worst;
  for (const auto& e : per) {
    worst.full = std::max(worst.full, e.full);
    worst.low = std::max(worst.low, e.low);
    worst.high = std::max(worst.high, e.high);
  }
  return worst;
}

inline double equation_residual(const FieldSeries& u, const FieldSeries& g, const LinearOperator& op,
                                bool nonlinear = true) {
  return split_equation_residual(u, g, op, nullptr, nonlinear).full;
}

}  // namespace glperiod
