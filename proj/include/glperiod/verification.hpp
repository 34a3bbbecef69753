#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "glperiod/error.hpp"
#include "glperiod/field.hpp"
#include "glperiod/forcing.hpp"
#include "glperiod/norms.hpp"
#include "glperiod/operators.hpp"
#include "glperiod/parallel.hpp"
#include "glperiod/periodic_solver.hpp"
#include "glperiod/spectral.hpp"

namespace glperiod {

/// Outcome of one inequality battery.
///
/// fitted_constant is the largest observed left/right ratio. When a ceiling
/// is documented, worst_ratio = fitted_constant / ceiling; otherwise the
/// battery only asserts that a finite constant exists and worst_ratio is the
/// left/right ratio under the fitted constant itself.
struct CheckReport {
  std::string check_name;
  int samples = 0;
  double fitted_constant = 0.0;
  std::optional<double> ceiling;
  double worst_ratio = 0.0;
  bool passed = false;
  std::string battery;                   // distribution of the random inputs
  std::map<std::string, double> extras;  // secondary constants (d, C_low, ...)
};

namespace detail {

inline CheckReport finish(CheckReport r) {
  if (r.samples <= 0) throw InsufficientData(r.check_name + ": battery ran zero samples");
  if (r.ceiling) {
    r.worst_ratio = r.fitted_constant / *r.ceiling;
  } else {
    // the sample that sets the constant sits exactly on the bound
    r.worst_ratio = std::isfinite(r.fitted_constant) ? 1.0 : std::numeric_limits<double>::infinity();
  }
  r.passed = std::isfinite(r.fitted_constant) && std::isfinite(r.worst_ratio) && r.worst_ratio <= 1.0 + 1e-12;
  return r;
}

inline double max_of(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::isnan(x) ? x : std::max(m, x);
  return m;
}

}  // namespace detail

//
// Seeds and random fields
//

/// Seed of sample `index` under `root`: output index+1 of a SplitMix64 stream
/// started at `root`. Independent of thread count and evaluation order.
inline std::uint64_t sample_seed(std::uint64_t root, std::uint64_t index) {
  constexpr std::uint64_t gamma = 0x9E3779B97F4A7C15ull;
  std::uint64_t z = root + (index + 1) * gamma;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

enum class Support { full, low, high };

struct FieldDistribution {
  Support support = Support::full;
  bool odd = false;
  double envelope_width = 0.0;  // Gaussian radial envelope in xi; 0 means r_inf (2 r_inf for high)
  double window_width = 0.0;    // physical Gaussian window sigma; 0 means L/8

  std::string describe(const CutoffSpec& c) const {
    const char* s = support == Support::low ? "low" : support == Support::high ? "high" : "full";
    return std::string("complex Gaussian spectrum, envelope exp(-|xi|^2/(2 k^2)) k=") + sci(envelope(c)) +
           ", physical window sigma=" + sci(window(c)) + ", support=" + s + (odd ? ", odd" : "");
  }
  double envelope(const CutoffSpec& c) const {
    if (envelope_width > 0.0) return envelope_width;
    return support == Support::high ? 2.0 * c.r_inf : c.r_inf;
  }
  double window(const CutoffSpec& c) const {
    return window_width > 0.0 ? window_width : c.grid->box_length() / 8.0;
  }
};

/// iid complex Gaussian modes under the radial envelope, multiplied by a
/// physical Gaussian window, optionally odd-projected, then masked by the
/// requested cutoff. Returned in frequency representation.
inline SpectralField random_field(const CutoffSpec& cutoffs, const FieldDistribution& dist, std::uint64_t seed) {
  const GridPtr& grid = cutoffs.grid;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const double k = dist.envelope(cutoffs);
  const auto xi2 = grid->xi_squared();
  SpectralField hat(grid, Representation::frequency);
  for (std::size_t i = 0; i < hat.size(); ++i) {
    const double re = normal(rng), im = normal(rng);
    hat[i] = Complex(re, im) * std::exp(-xi2[i] / (2 * k * k));
  }
  zero_nyquist(hat);
  SpectralField u = to_physical(hat);
  const double s = dist.window(cutoffs);
  const auto r = grid->radius();
  for (std::size_t i = 0; i < u.size(); ++i) u[i] *= std::exp(-r[i] * r[i] / (2 * s * s));
  if (dist.odd) u = odd_part(u);
  hat = to_frequency(u);
  zero_nyquist(hat);
  if (dist.support == Support::low) hat = project(hat, Band::low, cutoffs);
  if (dist.support == Support::high) hat = project(hat, Band::high, cutoffs);
  return hat;
}

/// Fixed battery stream ids; the sample seeds of battery b are
/// sample_seed(sample_seed(root, b), i).
enum class BatteryId : std::uint64_t {
  low_freq_smoothing = 1,
  period_inverse_bound,
  high_freq_decay,
  bernstein,
  hardy,
  weighted_commutator,
  projection_completeness,
  semigroup_composition,
  period_round_trip,
};

inline std::uint64_t battery_seed(std::uint64_t root, BatteryId id) {
  return sample_seed(root, static_cast<std::uint64_t>(id));
}

//
// Operator batteries
//

/// ||e^{-tA}u1|| + ||d_t e^{-tA}u1|| <= C ||u1|| for low-frequency u1 and
/// t uniform in [0, t_span], d_t realized as multiplication by -lambda.
/// Ceiling 1 + sqrt(2) r_inf^2, the symbol bound on the support.
inline CheckReport check_low_freq_smoothing(const LinearOperator& op, const CutoffSpec& cutoffs, int samples,
                                            std::uint64_t seed, double t_span = 0.0) {
  if (t_span <= 0.0) t_span = op.period();
  const FieldDistribution dist{Support::low, false};
  const std::uint64_t stream = battery_seed(seed, BatteryId::low_freq_smoothing);
  const auto lambda = op.symbol();
  std::vector<double> ratio(static_cast<std::size_t>(std::max(samples, 0)));
  parallel_for(ratio.size(), [&](std::size_t i) {
    const std::uint64_t s = sample_seed(stream, i);
    const SpectralField u = random_field(cutoffs, dist, s);
    std::mt19937_64 rng(s ^ 1u);
    const double t = std::uniform_real_distribution<double>(0.0, t_span)(rng);
    const SpectralField eu = semigroup_apply(u, t, op);
    SpectralField deu = eu;
    for (std::size_t j = 0; j < deu.size(); ++j) deu[j] *= -lambda[j];
    ratio[i] = (l2_norm(eu) + l2_norm(deu)) / l2_norm(u);
  });
  CheckReport r;
  r.check_name = "low_freq_smoothing";
  r.samples = samples;
  r.fitted_constant = detail::max_of(ratio);
  r.ceiling = 1.0 + std::numbers::sqrt2 * cutoffs.r_inf * cutoffs.r_inf;
  r.battery = dist.describe(cutoffs) + "; t uniform in [0, " + sci(t_span) + "]";
  r.extras["t_span"] = t_span;
  r.extras["r_inf_sq_t_span_bound"] = 1.0 + cutoffs.r_inf * cutoffs.r_inf * t_span;
  return detail::finish(r);
}

/// Sum of mirrored Gaussian dipole pairs d(x - a) + d(x + a), an odd field.
struct DipoleMixture {
  struct Term {
    double weight, sigma;
    int axis;
    std::array<double, 3> offset;
  };
  std::vector<Term> terms;

  SpectralField realize(const GridPtr& grid) const {
    SpectralField out(grid, Representation::physical);
    for (const auto& t : terms) {
      const double s2 = 2 * t.sigma * t.sigma;
      for (std::size_t i = 0; i < out.size(); ++i) {
        for (double sgn : {1.0, -1.0}) {
          double r2 = 0.0, lead = 0.0;
          for (int a = 0; a < grid->dim(); ++a) {
            const double y = grid->coordinate(a)[i] - sgn * t.offset[a];
            r2 += y * y;
            if (a == t.axis) lead = y;
          }
          out[i] += t.weight * lead * std::exp(-r2 / s2);
        }
      }
    }
    return odd_part(out);
  }
};

inline DipoleMixture random_dipole_mixture(const Grid& grid, std::uint64_t seed, double sigma_lo, double sigma_hi) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  std::uniform_int_distribution<int> axis(0, grid.dim() - 1);
  DipoleMixture mix;
  const double L = grid.box_length();
  for (int k = 0; k < 3; ++k) {
    DipoleMixture::Term t{normal(rng), sigma_lo + (sigma_hi - sigma_lo) * unit(rng), axis(rng), {}};
    for (int a = 0; a < grid.dim(); ++a) t.offset[a] = (unit(rng) - 0.5) * L / 8;
    mix.terms.push_back(t);
  }
  return mix;
}

/// (||u1|| + |||x| grad u1||) / ||F1||_{L^1_1} with u1 = (1 - e^{-TA})^{-1} F1.
inline double period_inverse_ratio(const SpectralField& F1, const LinearOperator& op) {
  const SpectralField u1 = period_inverse_apply(to_frequency(F1), op);
  return (l2_norm(u1) + x_weighted_gradient_norm(u1)) / lp_norm(F1, 1, true);
}

/// Odd low-frequency data F1 = P_1(dipole mixture). No a-priori ceiling:
/// passes when the fitted constant is finite.
inline CheckReport check_period_inverse_bound(const LinearOperator& op, const CutoffSpec& cutoffs, int samples,
                                              std::uint64_t seed) {
  const GridPtr& grid = cutoffs.grid;
  const double L = grid->box_length();
  const std::uint64_t stream = battery_seed(seed, BatteryId::period_inverse_bound);
  std::vector<double> ratio(static_cast<std::size_t>(std::max(samples, 0)));
  parallel_for(ratio.size(), [&](std::size_t i) {
    const auto mix = random_dipole_mixture(*grid, sample_seed(stream, i), L / 32, L / 8);
    const SpectralField F1 = project(to_frequency(mix.realize(grid)), Band::low, cutoffs);
    ratio[i] = period_inverse_ratio(F1, op);
  });
  CheckReport r;
  r.check_name = "period_inverse_bound";
  r.samples = samples;
  r.fitted_constant = detail::max_of(ratio);
  r.battery = "P_1 of three mirrored Gaussian dipole pairs, sigma uniform in [L/32, L/8], offsets in [-L/16, L/16]";
  return detail::finish(r);
}

/// sup_t e^{a t} ||e^{-tA} u||_{H^2_1} / ||u||_{H^2_1} for high-frequency u,
/// a = r1^2 / 2, t on {0, T/4, ..., 2T}. Ceiling 4.
inline CheckReport check_high_freq_decay(const LinearOperator& op, const CutoffSpec& cutoffs, int samples,
                                         std::uint64_t seed) {
  const FieldDistribution dist{Support::high, false};
  const std::uint64_t stream = battery_seed(seed, BatteryId::high_freq_decay);
  const double a = 0.5 * cutoffs.r1 * cutoffs.r1;
  const double T = op.period();
  std::vector<double> ratio(static_cast<std::size_t>(std::max(samples, 0)));
  parallel_for(ratio.size(), [&](std::size_t i) {
    const SpectralField u = random_field(cutoffs, dist, sample_seed(stream, i));
    const double base = sobolev_norm(u, 2, true);
    double worst = 0.0;
    for (int k = 0; k <= 8; ++k) {
      const double t = k * T / 4;
      worst = std::max(worst, std::exp(a * t) * sobolev_norm(semigroup_apply(u, t, op), 2, true) / base);
    }
    ratio[i] = worst;
  });
  CheckReport r;
  r.check_name = "high_freq_decay";
  r.samples = samples;
  r.fitted_constant = detail::max_of(ratio);
  r.ceiling = 4.0;
  r.battery = dist.describe(cutoffs) + "; t in {0, T/4, ..., 2T}";
  r.extras["rate_a"] = a;
  return detail::finish(r);
}

//
// Energy and nonlinear estimates on a solved run
//

/// dealias(F[|u|^2 u]) + g at every node.
inline FieldSeries nonlinear_rhs_series(const FieldSeries& u, const FieldSeries& g) {
  FieldSeries F = cubic_series(to_frequency(u));
  F += to_frequency(g);
  return F;
}

/// (1/2) d/dt ||u_inf||^2_{H^2_1} + d ||u_inf||^2_{H^3_1} <= C ||F_inf||^2_{H^1_1}
/// on the nodes of a periodic trajectory. C is twice the smallest constant
/// that works with d = 0; d is then the largest admissible value (less a
/// relative 1e-9). Passes when that d is positive. An all-zero trajectory
/// passes trivially.
inline CheckReport check_energy_inequality(const FieldSeries& u, const FieldSeries& F, const CutoffSpec& cutoffs) {
  const FieldSeries U = to_frequency(u);
  const FieldSeries G = to_frequency(F);
  U.check_aligned(G);
  const int M = U.intervals();
  if (M < 2) throw InsufficientData("energy inequality needs a trajectory with at least three nodes");
  const std::size_t n = U.size();
  std::vector<double> E(n), D(n), R(n);
  parallel_for(n, [&](std::size_t m) {
    const auto s = sobolev_order_sums(project(U[m], Band::high, cutoffs), 3, true);
    E[m] = s[0] + s[1] + s[2];
    D[m] = E[m] + s[3];
    const auto f = sobolev_order_sums(project(G[m], Band::high, cutoffs), 1, true);
    R[m] = f[0] + f[1];
  });
  const double h = U.time_step();
  std::vector<double> half_dE(static_cast<std::size_t>(M));
  for (int m = 0; m < M; ++m) {
    const int prev = m == 0 ? M - 1 : m - 1;
    half_dE[static_cast<std::size_t>(m)] = 0.5 * (E[static_cast<std::size_t>(m) + 1] - E[static_cast<std::size_t>(prev)]) / (2 * h);
  }

  CheckReport r;
  r.check_name = "energy_inequality";
  r.samples = M;
  r.battery = "time nodes of one period of the supplied trajectory";
  const bool zero = std::all_of(D.begin(), D.end(), [](double v) { return v == 0.0; }) &&
                    std::all_of(R.begin(), R.end(), [](double v) { return v == 0.0; });
  if (zero) {
    r.fitted_constant = 0.0;
    r.worst_ratio = 0.0;
    r.passed = true;
    r.extras["d"] = 0.0;
    r.extras["trivial"] = 1.0;
    return r;
  }

  double c_min = 0.0;
  for (int m = 0; m < M; ++m) {
    const auto k = static_cast<std::size_t>(m);
    if (R[k] > 0.0) c_min = std::max(c_min, half_dE[k] / R[k]);
  }
  const double C = 2.0 * std::max(c_min, std::numeric_limits<double>::min());
  double d = std::numeric_limits<double>::infinity();
  bool feasible = true;
  for (int m = 0; m < M; ++m) {
    const auto k = static_cast<std::size_t>(m);
    const double slack = C * R[k] - half_dE[k];
    if (D[k] > 0.0) d = std::min(d, slack / D[k]);
    else if (slack < 0.0) feasible = false;
  }
  if (!feasible) d = -std::numeric_limits<double>::infinity();
  // back off from the binding node so LHS/RHS stays <= 1 where C R is tiny
  if (std::isfinite(d)) d -= 1e-9 * std::abs(d);
  double worst = 0.0;
  for (int m = 0; m < M; ++m) {
    const auto k = static_cast<std::size_t>(m);
    if (R[k] > 0.0) worst = std::max(worst, (half_dE[k] + (std::isfinite(d) ? d : 0.0) * D[k]) / (C * R[k]));
  }
  r.fitted_constant = C;
  r.extras["d"] = d;
  r.extras["c_at_d0"] = c_min;
  r.worst_ratio = worst;
  r.passed = feasible && std::isfinite(C) && std::isfinite(d) && d > 0.0 && worst <= 1.0 + 1e-9;
  return r;
}

/// Low:  ||P_1 F(u,g)||_{L^2(0,T;L^1_1)} <= C (||u||_Z^3 + ||g||_{L^2(0,T;L^1_1)})
/// High: ||P_inf F(u,g)||_{L^2(0,T;H^1_1)} <= C (||u||_Z^3 + ||g||_{L^2(0,T;H^1_1)})
/// evaluated at alpha u for each alpha in `scales`. No a-priori ceiling.
inline CheckReport check_nonlinear_bound(const FieldSeries& u, const FieldSeries& g, const CutoffSpec& cutoffs,
                                         const std::vector<double>& scales = {1.0}) {
  const FieldSeries U = to_frequency(u);
  const FieldSeries G = to_frequency(g);
  U.check_aligned(G);
  const double h = U.time_step();
  const std::size_t n = U.size();
  std::vector<double> gl1(n), gh1(n);
  parallel_for(n, [&](std::size_t m) {
    gl1[m] = std::pow(lp_norm(G[m], 1, true), 2);
    const auto s = sobolev_order_sums(G[m], 1, true);
    gh1[m] = s[0] + s[1];
  });
  const double g_l1 = std::sqrt(trapezoid(gl1, h));
  const double g_h1 = std::sqrt(trapezoid(gh1, h));
  const double z = z_norm(U, cutoffs).z_norm;

  double c_low = 0.0, c_high = 0.0;
  for (double alpha : scales) {
    FieldSeries Ua = U;
    for (std::size_t m = 0; m < n; ++m) Ua[m] *= alpha;
    const FieldSeries F = nonlinear_rhs_series(Ua, G);
    std::vector<double> fl(n), fh(n);
    parallel_for(n, [&](std::size_t m) {
      fl[m] = std::pow(lp_norm(project(F[m], Band::low, cutoffs), 1, true), 2);
      const auto s = sobolev_order_sums(project(F[m], Band::high, cutoffs), 1, true);
      fh[m] = s[0] + s[1];
    });
    const double z3 = std::pow(std::abs(alpha) * z, 3);
    const double low_rhs = z3 + g_l1, high_rhs = z3 + g_h1;
    const double lo = std::sqrt(trapezoid(fl, h)), hi = std::sqrt(trapezoid(fh, h));
    if (low_rhs > 0.0) c_low = std::max(c_low, lo / low_rhs);
    else if (lo > 0.0) c_low = std::numeric_limits<double>::infinity();
    if (high_rhs > 0.0) c_high = std::max(c_high, hi / high_rhs);
    else if (hi > 0.0) c_high = std::numeric_limits<double>::infinity();
  }
  CheckReport r;
  r.check_name = "nonlinear_bound";
  r.samples = static_cast<int>(scales.size());
  r.fitted_constant = std::max(c_low, c_high);
  r.battery = "supplied (u, g) with u scaled by each listed factor";
  r.extras["c_low"] = c_low;
  r.extras["c_high"] = c_high;
  r.extras["z_norm"] = z;
  return detail::finish(r);
}

//
// Norm lemmas
//

/// ||grad f|| <= r_inf ||f|| on low-frequency fields (ratio normalized by r_inf,
/// ceiling 1).
inline CheckReport check_bernstein_gradient(const CutoffSpec& cutoffs, int samples, std::uint64_t seed) {
  const FieldDistribution dist{Support::low, false};
  const std::uint64_t stream = battery_seed(seed, BatteryId::bernstein);
  std::vector<double> ratio(static_cast<std::size_t>(std::max(samples, 0)));
  parallel_for(ratio.size(), [&](std::size_t i) {
    const SpectralField f = random_field(cutoffs, dist, sample_seed(stream, i));
    const auto s = sobolev_order_sums(f, 1, false);
    ratio[i] = std::sqrt(s[1]) / (cutoffs.r_inf * std::sqrt(s[0]));
  });
  CheckReport r;
  r.check_name = "bernstein_gradient";
  r.samples = samples;
  r.fitted_constant = detail::max_of(ratio);
  r.ceiling = 1.0;
  r.battery = dist.describe(cutoffs);
  return detail::finish(r);
}

/// ||f||_inf <= C ||f||_{L2} on low-frequency fields; ceiling
/// sqrt(#modes in the support / L^dim) from Cauchy-Schwarz on the modes.
inline CheckReport check_bernstein_sup(const CutoffSpec& cutoffs, int samples, std::uint64_t seed) {
  const FieldDistribution dist{Support::low, false};
  const std::uint64_t stream = sample_seed(battery_seed(seed, BatteryId::bernstein), 1u << 20);
  std::vector<double> ratio(static_cast<std::size_t>(std::max(samples, 0)));
  parallel_for(ratio.size(), [&](std::size_t i) {
    const SpectralField f = random_field(cutoffs, dist, sample_seed(stream, i));
    ratio[i] = lp_norm(f, kInfinity, false) / l2_norm(f);
  });
  const auto modes = std::count_if(cutoffs.chi1.begin(), cutoffs.chi1.end(), [](double c) { return c > 0.0; });
  CheckReport r;
  r.check_name = "bernstein_sup";
  r.samples = samples;
  r.fitted_constant = detail::max_of(ratio);
  r.ceiling = std::sqrt(static_cast<double>(modes) / cutoffs.grid->volume());
  r.battery = dist.describe(cutoffs);
  return detail::finish(r);
}

/// ||f / |x|||_{L2} <= C ||grad f||_{L2} on odd fields that vanish towards the
/// box edge; the origin node (where f = 0) is skipped. Ceiling 2.2 (the
/// continuum constant is 2 in three dimensions, 1 or 2 for odd data below).
inline CheckReport check_hardy(const CutoffSpec& cutoffs, int samples, std::uint64_t seed) {
  const GridPtr& grid = cutoffs.grid;
  const FieldDistribution dist{Support::full, true, 0.0, grid->box_length() / 10};
  const std::uint64_t stream = battery_seed(seed, BatteryId::hardy);
  const auto r_node = grid->radius();
  std::vector<double> ratio(static_cast<std::size_t>(std::max(samples, 0)));
  parallel_for(ratio.size(), [&](std::size_t i) {
    const SpectralField hat = random_field(cutoffs, dist, sample_seed(stream, i));
    const SpectralField f = to_physical(hat);
    double s = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j)
      if (r_node[j] > 0.0) s += std::norm(f[j]) / (r_node[j] * r_node[j]);
    const double lhs = std::sqrt(s * grid->quadrature_weight());
    ratio[i] = lhs / std::sqrt(sobolev_order_sums(hat, 1, false)[1]);
  });
  CheckReport r;
  r.check_name = "hardy";
  r.samples = samples;
  r.fitted_constant = detail::max_of(ratio);
  r.ceiling = 2.2;
  r.battery = dist.describe(cutoffs);
  return detail::finish(r);
}

/// (r1^2/2) |||x| f||^2 <= |||x| grad f||^2 + C ||f||^2 on high-frequency
/// fields. The fitted C is the smallest non-negative constant that holds over
/// the battery; no a-priori ceiling.
inline CheckReport check_weighted_commutator(const CutoffSpec& cutoffs, int samples, std::uint64_t seed) {
  const FieldDistribution dist{Support::high, false};
  const std::uint64_t stream = battery_seed(seed, BatteryId::weighted_commutator);
  const double half_r1_sq = 0.5 * cutoffs.r1 * cutoffs.r1;
  const std::size_t count = static_cast<std::size_t>(std::max(samples, 0));
  std::vector<double> lhs(count), grad(count), l2(count);
  parallel_for(count, [&](std::size_t i) {
    const SpectralField f = random_field(cutoffs, dist, sample_seed(stream, i));
    lhs[i] = half_r1_sq * std::pow(x_weighted_norm(f), 2);
    grad[i] = std::pow(x_weighted_gradient_norm(f), 2);
    l2[i] = std::pow(l2_norm(f), 2);
  });
  double C = 0.0;
  for (std::size_t i = 0; i < count; ++i) C = std::max(C, (lhs[i] - grad[i]) / l2[i]);
  double worst = 0.0;
  for (std::size_t i = 0; i < count; ++i) worst = std::max(worst, lhs[i] / (grad[i] + C * l2[i]));
  CheckReport r;
  r.check_name = "weighted_commutator";
  r.samples = samples;
  r.fitted_constant = C;
  r.battery = dist.describe(cutoffs);
  r = detail::finish(r);
  r.worst_ratio = worst;
  r.passed = r.passed && worst <= 1.0 + 1e-12;
  return r;
}

//
// Algebraic identities
//

/// Copy of `c` whose high-frequency table is no longer 1 - chi1: it is built
/// from radii shifted by 10%. For fault-injection runs only.
inline CutoffSpec tamper_cutoffs(const CutoffSpec& c) {
  const CutoffSpec shifted = make_cutoffs(1.1 * c.r1, 1.1 * c.r_inf, c.grid);
  CutoffSpec out = c;
  out.chi_inf = shifted.chi_inf;
  return out;
}

/// ||P_1 f + P_inf f - f|| / ||f|| on random fields; ceiling 1e-14.
inline CheckReport check_projection_completeness(const CutoffSpec& cutoffs, int samples, std::uint64_t seed) {
  const FieldDistribution dist{Support::full, false};
  const std::uint64_t stream = battery_seed(seed, BatteryId::projection_completeness);
  std::vector<double> ratio(static_cast<std::size_t>(std::max(samples, 0)));
  parallel_for(ratio.size(), [&](std::size_t i) {
    const SpectralField f = random_field(cutoffs, dist, sample_seed(stream, i));
    SpectralField sum = project(f, Band::low, cutoffs);
    sum += project(f, Band::high, cutoffs);
    SpectralField ref = f;
    zero_nyquist(ref);
    ratio[i] = l2_norm(sum - ref) / l2_norm(ref);
  });
  CheckReport r;
  r.check_name = "projection_completeness";
  r.samples = samples;
  r.fitted_constant = detail::max_of(ratio);
  r.ceiling = 1e-14;
  r.battery = dist.describe(cutoffs);
  return detail::finish(r);
}

/// ||e^{-(t+s)A} f - e^{-tA} e^{-sA} f|| / ||f||, t, s uniform in [0, T]; ceiling 1e-12.
inline CheckReport check_semigroup_composition(const LinearOperator& op, const CutoffSpec& cutoffs, int samples,
                                               std::uint64_t seed) {
  const FieldDistribution dist{Support::full, false};
  const std::uint64_t stream = battery_seed(seed, BatteryId::semigroup_composition);
  std::vector<double> ratio(static_cast<std::size_t>(std::max(samples, 0)));
  parallel_for(ratio.size(), [&](std::size_t i) {
    const std::uint64_t s0 = sample_seed(stream, i);
    const SpectralField f = random_field(cutoffs, dist, s0);
    std::mt19937_64 rng(s0 ^ 1u);
    std::uniform_real_distribution<double> unit(0.0, op.period());
    const double t = unit(rng), s = unit(rng);
    const SpectralField a = semigroup_apply(f, t + s, op);
    const SpectralField b = semigroup_apply(semigroup_apply(f, s, op), t, op);
    ratio[i] = l2_norm(a - b) / l2_norm(f);
  });
  CheckReport r;
  r.check_name = "semigroup_composition";
  r.samples = samples;
  r.fitted_constant = detail::max_of(ratio);
  r.ceiling = 1e-12;
  r.battery = dist.describe(cutoffs) + "; t, s uniform in [0, T]";
  return detail::finish(r);
}

/// ||(1 - e^{-TA}) (1 - e^{-TA})^{-1} f - f|| / ||f|| on odd fields; ceiling 1e-12.
inline CheckReport check_period_round_trip(const LinearOperator& op, const CutoffSpec& cutoffs, int samples,
                                           std::uint64_t seed) {
  const FieldDistribution dist{Support::full, true};
  const std::uint64_t stream = battery_seed(seed, BatteryId::period_round_trip);
  const auto lambda = op.symbol();
  std::vector<Complex> forward(lambda.size());
  for (std::size_t j = 0; j < forward.size(); ++j) forward[j] = -expm1(-op.period() * lambda[j]);
  std::vector<double> ratio(static_cast<std::size_t>(std::max(samples, 0)));
  parallel_for(ratio.size(), [&](std::size_t i) {
    const SpectralField f = random_field(cutoffs, dist, sample_seed(stream, i));
    const SpectralField back = apply_multiplier<Complex>(period_inverse_apply(f, op), forward);
    ratio[i] = l2_norm(back - f) / l2_norm(f);
  });
  CheckReport r;
  r.check_name = "period_round_trip";
  r.samples = samples;
  r.fitted_constant = detail::max_of(ratio);
  r.ceiling = 1e-12;
  r.battery = dist.describe(cutoffs);
  return detail::finish(r);
}

/// sup over |xi| <= r_inf of |(1 - e^{-T lambda})^{-1}| T |xi|^2; ceiling 1
/// when T r_inf^2 <= 1.
inline CheckReport check_multiplier_bound(const LinearOperator& op, const CutoffSpec& cutoffs, int samples) {
  const BoundReport b = verify_multiplier_bound(op, cutoffs, samples);
  CheckReport r;
  r.check_name = "multiplier_bound";
  r.samples = b.samples;
  r.fitted_constant = b.c_mult;
  r.ceiling = 1.0;
  r.battery = "|xi| = r_inf i / samples, i = 1..samples";
  r.extras["t_r_inf_sq"] = op.period() * cutoffs.r_inf * cutoffs.r_inf;
  return detail::finish(r);
}

//
// Full suite
//

struct VerifyOptions {
  int samples = 200;
  std::uint64_t seed = 20240601;
  bool tamper_cutoff = false;  // inject a broken chi_inf into the completeness battery
  std::vector<double> nonlinear_scales = {0.5, 1.0, 2.0};
};

/// Runs every battery. `u` and `g` (a solved periodic run and its forcing)
/// feed the energy and nonlinear batteries; both are skipped when absent.
inline std::vector<CheckReport> run_verification(const LinearOperator& op, const CutoffSpec& cutoffs,
                                                 const VerifyOptions& opts, const FieldSeries* u = nullptr,
                                                 const FieldSeries* g = nullptr) {
  if (opts.samples < 1) throw ConfigError("verify.samples must be >= 1");
  std::vector<CheckReport> out;
  const CutoffSpec completeness_cutoffs = opts.tamper_cutoff ? tamper_cutoffs(cutoffs) : cutoffs;
  out.push_back(check_projection_completeness(completeness_cutoffs, opts.samples, opts.seed));
  out.push_back(check_semigroup_composition(op, cutoffs, opts.samples, opts.seed));
  out.push_back(check_period_round_trip(op, cutoffs, opts.samples, opts.seed));
  out.push_back(check_multiplier_bound(op, cutoffs, 1000));
  out.push_back(check_low_freq_smoothing(op, cutoffs, opts.samples, opts.seed));
  out.push_back(check_period_inverse_bound(op, cutoffs, opts.samples, opts.seed));
  out.push_back(check_high_freq_decay(op, cutoffs, opts.samples, opts.seed));
  out.push_back(check_bernstein_gradient(cutoffs, opts.samples, opts.seed));
  out.push_back(check_bernstein_sup(cutoffs, opts.samples, opts.seed));
  out.push_back(check_hardy(cutoffs, opts.samples, opts.seed));
  out.push_back(check_weighted_commutator(cutoffs, opts.samples, opts.seed));
  if (u && g) {
    out.push_back(check_energy_inequality(*u, nonlinear_rhs_series(*u, *g), cutoffs));
    out.push_back(check_nonlinear_bound(*u, *g, cutoffs, opts.nonlinear_scales));
  }
  return out;
}

inline bool all_passed(const std::vector<CheckReport>& reports) {
  return std::all_of(reports.begin(), reports.end(), [](const CheckReport& r) { return r.passed; });
}

}  // namespace glperiod
