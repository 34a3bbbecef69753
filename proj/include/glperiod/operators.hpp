#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "glperiod/error.hpp"
#include "glperiod/field.hpp"
#include "glperiod/phi.hpp"
#include "glperiod/spectral.hpp"

namespace glperiod {

/// C-infinity monotone step: 1 for s <= 0, 0 for s >= 1, psi(1/2) = 1/2.
/// psi(s) = E(1-s) / (E(s) + E(1-s)) with E(s) = exp(-1/s) for s > 0, else 0.
inline double smooth_step(double s) {
  if (s <= 0.0) return 1.0;
  if (s >= 1.0) return 0.0;
  const double a = std::exp(-1.0 / s);
  const double b = std::exp(-1.0 / (1.0 - s));
  return b / (a + b);
}

/// Smooth low/high frequency split tabulated on a grid's lattice.
struct CutoffSpec {
  GridPtr grid;
  double r1 = 0.0;
  double r_inf = 0.0;
  std::vector<double> chi1;     // 1 on |xi| <= r1, 0 on |xi| >= r_inf
  std::vector<double> chi_inf;  // 1 - chi1
};

inline CutoffSpec make_cutoffs(double r1, double r_inf, const GridPtr& grid) {
  if (!(r1 > 0.0)) throw ConfigError("cutoff r1 must be positive (got " + sci(r1) + ")");
  if (!(r1 < r_inf))
    throw ConfigError("cutoff r1 must be smaller than r_inf (got r1=" + sci(r1) +
                      ", r_inf=" + sci(r_inf) + ")");
  CutoffSpec c{grid, r1, r_inf, {}, {}};
  const auto xi2 = grid->xi_squared();
  c.chi1.resize(grid->size());
  c.chi_inf.resize(grid->size());
  for (std::size_t i = 0; i < grid->size(); ++i) {
    c.chi1[i] = smooth_step((std::sqrt(xi2[i]) - r1) / (r_inf - r1));
    c.chi_inf[i] = 1.0 - c.chi1[i];
  }
  return c;
}

/// r_inf = min(1/sqrt(T), n pi / (2L)), r1 = r_inf / 2. Keeps T r_inf^2 <= 1
/// and the whole transition band inside the resolved lattice.
inline CutoffSpec default_cutoffs(const GridPtr& grid, double period) {
  const double r_inf = std::min(1.0 / std::sqrt(period),
                                grid->n() * std::numbers::pi / (2.0 * grid->box_length()));
  return make_cutoffs(0.5 * r_inf, r_inf, grid);
}

/// Throws unless T r_inf^2 <= 1.
inline void check_period_regime(const CutoffSpec& c, double period) {
  if (period * c.r_inf * c.r_inf > 1.0 + 1e-12)
    throw ConfigError("cutoffs violate T*r_inf^2 <= 1 (T*r_inf^2 = " +
                      sci(period * c.r_inf * c.r_inf) + ")");
}

enum class Band { low, high };

/// P_1 f (low) or P_inf f (high); returns the input's representation.
inline SpectralField project(const SpectralField& f, Band which, const CutoffSpec& cutoffs) {
  if (cutoffs.grid->config() != f.grid().config()) throw GridMismatch("cutoffs built for another grid");
  const std::vector<double>& chi = which == Band::low ? cutoffs.chi1 : cutoffs.chi_inf;
  return apply_multiplier<double>(f, chi);
}

/// A = -(1+i) Delta on a grid, together with the period T.
class LinearOperator {
 public:
  LinearOperator(GridPtr grid, double period) : grid_(std::move(grid)), period_(period) {
    if (!(period_ > 0.0)) throw ConfigError("period T must be positive");
    const auto xi2 = grid_->xi_squared();
    symbol_.resize(grid_->size());
    for (std::size_t i = 0; i < symbol_.size(); ++i) symbol_[i] = Complex(xi2[i], xi2[i]);
  }

  const GridPtr& grid_ptr() const { return grid_; }
  const Grid& grid() const { return *grid_; }
  double period() const { return period_; }
  /// lambda(xi) = (1+i)|xi|^2 in frequency storage order.
  std::span<const Complex> symbol() const { return symbol_; }

  /// A f for a frequency-representation f.
  SpectralField apply(const SpectralField& hat) const {
    hat.require(Representation::frequency, "LinearOperator::apply");
    SpectralField out = hat;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= symbol_[i];
    zero_nyquist(out);
    return out;
  }

 private:
  GridPtr grid_;
  double period_;
  std::vector<Complex> symbol_;
};

/// e^{-tA} f, per mode exp(-t (1+i)|xi|^2).
inline SpectralField semigroup_apply(const SpectralField& f, double t, const LinearOperator& op) {
  if (!(t >= 0.0)) throw ConfigError("semigroup time must be non-negative");
  const auto lambda = op.symbol();
  std::vector<Complex> m(lambda.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::exp(-t * lambda[i]);
  return apply_multiplier<Complex>(f, m);
}

/// Per-mode (1 - e^{-T lambda})^{-1}, with the xi = 0 entry set to zero.
inline std::vector<Complex> period_inverse_symbol(const LinearOperator& op) {
  const auto lambda = op.symbol();
  std::vector<Complex> m(lambda.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    const Complex z = -op.period() * lambda[i];
    m[i] = lambda[i] == Complex{} ? Complex{} : -1.0 / expm1(z);
  }
  return m;
}

inline constexpr double kDefaultZeroModeTol = 1e-10;

/// Throws ZeroModeViolation when the mean component of `hat` exceeds
/// tol * ||hat||_{L2}. Odd data have a vanishing mean.
inline void check_zero_mode(const SpectralField& hat, double tol, const char* what) {
  const double mean = mean_mode_l2(hat);
  const double total = l2_norm(hat);
  if (mean > tol * total) {
    throw ZeroModeViolation(std::string(what) + ": mean mode carries " + sci(mean) +
                            " of L2 norm " + sci(total) +
                            " (input is not odd; check the forcing)");
  }
}

/// (1 - e^{-TA})^{-1} f on the xi != 0 modes; the mean mode of the output is 0.
inline SpectralField period_inverse_apply(const SpectralField& f, const LinearOperator& op,
                                          double zero_mode_tol = kDefaultZeroModeTol) {
  const SpectralField hat = to_frequency(f);
  check_zero_mode(hat, zero_mode_tol, "period_inverse_apply");
  const auto m = period_inverse_symbol(op);
  return apply_multiplier<Complex>(f, m);
}

struct BoundReport {
  double r1 = 0.0;
  double r_inf = 0.0;
  double period = 0.0;
  double c_mult = 0.0;
  int samples = 0;
};

/// theta / |1 - e^{-(1+i) theta}|; tends to 1/sqrt(2) as theta -> 0+.
inline double inverse_multiplier_scaled(double theta) {
  if (theta == 0.0) return 1.0 / std::numbers::sqrt2;
  return theta / std::abs(expm1(Complex(-theta, -theta)));
}

/// Scans |xi| = r_inf i / samples, i = 1..samples, and returns the largest
/// |(1 - e^{-T lambda})^{-1}| * T |xi|^2.
inline BoundReport verify_multiplier_bound(const LinearOperator& op, const CutoffSpec& cutoffs,
                                           int samples) {
  if (samples < 1) throw InsufficientData("verify_multiplier_bound needs at least one sample");
  BoundReport report{cutoffs.r1, cutoffs.r_inf, op.period(), 0.0, samples};
  for (int i = 1; i <= samples; ++i) {
    const double xi = cutoffs.r_inf * i / samples;
    report.c_mult = std::max(report.c_mult, inverse_multiplier_scaled(op.period() * xi * xi));
  }
  return report;
}

}  // namespace glperiod
