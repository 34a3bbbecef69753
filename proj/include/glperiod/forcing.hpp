#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <variant>

#include "glperiod/error.hpp"
#include "glperiod/field.hpp"
#include "glperiod/norms.hpp"
#include "glperiod/spectral.hpp"

namespace glperiod {

inline constexpr double kOddnessTol = 1e-12;
inline constexpr double kSeamTol = 1e-8;

/// max over the lattice of |f(x) + f(-x)| / (1 + max|f|). Seam nodes
/// (x_a = -L/2 on some axis) map to themselves and are skipped.
inline double check_oddness(const SpectralField& f) {
  const SpectralField u = to_physical(f);
  const Grid& g = u.grid();
  double peak = 0.0;
  for (const auto& z : u.data()) peak = std::max(peak, std::abs(z));
  double worst = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (g.on_seam(i)) continue;
    worst = std::max(worst, std::abs(u[i] + u[g.reflected_node(i)]));
  }
  return worst / (1.0 + peak);
}

/// max modulus on the seam nodes divided by the overall max modulus.
inline double seam_ratio(const SpectralField& f) {
  const SpectralField u = to_physical(f);
  double peak = 0.0, seam = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = std::abs(u[i]);
    peak = std::max(peak, a);
    if (u.grid().on_seam(i)) seam = std::max(seam, a);
  }
  return peak > 0.0 ? seam / peak : 0.0;
}

/// (f(x) - f(-x)) / 2 on the lattice; seam nodes, which are their own
/// mirror image, become zero.
inline SpectralField odd_part(const SpectralField& f) {
  const SpectralField u = to_physical(f);
  const Grid& g = u.grid();
  SpectralField out(u.grid_ptr(), Representation::physical);
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = 0.5 * (u[i] - u[g.reflected_node(i)]);
  return out;
}

//
// Spatial profiles
//

struct GaussDipole {
  double sigma = 4.0;
  int axis = 0;
};

/// Radially symmetric e^{-|x|^2/(2 sigma^2)} (even; perturbations only).
struct GaussBump {
  double sigma = 4.0;
};

using SpatialProfile = std::variant<GaussDipole, GaussBump, SpectralField>;

inline SpectralField realize_profile(const SpatialProfile& profile, const GridPtr& grid) {
  if (const auto* custom = std::get_if<SpectralField>(&profile)) {
    if (custom->grid().config() != grid->config()) throw GridMismatch("custom profile on another grid");
    return to_physical(*custom);
  }
  SpectralField out(grid, Representation::physical);
  const auto r = grid->radius();
  if (const auto* dip = std::get_if<GaussDipole>(&profile)) {
    if (!(dip->sigma > 0.0)) throw ConfigError("dipole sigma must be positive");
    if (dip->axis < 0 || dip->axis >= grid->dim()) throw ConfigError("dipole axis outside the grid dimension");
    const auto x = grid->coordinate(dip->axis);
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = x[i] * std::exp(-r[i] * r[i] / (2 * dip->sigma * dip->sigma));
    // exact lattice oddness; seam values are below the seam tolerance anyway
    if (seam_ratio(out) <= kSeamTol) out = odd_part(out);
  } else {
    const auto& bump = std::get<GaussBump>(profile);
    if (!(bump.sigma > 0.0)) throw ConfigError("bump sigma must be positive");
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = std::exp(-r[i] * r[i] / (2 * bump.sigma * bump.sigma));
  }
  return out;
}

//
// Forcing g(x, t) = eps a(t) G(x)
//

enum class TemporalKind { sin_fundamental, cos_fundamental, harmonic };

struct TemporalProfile {
  TemporalKind kind = TemporalKind::sin_fundamental;
  int harmonic = 1;  // used by TemporalKind::harmonic: a(t) = sin(2 pi m t / T)

  double operator()(double t, double period) const {
    const double phase = 2.0 * std::numbers::pi * t / period;
    switch (kind) {
      case TemporalKind::sin_fundamental: return std::sin(phase);
      case TemporalKind::cos_fundamental: return std::cos(phase);
      case TemporalKind::harmonic: return std::sin(harmonic * phase);
    }
    return 0.0;
  }
};

struct ForcingSpec {
  double amplitude = 1e-2;
  TemporalProfile temporal;
  SpatialProfile spatial = GaussDipole{};
  double period = 1.0;
};

struct RealizedForcing {
  FieldSeries g;  // physical, periodic
  double oddness = 0.0;     // worst check_oddness over the nodes
  double seam = 0.0;        // seam_ratio of the spatial profile
};

inline RealizedForcing realize_forcing(const ForcingSpec& spec, const GridPtr& grid, int m_t) {
  if (!(spec.amplitude >= 0.0)) throw ConfigError("forcing amplitude must be non-negative");
  if (m_t < 2) throw ConfigError("forcing needs m_t >= 2");
  if (spec.temporal.kind == TemporalKind::harmonic && spec.temporal.harmonic < 1)
    throw ConfigError("forcing harmonic index must be >= 1");
  const SpectralField profile = realize_profile(spec.spatial, grid);

  RealizedForcing out;
  out.seam = seam_ratio(profile);
  if (out.seam > kSeamTol)
    throw SeamDecayViolation("forcing profile is " + sci(out.seam) +
                             " of its peak on the box seam (limit 1e-8); reduce sigma or enlarge L");
  const double profile_oddness = check_oddness(profile);
  if (profile_oddness > kOddnessTol)
    throw OddnessViolation("forcing profile is not odd (residual " + sci(profile_oddness) + ")");

  std::vector<SpectralField> nodes;
  nodes.reserve(static_cast<std::size_t>(m_t) + 1);
  for (int m = 0; m <= m_t; ++m) {
    // node M_t reuses a(0) so that g(T) == g(0) bit for bit
    const double a = spec.temporal((m % m_t) * spec.period / m_t, spec.period);
    nodes.push_back(Complex(spec.amplitude * a) * profile);
  }
  out.g = FieldSeries(std::move(nodes), spec.period, true);
  for (const auto& f : out.g.fields()) out.oddness = std::max(out.oddness, check_oddness(f));
  if (out.oddness > kOddnessTol) throw OddnessViolation("realized forcing failed the oddness check");
  return out;
}

//
// Initial perturbation w0
//

struct PerturbationSpec {
  double amplitude = 1e-2;
  SpatialProfile spatial = GaussDipole{3.5, 0};
};

/// amplitude * profile in physical space. Requires finite H^1 and L^1 norms;
/// Gaussian profiles must also clear the seam like the forcing does.
inline SpectralField realize_perturbation(const PerturbationSpec& spec, const GridPtr& grid) {
  const SpectralField profile = realize_profile(spec.spatial, grid);
  if (!std::holds_alternative<SpectralField>(spec.spatial) && seam_ratio(profile) > kSeamTol)
    throw SeamDecayViolation("perturbation profile is " + sci(seam_ratio(profile)) +
                             " of its peak on the box seam (limit 1e-8); reduce sigma or enlarge L");
  SpectralField w0 = Complex(spec.amplitude) * profile;
  if (!w0.all_finite() || !std::isfinite(sobolev_norm(w0, 1, false)) || !std::isfinite(lp_norm(w0, 1, false)))
    throw NonFiniteField("initial perturbation is not finite in H^1 and L^1");
  return w0;
}

}  // namespace glperiod
