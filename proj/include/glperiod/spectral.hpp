#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "glperiod/error.hpp"
#include "glperiod/fft.hpp"
#include "glperiod/field.hpp"

namespace glperiod {

enum class Direction { forward, inverse };

/// Physical -> frequency (forward) or frequency -> physical (inverse).
///
/// forward:  F[k] = sum_j f_j exp(-i xi_k . x_j)
/// inverse:  f_j  = N^{-1} sum_k F[k] exp(+i xi_k . x_j)
/// The centered node positions turn into the sign (-1)^(k_1+k_2+k_3) on top of
/// the plain DFT.
inline SpectralField transform(const SpectralField& field, Direction direction) {
  const Grid& grid = field.grid();
  const auto sign = grid.centering_sign();
  std::vector<Complex> out(field.size());
  if (direction == Direction::forward) {
    field.require(Representation::physical, "forward transform");
    detail::execute_dft(grid, field.data().data(), out.data(), FFTW_FORWARD);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= sign[i];
    return SpectralField(field.grid_ptr(), Representation::frequency, std::move(out));
  }
  field.require(Representation::frequency, "inverse transform");
  std::vector<Complex> in(field.size());
  const double scale = 1.0 / static_cast<double>(field.size());
  for (std::size_t i = 0; i < in.size(); ++i) in[i] = field[i] * (sign[i] * scale);
  detail::execute_dft(grid, in.data(), out.data(), FFTW_BACKWARD);
  return SpectralField(field.grid_ptr(), Representation::physical, std::move(out));
}

inline SpectralField to_frequency(const SpectralField& f) {
  return f.is_frequency() ? f : transform(f, Direction::forward);
}

inline SpectralField to_physical(const SpectralField& f) {
  return f.is_physical() ? f : transform(f, Direction::inverse);
}

inline SpectralField as_representation(const SpectralField& f, Representation rep) {
  return rep == Representation::frequency ? to_frequency(f) : to_physical(f);
}

/// Pointwise |u|^2 u.
inline SpectralField cubic_nonlinearity(const SpectralField& u) {
  u.require(Representation::physical, "cubic_nonlinearity");
  SpectralField out(u.grid_ptr(), Representation::physical);
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = std::norm(u[i]) * u[i];
  return out;
}

/// Pointwise 2|v|^2 w + v^2 conj(w) + 2|w|^2 v + conj(v) w^2 + |w|^2 w, which equals
/// |v+w|^2 (v+w) - |v|^2 v: the change of the cubic term when v is perturbed
/// by w. Carries no O(|v|^3) part, so it stays accurate when |w| << |v|.
inline SpectralField cubic_increment(const SpectralField& w, const SpectralField& v) {
  w.require(Representation::physical, "cubic_increment");
  w.check_compatible(v);
  SpectralField out(w.grid_ptr(), Representation::physical);
  for (std::size_t i = 0; i < w.size(); ++i) {
    const Complex a = v[i], b = w[i];
    const double w2 = std::norm(b);
    out[i] = 2.0 * std::norm(a) * b + a * a * std::conj(b) + 2.0 * w2 * a + std::conj(a) * b * b + w2 * b;
  }
  return out;
}

/// Zeroes every mode with |k_a| > fraction * n/2 on some axis.
inline SpectralField dealias(SpectralField field, double fraction) {
  field.require(Representation::frequency, "dealias");
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("dealias fraction must lie in (0, 1]");
  const Grid& grid = field.grid();
  const double limit = fraction * (grid.n() / 2);
  for (int a = 0; a < grid.dim(); ++a) {
    const auto k = grid.wavenumber(a);
    for (std::size_t i = 0; i < field.size(); ++i)
      if (std::abs(k[i]) > limit) field[i] = 0.0;
  }
  return field;
}

inline SpectralField dealias(SpectralField field) {
  const double fraction = field.grid().config().dealias_fraction;
  return dealias(std::move(field), fraction);
}

/// Zeroes the unpaired k = -n/2 modes in place.
inline void zero_nyquist(SpectralField& field) {
  field.require(Representation::frequency, "zero_nyquist");
  const auto mask = field.grid().nyquist_mask();
  for (std::size_t i = 0; i < field.size(); ++i)
    if (mask[i]) field[i] = 0.0;
}

/// Multiplies frequency entries by symbol[i] and clears the Nyquist modes.
/// Works on either representation and hands back the input's representation.
template <typename Symbol>
SpectralField apply_multiplier(const SpectralField& f, std::span<const Symbol> symbol) {
  SpectralField hat = to_frequency(f);
  for (std::size_t i = 0; i < hat.size(); ++i) hat[i] *= symbol[i];
  zero_nyquist(hat);
  return f.is_physical() ? to_physical(hat) : hat;
}

/// sqrt(sum |f_j|^2 dx^dim), evaluated in whichever representation `f` is in
/// (discrete Parseval: dx^dim sum |f|^2 = L^dim / N^2 sum |F|^2).
inline double l2_norm(const SpectralField& f) {
  double s = 0.0;
  for (const auto& z : f.data()) s += std::norm(z);
  const Grid& g = f.grid();
  if (f.is_physical()) return std::sqrt(s * g.quadrature_weight());
  const double n = static_cast<double>(g.size());
  return std::sqrt(s * g.volume() / (n * n));
}

/// L2 norm of the mean component f0 = N^{-1} sum_j f_j, i.e. |f0| L^{dim/2}.
inline double mean_mode_l2(const SpectralField& hat) {
  hat.require(Representation::frequency, "mean_mode_l2");
  const Grid& g = hat.grid();
  return std::abs(hat[0]) / static_cast<double>(g.size()) * std::sqrt(g.volume());
}

}  // namespace glperiod
