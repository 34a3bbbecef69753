#pragma once

#include <cmath>
#include <complex>

namespace glperiod {

/// exp(z) - 1 without cancellation for small |z|.
inline std::complex<double> expm1(std::complex<double> z) {
  const double x = z.real(), y = z.imag();
  const double em1 = std::expm1(x);
  const double s = std::sin(0.5 * y);
  const double cosm1 = -2.0 * s * s;  // cos(y) - 1
  return {em1 * std::cos(y) + cosm1, std::exp(x) * std::sin(y)};
}

inline constexpr double kPhiTaylorRadius = 1e-3;

/// phi_1(z) = (e^z - 1)/z, phi_1(0) = 1.
inline std::complex<double> phi1(std::complex<double> z) {
  if (std::abs(z) < kPhiTaylorRadius) {
    // 1 + z/2 + z^2/6 + z^3/24 + z^4/120 + z^5/720
    return 1.0 + z * (1.0 / 2 + z * (1.0 / 6 + z * (1.0 / 24 + z * (1.0 / 120 + z * (1.0 / 720)))));
  }
  return expm1(z) / z;
}

/// phi_2(z) = (e^z - 1 - z)/z^2, phi_2(0) = 1/2.
inline std::complex<double> phi2(std::complex<double> z) {
  if (std::abs(z) < kPhiTaylorRadius) {
    return 1.0 / 2 + z * (1.0 / 6 + z * (1.0 / 24 + z * (1.0 / 120 + z * (1.0 / 720 + z * (1.0 / 5040)))));
  }
  return (expm1(z) - z) / (z * z);
}

}  // namespace glperiod
