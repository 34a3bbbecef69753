#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "glperiod/error.hpp"

namespace glperiod {

/// Uniform periodic box [-L/2, L/2)^dim standing in for R^dim.
struct GridConfig {
  int dim = 3;
  int n_per_axis = 32;
  double box_length = 64.0;
  double dealias_fraction = 2.0 / 3.0;

  friend bool operator==(const GridConfig&, const GridConfig&) = default;
};

inline void validate(const GridConfig& config) {
  if (config.dim < 1 || config.dim > 3)
    throw ConfigError("grid.dim must be 1, 2 or 3 (got " + std::to_string(config.dim) + ")");
  if (config.n_per_axis < 8 || config.n_per_axis % 2 != 0)
    throw ConfigError("grid.n_per_axis must be even and >= 8 (got " +
                      std::to_string(config.n_per_axis) + ")");
  if (!(config.box_length > 0.0) || !std::isfinite(config.box_length))
    throw ConfigError("grid.box_length must be positive");
  if (!(config.dealias_fraction > 0.0 && config.dealias_fraction <= 1.0))
    throw ConfigError("grid.dealias_fraction must lie in (0, 1]");
}

/// Physical nodes and the dual frequency lattice.
///
/// Layout (both representations): row-major, last axis fastest, padded to
/// three axes with extent 1 for dim < 3. Physical node j on an axis sits at
/// x = (j - n/2) * L/n, so index 0 is the seam x = -L/2 and the origin is at
/// j = n/2. Frequency entries are in standard FFT order: storage index q on an
/// axis holds the integer wavenumber k = q for q < n/2 and k = q - n for
/// q >= n/2, with xi = 2*pi*k/L. The Nyquist mode k = -n/2 sits at q = n/2.
class Grid {
 public:
  explicit Grid(GridConfig config) : config_(config) {
    validate(config_);
    const int n = config_.n_per_axis;
    for (int a = 0; a < 3; ++a) extent_[a] = a < config_.dim ? n : 1;
    size_ = static_cast<std::size_t>(extent_[0]) * extent_[1] * extent_[2];

    const double dx = spacing();
    const double dxi = frequency_step();
    radius_.resize(size_);
    xi2_.resize(size_);
    sign_.resize(size_);
    nyquist_.resize(size_);
    for (int a = 0; a < 3; ++a) {
      coord_[a].resize(size_);
      xi_[a].resize(size_);
      wavenumber_[a].resize(size_);
    }
    for (std::size_t i = 0; i < size_; ++i) {
      const auto idx = unflatten(i);
      double r2 = 0.0, k2 = 0.0;
      int parity = 0;
      bool nyq = false;
      for (int a = 0; a < 3; ++a) {
        if (a >= config_.dim) {
          coord_[a][i] = 0.0;
          xi_[a][i] = 0.0;
          wavenumber_[a][i] = 0;
          continue;
        }
        const double x = (idx[a] - n / 2) * dx;
        const int k = idx[a] < n / 2 ? idx[a] : idx[a] - n;
        coord_[a][i] = x;
        wavenumber_[a][i] = k;
        xi_[a][i] = k * dxi;
        r2 += x * x;
        k2 += (k * dxi) * (k * dxi);
        parity += idx[a];
        nyq = nyq || (k == -n / 2);
      }
      radius_[i] = std::sqrt(r2);
      xi2_[i] = k2;
      sign_[i] = (parity % 2 == 0) ? 1.0 : -1.0;
      nyquist_[i] = nyq ? 1 : 0;
    }
  }

  const GridConfig& config() const { return config_; }
  int dim() const { return config_.dim; }
  int n() const { return config_.n_per_axis; }
  double box_length() const { return config_.box_length; }
  std::size_t size() const { return size_; }
  const std::array<int, 3>& extent() const { return extent_; }

  double spacing() const { return config_.box_length / config_.n_per_axis; }
  double frequency_step() const { return 2.0 * std::numbers::pi / config_.box_length; }
  double quadrature_weight() const { return std::pow(spacing(), config_.dim); }
  double volume() const { return std::pow(config_.box_length, config_.dim); }

  /// Physical coordinate x_axis of node i (centered box).
  std::span<const double> coordinate(int axis) const { return coord_[axis]; }
  /// |x| per physical node.
  std::span<const double> radius() const { return radius_; }
  /// xi_axis per frequency entry (storage order).
  std::span<const double> xi(int axis) const { return xi_[axis]; }
  std::span<const int> wavenumber(int axis) const { return wavenumber_[axis]; }
  /// |xi|^2 per frequency entry.
  std::span<const double> xi_squared() const { return xi2_; }
  /// (-1)^(k_1+k_2+k_3): phase that moves the DFT origin to the box center.
  std::span<const double> centering_sign() const { return sign_; }
  /// 1 where any axis carries the unpaired wavenumber -n/2.
  std::span<const unsigned char> nyquist_mask() const { return nyquist_; }

  std::array<int, 3> unflatten(std::size_t i) const {
    std::array<int, 3> idx{};
    idx[2] = static_cast<int>(i % extent_[2]);
    idx[1] = static_cast<int>((i / extent_[2]) % extent_[1]);
    idx[0] = static_cast<int>(i / (static_cast<std::size_t>(extent_[1]) * extent_[2]));
    return idx;
  }

  std::size_t flatten(const std::array<int, 3>& idx) const {
    return (static_cast<std::size_t>(idx[0]) * extent_[1] + idx[1]) * extent_[2] + idx[2];
  }

  /// Storage offset of the physical node with centered indices
  /// m_a = j_a - n/2 in [-n/2, n/2).
  std::size_t node_offset(std::array<int, 3> centered) const {
    std::array<int, 3> idx{};
    for (int a = 0; a < 3; ++a) idx[a] = a < config_.dim ? centered[a] + n() / 2 : 0;
    return flatten(idx);
  }

  /// Storage offset of the mode with natural wavenumbers k_a in [-n/2, n/2).
  std::size_t mode_offset(std::array<int, 3> k) const {
    std::array<int, 3> idx{};
    for (int a = 0; a < 3; ++a) idx[a] = a < config_.dim ? (k[a] < 0 ? k[a] + n() : k[a]) : 0;
    return flatten(idx);
  }

  /// Physical node mirrored through the origin: j -> (n - j) mod n per axis.
  std::size_t reflected_node(std::size_t i) const {
    auto idx = unflatten(i);
    for (int a = 0; a < config_.dim; ++a) idx[a] = (n() - idx[a]) % n();
    return flatten(idx);
  }

  /// True for nodes on the seam x_a = -L/2 of any axis; the reflection maps
  /// those onto themselves.
  bool on_seam(std::size_t i) const {
    const auto idx = unflatten(i);
    for (int a = 0; a < config_.dim; ++a)
      if (idx[a] == 0) return true;
    return false;
  }

 private:
  GridConfig config_;
  std::array<int, 3> extent_{};
  std::size_t size_ = 0;
  std::array<std::vector<double>, 3> coord_;
  std::array<std::vector<double>, 3> xi_;
  std::array<std::vector<int>, 3> wavenumber_;
  std::vector<double> radius_;
  std::vector<double> xi2_;
  std::vector<double> sign_;
  std::vector<unsigned char> nyquist_;
};

using GridPtr = std::shared_ptr<const Grid>;

inline GridPtr make_grid(const GridConfig& config) { return std::make_shared<const Grid>(config); }

}  // namespace glperiod
