#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "glperiod/error.hpp"
#include "glperiod/grid.hpp"

namespace glperiod {

using Complex = std::complex<double>;

enum class Representation : unsigned char { physical = 0, frequency = 1 };

inline const char* to_string(Representation r) {
  return r == Representation::physical ? "physical" : "frequency";
}

/// Complex scalar field on a Grid, in one of two representations.
///
/// Frequency data follow the centered convention
///   F[k] = sum_j f(x_j) exp(-i xi_k . x_j),
/// so F[k] * dx^dim approximates the continuous Fourier transform.
class SpectralField {
 public:
  SpectralField() = default;

  SpectralField(GridPtr grid, Representation rep)
      : grid_(std::move(grid)), rep_(rep), data_(grid_->size(), Complex{}) {}

  SpectralField(GridPtr grid, Representation rep, std::vector<Complex> data)
      : grid_(std::move(grid)), rep_(rep), data_(std::move(data)) {
    if (data_.size() != grid_->size())
      throw GridMismatch("field data size " + std::to_string(data_.size()) +
                         " does not match grid size " + std::to_string(grid_->size()));
  }

  const GridPtr& grid_ptr() const { return grid_; }
  const Grid& grid() const { return *grid_; }
  Representation representation() const { return rep_; }
  bool is_physical() const { return rep_ == Representation::physical; }
  bool is_frequency() const { return rep_ == Representation::frequency; }

  std::size_t size() const { return data_.size(); }
  std::span<Complex> data() { return data_; }
  std::span<const Complex> data() const { return data_; }
  Complex& operator[](std::size_t i) { return data_[i]; }
  const Complex& operator[](std::size_t i) const { return data_[i]; }

  /// Relabels the representation without touching the data. Used by the
  /// transform after it has rewritten the buffer.
  void set_representation(Representation rep) { rep_ = rep; }

  bool all_finite() const {
    for (const auto& z : data_)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
  }

  SpectralField& operator+=(const SpectralField& other) {
    check_compatible(other);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
  }
  SpectralField& operator-=(const SpectralField& other) {
    check_compatible(other);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
  }
  SpectralField& operator*=(Complex alpha) {
    for (auto& z : data_) z *= alpha;
    return *this;
  }

  /// this += alpha * x
  SpectralField& axpy(Complex alpha, const SpectralField& x) {
    check_compatible(x);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += alpha * x.data_[i];
    return *this;
  }

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(Complex alpha, SpectralField a) { return a *= alpha; }

  void check_compatible(const SpectralField& other) const {
    require_same_grid(other);
    if (rep_ != other.rep_)
      throw RepresentationMismatch(std::string("cannot combine ") + to_string(rep_) + " and " +
                                   to_string(other.rep_) + " fields");
  }

  void require_same_grid(const SpectralField& other) const {
    if (grid_ != other.grid_ && !(grid_ && other.grid_ && grid_->config() == other.grid_->config()))
      throw GridMismatch("fields live on different grids");
  }

  void require(Representation rep, const char* what) const {
    if (rep_ != rep)
      throw RepresentationMismatch(std::string(what) + " expects a " + to_string(rep) +
                                   " field, got " + to_string(rep_));
  }

 private:
  GridPtr grid_;
  Representation rep_ = Representation::physical;
  std::vector<Complex> data_;
};

/// Fields at uniform times t_m = m T / M_t, m = 0..M_t (both ends stored).
class FieldSeries {
 public:
  FieldSeries() = default;

  FieldSeries(std::vector<SpectralField> fields, double period, bool periodic = true)
      : fields_(std::move(fields)), period_(period), periodic_(periodic) {
    if (fields_.size() < 2) throw InsufficientData("a field series needs at least two nodes");
    if (!(period_ > 0.0)) throw ConfigError("series period must be positive");
    for (const auto& f : fields_) fields_.front().check_compatible(f);
  }

  static FieldSeries zeros(const GridPtr& grid, Representation rep, int m_t, double period,
                           bool periodic = true) {
    std::vector<SpectralField> fields(static_cast<std::size_t>(m_t) + 1, SpectralField(grid, rep));
    return FieldSeries(std::move(fields), period, periodic);
  }

  /// Number of intervals M_t.
  int intervals() const { return static_cast<int>(fields_.size()) - 1; }
  std::size_t size() const { return fields_.size(); }
  double period() const { return period_; }
  double time_step() const { return period_ / intervals(); }
  double time(int m) const { return m * time_step(); }
  bool periodic() const { return periodic_; }

  const GridPtr& grid_ptr() const { return fields_.front().grid_ptr(); }
  const Grid& grid() const { return fields_.front().grid(); }
  Representation representation() const { return fields_.front().representation(); }

  SpectralField& operator[](std::size_t m) { return fields_[m]; }
  const SpectralField& operator[](std::size_t m) const { return fields_[m]; }
  std::vector<SpectralField>& fields() { return fields_; }
  const std::vector<SpectralField>& fields() const { return fields_; }

  FieldSeries& operator+=(const FieldSeries& other) {
    check_aligned(other);
    for (std::size_t m = 0; m < fields_.size(); ++m) fields_[m] += other.fields_[m];
    return *this;
  }
  FieldSeries& operator-=(const FieldSeries& other) {
    check_aligned(other);
    for (std::size_t m = 0; m < fields_.size(); ++m) fields_[m] -= other.fields_[m];
    return *this;
  }
  FieldSeries& operator*=(Complex alpha) {
    for (auto& f : fields_) f *= alpha;
    return *this;
  }
  friend FieldSeries operator+(FieldSeries a, const FieldSeries& b) { return a += b; }
  friend FieldSeries operator-(FieldSeries a, const FieldSeries& b) { return a -= b; }
  friend FieldSeries operator*(Complex alpha, FieldSeries a) { return a *= alpha; }

  void check_aligned(const FieldSeries& other) const {
    if (other.fields_.size() != fields_.size() || other.period_ != period_)
      throw GridMismatch("field series have different time grids");
    fields_.front().check_compatible(other.fields_.front());
  }

 private:
  std::vector<SpectralField> fields_;
  double period_ = 1.0;
  bool periodic_ = true;
};

}  // namespace glperiod
