#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "glperiod/error.hpp"
#include "glperiod/field.hpp"
#include "glperiod/operators.hpp"
#include "glperiod/parallel.hpp"
#include "glperiod/spectral.hpp"

namespace glperiod {

//
// Single-field norms. Weighted variants use w(x) = 1 + |x| in centered box
// coordinates, applied after differentiation: ||w d^alpha f||. Unweighted
// Sobolev norms are evaluated by discrete Parseval in frequency space, which
// equals the physical quadrature up to round-off.
//

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// All multi-indices alpha with |alpha| <= k in `dim` dimensions, ordered by |alpha|.
inline std::vector<std::array<int, 3>> multi_indices(int dim, int k) {
  std::vector<std::array<int, 3>> out;
  for (int order = 0; order <= k; ++order)
    for (int a0 = order; a0 >= 0; --a0)
      for (int a1 = order - a0; a1 >= 0; --a1) {
        const int a2 = order - a0 - a1;
        if ((dim < 2 && a1 > 0) || (dim < 3 && a2 > 0)) continue;
        out.push_back({a0, a1, a2});
      }
  return out;
}

/// d^alpha f in physical space.
inline SpectralField derivative(const SpectralField& f, const std::array<int, 3>& alpha) {
  SpectralField hat = to_frequency(f);
  const Grid& g = hat.grid();
  for (std::size_t i = 0; i < hat.size(); ++i) {
    Complex s = 1.0;
    for (int a = 0; a < g.dim(); ++a)
      for (int r = 0; r < alpha[a]; ++r) s *= Complex(0.0, g.xi(a)[i]);
    hat[i] *= s;
  }
  if (alpha[0] + alpha[1] + alpha[2] > 0) zero_nyquist(hat);
  return to_physical(hat);
}

/// dx^dim * sum |w f|^2 over nodes of a physical field (w = 1 + |x| if weighted).
inline double weighted_square_sum(const SpectralField& phys, bool weighted) {
  phys.require(Representation::physical, "weighted_square_sum");
  const auto r = phys.grid().radius();
  double s = 0.0;
  for (std::size_t i = 0; i < phys.size(); ++i) {
    const double w = weighted ? 1.0 + r[i] : 1.0;
    s += w * w * std::norm(phys[i]);
  }
  return s * phys.grid().quadrature_weight();
}

inline double lp_norm(const SpectralField& f, double p, bool weighted) {
  if (!(p == 1 || p == 2 || p == 3 || p == 6 || p == kInfinity))
    throw ConfigError("lp_norm supports p in {1, 2, 3, 6, inf}");
  const SpectralField u = to_physical(f);
  const auto r = u.grid().radius();
  if (p == kInfinity) {
    double m = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
      m = std::max(m, (weighted ? 1.0 + r[i] : 1.0) * std::abs(u[i]));
    return m;
  }
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    s += std::pow((weighted ? 1.0 + r[i] : 1.0) * std::abs(u[i]), p);
  return std::pow(s * u.grid().quadrature_weight(), 1.0 / p);
}

/// s[j] = sum over |alpha| = j of ||w d^alpha f||^2, j = 0..k.
inline std::array<double, 4> sobolev_order_sums(const SpectralField& f, int k, bool weighted) {
  if (k < 0 || k > 3) throw ConfigError("sobolev order must lie in 0..3");
  std::array<double, 4> s{};
  const SpectralField hat = to_frequency(f);
  const Grid& g = hat.grid();
  if (!weighted) {
    const double scale = g.volume() / (static_cast<double>(g.size()) * g.size());
    const auto mask = g.nyquist_mask();
    const auto alphas = multi_indices(g.dim(), k);
    for (std::size_t i = 0; i < hat.size(); ++i) {
      const double a2 = std::norm(hat[i]);
      s[0] += a2;
      if (mask[i] || k == 0) continue;
      for (const auto& alpha : alphas) {
        const int order = alpha[0] + alpha[1] + alpha[2];
        if (order == 0) continue;
        double sym = 1.0;
        for (int a = 0; a < g.dim(); ++a) sym *= std::pow(g.xi(a)[i], 2 * alpha[a]);
        s[order] += sym * a2;
      }
    }
    for (auto& v : s) v *= scale;
    return s;
  }
  for (const auto& alpha : multi_indices(g.dim(), k)) {
    const int order = alpha[0] + alpha[1] + alpha[2];
    s[order] += weighted_square_sum(derivative(hat, alpha), true);
  }
  return s;
}

/// (sum_{|alpha|<=k} ||w^{[weighted]} d^alpha f||_{L2}^2)^{1/2}
inline double sobolev_norm(const SpectralField& f, int k, bool weighted) {
  const auto s = sobolev_order_sums(f, k, weighted);
  return std::sqrt(std::accumulate(s.begin(), s.begin() + k + 1, 0.0));
}

/// || |x| |grad f| ||_{L2}
inline double x_weighted_gradient_norm(const SpectralField& f) {
  const SpectralField hat = to_frequency(f);
  const auto r = hat.grid().radius();
  double s = 0.0;
  for (int a = 0; a < hat.grid().dim(); ++a) {
    std::array<int, 3> alpha{};
    alpha[a] = 1;
    const SpectralField d = derivative(hat, alpha);
    for (std::size_t i = 0; i < d.size(); ++i) s += r[i] * r[i] * std::norm(d[i]);
  }
  return std::sqrt(s * hat.grid().quadrature_weight());
}

/// || |x| f ||_{L2}: the seminorm |f|_{L^2_1}.
inline double x_weighted_norm(const SpectralField& f) {
  const SpectralField u = to_physical(f);
  const auto r = u.grid().radius();
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += r[i] * r[i] * std::norm(u[i]);
  return std::sqrt(s * u.grid().quadrature_weight());
}

//
// Space-time norms over one period.
//

/// Trapezoidal rule for samples on a uniform grid with step h.
inline double trapezoid(std::span<const double> values, double h) {
  if (values.size() < 2) return 0.0;
  double s = 0.5 * (values.front() + values.back());
  for (std::size_t m = 1; m + 1 < values.size(); ++m) s += values[m];
  return s * h;
}

/// Frequency-space copy of every node.
inline FieldSeries to_frequency(const FieldSeries& series) {
  if (series.representation() == Representation::frequency) return series;
  std::vector<SpectralField> out(series.size());
  parallel_for(series.size(), [&](std::size_t m) { out[m] = to_frequency(series[m]); });
  return FieldSeries(std::move(out), series.period(), series.periodic());
}

/// Centered differences in time. Periodic series wrap (node M equals node 0);
/// open series use second-order one-sided stencils at the ends.
inline FieldSeries time_derivative(const FieldSeries& series) {
  const int M = series.intervals();
  if (M < 2) throw InsufficientData("time derivative needs at least three nodes");
  const double h = series.time_step();
  std::vector<SpectralField> out(series.size());
  auto at = [&](int m) -> const SpectralField& { return series[static_cast<std::size_t>(m)]; };
  for (int m = 0; m <= M; ++m) {
    SpectralField d(series.grid_ptr(), series.representation());
    if (series.periodic()) {
      const int prev = m == 0 ? M - 1 : m - 1;
      const int next = m == M ? 1 : m + 1;
      d.axpy(1.0 / (2 * h), at(next)).axpy(-1.0 / (2 * h), at(prev));
    } else if (m == 0) {
      d.axpy(-3.0 / (2 * h), at(0)).axpy(4.0 / (2 * h), at(1)).axpy(-1.0 / (2 * h), at(2));
    } else if (m == M) {
      d.axpy(3.0 / (2 * h), at(M)).axpy(-4.0 / (2 * h), at(M - 1)).axpy(1.0 / (2 * h), at(M - 2));
    } else {
      d.axpy(1.0 / (2 * h), at(m + 1)).axpy(-1.0 / (2 * h), at(m - 1));
    }
    out[static_cast<std::size_t>(m)] = std::move(d);
  }
  return FieldSeries(std::move(out), series.period(), series.periodic());
}

struct XNormParts {
  double l2 = 0.0;           // ||u1||_{H^1(0,T;L^2)}
  double x_gradient = 0.0;   // ||x grad u1||_{H^1(0,T;L^2)}
  double dt_weighted = 0.0;  // ||d_t u1||_{L^2(0,T;L^2_1)}
  double total() const { return l2 + x_gradient + dt_weighted; }
};

struct YNormParts {
  double sup_h2 = 0.0;  // ||u_inf||_{C([0,T];H^2_1)}
  double l2_h3 = 0.0;   // ||u_inf||_{L^2(0,T;H^3_1)}
  double h1_h1 = 0.0;   // ||u_inf||_{H^1(0,T;H^1_1)}
  double total() const { return sup_h2 + l2_h3 + h1_h1; }
};

struct SpaceTimeNorms {
  double x_norm = 0.0;
  double y_norm = 0.0;
  double z_norm = 0.0;  // x_norm + y_norm
  double g_bracket = 0.0;
  XNormParts x_parts;
  YNormParts y_parts;
};

inline XNormParts x_norm_parts(const FieldSeries& series, const CutoffSpec& cutoffs) {
  if (series.size() < 3) throw InsufficientData("space-time norms need at least three time nodes");
  const FieldSeries u = to_frequency(series);
  const FieldSeries du = time_derivative(u);
  const std::size_t n = u.size();
  std::vector<double> a(n), b(n), c(n), d(n), e(n);
  parallel_for(n, [&](std::size_t m) {
    const SpectralField u1 = project(u[m], Band::low, cutoffs);
    const SpectralField du1 = project(du[m], Band::low, cutoffs);
    a[m] = std::pow(l2_norm(u1), 2);
    b[m] = std::pow(l2_norm(du1), 2);
    c[m] = std::pow(x_weighted_gradient_norm(u1), 2);
    d[m] = std::pow(x_weighted_gradient_norm(du1), 2);
    e[m] = weighted_square_sum(to_physical(du1), true);
  });
  const double h = u.time_step();
  XNormParts p;
  p.l2 = std::sqrt(trapezoid(a, h) + trapezoid(b, h));
  p.x_gradient = std::sqrt(trapezoid(c, h) + trapezoid(d, h));
  p.dt_weighted = std::sqrt(trapezoid(e, h));
  return p;
}

inline YNormParts y_norm_parts(const FieldSeries& series, const CutoffSpec& cutoffs) {
  if (series.size() < 3) throw InsufficientData("space-time norms need at least three time nodes");
  const FieldSeries u = to_frequency(series);
  const FieldSeries du = time_derivative(u);
  const std::size_t n = u.size();
  std::vector<double> h1(n), h2(n), h3(n), dh1(n);
  parallel_for(n, [&](std::size_t m) {
    const SpectralField v = project(u[m], Band::high, cutoffs);
    const SpectralField dv = project(du[m], Band::high, cutoffs);
    const auto s = sobolev_order_sums(v, 3, true);
    const auto ds = sobolev_order_sums(dv, 1, true);
    h1[m] = s[0] + s[1];
    h2[m] = h1[m] + s[2];
    h3[m] = h2[m] + s[3];
    dh1[m] = ds[0] + ds[1];
  });
  const double h = u.time_step();
  YNormParts p;
  p.sup_h2 = std::sqrt(*std::max_element(h2.begin(), h2.end()));
  p.l2_h3 = std::sqrt(trapezoid(h3, h));
  p.h1_h1 = std::sqrt(trapezoid(h1, h) + trapezoid(dh1, h));
  return p;
}

enum class SpaceTimeKind { X, Y };

/// ||P_1 u||_X or ||P_inf u||_Y over the series' time span.
inline double spacetime_norm(const FieldSeries& series, SpaceTimeKind kind, const CutoffSpec& cutoffs) {
  return kind == SpaceTimeKind::X ? x_norm_parts(series, cutoffs).total()
                                  : y_norm_parts(series, cutoffs).total();
}

/// [g] = ||g||_{L^2(0,T;L^1_1)} + ||g||_{L^2(0,T;H^1_1)}
inline double forcing_bracket(const FieldSeries& g) {
  const std::size_t n = g.size();
  std::vector<double> l1(n), h1(n);
  parallel_for(n, [&](std::size_t m) {
    l1[m] = std::pow(lp_norm(g[m], 1, true), 2);
    const auto s = sobolev_order_sums(g[m], 1, true);
    h1[m] = s[0] + s[1];
  });
  const double h = g.time_step();
  return std::sqrt(trapezoid(l1, h)) + std::sqrt(trapezoid(h1, h));
}

/// Z-norm of {P_1 u, P_inf u} with its breakdown.
inline SpaceTimeNorms z_norm(const FieldSeries& series, const CutoffSpec& cutoffs) {
  SpaceTimeNorms out;
  out.x_parts = x_norm_parts(series, cutoffs);
  out.y_parts = y_norm_parts(series, cutoffs);
  out.x_norm = out.x_parts.total();
  out.y_norm = out.y_parts.total();
  out.z_norm = out.x_norm + out.y_norm;
  return out;
}

}  // namespace glperiod
