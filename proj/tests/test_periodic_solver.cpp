#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "glperiod/forcing.hpp"
#include "glperiod/periodic_solver.hpp"
#include "oracles.hpp"

using namespace glperiod;

namespace {

/// g(x, t) = c a(t) e^{i xi_k x} sampled on m_t + 1 nodes (frequency representation).
FieldSeries single_mode_series(const GridPtr& g, std::array<int, 3> k, Complex c,
                               const std::function<Complex(double)>& a, int m_t, double T) {
  std::vector<SpectralField> nodes;
  const std::size_t q = g->mode_offset(k);
  for (int m = 0; m <= m_t; ++m) {
    SpectralField f(g, Representation::frequency);
    f[q] = c * a((m % m_t) * T / m_t) * static_cast<double>(g->size());
    nodes.push_back(f);
  }
  return FieldSeries(std::move(nodes), T, true);
}

/// Coefficient of e^{i xi_k x} at every node.
std::vector<Complex> mode_amplitude(const FieldSeries& u, const GridPtr& g, std::array<int, 3> k) {
  std::vector<Complex> out;
  for (const auto& f : u.fields()) out.push_back(to_frequency(f)[g->mode_offset(k)] / static_cast<double>(g->size()));
  return out;
}

double triangle(double t, double T) {
  const double s = t / T;
  return s <= 0.5 ? 4 * s - 1 : 3 - 4 * s;
}

SolveOptions linear_options(int m_t) {
  SolveOptions o;
  o.m_t = m_t;
  o.nonlinearity_enabled = false;
  o.track_oddness = false;
  return o;
}

struct SmallProblem {
  GridPtr grid = make_grid({2, 16, 32.0});
  LinearOperator op{grid, 1.0};
  CutoffSpec cutoffs = default_cutoffs(grid, 1.0);

  FieldSeries forcing(double eps, int m_t) const {
    ForcingSpec s;
    s.amplitude = eps;
    s.spatial = GaussDipole{2.0, 0};
    return realize_forcing(s, grid, m_t).g;
  }
};

}  // namespace

TEST(Duhamel, ZeroForcing) {
  const auto g = make_grid({2, 8, 8.0});
  const LinearOperator op(g, 1.0);
  const FieldSeries F = FieldSeries::zeros(g, Representation::frequency, 8, 1.0);
  EXPECT_EQ(l2_norm(duhamel_integral(F, 8, op)), 0.0);
  EXPECT_EQ(l2_norm(periodic_initial_data(F, op)), 0.0);
  const FieldSeries u = linear_period_map(F, op);
  for (const auto& f : u.fields()) EXPECT_EQ(l2_norm(f), 0.0);
  EXPECT_THROW(duhamel_integral(F, 9, op), ConfigError);
}

TEST(Duhamel, ConstantForcingIntegratesExactly) {
  // int_0^t e^{-(t-s) lam} c ds = c (1 - e^{-t lam}) / lam
  const auto g = make_grid({1, 16, 2 * std::numbers::pi});
  const LinearOperator op(g, 1.0);
  const std::array<int, 3> k{2, 0, 0};
  const Complex c(0.7, -0.2);
  const auto F = single_mode_series(g, k, c, [](double) { return Complex(1.0); }, 8, 1.0);
  const Complex lam = op.symbol()[g->mode_offset(k)];
  for (int m : {0, 3, 8}) {
    const Complex got = duhamel_integral(F, m, op)[g->mode_offset(k)] / 16.0;
    const double t = m / 8.0;
    EXPECT_NEAR(std::abs(got - c * (1.0 - std::exp(-t * lam)) / lam), 0.0, 1e-15);
  }
}

TEST(PeriodMap, PiecewiseLinearForcingMatchesClosedForm) {
  const auto g = make_grid({3, 16, 32.0});
  const LinearOperator op(g, 1.0);
  const std::vector<double> knots{0.0, 0.5, 1.0}, values{-1.0, 1.0, -1.0};
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> K(-7, 7);
  for (int trial = 0; trial < 5; ++trial) {
    std::array<int, 3> k{K(rng), K(rng), K(rng)};
    if (k == std::array<int, 3>{0, 0, 0}) k[0] = 1;
    const auto F = single_mode_series(g, k, 1.0, [](double t) { return Complex(triangle(t, 1.0)); }, 32, 1.0);
    const auto u = mode_amplitude(linear_period_map(F, op), g, k);
    const Complex lam = op.symbol()[g->mode_offset(k)];
    double scale = 0.0, err = 0.0;
    for (int m = 0; m <= 32; ++m) {
      const Complex ref = oracle::piecewise_linear_periodic(lam, 1.0, knots, values, m / 32.0);
      scale = std::max(scale, std::abs(ref));
      err = std::max(err, std::abs(u[m] - ref));
    }
    EXPECT_LE(err / scale, 1e-12) << "k=(" << k[0] << "," << k[1] << "," << k[2] << ")";
  }
}

TEST(PeriodMap, HarmonicForcingConvergesAtSecondOrder) {
  const auto g = make_grid({1, 16, 2 * std::numbers::pi});
  const LinearOperator op(g, 1.0);
  const std::array<int, 3> k{1, 0, 0};
  const double w = 2 * std::numbers::pi;
  const Complex c(1.0, 0.5);
  const Complex lam = op.symbol()[g->mode_offset(k)];
  std::vector<double> errors;
  for (int m_t : {32, 64, 128}) {
    const auto F = single_mode_series(g, k, c, [&](double t) { return std::exp(Complex(0, w * t)); }, m_t, 1.0);
    const auto u = mode_amplitude(linear_period_map(F, op), g, k);
    double err = 0.0;
    for (int m = 0; m <= m_t; ++m)
      err = std::max(err, std::abs(u[m] - oracle::harmonic_periodic(lam, c, w, double(m) / m_t)));
    errors.push_back(err / std::abs(c / (lam + Complex(0, w))));
  }
  EXPECT_LT(errors[0], 1e-2);
  EXPECT_NEAR(errors[0] / errors[1], 4.0, 0.2);
  EXPECT_NEAR(errors[1] / errors[2], 4.0, 0.2);
}

TEST(PeriodMap, RejectsMeanMode) {
  const auto g = make_grid({1, 16, 8.0});
  const LinearOperator op(g, 1.0);
  const auto F = single_mode_series(g, {0, 0, 0}, 1.0, [](double) { return Complex(1.0); }, 8, 1.0);
  EXPECT_THROW(linear_period_map(F, op), ZeroModeViolation);
}

TEST(Solve, ZeroForcingConvergesImmediately) {
  SmallProblem p;
  SolveOptions o;
  o.m_t = 16;
  const auto sol = solve_periodic(p.forcing(0.0, 16), p.op, p.cutoffs, o);
  EXPECT_TRUE(sol.report.converged);
  EXPECT_EQ(sol.report.iterations, 1);
  EXPECT_EQ(sol.report.z_norm, 0.0);
  EXPECT_FALSE(sol.report.c_estimate.has_value());
  for (const auto& f : sol.u.fields()) EXPECT_EQ(l2_norm(f), 0.0);
}

TEST(Solve, LinearSingleModeMatchesClosedForm) {
  const auto g = make_grid({3, 16, 32.0});
  const LinearOperator op(g, 1.0);
  const auto cut = default_cutoffs(g, 1.0);
  const std::array<int, 3> k{3, -1, 2};
  const Complex c(0.4, 0.9);
  const auto F = single_mode_series(g, k, c, [](double t) { return Complex(triangle(t, 1.0)); }, 16, 1.0);
  const auto sol = solve_periodic(F, op, cut, linear_options(16));
  ASSERT_TRUE(sol.report.converged);
  // one step: the first increment is exactly zero
  ASSERT_EQ(sol.report.residual_history.size(), 1u);
  EXPECT_EQ(sol.report.residual_history[0], 0.0);
  const auto u = mode_amplitude(sol.u, g, k);
  const Complex lam = op.symbol()[g->mode_offset(k)];
  for (int m = 0; m <= 16; ++m) {
    const Complex ref = oracle::piecewise_linear_periodic(lam, c, {0.0, 0.5, 1.0}, {-1.0, 1.0, -1.0}, m / 16.0);
    EXPECT_LE(std::abs(u[m] - ref), 1e-10 * std::abs(ref));
  }
}

TEST(Solve, PicardStepFromZeroIsLinearMap) {
  SmallProblem p;
  SolveOptions o;
  o.m_t = 16;
  const FieldSeries g = p.forcing(1e-2, 16);
  const FieldSeries zero = FieldSeries::zeros(p.grid, Representation::frequency, 16, 1.0);
  const FieldSeries a = picard_step(zero, g, p.op, p.cutoffs, o);
  const FieldSeries b = linear_period_map(g, p.op);
  for (std::size_t m = 0; m < a.size(); ++m) EXPECT_LE(l2_norm(a[m] - b[m]), 1e-15 * (1 + l2_norm(b[m])));
  const FieldSeries gz = p.forcing(0.0, 16);
  const FieldSeries next = picard_step(zero, gz, p.op, p.cutoffs, o);
  for (const auto& f : next.fields()) EXPECT_EQ(l2_norm(f), 0.0);
}

TEST(Solve, NonlinearSolutionIsAFixedPoint) {
  SmallProblem p;
  SolveOptions o;
  o.m_t = 16;
  o.z_tolerance = 1e-13;
  const FieldSeries g = p.forcing(5e-2, 16);
  const auto sol = solve_periodic(g, p.op, p.cutoffs, o);
  ASSERT_TRUE(sol.report.converged) << sol.report.message;
  EXPECT_LE(sol.report.iterations, 15);
  EXPECT_LE(sol.report.periodicity_residual, 1e-12);
  EXPECT_LE(sol.report.max_oddness, 1e-10);
  EXPECT_NEAR(sol.report.z_norm, sol.report.norms.x_norm + sol.report.norms.y_norm, 1e-14 * sol.report.z_norm);
  ASSERT_TRUE(sol.report.c_estimate);
  EXPECT_NEAR(*sol.report.c_estimate, sol.report.z_norm / sol.report.g_bracket, 1e-15);
  const FieldSeries next = picard_step(sol.u, g, p.op, p.cutoffs, o);
  double worst = 0.0, scale = 0.0;
  for (std::size_t m = 0; m < next.size(); ++m) {
    worst = std::max(worst, l2_norm(next[m] - sol.u[m]));
    scale = std::max(scale, l2_norm(sol.u[m]));
  }
  EXPECT_LE(worst / scale, 1e-12);
  // the periodic solution satisfies the discrete equation to O(h^2)
  EXPECT_LT(equation_residual(sol.u, g, p.op), 5e-2);
}

TEST(Solve, ContractionFactorScalesWithSquaredAmplitude) {
  SmallProblem p;
  SolveOptions o;
  o.m_t = 16;
  o.min_iterations = 4;
  o.z_tolerance = 1e-300;
  o.max_iterations = 4;
  std::vector<double> q;
  for (double eps : {1e-2, 2e-2}) {
    const auto sol = solve_periodic(p.forcing(eps, 16), p.op, p.cutoffs, o);
    ASSERT_TRUE(sol.report.contraction_factor);
    ASSERT_GE(sol.report.residual_history.size(), 3u);
    q.push_back(*sol.report.contraction_factor);
  }
  EXPECT_NEAR(q[1] / q[0], 4.0, 0.4);
  EXPECT_LT(q[1], 1.0);
}

TEST(Solve, LargeForcingDoesNotConverge) {
  SmallProblem p;
  SolveOptions o;
  o.m_t = 16;
  o.max_iterations = 30;
  const auto sol = solve_periodic(p.forcing(50.0, 16), p.op, p.cutoffs, o);
  EXPECT_FALSE(sol.report.converged);
  EXPECT_NE(sol.report.status, SolveStatus::converged);
  EXPECT_FALSE(sol.report.message.empty());
}

TEST(Solve, OptionValidation) {
  SmallProblem p;
  const FieldSeries g = p.forcing(1e-2, 16);
  SolveOptions o;
  o.m_t = 32;
  EXPECT_THROW(solve_periodic(g, p.op, p.cutoffs, o), ConfigError);  // forcing has 16 intervals
  o.m_t = 16;
  o.max_iterations = 0;
  EXPECT_THROW(solve_periodic(g, p.op, p.cutoffs, o), ConfigError);
  o.max_iterations = 5;
  o.min_iterations = 6;
  EXPECT_THROW(solve_periodic(g, p.op, p.cutoffs, o), ConfigError);
  PeriodicSolveReport r;
  r.residual_history = {1.0, 0.1};
  EXPECT_THROW(contraction_estimate(r), InsufficientData);
  r.residual_history = {1.0, 0.1, 0.01, 0.001};
  EXPECT_NEAR(contraction_estimate(r), 0.1, 1e-15);
}

TEST(EquationResidual, ZeroIsZero) {
  SmallProblem p;
  const FieldSeries z = FieldSeries::zeros(p.grid, Representation::frequency, 8, 1.0);
  EXPECT_EQ(equation_residual(z, z, p.op), 0.0);
}

TEST(EquationResidual, SecondOrderOnExactSolution) {
  const auto g = make_grid({1, 16, 2 * std::numbers::pi});
  const LinearOperator op(g, 1.0);
  const std::array<int, 3> k{1, 0, 0};
  const double w = 2 * std::numbers::pi;
  const Complex lam = op.symbol()[g->mode_offset(k)];
  std::vector<double> res;
  for (int m_t : {32, 64, 128}) {
    auto exact = [&](double t) { return oracle::harmonic_periodic(lam, 1.0, w, t); };
    const auto u = single_mode_series(g, k, 1.0, exact, m_t, 1.0);
    const auto F = single_mode_series(g, k, 1.0, [&](double t) { return std::exp(Complex(0, w * t)); }, m_t, 1.0);
    res.push_back(equation_residual(u, F, op, false));
  }
  EXPECT_NEAR(res[0] / res[1], 4.0, 0.2);
  EXPECT_NEAR(res[1] / res[2], 4.0, 0.2);
}

TEST(EquationResidual, GrowsLinearlyWithNoise) {
  SmallProblem p;
  SolveOptions o;
  o.m_t = 16;
  o.z_tolerance = 1e-13;
  const FieldSeries g = p.forcing(1e-2, 16);
  const auto sol = solve_periodic(g, p.op, p.cutoffs, o);
  ASSERT_TRUE(sol.report.converged);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> N;
  FieldSeries noise = FieldSeries::zeros(p.grid, Representation::frequency, 16, 1.0);
  for (auto& f : noise.fields())
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = Complex(N(rng), N(rng)) * std::exp(-p.grid->xi_squared()[i]);
  const FieldSeries zero = FieldSeries::zeros(p.grid, Representation::frequency, 16, 1.0);
  std::vector<double> r;
  for (double delta : {1e-8, 1e-7}) {
    FieldSeries n = noise;
    n *= Complex(delta);
    r.push_back(equation_residual(n, zero, p.op, false));
  }
  EXPECT_NEAR(r[1] / r[0], 10.0, 1e-4);
  FieldSeries u = sol.u;
  for (std::size_t m = 0; m < u.size(); ++m) u[m].axpy(1e-1, noise[m]);
  EXPECT_GT(equation_residual(u, g, p.op), equation_residual(sol.u, g, p.op));
}
