#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "glperiod/decay_fit.hpp"
#include "glperiod/stability.hpp"

using namespace glperiod;

namespace {

SpectralField random_physical(const GridPtr& g, std::mt19937_64& rng) {
  std::normal_distribution<double> N;
  SpectralField f(g, Representation::physical);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = {N(rng), N(rng)};
  return f;
}

StabilityRunConfig quiet_background(const GridPtr& g, int m_t, double t_max, SpectralField w0) {
  StabilityRunConfig cfg;
  cfg.t_max = t_max;
  cfg.record_stride = 4;
  cfg.v_per = FieldSeries::zeros(g, Representation::frequency, m_t, 1.0);
  cfg.w0 = std::move(w0);
  return cfg;
}

}  // namespace

TEST(PerturbationRhs, ZeroPerturbationGivesZero) {
  const auto g = make_grid({2, 16, 16.0});
  std::mt19937_64 rng(1);
  const SpectralField v = random_physical(g, rng);
  const SpectralField r = perturbation_rhs(SpectralField(g, Representation::physical), v);
  for (std::size_t i = 0; i < r.size(); ++i) EXPECT_EQ(r[i], Complex{});
}

TEST(PerturbationRhs, QuietBackgroundLeavesOnlyCubicTerm) {
  const auto g = make_grid({2, 16, 16.0});
  std::mt19937_64 rng(2);
  const SpectralField w = random_physical(g, rng);
  const SpectralField r = perturbation_rhs(w, SpectralField(g, Representation::physical));
  const SpectralField ref = dealias(to_frequency(cubic_nonlinearity(w)));
  for (std::size_t i = 0; i < r.size(); ++i) EXPECT_LE(std::abs(r[i] - ref[i]), 1e-12 * (1 + std::abs(ref[i])));
}

TEST(PerturbationRhs, EqualsDifferenceOfCubes) {
  const auto g = make_grid({3, 8, 8.0});
  std::mt19937_64 rng(3);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const SpectralField v = random_physical(g, rng), w = random_physical(g, rng);
    const SpectralField r = perturbation_rhs(w, v);
    const SpectralField ref = dealias(to_frequency(cubic_nonlinearity(v + w) - cubic_nonlinearity(v)));
    worst = std::max(worst, l2_norm(r - ref) / l2_norm(ref));
  }
  EXPECT_LE(worst, 1e-12);
}

TEST(PerturbationRhs, RejectsGridMismatch) {
  const SpectralField a(make_grid({1, 8, 1.0}), Representation::physical);
  const SpectralField b(make_grid({1, 16, 1.0}), Representation::physical);
  EXPECT_THROW(perturbation_rhs(a, b), GridMismatch);
}

TEST(ExponentialStep, LinearFlowIsTheSemigroup) {
  const auto g = make_grid({2, 16, 16.0});
  const LinearOperator op(g, 1.0);
  std::mt19937_64 rng(4);
  const SpectralField w = to_frequency(random_physical(g, rng));
  const StepCoefficients c(op, 0.3);
  auto none = [&](const SpectralField& s, long) { return SpectralField(s.grid_ptr(), Representation::frequency); };
  for (Scheme s : {Scheme::exponential_euler, Scheme::etd2}) {
    SpectralField expected = semigroup_apply(w, 0.3, op);
    zero_nyquist(expected);
    const SpectralField got = exponential_step(w, none, 0, c, IntegratorOptions{s});
    EXPECT_LE(l2_norm(got - expected), 1e-15 * l2_norm(w)) << to_string(s);
  }
}

TEST(ExponentialStep, OrderOnHarmonicForcing) {
  // w' + lam w = e^{i om t}, w(0) = 0, per mode
  const auto g = make_grid({1, 16, 2 * std::numbers::pi});
  const LinearOperator op(g, 1.0);
  const std::size_t q = g->mode_offset({1, 0, 0});
  const Complex lam = op.symbol()[q];
  const double om = 3.0, t_end = 1.0;
  const Complex exact = (std::exp(Complex(0, om * t_end)) - std::exp(-lam * t_end)) / (lam + Complex(0, om));
  for (Scheme s : {Scheme::exponential_euler, Scheme::etd2}) {
    std::vector<double> err;
    for (int steps : {16, 32, 64}) {
      const double h = t_end / steps;
      const StepCoefficients c(op, h);
      auto rhs = [&](const SpectralField& w, long node) {
        SpectralField f(w.grid_ptr(), Representation::frequency);
        f[q] = std::exp(Complex(0, om * node * h));
        return f;
      };
      SpectralField w(g, Representation::frequency);
      for (int k = 0; k < steps; ++k) w = exponential_step(w, rhs, k, c, IntegratorOptions{s});
      err.push_back(std::abs(w[q] - exact));
    }
    const double order = s == Scheme::etd2 ? 4.0 : 2.0;
    EXPECT_NEAR(err[0] / err[1], order, 0.15 * order) << to_string(s);
    EXPECT_NEAR(err[1] / err[2], order, 0.15 * order) << to_string(s);
  }
}

TEST(ExpStep, RejectsNonPositiveStep) {
  const auto g = make_grid({1, 8, 1.0});
  const LinearOperator op(g, 1.0);
  const SpectralField z(g, Representation::frequency);
  EXPECT_THROW(exp_step(z, z, z, 0.0, op), ConfigError);
}

TEST(DecayFit, RecoversExactPowerLaws) {
  std::vector<double> t, a, b;
  for (int i = 0; i <= 200; ++i) {
    t.push_back(0.5 * i);
    a.push_back(3.0 * std::pow(1 + t.back(), -0.75));
    b.push_back(0.2 * std::pow(1 + t.back(), -1.25));
  }
  const auto fa = fit_decay_rate(t, a, 1.0, 100.0), fb = fit_decay_rate(t, b, 1.0, 100.0);
  EXPECT_NEAR(fa.slope, -0.75, 1e-6);
  EXPECT_NEAR(fb.slope, -1.25, 1e-6);
  EXPECT_NEAR(std::exp(fa.intercept), 3.0, 1e-6);
  EXPECT_NEAR(fa.r2, 1.0, 1e-12);
  EXPECT_EQ(fa.samples, 199);
}

TEST(DecayFit, OnePercentNoiseStaysWithinTwoHundredths) {
  std::vector<double> t;
  for (int i = 0; i <= 200; ++i) t.push_back(0.5 * i);
  double worst = 0.0;
  for (unsigned seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N(0.0, 0.01);
    std::vector<double> v;
    for (double s : t) v.push_back(std::pow(1 + s, -0.75) * (1 + N(rng)));
    worst = std::max(worst, std::abs(fit_decay_rate(t, v, 1.0, 100.0).slope + 0.75));
  }
  EXPECT_LE(worst, 0.02);
}

TEST(DecayFit, RejectsBadInput) {
  const std::vector<double> t{1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::vector<double> v(9, 1.0);
  EXPECT_THROW(fit_decay_rate(t, std::vector<double>(8, 1.0), 0, 10), InsufficientData);
  EXPECT_THROW(fit_decay_rate(t, v, 1, 5), InsufficientData);  // 5 samples
  v[3] = 0.0;
  EXPECT_THROW(fit_decay_rate(t, v, 0, 10), InsufficientData);
}

TEST(Stability, ZeroPerturbationStaysZero) {
  const auto g = make_grid({2, 16, 32.0});
  const LinearOperator op(g, 1.0);
  const auto cfg = quiet_background(g, 8, 10.0, SpectralField(g, Representation::physical));
  const auto rep = run_stability(cfg, op, default_cutoffs(g, 1.0));
  EXPECT_FALSE(rep.escaped);
  EXPECT_EQ(rep.times.size(), 21u);
  for (std::size_t i = 0; i < rep.times.size(); ++i) {
    EXPECT_EQ(rep.l2_w[i], 0.0);
    EXPECT_EQ(rep.h1_grad_w[i], 0.0);
    EXPECT_EQ(rep.n_series[i], 0.0);
  }
}

TEST(Stability, SingleModeDecaysExactlyUnderLinearFlow) {
  const auto g = make_grid({2, 16, 32.0});
  const LinearOperator op(g, 1.0);
  SpectralField w0(g, Representation::frequency);
  const std::size_t q = g->mode_offset({2, -1, 0});
  w0[q] = 256.0;
  auto cfg = quiet_background(g, 8, 10.0, w0);
  cfg.nonlinear = false;
  const auto rep = run_stability(cfg, op, default_cutoffs(g, 1.0));
  const double xi2 = g->xi_squared()[q];
  for (std::size_t i = 0; i < rep.times.size(); ++i)
    EXPECT_NEAR(rep.l2_w[i] / rep.l2_w[0], std::exp(-xi2 * rep.times[i]), 1e-13);
}

TEST(Stability, OddDipoleMatchesContinuumHeatDecay) {
  // |w_hat|^2 ~ xi^2 e^{-(s^2 + 2t) xi^2} in 1D: ||w|| ~ (s^2+2t)^{-3/4}, ||w'|| ~ (s^2+2t)^{-5/4}
  const auto g = make_grid({1, 256, 128.0});
  const LinearOperator op(g, 1.0);
  const CutoffSpec cut = default_cutoffs(g, 1.0);
  const double s = 3.0;
  auto cfg = quiet_background(g, 16, 100.0, realize_profile(GaussDipole{s, 0}, g));
  cfg.nonlinear = false;
  const auto rep = run_stability(cfg, op, cut);
  ASSERT_FALSE(rep.escaped);
  std::vector<double> l2_ref, grad_ref;
  for (double t : rep.times) {
    const double a = (s * s + 2 * t) / (s * s);
    l2_ref.push_back(rep.l2_w[0] * std::pow(a, -0.75));
    grad_ref.push_back(rep.h1_grad_w[0] * std::pow(a, -1.25));
  }
  for (std::size_t i = 0; i < rep.times.size(); ++i) {
    EXPECT_NEAR(rep.l2_w[i] / l2_ref[i], 1.0, 1e-5) << "t=" << rep.times[i];
    EXPECT_NEAR(rep.h1_grad_w[i] / grad_ref[i], 1.0, 1e-5) << "t=" << rep.times[i];
  }
  ASSERT_TRUE(rep.fit_l0 && rep.fit_l1);
  const FitWindow w = rep.fit_window;
  EXPECT_NEAR(rep.fit_l0->slope, fit_decay_rate(rep.times, l2_ref, w.lo, w.hi).slope, 1e-5);
  EXPECT_NEAR(rep.fit_l1->slope, fit_decay_rate(rep.times, grad_ref, w.lo, w.hi).slope, 1e-5);
  for (std::size_t i = 1; i < rep.n_series.size(); ++i) EXPECT_GE(rep.n_series[i], rep.n_series[i - 1]);
  EXPECT_LE(rep.max_oddness, 1e-12);
}

TEST(Stability, LargePerturbationEscapes) {
  const auto g = make_grid({1, 32, 16.0});
  const LinearOperator op(g, 1.0);
  SpectralField w0 = realize_profile(GaussBump{2.0}, g);
  w0 *= Complex(50.0);
  auto cfg = quiet_background(g, 8, 10.0, w0);
  cfg.track_oddness = false;
  const auto rep = run_stability(cfg, op, default_cutoffs(g, 1.0));
  EXPECT_TRUE(rep.escaped);
  ASSERT_TRUE(rep.escape_time.has_value());
  EXPECT_LT(*rep.escape_time, 10.0);
  EXPECT_FALSE(rep.fit_l0.has_value());
}

TEST(Stability, RejectsBadConfigs) {
  const auto g = make_grid({1, 16, 16.0});
  const LinearOperator op(g, 1.0);
  const auto cut = default_cutoffs(g, 1.0);
  auto cfg = quiet_background(g, 8, 9.0, SpectralField(g, Representation::physical));
  EXPECT_THROW(run_stability(cfg, op, cut), ConfigError);
  cfg.t_max = 10.0;
  cfg.record_stride = 0;
  EXPECT_THROW(run_stability(cfg, op, cut), ConfigError);
  cfg.record_stride = 1;
  const LinearOperator op2(g, 2.0);
  EXPECT_THROW(run_stability(cfg, op2, cut), ConfigError);
  cfg.w0 = SpectralField(make_grid({1, 8, 16.0}), Representation::physical);
  EXPECT_THROW(run_stability(cfg, op, cut), GridMismatch);
}

TEST(Stability, PerturbationFlowTracksDirectIntegration) {
  const auto g = make_grid({2, 16, 32.0});
  const LinearOperator op(g, 1.0);
  const auto cut = default_cutoffs(g, 1.0);
  ForcingSpec fs;
  fs.amplitude = 5e-2;
  fs.spatial = GaussDipole{2.0, 0};
  const FieldSeries gser = realize_forcing(fs, g, 16).g;
  SolveOptions o;
  o.m_t = 16;
  o.z_tolerance = 1e-14;
  const auto sol = solve_periodic(gser, op, cut, o);
  ASSERT_TRUE(sol.report.converged);
  const SpectralField w0 = realize_perturbation({1e-2, GaussDipole{2.0, 1}}, g);
  const double gap = direct_vs_perturbation_gap(sol.u, gser, w0, op, 4);
  EXPECT_LE(gap, 1e-10);
  // a background that is not the periodic solution does not track
  FieldSeries off = sol.u;
  off *= Complex(0.5);
  EXPECT_GT(direct_vs_perturbation_gap(off, gser, w0, op, 4), 1e3 * gap);
}
