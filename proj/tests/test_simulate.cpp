#include <gtest/gtest.h>

#include <boost/math/distributions/non_central_chi_squared.hpp>
#include <cmath>

#include "bnp/simulate.hpp"
#include "oracles.hpp"

using namespace bnp;

namespace {
const MmmParams kRef{};
}

TEST(ExactSampling, MeanAndDistribution) {
  Rng rng = Rng::for_path(7, 0);
  const double t = 2.0, s = 80.0, T = 12.0;
  const double c = phi(kRef, T) - phi(kRef, t);
  std::vector<double> draws(40'000);
  for (auto& d : draws) d = sample_sstar_q(kRef, t, s, T, rng);
  const auto m = oracle::moments(draws);
  EXPECT_NEAR(m.mean, s + 4.0 * c, 4.0 * m.stderr_);
  const boost::math::non_central_chi_squared_distribution<double> dist(4.0, s / c);
  const double d = oracle::ks_statistic(draws, [&](double y) { return boost::math::cdf(dist, y / c); });
  EXPECT_LT(d, oracle::ks_critical_1pct(static_cast<double>(draws.size())));
}

TEST(ExactSampling, PathOnGrid) {
  Rng a = Rng::for_path(3, 9), b = Rng::for_path(3, 9);
  const std::vector<double> grid{0.0, 0.5, 1.0, 4.0, 10.0};
  const Path p = simulate_q_path(kRef, grid, 100.0, a);
  const Path q = simulate_q_path(kRef, grid, 100.0, b);
  ASSERT_EQ(p.levels.size(), grid.size());
  EXPECT_EQ(p.levels, q.levels);
  EXPECT_EQ(p.levels.front(), 100.0);
  for (double v : p.levels) EXPECT_GT(v, 0.0);
  const std::vector<double> bad{0.0, 1.0, 1.0};
  EXPECT_THROW(simulate_q_path(kRef, bad, 100.0, a), Error);
  EXPECT_THROW(sample_sstar_q(kRef, 2.0, 100.0, 1.0, a), Error);
}

TEST(McFairPrice, MatchesClosedForm) {
  const PutContract put{100.0, 30.83};
  const double exact = fair_put_price(kRef, 0.0, 100.0, put);
  for (bool anti : {false, true}) {
    SimConfig cfg;
    cfg.n_paths = 200'000;
    cfg.seed = 99;
    cfg.antithetic = anti;
    const auto est = mc_fair_price(kRef, put, 0.0, 100.0, cfg);
    EXPECT_EQ(est.n_paths, cfg.n_paths);
    EXPECT_GT(est.stderr_, 0.0);
    EXPECT_NEAR(est.value, exact, 3.0 * est.stderr_) << "antithetic=" << anti;
  }
  const PutContract short_put{90.0, 2.0};
  SimConfig cfg;
  cfg.n_paths = 200'000;
  const auto est = mc_fair_price(kRef, short_put, 0.0, 100.0, cfg);
  EXPECT_NEAR(est.value, fair_put_price(kRef, 0.0, 100.0, short_put), 3.0 * est.stderr_);
}

TEST(McFairPrice, DeterministicForSeed) {
  SimConfig cfg;
  cfg.n_paths = 10'001;
  cfg.seed = 5;
  const PutContract put{100.0, 10.0};
  const auto a = mc_fair_price(kRef, put, 0.0, 100.0, cfg);
  const auto b = mc_fair_price(kRef, put, 0.0, 100.0, cfg);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.stderr_, b.stderr_);
  cfg.seed = 6;
  EXPECT_NE(mc_fair_price(kRef, put, 0.0, 100.0, cfg).value, a.value);
  cfg.n_paths = 0;
  EXPECT_THROW(mc_fair_price(kRef, put, 0.0, 100.0, cfg), Error);
}

TEST(EulerPaths, ZeroRiskPremiumMatchesExactLaw) {
  SimConfig cfg;
  cfg.n_paths = 10'000;
  cfg.seed = 17;
  cfg.dt = 1.0 / 2520.0;
  const double T = 3.0;
  const auto pt = simulate_p_terminals(kRef, T, cfg);
  for (double l : pt.log_lambda) ASSERT_EQ(l, 0.0);
  Rng rng = Rng::for_path(1234, 0);
  std::vector<double> exact(10'000);
  for (auto& v : exact) v = sample_sstar_q(kRef, 0.0, kRef.s0, T, rng);
  const double d = oracle::ks_two_sample(pt.level, exact);
  EXPECT_LT(d, oracle::ks_critical_1pct(10'000.0, 10'000.0));
}

TEST(EulerPaths, SinglePathShape) {
  const MmmParams p{2.15, 0.053, 1.0, 100.0};
  SimConfig cfg;
  cfg.dt = 0.01;
  const Path path = simulate_p_path(p, 1.0, 50.0, 2.0, cfg);
  ASSERT_EQ(path.times.size(), 201u);
  EXPECT_EQ(path.times.front(), 1.0);
  EXPECT_EQ(path.times.back(), 3.0);
  EXPECT_EQ(path.levels.front(), 50.0);
  for (double v : path.levels) EXPECT_GT(v, 0.0);
  EXPECT_EQ(simulate_p_path(p, 1.0, 50.0, 2.0, cfg).levels, path.levels);
  EXPECT_THROW(simulate_p_path(p, 0.0, -1.0, 1.0, cfg), Error);
}

TEST(EulerPaths, CoarseStepRaises) {
  // X0 = sqrt(1.5) sigma_step puts the floor 2.45 step deviations away.
  const MmmParams p{0.0, 1.0, 0.0, 1.5};
  SimConfig cfg;
  cfg.n_paths = 10'000;
  cfg.dt = 1.0;
  try {
    simulate_p_terminals(p, 1.0, cfg);
    FAIL() << "expected StepTooLarge";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::StepTooLarge);
    EXPECT_FALSE(e.is_input_error());
  }
}

TEST(RadonNikodym, MartingaleAndBayesRule) {
  const PutContract put{100.0, 5.0};
  SimConfig q_cfg;
  q_cfg.n_paths = 400'000;
  q_cfg.seed = 8;
  const auto q = mc_fair_price(kRef, put, 0.0, 100.0, q_cfg);
  for (double lambda_bar : {0.5, 1.0}) {
    const MmmParams p{2.15, 0.053, lambda_bar, 100.0};
    SimConfig cfg;
    cfg.n_paths = 20'000;
    cfg.seed = 21;
    const auto mart = check_lambda_martingale(p, 5.0, cfg);
    EXPECT_NEAR(mart.value, 1.0, 3.0 * mart.stderr_) << lambda_bar;
    EXPECT_GT(mart.stderr_, 0.0);
    const auto rw = mc_fair_price_real_world(p, put, cfg);
    const double combined = std::hypot(rw.stderr_, q.stderr_);
    EXPECT_NEAR(rw.value, q.value, 3.0 * combined) << lambda_bar;
  }
}

TEST(RadonNikodym, AntitheticPairs) {
  const MmmParams p{2.15, 0.053, 1.0, 100.0};
  SimConfig cfg;
  cfg.n_paths = 2'000;
  cfg.seed = 4;
  cfg.dt = 1.0 / 252.0;
  cfg.antithetic = true;
  const auto pt = simulate_p_terminals(p, 1.0, cfg);
  ASSERT_EQ(pt.level.size(), 2'000u);
  const auto est = check_lambda_martingale(p, 1.0, cfg);
  EXPECT_EQ(est.n_paths, 2'000);
  EXPECT_NEAR(est.value, 1.0, 3.0 * est.stderr_);
}

TEST(Growth, EmpiricalRate) {
  Path p{{0.0, 2.0}, {1.0, std::exp(0.3)}};
  EXPECT_NEAR(empirical_growth_rate(p), 0.15, 1e-15);
  EXPECT_THROW(empirical_growth_rate(Path{{0.0}, {1.0}}), Error);
  EXPECT_THROW(empirical_growth_rate(Path{{0.0, 1.0}, {1.0, 0.0}}), Error);
}

TEST(Growth, PortfolioPairTracksInstantaneousRates) {
  MarketCoefficients m;
  m.mu = Vector{{0.08, 0.05}};
  m.sigma = Matrix{{0.3, 0.0}, {0.0, 0.2}};
  const auto gop = solve_gop(m);
  Vector alt{{0.5, 0.5}};
  const double g_gop = instantaneous_growth_rate(m, gop.pi_star);
  const double g_alt = instantaneous_growth_rate(m, alt);
  std::vector<double> diff;
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    Rng rng = Rng::for_path(seed, 0);
    const auto pair = simulate_portfolio_pair(m, gop.pi_star, alt, 50.0, 1.0 / 12.0, rng);
    ASSERT_EQ(pair.gop.times.size(), 601u);
    EXPECT_DOUBLE_EQ(pair.gop.times.back(), 50.0);
    diff.push_back(empirical_growth_rate(pair.gop) - empirical_growth_rate(pair.alternative));
  }
  const auto md = oracle::moments(diff);
  EXPECT_NEAR(md.mean, g_gop - g_alt, 3.0 * md.stderr_);
  EXPECT_GT(g_gop, g_alt);
}
