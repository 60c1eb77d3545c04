#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "bnp/hedge.hpp"
#include "bnp/simulate.hpp"
#include "oracles.hpp"

using namespace bnp;

namespace {

const MmmParams kRef{};

std::vector<double> daily_grid(double T, int per_year) {
  const auto n = static_cast<int>(std::llround(T * per_year));
  std::vector<double> g(n + 1);
  for (int k = 0; k <= n; ++k) g[k] = T * k / n;
  return g;
}

template <class T>
std::vector<T> every(const std::vector<T>& v, std::size_t stride) {
  std::vector<T> out;
  for (std::size_t i = 0; i < v.size(); i += stride) out.push_back(v[i]);
  return out;
}

}  // namespace

TEST(HedgePosition, SplitsValue) {
  const PutContract put{100.0, 0.25};
  const auto otm = hedge_position(kRef, 0.0, 400.0, put, 3.0);
  EXPECT_NEAR(otm.units_stock, 0.0, 1e-12);
  EXPECT_NEAR(otm.units_savings, 3.0, 1e-9);
  EXPECT_EQ(otm.value, 3.0);

  const auto itm = hedge_position(kRef, 0.0, 40.0, put, 60.0);
  EXPECT_NEAR(itm.units_stock, -1.0, 1e-6);
  EXPECT_EQ(itm.units_savings, 60.0 - itm.units_stock * 40.0);
  EXPECT_NEAR(itm.units_savings, 60.0 + 40.0, 1e-4);

  const auto pos = hedge_position(kRef, 0.0, 100.0, PutContract{100.0, 30.83}, 20.8);
  EXPECT_NEAR(pos.units_savings + pos.units_stock * 100.0, 20.8, 1e-12);
  EXPECT_THROW(hedge_position(kRef, 1.0, 100.0, PutContract{100.0, 1.0}, 1.0), Error);
}

TEST(HedgeStrategy, GeneralFormReducesToDeltaAndRemainder) {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double theta = 0.01 + u(gen), s = 1.0 + 300.0 * u(gen);
    const double p = 50.0 * u(gen), delta = -1.0 + 1.2 * u(gen);
    // Savings account and stock GOP in stock GOP units.
    Eigen::Matrix2d phi_m;
    phi_m << 1.0, theta, 1.0, 0.0;
    const Eigen::Vector2d s_tilde{1.0 / s, 1.0};
    const double h_tilde = p / s;
    const double x = theta * (delta - p / s);
    const auto d = hedge_strategy(phi_m, s_tilde, h_tilde, x);
    EXPECT_NEAR(d(0), p - delta * s, 1e-10 * (1.0 + std::abs(p - delta * s)));
    EXPECT_NEAR(d(1), delta, 1e-12);
  }
}

TEST(HedgeStrategy, SyntheticMatrices) {
  std::mt19937_64 gen(10);
  std::normal_distribution<double> n01;
  for (int i = 0; i < 200; ++i) {
    Eigen::Matrix2d phi_m;
    phi_m << 1.0, n01(gen), 1.0, n01(gen);
    if (std::abs(phi_m(0, 1) - phi_m(1, 1)) < 1e-3) continue;
    const Eigen::Vector2d s_tilde{std::exp(n01(gen)), std::exp(n01(gen))};
    const double h = n01(gen), x = n01(gen);
    const auto d = hedge_strategy(phi_m, s_tilde, h, x);
    // Value and diffusion of the portfolio sum_j d_j S~_j.
    const Eigen::Vector2d held = d.cwiseProduct(s_tilde);
    EXPECT_NEAR(held.sum(), h, 1e-10);
    EXPECT_NEAR(-(held(0) * phi_m(0, 1) + held(1) * phi_m(1, 1)), x, 1e-10);
  }
  Eigen::Matrix2d singular;
  singular << 1.0, 0.3, 1.0, 0.3;
  try {
    hedge_strategy(singular, Eigen::Vector2d{1.0, 1.0}, 1.0, 0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::Degenerate);
  }
  Eigen::Matrix2d bad;
  bad << 2.0, 0.3, 1.0, 0.0;
  EXPECT_THROW(hedge_strategy(bad, Eigen::Vector2d{1.0, 1.0}, 1.0, 0.1), Error);
}

// Over one short step the delta position reproduces the option's value change
// up to second-order terms. A 5-year put keeps delta well away from zero.
TEST(HedgePosition, OneStepReplication) {
  const PutContract put{100.0, 5.0};
  const double s = 100.0, dt = 1.0 / 252.0;
  const auto pos = hedge_position(kRef, 0.0, s, put, fair_put_price(kRef, 0.0, s, put));
  Rng rng = Rng::for_path(31, 0);
  std::vector<double> resid, moves;
  const double p0 = fair_put_price(kRef, 0.0, s, put);
  for (int i = 0; i < 4000; ++i) {
    const double s1 = sample_sstar_q(kRef, 0.0, s, dt, rng);
    const double dp = fair_put_price(kRef, dt, s1, put) - p0;
    moves.push_back(dp);
    resid.push_back(pos.units_savings + pos.units_stock * s1 - p0 - dp);
  }
  auto mean_sq = [](const std::vector<double>& v) {
    double a = 0.0;
    for (double x : v) a += x * x;
    return a / v.size();
  };
  EXPECT_LT(fair_put_delta(kRef, 0.0, s, put), -0.2);
  EXPECT_LT(mean_sq(resid), 1e-3 * mean_sq(moves));
  const auto m = oracle::moments(resid);
  EXPECT_NEAR(m.mean, 0.0, 4.0 * m.stderr_ + 1e-6);
}

TEST(Backtest, SingleObservation) {
  const PutContract put{100.0, 2.0};
  const std::vector<double> t{2.0}, v{80.0};
  for (auto rule : {InitialValueRule::Fair, InitialValueRule::RiskNeutral}) {
    const auto r = backtest(kRef, t, v, put, rule);
    EXPECT_EQ(r.rebalance_count, 0u);
    EXPECT_EQ(r.terminal_payoff, 20.0);
    EXPECT_EQ(r.portfolio_values[0], 20.0);
    EXPECT_EQ(r.tracking_error, 0.0);
  }
}

TEST(Backtest, Errors) {
  const PutContract put{100.0, 2.0};
  const std::vector<double> t{0.0, 1.0, 1.5}, v{100.0, 90.0, 95.0};
  try {
    backtest(kRef, t, v, put, InitialValueRule::Fair);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::SeriesContractMismatch);
  }
  const std::vector<double> t2{0.0, 1.0, 2.0}, bad{100.0, -1.0, 95.0};
  EXPECT_THROW(backtest(kRef, t2, bad, put, InitialValueRule::Fair), Error);
  const std::vector<double> shortv{100.0};
  EXPECT_THROW(backtest(kRef, t2, shortv, put, InitialValueRule::Fair), Error);
}

TEST(Backtest, SimulatedDailyPath) {
  const double T = 30.83;
  const PutContract put{100.0, T};
  const auto grid = daily_grid(T, 252);
  Rng rng = Rng::for_path(2, 0);
  const Path path = simulate_q_path(kRef, grid, 100.0, rng);
  const auto fair = backtest(kRef, path.times, path.levels, put, InitialValueRule::Fair);
  const auto rn = backtest(kRef, path.times, path.levels, put, InitialValueRule::RiskNeutral);
  EXPECT_EQ(fair.rebalance_count, grid.size() - 1);
  EXPECT_NEAR(fair.portfolio_values[0], 20.8194083916424, 1e-9);
  EXPECT_EQ(fair.option_values.back(), put.payoff(path.levels.back()));
  EXPECT_LE(fair.tracking_error, 0.02 * put.strike);
  EXPECT_GE(fair.max_abs_gap, fair.tracking_error);
  // Same deltas: the risk-neutral surplus sits unchanged in savings units.
  const double gap = rn.portfolio_values[0] - fair.portfolio_values[0];
  EXPECT_NEAR(gap, 24.3612672689055, 1e-9);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    ASSERT_EQ(rn.deltas[k], fair.deltas[k]);
    EXPECT_GE(rn.portfolio_values[k], fair.portfolio_values[k]);
  }
  EXPECT_NEAR(rn.portfolio_values.back() - fair.portfolio_values.back(), gap, 1e-9);

  IndexSeries series;
  series.times = path.times;
  series.values = path.levels;
  EXPECT_EQ(backtest(kRef, series, put, InitialValueRule::Fair).tracking_error, fair.tracking_error);
}

TEST(Backtest, ErrorShrinksWithRebalanceFrequency) {
  const double T = 10.0;
  const PutContract put{100.0, T};
  const auto grid = daily_grid(T, 252);
  double mean_err[3] = {0.0, 0.0, 0.0};
  const int paths = 12;
  for (int i = 0; i < paths; ++i) {
    Rng rng = Rng::for_path(100, static_cast<std::uint64_t>(i));
    const Path path = simulate_q_path(kRef, grid, 100.0, rng);
    for (int level = 0; level < 3; ++level) {
      const std::size_t stride = std::size_t{1} << (2 - level);  // 4, 2, 1 days
      const auto r = backtest(kRef, every(path.times, stride), every(path.levels, stride), put,
                              InitialValueRule::Fair);
      mean_err[level] += r.tracking_error / paths;
    }
  }
  EXPECT_GT(mean_err[0], mean_err[1]);
  EXPECT_GT(mean_err[1], mean_err[2]);
}

TEST(Backtest, CsvLayout) {
  const PutContract put{100.0, 1.0};
  const std::vector<double> t{0.0, 0.5, 1.0}, v{100.0, 95.0, 90.0};
  const auto r = backtest(kRef, t, v, put, InitialValueRule::Fair);
  std::ostringstream out;
  write_backtest_csv(out, r);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t,s,option_value,portfolio_value,delta");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 4);
  }
  EXPECT_EQ(rows, 3);
}
