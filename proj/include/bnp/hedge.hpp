#pragma once

// Self-financing hedge of the fair put with the savings account and the
// stock GOP, and a discrete-rebalancing backtest along an observed path.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <ostream>
#include <span>
#include <vector>

#include "bnp/calibrate.hpp"
#include "bnp/error.hpp"
#include "bnp/mmm.hpp"

namespace bnp {

struct HedgePosition {
  double units_savings = 0.0;
  double units_stock = 0.0;
  double value = 0.0;
};

/// Delta in the stock GOP, remainder in the savings account.
inline HedgePosition hedge_position(const MmmParams& params, double t, double s, const PutContract& contract,
                                    double current_value) {
  detail::require(std::isfinite(current_value), Errc::DomainError, "portfolio value must be finite");
  const double delta = fair_put_delta(params, t, s, contract);
  return {current_value - delta * s, delta, current_value};
}

/// General form of the hedging strategy in stock GOP denomination:
///   delta = diag(S~)^{-1} (Phi^T)^{-1} xi,
/// where row j of Phi is (1, Phi^{j,1}), dS~^j / S~^j = -Phi^{j,1} dW, and xi
/// is ordered like Phi's columns: xi = (H~, -x) with dH~ = x dW.
inline Eigen::Vector2d hedge_strategy(const Eigen::Matrix2d& phi_matrix, const Eigen::Vector2d& s_tilde,
                                      double h_tilde, double x) {
  detail::require(phi_matrix(0, 0) == 1.0 && phi_matrix(1, 0) == 1.0, Errc::DomainError,
                  "first column of Phi must be ones");
  detail::require(s_tilde.minCoeff() > 0.0, Errc::DomainError, "denominated prices must be > 0");
  const double det = phi_matrix.determinant();
  detail::require(std::abs(det) > 1e-14 * (1.0 + phi_matrix.cwiseAbs().maxCoeff()), Errc::Degenerate,
                  "Phi is singular");
  const Eigen::Vector2d weights = phi_matrix.transpose().partialPivLu().solve(Eigen::Vector2d{h_tilde, -x});
  return weights.cwiseQuotient(s_tilde);
}

enum class InitialValueRule { Fair, RiskNeutral };

struct BacktestReport {
  std::vector<double> times;
  std::vector<double> spot;
  std::vector<double> option_values;     // fair prices along the path
  std::vector<double> portfolio_values;  // hedge portfolio
  std::vector<double> deltas;            // stock units held from each observation on
  double terminal_payoff = 0.0;
  double tracking_error = 0.0;           // |V_T - H_T|
  double max_abs_gap = 0.0;              // max_t |V_t - p_t|
  std::size_t rebalance_count = 0;
};

/// Starts the portfolio at the chosen rule's price at the first observation
/// and rebalances to the fair delta at every observation before maturity.
/// The last observation must fall on the contract maturity.
inline BacktestReport backtest(const MmmParams& params, std::span<const double> times,
                               std::span<const double> values, const PutContract& contract,
                               InitialValueRule rule) {
  params.validate();
  contract.validate();
  detail::require(!times.empty() && times.size() == values.size(), Errc::DimensionMismatch,
                  "times and values must be non-empty and aligned");
  for (std::size_t k = 0; k < times.size(); ++k) {
    detail::require(std::isfinite(values[k]) && values[k] > 0.0, Errc::NonPositiveValue, "levels must be > 0");
    detail::require(std::isfinite(times[k]) && times[k] >= 0.0, Errc::NonMonotoneTime, "times must be >= 0");
    if (k > 0) detail::require(times[k] > times[k - 1], Errc::NonMonotoneTime, "times must increase");
  }
  const double T = contract.maturity;
  if (std::abs(times.back() - T) > 1e-9 * std::max(1.0, T)) {
    throw Error(Errc::SeriesContractMismatch, "last observation does not fall on the contract maturity");
  }

  const std::size_t n = times.size();
  BacktestReport r;
  r.times.assign(times.begin(), times.end());
  r.spot.assign(values.begin(), values.end());
  r.option_values.resize(n);
  r.portfolio_values.resize(n);
  r.deltas.assign(n, 0.0);

  // Pin the last time to the maturity so pricing returns the payoff there.
  auto time_at = [&](std::size_t k) { return k + 1 == n ? T : times[k]; };
  const double t0 = time_at(0);
  double value = rule == InitialValueRule::Fair ? fair_put_price(params, t0, values[0], contract)
                                                : risk_neutral_put_price(params, t0, values[0], contract);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = time_at(k), s = values[k];
    r.option_values[k] = fair_put_price(params, t, s, contract);
    r.portfolio_values[k] = value;
    r.max_abs_gap = std::max(r.max_abs_gap, std::abs(value - r.option_values[k]));
    if (k + 1 == n) break;
    const auto pos = hedge_position(params, t, s, contract, value);
    const double after = pos.units_savings + pos.units_stock * s;
    if (std::abs(after - value) > 1e-12 * std::max(1.0, std::abs(value))) {
      throw Error(Errc::NumericalFailure, "rebalance is not self-financing");
    }
    ++r.rebalance_count;
    r.deltas[k] = pos.units_stock;
    value = pos.units_savings + pos.units_stock * values[k + 1];
  }
  if (n > 1) r.deltas[n - 1] = r.deltas[n - 2];
  r.terminal_payoff = contract.payoff(values[n - 1]);
  r.tracking_error = std::abs(r.portfolio_values[n - 1] - r.terminal_payoff);
  return r;
}

inline BacktestReport backtest(const MmmParams& params, const IndexSeries& series, const PutContract& contract,
                               InitialValueRule rule) {
  series.validate_entries();
  return backtest(params, series.times, series.values, contract, rule);
}

/// CSV with columns t,s,option_value,portfolio_value,delta.
inline void write_backtest_csv(std::ostream& out, const BacktestReport& r) {
  out << "t,s,option_value,portfolio_value,delta\n";
  for (std::size_t k = 0; k < r.times.size(); ++k) {
    out << detail::format_double(r.times[k]) << ',' << detail::format_double(r.spot[k]) << ','
        << detail::format_double(r.option_values[k]) << ',' << detail::format_double(r.portfolio_values[k]) << ','
        << detail::format_double(r.deltas[k]) << '\n';
  }
}

}  // namespace bnp
