#pragma once

// Minimal market model in trendline activity time. The discounted stock GOP
// is a squared Bessel process of dimension four in the intrinsic clock
// phi(t) = exp(tau0_bar + a_bar t) under the benchmark-neutral measure.

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bnp/error.hpp"
#include "bnp/special_fn.hpp"

namespace bnp {

struct MmmParams {
  double tau0_bar = 2.15;
  double a_bar = 0.053;
  double lambda_bar = 0.0;  // only enters real-world (P) simulations
  double s0 = 100.0;

  MmmParams() = default;
  MmmParams(double tau0, double a, double lambda, double s)
      : tau0_bar(tau0), a_bar(a), lambda_bar(lambda), s0(s) {
    validate();
  }

  void validate() const {
    detail::require(std::isfinite(tau0_bar), Errc::DomainError, "tau0_bar must be finite");
    detail::require(std::isfinite(a_bar) && a_bar > 0.0, Errc::DomainError, "a_bar must be > 0");
    detail::require(std::isfinite(lambda_bar) && lambda_bar >= 0.0, Errc::DomainError,
                    "lambda_bar must be >= 0");
    detail::require(std::isfinite(s0) && s0 > 0.0, Errc::DomainError, "s0 must be > 0");
  }
};

/// European put on the stock GOP, savings-account denominated, written at t = 0.
struct PutContract {
  double strike = 100.0;
  double maturity = 1.0;

  PutContract() = default;
  PutContract(double k, double t) : strike(k), maturity(t) { validate(); }

  // A zero strike is accepted as the degenerate claim worth nothing.
  void validate() const {
    detail::require(std::isfinite(strike) && strike >= 0.0, Errc::DomainError, "strike must be >= 0");
    detail::require(std::isfinite(maturity) && maturity > 0.0, Errc::DomainError,
                    "maturity must be > 0");
  }

  double payoff(double s) const { return std::max(0.0, strike - s); }
};

inline double activity_time(const MmmParams& params, double t) {
  params.validate();
  detail::require(t >= 0.0, Errc::DomainError, "t must be >= 0");
  return params.tau0_bar + params.a_bar * t;
}

inline double phi(const MmmParams& params, double t) { return std::exp(activity_time(params, t)); }

/// theta = sqrt(4 phi(t) a_bar / s).
inline double volatility_theta(const MmmParams& params, double t, double s) {
  detail::require(s > 0.0 && std::isfinite(s), Errc::DomainError, "level must be > 0");
  return std::sqrt(4.0 * phi(params, t) * params.a_bar / s);
}

/// Volatility of the Radon-Nikodym derivative of the benchmark-neutral
/// measure; satisfies sigma * theta = lambda_bar * a_bar.
inline double sigma_sstar(const MmmParams& params, double t, double s) {
  detail::require(s > 0.0 && std::isfinite(s), Errc::DomainError, "level must be > 0");
  const double value = params.lambda_bar * std::sqrt(params.a_bar * s / (4.0 * phi(params, t)));
  const double theta = volatility_theta(params, t, s);
  const double target = params.lambda_bar * params.a_bar;
  if (std::abs(value * theta - target) > 1e-12 * (1.0 + target)) {
    throw Error(Errc::NumericalFailure, "sigma_sstar * theta != lambda_bar * a_bar");
  }
  return value;
}

namespace detail {
inline void require_before_maturity(const MmmParams& params, double t, double s, double maturity) {
  params.validate();
  require(std::isfinite(t) && t >= 0.0, Errc::DomainError, "t must be >= 0");
  require(std::isfinite(s) && s > 0.0, Errc::DomainError, "level must be > 0");
  require(t < maturity, Errc::DomainError, "t must be before maturity");
}
}  // namespace detail

/// lambda(t, s) = s / (phi(T) - phi(t)).
inline double noncentrality(const MmmParams& params, double t, double s, double maturity) {
  detail::require_before_maturity(params, t, s, maturity);
  return s / (phi(params, maturity) - phi(params, t));
}

/// exp(-lambda / 2): the savings-bond defect.
inline double savings_bond_defect(const MmmParams& params, double t, double s, double maturity) {
  return std::exp(-0.5 * noncentrality(params, t, s, maturity));
}

/// Fair (benchmark-neutral) put price
///   K (Psi(x; 0, lambda) - e^{-lambda/2}) - s Psi(x; 4, lambda),
/// x = K / (phi(T) - phi(t)). Returns the payoff at t = T.
inline double fair_put_price(const MmmParams& params, double t, double s, const PutContract& contract) {
  contract.validate();
  if (t == contract.maturity) {
    detail::require(s > 0.0, Errc::DomainError, "level must be > 0");
    return contract.payoff(s);
  }
  detail::require_before_maturity(params, t, s, contract.maturity);
  const double K = contract.strike;
  if (K == 0.0) return 0.0;
  const double c = phi(params, contract.maturity) - phi(params, t);
  const double lambda = s / c;
  const double x = K / c;
  const double psi0 = noncentral_chi2_cdf(x, {0.0, lambda});
  const double psi4 = noncentral_chi2_cdf(x, {4.0, lambda});
  const double price = K * (psi0 - std::exp(-0.5 * lambda)) - s * psi4;
  if (price < -1e-9 * K || price > K * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "put price " << price << " outside [0, K]";
    throw Error(Errc::NumericalFailure, os.str());
  }
  return std::clamp(price, 0.0, K);
}

/// Fair price plus K exp(-lambda/2): the formal risk-neutral price, which adds
/// back the savings-bond defect.
inline double risk_neutral_put_price(const MmmParams& params, double t, double s,
                                     const PutContract& contract) {
  const double fair = fair_put_price(params, t, s, contract);
  if (t == contract.maturity) return fair;
  return fair + contract.strike * savings_bond_defect(params, t, s, contract.maturity);
}

/// dp/ds by a central difference with one Richardson step. Not clamped: the
/// fair put vanishes as s -> 0, so delta turns positive below the price peak.
inline double fair_put_delta(const MmmParams& params, double t, double s, const PutContract& contract) {
  detail::require_before_maturity(params, t, s, contract.maturity);
  const double h = std::max(1e-4 * s, 1e-6);
  auto central = [&](double step) {
    return (fair_put_price(params, t, s + step, contract) -
            fair_put_price(params, t, s - step, contract)) /
           (2.0 * step);
  };
  const double coarse = central(h);
  const double fine = central(0.5 * h);
  return (4.0 * fine - coarse) / 3.0;
}

}  // namespace bnp
