#pragma once

// Monte Carlo machinery: exact transitions of the stock GOP under the
// benchmark-neutral measure, Euler paths of sqrt(S) under the real-world
// measure with the Radon-Nikodym density accumulated alongside, and a
// long-run growth comparison for constant-coefficient markets.
//
// Every path (or antithetic pair) draws from its own substream derived from
// (seed, path index) and results are reduced in index order, so estimates do
// not depend on thread count or scheduling.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "bnp/error.hpp"
#include "bnp/market_core.hpp"
#include "bnp/mmm.hpp"
#include "bnp/rng.hpp"
#include "bnp/special_fn.hpp"

namespace bnp {

inline constexpr double kDefaultDt = 1.0 / 2520.0;

struct SimConfig {
  std::int64_t n_paths = 100'000;
  std::uint64_t seed = 42;
  double dt = kDefaultDt;
  bool antithetic = false;

  void validate() const {
    detail::require(n_paths >= 1, Errc::DomainError, "n_paths must be >= 1");
    detail::require(std::isfinite(dt) && dt > 0.0, Errc::DomainError, "dt must be > 0");
  }
};

struct McEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
  std::int64_t n_paths = 0;
};

struct Path {
  std::vector<double> times;
  std::vector<double> levels;
};

namespace detail {

// Mean and standard error over independent units (paths or antithetic pairs).
inline McEstimate estimate(std::span<const double> units, std::int64_t n_paths) {
  double sum = 0.0;
  for (double v : units) sum += v;
  const double n = static_cast<double>(units.size());
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : units) ss += (v - mean) * (v - mean);
  McEstimate out;
  out.value = mean;
  out.stderr_ = units.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  out.n_paths = n_paths;
  return out;
}

inline std::int64_t unit_count(const SimConfig& config) {
  return config.antithetic ? (config.n_paths + 1) / 2 : config.n_paths;
}

}  // namespace detail

/// Exact draw of S*_T given S*_t = s under the benchmark-neutral measure:
/// c * chi'^2_4(s / c) with c = phi(T) - phi(t).
template <NormalSource G>
double sample_sstar_q(const MmmParams& params, double t, double s, double maturity, G& rng) {
  detail::require_before_maturity(params, t, s, maturity);
  const double c = phi(params, maturity) - phi(params, t);
  if (!(c > 0.0)) return s;
  return c * sample_noncentral_chi2_4(s / c, rng);
}

/// Exact benchmark-neutral path on the given (increasing) time grid starting
/// from level s at times.front().
template <NormalSource G>
Path simulate_q_path(const MmmParams& params, std::span<const double> times, double s, G& rng) {
  detail::require(!times.empty(), Errc::DomainError, "time grid is empty");
  Path path;
  path.times.assign(times.begin(), times.end());
  path.levels.reserve(times.size());
  path.levels.push_back(s);
  for (std::size_t i = 1; i < times.size(); ++i) {
    detail::require(times[i] > times[i - 1], Errc::NonMonotoneTime, "time grid must increase");
    s = sample_sstar_q(params, times[i - 1], s, times[i], rng);
    path.levels.push_back(s);
  }
  return path;
}

/// Fair put price s * E[max(0, K - S_T) / S_T] by exact sampling.
inline McEstimate mc_fair_price(const MmmParams& params, const PutContract& contract, double t,
                                double s, const SimConfig& config) {
  config.validate();
  contract.validate();
  detail::require_before_maturity(params, t, s, contract.maturity);
  const double c = phi(params, contract.maturity) - phi(params, t);
  const double lambda = s / c;
  const double K = contract.strike;
  const std::int64_t units = detail::unit_count(config);
  std::vector<double> values(static_cast<std::size_t>(units));
  auto discounted_payoff = [&](double z1, double z2, double z3, double z4) {
    const double level = c * noncentral_chi2_4_from_normals(lambda, z1, z2, z3, z4);
    return level < K ? s * (K - level) / level : 0.0;
  };

#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < units; ++i) {
    Rng rng = Rng::for_path(config.seed, static_cast<std::uint64_t>(i));
    const double z1 = rng.normal(), z2 = rng.normal(), z3 = rng.normal(), z4 = rng.normal();
    double v = discounted_payoff(z1, z2, z3, z4);
    if (config.antithetic) v = 0.5 * (v + discounted_payoff(-z1, -z2, -z3, -z4));
    values[static_cast<std::size_t>(i)] = v;
  }
  return detail::estimate(values, config.n_paths);
}

namespace detail {

// Per-step coefficients of the sqrt(S) Euler scheme; path independent.
struct EulerGrid {
  std::vector<double> times;      // steps + 1 points
  std::vector<double> diffusion;  // sqrt(phi a) sqrt(dt) at step start
  std::vector<double> bessel;     // 3 phi a / 2 * dt
  std::vector<double> rn_scale;   // lambda_bar sqrt(a / (4 phi)) sqrt(dt): sigma^{S*} sqrt(dt) / X
  double drift_linear = 0.0;      // lambda_bar a / 2 * dt
  double dt = 0.0;
  bool has_density = false;       // false when lambda_bar = 0 and Lambda stays at one

  EulerGrid(const MmmParams& params, double t0, double horizon, double dt_target) {
    const auto steps = static_cast<std::size_t>(std::ceil(horizon / dt_target - 1e-9));
    dt = steps > 0 ? horizon / static_cast<double>(steps) : 0.0;
    times.resize(steps + 1);
    diffusion.resize(steps);
    bessel.resize(steps);
    rn_scale.resize(steps);
    const double a = params.a_bar;
    drift_linear = 0.5 * params.lambda_bar * a * dt;
    has_density = params.lambda_bar > 0.0;
    for (std::size_t k = 0; k <= steps; ++k) times[k] = t0 + static_cast<double>(k) * dt;
    if (steps > 0) times[steps] = t0 + horizon;
    for (std::size_t k = 0; k < steps; ++k) {
      const double ph = std::exp(params.tau0_bar + a * times[k]);
      diffusion[k] = std::sqrt(ph * a * dt);
      bessel[k] = 1.5 * ph * a * dt;
      rn_scale[k] = params.lambda_bar * std::sqrt(a * dt / (4.0 * ph));
    }
  }

  std::size_t steps() const { return diffusion.size(); }
};

inline constexpr double kSqrtFloor = 1e-8;
inline constexpr double kMaxFloorFraction = 1e-3;

struct EulerState {
  double x;
  double log_lambda = 0.0;
  std::size_t floor_hits = 0;
};

inline void euler_step(const EulerGrid& g, std::size_t k, double z, EulerState& st) {
  const double x = st.x;
  if (g.has_density) {
    const double v = g.rn_scale[k] * x;
    st.log_lambda -= v * z + 0.5 * v * v;
  }
  double next = x + g.drift_linear * x + g.bessel[k] / x + g.diffusion[k] * z;
  if (next < kSqrtFloor) {
    next = kSqrtFloor;
    ++st.floor_hits;
  }
  st.x = next;
}

inline void check_floor(std::size_t hits, std::size_t steps) {
  if (steps > 0 && static_cast<double>(hits) > kMaxFloorFraction * static_cast<double>(steps)) {
    throw Error(Errc::StepTooLarge, "sqrt(S) floor hit on more than 0.1% of Euler steps; reduce dt");
  }
}

}  // namespace detail

/// Real-world path on the Euler grid: X = sqrt(S) follows
///   dX = (lambda_bar a X / 2 + 3 phi a / (2 X)) dt + sqrt(phi a) dW.
/// Returns every grid point.
template <NormalSource G>
Path simulate_p_path(const MmmParams& params, double t0, double s0, double horizon, double dt, G& rng,
                     std::size_t* floor_hits = nullptr) {
  params.validate();
  detail::require(s0 > 0.0 && std::isfinite(s0), Errc::DomainError, "s0 must be > 0");
  detail::require(t0 >= 0.0 && horizon >= 0.0, Errc::DomainError, "t0 and horizon must be >= 0");
  detail::require(dt > 0.0, Errc::DomainError, "dt must be > 0");
  const detail::EulerGrid grid(params, t0, horizon, dt);
  Path path;
  path.times = grid.times;
  path.levels.reserve(grid.times.size());
  path.levels.push_back(s0);
  detail::EulerState st{std::sqrt(s0)};
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    detail::euler_step(grid, k, rng.normal(), st);
    path.levels.push_back(st.x * st.x);
  }
  if (floor_hits) *floor_hits = st.floor_hits;
  detail::check_floor(st.floor_hits, grid.steps());
  return path;
}

inline Path simulate_p_path(const MmmParams& params, double t0, double s0, double horizon,
                            const SimConfig& config) {
  config.validate();
  Rng rng = Rng::for_path(config.seed, 0);
  return simulate_p_path(params, t0, s0, horizon, config.dt, rng);
}

/// Terminal levels and log Radon-Nikodym densities of many real-world
/// paths started at (0, params.s0). With antithetic sampling, entries 2i and
/// 2i+1 are a mirrored pair.
struct PTerminals {
  std::vector<double> level;
  std::vector<double> log_lambda;
};

inline PTerminals simulate_p_terminals(const MmmParams& params, double horizon, const SimConfig& config) {
  config.validate();
  params.validate();
  detail::require(horizon > 0.0, Errc::DomainError, "horizon must be > 0");
  const detail::EulerGrid grid(params, 0.0, horizon, config.dt);
  const std::int64_t units = detail::unit_count(config);
  const int width = config.antithetic ? 2 : 1;
  const auto total = static_cast<std::size_t>(units * width);
  PTerminals out;
  out.level.resize(total);
  out.log_lambda.resize(total);
  std::vector<std::size_t> hits(static_cast<std::size_t>(units), 0);
  const double x0 = std::sqrt(params.s0);

#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < units; ++i) {
    Rng rng = Rng::for_path(config.seed, static_cast<std::uint64_t>(i));
    detail::EulerState up{x0};
    detail::EulerState down{x0};
    for (std::size_t k = 0; k < grid.steps(); ++k) {
      const double z = rng.normal();
      detail::euler_step(grid, k, z, up);
      if (width == 2) detail::euler_step(grid, k, -z, down);
    }
    const auto base = static_cast<std::size_t>(i * width);
    out.level[base] = up.x * up.x;
    out.log_lambda[base] = up.log_lambda;
    hits[static_cast<std::size_t>(i)] = up.floor_hits + down.floor_hits;
    if (width == 2) {
      out.level[base + 1] = down.x * down.x;
      out.log_lambda[base + 1] = down.log_lambda;
    }
  }
  std::size_t total_hits = 0;
  for (auto h : hits) total_hits += h;
  detail::check_floor(total_hits, grid.steps() * total);
  return out;
}

namespace detail {
inline McEstimate estimate_terminals(const PTerminals& pt, const SimConfig& config, auto&& value_of) {
  const int width = config.antithetic ? 2 : 1;
  std::vector<double> units(pt.level.size() / static_cast<std::size_t>(width));
  for (std::size_t i = 0; i < units.size(); ++i) {
    double v = 0.0;
    for (int w = 0; w < width; ++w) {
      const std::size_t j = i * static_cast<std::size_t>(width) + static_cast<std::size_t>(w);
      v += value_of(pt.level[j], pt.log_lambda[j]);
    }
    units[i] = v / width;
  }
  return estimate(units, config.n_paths);
}
}  // namespace detail

/// E^P[Lambda_T] for the benchmark-neutral density; equals one when the
/// density is a true martingale.
inline McEstimate check_lambda_martingale(const MmmParams& params, double maturity, const SimConfig& config) {
  const auto pt = simulate_p_terminals(params, maturity, config);
  return detail::estimate_terminals(pt, config, [](double, double log_lambda) { return std::exp(log_lambda); });
}

/// Fair put price from real-world paths: s0 E^P[Lambda_T max(0, K - S_T) / S_T].
inline McEstimate mc_fair_price_real_world(const MmmParams& params, const PutContract& contract,
                                           const SimConfig& config) {
  contract.validate();
  const auto pt = simulate_p_terminals(params, contract.maturity, config);
  const double K = contract.strike;
  const double s0 = params.s0;
  return detail::estimate_terminals(pt, config, [&](double level, double log_lambda) {
    return level < K ? std::exp(log_lambda) * s0 * (K - level) / level : 0.0;
  });
}

/// (1/T) ln(S_T / S_0).
inline double empirical_growth_rate(const Path& path) {
  detail::require(path.times.size() >= 2 && path.levels.size() == path.times.size(), Errc::DomainError,
                  "growth rate needs at least two aligned points");
  const double span = path.times.back() - path.times.front();
  detail::require(span > 0.0, Errc::DomainError, "path must cover a positive time span");
  detail::require(path.levels.front() > 0.0 && path.levels.back() > 0.0, Errc::DomainError,
                  "levels must be positive");
  return std::log(path.levels.back() / path.levels.front()) / span;
}

/// Constant-mix portfolios in a constant-coefficient market, driven by the
/// same Brownian increments. Log-values are propagated exactly.
struct PortfolioPaths {
  Path gop;
  Path alternative;
};

template <NormalSource G>
PortfolioPaths simulate_portfolio_pair(const MarketCoefficients& coeffs, const Vector& pi_gop,
                                       const Vector& pi_alt, double horizon, double dt, G& rng) {
  detail::require(horizon > 0.0 && dt > 0.0, Errc::DomainError, "horizon and dt must be > 0");
  const double g_gop = instantaneous_growth_rate(coeffs, pi_gop);
  const double g_alt = instantaneous_growth_rate(coeffs, pi_alt);
  const Vector vol_gop = coeffs.sigma.transpose() * pi_gop;
  const Vector vol_alt = coeffs.sigma.transpose() * pi_alt;
  const auto steps = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
  const double h = horizon / static_cast<double>(steps);
  const double sqrt_h = std::sqrt(h);
  PortfolioPaths out;
  for (Path* p : {&out.gop, &out.alternative}) {
    p->times.reserve(steps + 1);
    p->levels.reserve(steps + 1);
    p->times.push_back(0.0);
    p->levels.push_back(1.0);
  }
  double log_gop = 0.0, log_alt = 0.0;
  Vector dw(coeffs.n());
  for (std::size_t k = 1; k <= steps; ++k) {
    for (Eigen::Index j = 0; j < dw.size(); ++j) dw(j) = sqrt_h * rng.normal();
    log_gop += g_gop * h + vol_gop.dot(dw);
    log_alt += g_alt * h + vol_alt.dot(dw);
    const double t = k == steps ? horizon : static_cast<double>(k) * h;
    out.gop.times.push_back(t);
    out.gop.levels.push_back(std::exp(log_gop));
    out.alternative.times.push_back(t);
    out.alternative.levels.push_back(std::exp(log_alt));
  }
  return out;
}

}  // namespace bnp
