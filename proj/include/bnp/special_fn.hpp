#pragma once

// Special functions behind the minimal market model put formula: gamma,
// incomplete gamma, modified Bessel I1, the Poisson-mixture non-central
// chi-square CDF, the dimension-four squared Bessel transition density and
// an exact non-central chi-square(4) sampler.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include "bnp/error.hpp"
#include "bnp/rng.hpp"

namespace bnp {

struct NoncentralChi2Params {
  double delta = 0.0;   // degrees of freedom
  double lambda = 0.0;  // non-centrality

  void validate() const {
    detail::require(std::isfinite(delta) && delta >= 0.0, Errc::DomainError,
                    "degrees of freedom must be finite and >= 0");
    detail::require(std::isfinite(lambda) && lambda >= 0.0, Errc::DomainError,
                    "non-centrality must be finite and >= 0");
  }
};

inline double log_gamma(double p) {
  detail::require(p > 0.0 && std::isfinite(p), Errc::DomainError, "log_gamma needs p > 0");
  return std::lgamma(p);
}

inline double gamma_fn(double p) {
  detail::require(p > 0.0 && !std::isnan(p), Errc::DomainError, "gamma_fn needs p > 0");
  if (p > 170.0) throw Error(Errc::Overflow, "gamma_fn overflows beyond p = 170; use log_gamma");
  return std::tgamma(p);
}

namespace detail {

inline constexpr double kEps = std::numeric_limits<double>::epsilon();

// log1p(t) - t without cancellation for small |t|.
inline double log1pmx(double t) {
  if (std::abs(t) > 0.25) return std::log1p(t) - t;
  double term = t;
  double sum = 0.0;
  for (int k = 2; k < 60; ++k) {
    term *= -t;
    const double add = term / k;
    sum += add;
    if (std::abs(add) <= kEps * std::abs(sum)) break;
  }
  return sum;
}

// log(u^p e^{-u} / Gamma(p)); for large p the leading terms are combined
// analytically so the result keeps absolute accuracy near u ~ p.
inline double log_gamma_prefactor(double p, double u) {
  if (u == 0.0) return -std::numeric_limits<double>::infinity();
  if (p < 10.0) return p * std::log(u) - u - std::lgamma(p);
  const double ip = 1.0 / p;
  const double ip2 = ip * ip;
  const double stirling =
      ip * (1.0 / 12.0 - ip2 * (1.0 / 360.0 - ip2 * (1.0 / 1260.0 - ip2 * (1.0 / 1680.0 - ip2 / 1188.0))));
  return p * log1pmx((u - p) / p) + 0.5 * std::log(p / (2.0 * std::numbers::pi)) - stirling;
}

struct RegularizedGamma {
  double p;  // lower, P(a, u)
  double q;  // upper, Q(a, u)
};

inline RegularizedGamma regularized_gamma(double a, double u) {
  require(a > 0.0 && std::isfinite(a), Errc::DomainError, "incomplete gamma needs p > 0");
  require(u >= 0.0 && !std::isnan(u), Errc::DomainError, "incomplete gamma needs u >= 0");
  if (u == 0.0) return {0.0, 1.0};
  if (std::isinf(u)) return {1.0, 0.0};
  const double log_pref = log_gamma_prefactor(a, u);
  constexpr int kMaxIter = 1'000'000;

  if (u < a + 1.0) {
    // Series for P.
    double ap = a;
    double del = 1.0 / a;
    double sum = del;
    int i = 0;
    for (; i < kMaxIter; ++i) {
      ap += 1.0;
      del *= u / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * kEps) break;
    }
    if (i == kMaxIter) throw Error(Errc::NumericalFailure, "incomplete gamma series did not converge");
    const double p = std::exp(log_pref) * sum;
    return {p, 1.0 - p};
  }

  // Modified Lentz continued fraction for Q.
  constexpr double kTiny = 1e-300;
  double b = u + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  int i = 1;
  for (; i < kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  if (i == kMaxIter) throw Error(Errc::NumericalFailure, "incomplete gamma fraction did not converge");
  const double q = std::exp(log_pref) * h;
  return {1.0 - q, q};
}

}  // namespace detail

/// P(p, u) = 1 - Gamma(u; p) / Gamma(p).
inline double regularized_gamma_p(double p, double u) { return detail::regularized_gamma(p, u).p; }

/// Q(p, u) = Gamma(u; p) / Gamma(p).
inline double regularized_gamma_q(double p, double u) { return detail::regularized_gamma(p, u).q; }

/// Gamma(u; p) = integral from u to infinity of t^{p-1} e^{-t} dt, for p > 0.
inline double upper_incomplete_gamma(double u, double p) {
  detail::require(p > 0.0, Errc::DomainError,
                  "upper_incomplete_gamma is implemented for p > 0 only");
  const auto rg = detail::regularized_gamma(p, u);
  if (p > 170.0) {
    const double log_value = std::log(rg.q) + std::lgamma(p);
    if (log_value > std::log(std::numeric_limits<double>::max())) {
      throw Error(Errc::Overflow, "upper_incomplete_gamma overflows");
    }
    return std::exp(log_value);
  }
  return rg.q * std::tgamma(p);
}

namespace detail {

inline constexpr double kBesselSeriesLimit = 30.0;

// Positive-term power series; no cancellation.
inline double bessel_i1_series(double z) {
  const double q = 0.25 * z * z;
  double term = 0.5 * z;
  double sum = term;
  for (int k = 0; k < 500; ++k) {
    term *= q / ((k + 1.0) * (k + 2.0));
    sum += term;
    if (term < kEps * sum) break;
  }
  return sum;
}

// Asymptotic series of e^{-z} sqrt(2 pi z) I1(z), truncated at its smallest term.
inline double bessel_i1_asymptotic_scaled(double z) {
  constexpr double mu = 4.0;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = -term * (mu - odd * odd) / (k * 8.0 * z);
    if (std::abs(next) > std::abs(term)) break;
    term = next;
    sum += term;
    if (std::abs(term) < kEps * std::abs(sum)) break;
  }
  return sum;
}

}  // namespace detail

/// Modified Bessel function of the first kind, order one.
inline double bessel_i1(double z) {
  detail::require(z >= 0.0 && !std::isnan(z), Errc::DomainError, "bessel_i1 needs z >= 0");
  if (z == 0.0) return 0.0;
  if (z <= detail::kBesselSeriesLimit) return detail::bessel_i1_series(z);
  const double scaled = detail::bessel_i1_asymptotic_scaled(z);
  return std::exp(z) * scaled / std::sqrt(2.0 * std::numbers::pi * z);
}

/// log I1(z); finite for all z > 0, -inf at 0.
inline double log_bessel_i1(double z) {
  detail::require(z >= 0.0 && !std::isnan(z), Errc::DomainError, "log_bessel_i1 needs z >= 0");
  if (z == 0.0) return -std::numeric_limits<double>::infinity();
  if (z <= detail::kBesselSeriesLimit) return std::log(detail::bessel_i1_series(z));
  return z + std::log(detail::bessel_i1_asymptotic_scaled(z)) -
         0.5 * std::log(2.0 * std::numbers::pi * z);
}

/// Psi(x; delta, lambda) = P(chi^2_delta(lambda) <= x) as a Poisson mixture of
/// regularized lower incomplete gamma functions. Summation starts at the
/// Poisson mode and walks both ways until the neglected Poisson mass is
/// below 1e-14. For delta = 0 the k = 0 component is the point mass at zero.
inline double noncentral_chi2_cdf(double x, const NoncentralChi2Params& params) {
  params.validate();
  detail::require(x >= 0.0 && !std::isnan(x), Errc::DomainError, "noncentral_chi2_cdf needs x >= 0");
  const double delta = params.delta;
  const double half = 0.5 * params.lambda;
  if (std::isinf(x)) return 1.0;
  if (x == 0.0) return delta == 0.0 ? std::exp(-half) : 0.0;

  const double u = 0.5 * x;
  const double a_half = 0.5 * delta;
  if (half == 0.0) return delta == 0.0 ? 1.0 : regularized_gamma_p(a_half, u);

  constexpr double kTailMass = 5e-15;
  const double k0 = std::floor(half);
  const double w0 = std::exp(-half + k0 * std::log(half) - std::lgamma(k0 + 1.0));
  const double a0 = a_half + k0;
  detail::RegularizedGamma g0 = a0 == 0.0 ? detail::RegularizedGamma{1.0, 0.0}
                                          : detail::regularized_gamma(a0, u);

  // t(a) = u^a e^{-u} / Gamma(a + 1) links P and Q across unit steps in a.
  auto t_of = [u](double a) {
    return std::exp(detail::log_gamma_prefactor(a + 1.0, u)) / u;
  };

  double sum = w0 * g0.p;

  // Downward: P(a - 1) = P(a) + t(a - 1).
  {
    double w = w0;
    double p = g0.p;
    double a = a0;
    double t = a0 >= 1.0 ? t_of(a0 - 1.0) : 0.0;
    for (double k = k0; k >= 1.0; k -= 1.0) {
      w *= k / half;
      a -= 1.0;
      p += t;
      sum += w * p;
      if (a >= 1.0) t *= a / u;  // t(a - 1) = t(a) a / u
      const double r = (k - 1.0) / half;
      if (r < 1.0 && w * r / (1.0 - r) < kTailMass) break;
    }
  }

  // Upward: Q(a + 1) = Q(a) + t(a).
  {
    double w = w0;
    double q = g0.q;
    double a = a0;
    double t = t_of(a0);
    for (double k = k0 + 1.0;; k += 1.0) {
      w *= half / k;
      q += t;
      a += 1.0;
      const double p = 1.0 - q;
      if (p <= 0.0) break;  // every further term vanishes
      sum += w * p;
      t *= u / a;  // t(a) = t(a - 1) u / a
      const double r = half / (k + 1.0);
      if (w * r / (1.0 - r) < kTailMass) break;
    }
  }
  return std::clamp(sum, 0.0, 1.0);
}

/// Density of chi'^2_4(lambda) at x > 0 (log-domain evaluation).
inline double noncentral_chi2_4_pdf(double x, double lambda) {
  detail::require(x >= 0.0 && std::isfinite(x), Errc::DomainError, "pdf needs finite x >= 0");
  detail::require(lambda >= 0.0 && std::isfinite(lambda), Errc::DomainError, "pdf needs lambda >= 0");
  if (x == 0.0) return 0.0;
  if (lambda == 0.0) return 0.25 * x * std::exp(-0.5 * x);
  const double log_f = -std::numbers::ln2 - 0.5 * (x + lambda) + 0.5 * std::log(x / lambda) +
                       log_bessel_i1(std::sqrt(lambda * x));
  return std::exp(log_f);
}

/// Transition density of the dimension-four squared Bessel process in
/// intrinsic time phi = exp(activity time), from level s_from at phi_from to
/// s_to at phi_to.
inline double sbp4_transition_density(double s_from, double s_to, double phi_from, double phi_to) {
  detail::require(phi_to > phi_from && phi_from >= 0.0, Errc::DomainError,
                  "time change must be strictly increasing");
  detail::require(s_from > 0.0 && std::isfinite(s_from), Errc::DomainError, "s_from must be > 0");
  detail::require(s_to >= 0.0 && std::isfinite(s_to), Errc::DomainError, "s_to must be >= 0");
  if (s_to == 0.0) return 0.0;
  const double c = phi_to - phi_from;
  const double log_p = -std::log(2.0 * c) + 0.5 * std::log(s_to / s_from) -
                       (s_from + s_to) / (2.0 * c) + log_bessel_i1(std::sqrt(s_from * s_to) / c);
  return std::exp(log_p);
}

/// (z1 + sqrt(lambda))^2 + z2^2 + z3^2 + z4^2 for given standard normals.
inline double noncentral_chi2_4_from_normals(double lambda, double z1, double z2, double z3,
                                             double z4) {
  const double shifted = z1 + std::sqrt(lambda);
  return shifted * shifted + z2 * z2 + z3 * z3 + z4 * z4;
}

/// Exact draw from chi'^2_4(lambda).
template <NormalSource G>
double sample_noncentral_chi2_4(double lambda, G& rng) {
  detail::require(lambda >= 0.0 && std::isfinite(lambda), Errc::DomainError,
                  "sampler needs lambda >= 0");
  const double z1 = rng.normal();
  const double z2 = rng.normal();
  const double z3 = rng.normal();
  const double z4 = rng.normal();
  return noncentral_chi2_4_from_normals(lambda, z1, z2, z3, z4);
}

}  // namespace bnp
