#pragma once

// Fast end-to-end checks run by `bnp selftest`. A fault name perturbs one
// checked quantity so the failure path itself can be exercised.

#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "bnp/calibrate.hpp"
#include "bnp/market_core.hpp"
#include "bnp/mmm.hpp"
#include "bnp/simulate.hpp"
#include "bnp/special_fn.hpp"

namespace bnp {

struct SelftestResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SelftestOptions {
  std::string fault;  // "", "psi", "gop", "price" or "mc"
  std::uint64_t seed = 42;
};

namespace detail {

inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

// Adaptive Simpson quadrature; enough for smooth densities on short ranges.
inline double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                      double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) return left + right + (left + right - whole) / 15.0;
  return simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double integrate_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return simpson(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50);
}

}  // namespace detail

inline std::vector<SelftestResult> run_selftest(const SelftestOptions& opt = {}) {
  std::vector<SelftestResult> out;
  auto shift = [&](const char* name) { return opt.fault == name ? 1e-6 : 0.0; };

  {
    double worst = 0.0;
    for (double lambda : {0.5, 2.83, 10.0}) {
      worst = std::max(worst, std::abs(noncentral_chi2_cdf(0.0, {0.0, lambda}) + shift("psi") -
                                       std::exp(-0.5 * lambda)));
    }
    for (double x = 0.25; x <= 40.0; x *= 1.5) {
      worst = std::max(worst, std::abs(noncentral_chi2_cdf(x, {2.0, 0.0}) + shift("psi") + std::expm1(-0.5 * x)));
    }
    out.push_back({"psi closed forms", worst <= 1e-12, "max err " + detail::sci(worst)});
  }
  {
    double worst = 0.0;
    for (double lambda : {0.5, 2.83, 10.0}) {
      for (double x : {0.5, 2.0, 5.0, 12.0, 25.0}) {
        const double quad = detail::integrate_simpson(
            [&](double y) { return noncentral_chi2_4_pdf(y, lambda); }, 0.0, x, 1e-13);
        worst = std::max(worst, std::abs(noncentral_chi2_cdf(x, {4.0, lambda}) + shift("psi") - quad));
      }
    }
    out.push_back({"psi vs density quadrature", worst <= 1e-8, "max err " + detail::sci(worst)});
  }
  {
    std::mt19937_64 gen(opt.seed);
    std::normal_distribution<double> n01;
    double worst_res = 0.0, worst_sum = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      // At least as many factors as assets, so the GOP exists.
      const int m = 1 + trial % 5, n = m + trial % 3;
      Vector mu(m);
      Matrix sigma(m, n);
      for (int i = 0; i < m; ++i) {
        mu(i) = 0.05 + 0.05 * n01(gen);
        for (int j = 0; j < n; ++j) sigma(i, j) = 0.2 * n01(gen);
      }
      const auto g = solve_gop(MarketCoefficients(mu, sigma));
      worst_res = std::max(worst_res, g.residual + shift("gop"));
      worst_sum = std::max(worst_sum, std::abs(g.pi_star.sum() - 1.0));
    }
    out.push_back({"gop residuals", worst_res <= 1e-10 && worst_sum <= 1e-12,
                   "residual " + detail::sci(worst_res) + ", sum err " + detail::sci(worst_sum)});
  }
  const MmmParams reference;
  const PutContract put{100.0, 30.83};
  const double fair = fair_put_price(reference, 0.0, 100.0, put) + shift("price");
  {
    const double err = std::abs(fair - 20.8194083916424);
    out.push_back({"reference fair put", err <= 1e-9, "fair " + detail::format_double(fair)});
    const double gap = risk_neutral_put_price(reference, 0.0, 100.0, put) - fair;
    const double want = 100.0 * savings_bond_defect(reference, 0.0, 100.0, 30.83);
    out.push_back({"risk-neutral gap identity", std::abs(gap - want) <= 1e-12 * 100.0,
                   "gap " + detail::format_double(gap)});
  }
  {
    SimConfig cfg;
    cfg.n_paths = 100'000;
    cfg.seed = opt.seed;
    auto est = mc_fair_price(reference, put, 0.0, 100.0, cfg);
    if (opt.fault == "mc") est.value += 10.0 * est.stderr_;
    const double z = (est.value - fair) / est.stderr_;
    out.push_back({"exact MC vs closed form (1e5 paths)", std::abs(z) <= 3.0,
                   "mc " + detail::format_double(est.value) + " +- " + detail::sci(est.stderr_)});
  }
  return out;
}

}  // namespace bnp
