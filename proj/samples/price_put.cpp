// Prices a long-dated put on the savings-account discounted index under the
// minimal market model, checks it by exact-sampling Monte Carlo and prints
// the hedge position that replicates it.

#include <cstdio>

#include "bnp/bnp.hpp"

int main() {
  const bnp::MmmParams params{2.15, 0.053, 0.0, 100.0};
  const bnp::PutContract put{100.0, 30.83};
  const double t = 0.0, s = params.s0;

  const double fair = bnp::fair_put_price(params, t, s, put);
  const double rn = bnp::risk_neutral_put_price(params, t, s, put);
  std::printf("lambda        %.6f\n", bnp::noncentrality(params, t, s, put.maturity));
  std::printf("fair put      %.6f\n", fair);
  std::printf("risk-neutral  %.6f (gap %.6f)\n", rn, rn - fair);

  bnp::SimConfig cfg;
  cfg.n_paths = 200'000;
  cfg.seed = 7;
  const auto mc = bnp::mc_fair_price(params, put, t, s, cfg);
  std::printf("monte carlo   %.6f +- %.6f\n", mc.value, mc.stderr_);

  const auto pos = bnp::hedge_position(params, t, s, put, fair);
  std::printf("hedge         %.6f index units, %.6f savings units\n", pos.units_stock, pos.units_savings);
  return 0;
}
