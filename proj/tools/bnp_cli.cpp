// bnp: calibration, pricing, hedging and simulation under the minimal
// market model. Exit codes: 0 success, 2 usage or input error, 3 numerical
// failure.

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "bnp/bnp.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;

struct InputFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputFailure("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputFailure("cannot open '" + path.string() + "' for writing");
  return out;
}

fs::path sibling(const std::string& out, const char* extension) {
  return fs::path(out).replace_extension(extension);
}

bnp::IndexSeries load_series_file(const std::string& path) {
  auto in = open_in(path);
  auto series = bnp::load_series(in);
  series.validate();
  return series;
}

// Trendline parameters: inline flags win, then a summary file, otherwise the
// data itself is calibrated.
struct ParamSource {
  std::optional<double> tau0;
  std::optional<double> a;
  std::string params_file;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--tau0", tau0, "trendline initial value tau0_bar");
    cmd->add_option("--a", a, "trendline slope a_bar");
    cmd->add_option("--params", params_file, "calibration summary written by `bnp calibrate`")
        ->check(CLI::ExistingFile);
  }

  bnp::MmmParams resolve(const bnp::IndexSeries& series) const {
    bnp::MmmParams p;
    p.s0 = series.values.front();
    if (tau0.has_value() != a.has_value()) throw InputFailure("--tau0 and --a must be given together");
    if (tau0) {
      p.tau0_bar = *tau0;
      p.a_bar = *a;
    } else if (!params_file.empty()) {
      auto in = open_in(params_file);
      const auto s = bnp::read_calibration_summary(in);
      p.tau0_bar = s.tau0_bar;
      p.a_bar = s.a_bar;
    } else {
      const auto fit = bnp::fit_trendline(series);
      p.tau0_bar = fit.tau0_bar;
      p.a_bar = fit.a_bar;
    }
    p.validate();
    return p;
  }
};

int cmd_calibrate(const std::string& data, const std::string& out) {
  const auto series = load_series_file(data);
  const auto fit = bnp::fit_trendline(series);
  {
    auto csv = open_out(out);
    bnp::write_calibration_report(csv, series, fit);
  }
  {
    auto summary = open_out(sibling(out, ".summary"));
    bnp::write_calibration_summary(summary, fit);
  }
  bnp::write_calibration_summary(std::cout, fit);
  return 0;
}

struct PriceArgs {
  double tau0 = 2.15, a = 0.053, s0 = 100.0, strike = 100.0, maturity = 30.83, t = 0.0;
  std::int64_t mc = 0;
  bool antithetic = false;
};

int cmd_price(const PriceArgs& args, std::uint64_t seed, const std::string& out) {
  const bnp::MmmParams p{args.tau0, args.a, 0.0, args.s0};
  const bnp::PutContract put{args.strike, args.maturity};
  bnp::KeyValues kv;
  const double fair = bnp::fair_put_price(p, args.t, args.s0, put);
  const double rn = bnp::risk_neutral_put_price(p, args.t, args.s0, put);
  if (args.t < args.maturity) {
    kv.emplace_back("lambda", bnp::noncentrality(p, args.t, args.s0, args.maturity));
    kv.emplace_back("defect", bnp::savings_bond_defect(p, args.t, args.s0, args.maturity));
  }
  kv.emplace_back("fair", fair);
  kv.emplace_back("risk_neutral", rn);
  kv.emplace_back("gap", rn - fair);
  if (args.t < args.maturity) kv.emplace_back("delta", bnp::fair_put_delta(p, args.t, args.s0, put));
  if (args.mc > 0) {
    bnp::SimConfig cfg;
    cfg.n_paths = args.mc;
    cfg.seed = seed;
    cfg.antithetic = args.antithetic;
    const auto est = bnp::mc_fair_price(p, put, args.t, args.s0, cfg);
    kv.emplace_back("mc", est.value);
    kv.emplace_back("mc_stderr", est.stderr_);
    kv.emplace_back("mc_paths", static_cast<double>(est.n_paths));
  }
  bnp::write_key_values(std::cout, kv);
  if (!out.empty()) {
    auto f = open_out(out);
    bnp::write_key_values(f, kv);
  }
  return 0;
}

bnp::PutContract contract_for(const bnp::IndexSeries& series, double strike) {
  return {strike, series.times.back()};
}

int cmd_compare(const std::string& data, double strike, const ParamSource& source, const std::string& out) {
  const auto series = load_series_file(data);
  const auto p = source.resolve(series);
  const auto put = contract_for(series, strike);
  std::vector<double> fair(series.size()), rn(series.size());
  for (std::size_t k = 0; k < series.size(); ++k) {
    const double t = k + 1 == series.size() ? put.maturity : series.times[k];
    fair[k] = bnp::fair_put_price(p, t, series.values[k], put);
    rn[k] = bnp::risk_neutral_put_price(p, t, series.values[k], put);
  }
  {
    auto csv = open_out(out);
    csv << "t,s,fair,risk_neutral\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
      csv << bnp::detail::format_double(series.times[k]) << ',' << bnp::detail::format_double(series.values[k])
          << ',' << bnp::detail::format_double(fair[k]) << ',' << bnp::detail::format_double(rn[k]) << '\n';
    }
  }
  {
    auto svg = open_out(sibling(out, ".svg"));
    bnp::write_svg_chart(svg, {"Fair and risk-neutral put, K = " + bnp::detail::format_double(strike),
                               "years", "savings-account denominated price"},
                         {{"fair", series.times, fair, "#d62728"}, {"risk-neutral", series.times, rn, "#1f77b4"}});
  }
  bnp::write_key_values(std::cout, {{"tau0_bar", p.tau0_bar},
                                    {"a_bar", p.a_bar},
                                    {"maturity", put.maturity},
                                    {"fair0", fair.front()},
                                    {"risk_neutral0", rn.front()},
                                    {"gap0", rn.front() - fair.front()},
                                    {"payoff", put.payoff(series.values.back())}});
  return 0;
}

int cmd_hedge(const std::string& data, double strike, const std::string& rule_name, const ParamSource& source,
              const std::string& out) {
  const auto series = load_series_file(data);
  const auto rule = rule_name == "rn" ? bnp::InitialValueRule::RiskNeutral : bnp::InitialValueRule::Fair;
  const auto p = source.resolve(series);
  const auto put = contract_for(series, strike);
  const auto report = bnp::backtest(p, series, put, rule);
  {
    auto csv = open_out(out);
    bnp::write_backtest_csv(csv, report);
  }
  {
    auto svg = open_out(sibling(out, ".svg"));
    bnp::write_svg_chart(svg, {"Hedge backtest (" + rule_name + " initial value)", "years",
                               "savings-account denominated value"},
                         {{"fair put", report.times, report.option_values, "#d62728"},
                          {"hedge portfolio", report.times, report.portfolio_values, "#2ca02c"}});
  }
  bnp::write_key_values(std::cout, {{"tau0_bar", p.tau0_bar},
                                    {"a_bar", p.a_bar},
                                    {"initial_value", report.portfolio_values.front()},
                                    {"terminal_value", report.portfolio_values.back()},
                                    {"terminal_payoff", report.terminal_payoff},
                                    {"terminal_surplus", report.portfolio_values.back() - report.terminal_payoff},
                                    {"tracking_error", report.tracking_error},
                                    {"max_abs_gap", report.max_abs_gap},
                                    {"rebalance_count", static_cast<double>(report.rebalance_count)}});
  return 0;
}

struct SimulateArgs {
  double tau0 = 2.15, a = 0.053, lambda_bar = 1.0, s0 = 100.0, years = 30.0;
  int substeps = 10;
  std::string start = "1984-01-02";
  std::string measure = "p";
};

// One observation per calendar day, times on the actual/365.25 clock.
int cmd_simulate(const SimulateArgs& args, std::uint64_t seed, const std::string& out) {
  const bnp::MmmParams p{args.tau0, args.a, args.lambda_bar, args.s0};
  const auto start = bnp::detail::parse_iso_date(args.start);
  if (!start) throw InputFailure("--start must be an ISO date (YYYY-MM-DD)");
  if (!(args.years > 0.0)) throw InputFailure("--years must be > 0");
  const auto days = static_cast<long>(std::llround(args.years * bnp::kDaysPerYear));
  if (days < 2) throw InputFailure("--years covers fewer than 3 observations");
  bnp::IndexSeries series;
  series.dates.emplace();
  for (long d = 0; d <= days; ++d) {
    series.times.push_back(static_cast<double>(d) / bnp::kDaysPerYear);
    series.dates->push_back(*start + std::chrono::days{d});
  }
  bnp::Rng rng = bnp::Rng::for_path(seed, 0);
  if (args.measure == "q") {
    series.values = bnp::simulate_q_path(p, series.times, p.s0, rng).levels;
  } else {
    const double horizon = series.times.back();
    const double dt = 1.0 / (bnp::kDaysPerYear * args.substeps);
    const auto path = bnp::simulate_p_path(p, 0.0, p.s0, horizon, dt, rng);
    for (std::size_t i = 0; i < path.levels.size(); i += static_cast<std::size_t>(args.substeps)) {
      series.values.push_back(path.levels[i]);
    }
  }
  auto csv = open_out(out);
  bnp::write_series(csv, series);
  bnp::write_key_values(std::cout, {{"observations", static_cast<double>(series.size())},
                                    {"final_value", series.values.back()},
                                    {"years", series.times.back()}});
  return 0;
}

int cmd_selftest(std::uint64_t seed, const std::string& fault) {
  const auto results = bnp::run_selftest({fault, seed});
  bool ok = true;
  for (const auto& r : results) {
    std::cout << (r.passed ? "PASS  " : "FAIL  ") << r.name << "  (" << r.detail << ")\n";
    ok = ok && r.passed;
  }
  std::cout << (ok ? "all checks passed\n" : "selftest FAILED\n");
  return ok ? 0 : kExitNumeric;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Benchmark-neutral pricing under the minimal market model"};
  app.require_subcommand(1);
  std::uint64_t seed = 42;
  std::string out;
  app.add_option("--seed", seed, "random seed")->capture_default_str();

  auto* calibrate = app.add_subcommand("calibrate", "fit the activity-time trendline to a date,value CSV");
  std::string data;
  calibrate->add_option("--data", data, "input CSV (date,value)")->required();
  calibrate->add_option("--out", out, "report CSV; the summary goes next to it as .summary")->required();

  auto* price = app.add_subcommand("price", "closed-form fair and risk-neutral put prices");
  PriceArgs price_args;
  price->add_option("--tau0", price_args.tau0)->capture_default_str();
  price->add_option("--a", price_args.a)->capture_default_str();
  price->add_option("--s0", price_args.s0, "current index level")->capture_default_str();
  price->add_option("--strike", price_args.strike)->capture_default_str();
  price->add_option("--maturity", price_args.maturity, "maturity in years")->capture_default_str();
  price->add_option("--t", price_args.t, "valuation time in years")->capture_default_str();
  price->add_option("--mc", price_args.mc, "exact-sampling Monte Carlo paths (0 = off)")
      ->check(CLI::NonNegativeNumber);
  price->add_flag("--antithetic", price_args.antithetic, "antithetic pairs for --mc");
  price->add_option("--out", out, "also write the key=value block here");

  double strike = 100.0;
  auto* compare = app.add_subcommand("compare", "fair vs risk-neutral put along a data path (CSV + SVG)");
  ParamSource compare_params;
  compare->add_option("--data", data, "input CSV (date,value)")->required();
  compare->add_option("--strike", strike)->capture_default_str();
  compare->add_option("--out", out, "price CSV; the chart goes next to it as .svg")->required();
  compare_params.add_to(compare);

  auto* hedge = app.add_subcommand("hedge", "delta-hedge backtest along a data path (CSV + SVG)");
  ParamSource hedge_params;
  std::string rule = "fair";
  hedge->add_option("--data", data, "input CSV (date,value)")->required();
  hedge->add_option("--strike", strike)->capture_default_str();
  hedge->add_option("--rule", rule, "initial value: fair or rn")
      ->check(CLI::IsMember({"fair", "rn"}))
      ->capture_default_str();
  hedge->add_option("--out", out, "report CSV; the chart goes next to it as .svg")->required();
  hedge_params.add_to(hedge);

  auto* simulate = app.add_subcommand("simulate", "simulate a daily discounted index path as date,value CSV");
  SimulateArgs sim_args;
  simulate->add_option("--tau0", sim_args.tau0)->capture_default_str();
  simulate->add_option("--a", sim_args.a)->capture_default_str();
  simulate->add_option("--lambda-bar", sim_args.lambda_bar, "market price of risk scale")->capture_default_str();
  simulate->add_option("--s0", sim_args.s0)->capture_default_str();
  simulate->add_option("--years", sim_args.years)->capture_default_str();
  simulate->add_option("--start", sim_args.start, "first date")->capture_default_str();
  simulate->add_option("--measure", sim_args.measure, "p: real-world Euler, q: exact benchmark-neutral")
      ->check(CLI::IsMember({"p", "q"}))
      ->capture_default_str();
  simulate->add_option("--substeps", sim_args.substeps, "Euler steps per day")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  simulate->add_option("--out", out, "output CSV")->required();

  auto* selftest = app.add_subcommand("selftest", "fast built-in consistency checks");
  std::string fault;
  selftest->add_option("--fault", fault)->group("");  // test hook

  for (auto* sub : {calibrate, price, compare, hedge, simulate, selftest}) {
    sub->add_option("--seed", seed, "random seed")->capture_default_str();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*calibrate) return cmd_calibrate(data, out);
    if (*price) return cmd_price(price_args, seed, out);
    if (*compare) return cmd_compare(data, strike, compare_params, out);
    if (*hedge) return cmd_hedge(data, strike, rule, hedge_params, out);
    if (*simulate) return cmd_simulate(sim_args, seed, out);
    if (*selftest) return cmd_selftest(seed, fault);
  } catch (const bnp::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.is_input_error() ? kExitInput : kExitNumeric;
  } catch (const InputFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitInput;
}
