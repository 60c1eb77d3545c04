#pragma once

// Activity-time calibration from a savings-account discounted index.
//
// The quadratic variation of sqrt(S) equals exp(tau_t) - exp(tau_0), so
//   tau_t = ln(Q_t + e^{tau_0}).
// The trendline tau0_bar + a_bar t is fitted jointly: for each candidate
// c = tau0_bar the slope has a closed form, and c is located by a grid scan
// followed by golden-section refinement. The residual sum of squares is
// divided by the sum of squared log increments before comparing across c;
// unnormalized, it shrinks to zero as c grows and the fit runs off to the
// edge of the bracket.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bnp/error.hpp"

namespace bnp {

inline constexpr double kDaysPerYear = 365.25;

struct IndexSeries {
  std::vector<double> times;   // years from inception
  std::vector<double> values;  // discounted index levels
  std::optional<std::vector<std::chrono::sys_days>> dates;

  std::size_t size() const { return times.size(); }

  // Everything except the minimum length.
  void validate_entries() const {
    detail::require(times.size() == values.size(), Errc::DimensionMismatch,
                     "times and values differ in length");
    if (dates) {
      detail::require(dates->size() == times.size(), Errc::DimensionMismatch,
                       "dates and values differ in length");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
      detail::require(std::isfinite(times[i]), Errc::NonMonotoneTime, "time is not finite");
      if (!(std::isfinite(values[i]) && values[i] > 0.0)) {
        throw Error(Errc::NonPositiveValue, "value at row " + std::to_string(i + 1) + " is not positive");
      }
      if (i > 0 && !(times[i] > times[i - 1])) {
        throw Error(Errc::NonMonotoneTime, "times not strictly increasing at row " + std::to_string(i + 1));
      }
    }
  }

  void validate() const {
    validate_entries();
    detail::require(times.size() >= 3, Errc::TooShort, "series needs at least 3 observations");
  }
};

namespace detail {

inline std::optional<std::chrono::sys_days> parse_iso_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0;
  unsigned m = 0, d = 0;
  auto num = [&](std::size_t pos, std::size_t len, auto& out) {
    const auto r = std::from_chars(text.data() + pos, text.data() + pos + len, out);
    return r.ec == std::errc{} && r.ptr == text.data() + pos + len;
  };
  if (!num(0, 4, y) || !num(5, 2, m) || !num(8, 2, d)) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) return std::nullopt;
  return std::chrono::sys_days{ymd};
}

inline std::string format_iso_date(std::chrono::sys_days day) {
  const std::chrono::year_month_day ymd{day};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc{} || r.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace detail

/// Reads `date,value` CSV (ISO dates). Times are actual/365.25 year
/// fractions from the first row. Blank lines are skipped.
inline IndexSeries load_series(std::istream& in) {
  IndexSeries series;
  std::vector<std::chrono::sys_days> dates;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  auto fail = [&](const std::string& why) {
    throw Error(Errc::ParseError, "line " + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (line_no == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    view = detail::trim(view);
    if (view.empty()) continue;
    const auto comma = view.find(',');
    if (comma == std::string_view::npos || view.find(',', comma + 1) != std::string_view::npos) {
      fail("expected two comma-separated fields");
    }
    const auto first = detail::trim(view.substr(0, comma));
    const auto second = detail::trim(view.substr(comma + 1));
    if (!header_seen) {
      header_seen = true;
      if (first != "date" || second != "value") fail("header must be 'date,value'");
      continue;
    }
    const auto day = detail::parse_iso_date(first);
    if (!day) fail("bad date '" + std::string(first) + "'");
    const auto value = detail::parse_double(second);
    if (!value) fail("bad value '" + std::string(second) + "'");
    if (!(*value > 0.0) || !std::isfinite(*value)) {
      throw Error(Errc::NonPositiveValue, "line " + std::to_string(line_no) + ": value must be > 0");
    }
    if (!dates.empty() && *day <= dates.back()) {
      throw Error(Errc::NonMonotoneTime, "line " + std::to_string(line_no) + ": dates must increase");
    }
    dates.push_back(*day);
    series.values.push_back(*value);
  }
  if (!header_seen) throw Error(Errc::ParseError, "empty input: missing 'date,value' header");
  series.times.reserve(dates.size());
  for (const auto& d : dates) {
    series.times.push_back(static_cast<double>((d - dates.front()).count()) / kDaysPerYear);
  }
  series.dates = std::move(dates);
  series.validate_entries();
  return series;
}

/// Writes `date,value` CSV. Without stored dates, dates are generated from
/// the times starting at `origin`.
inline void write_series(std::ostream& out, const IndexSeries& series,
                         std::chrono::sys_days origin = std::chrono::sys_days{std::chrono::year{2000} /
                                                                              1 / 1}) {
  series.validate_entries();
  out << "date,value\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto day = series.dates ? (*series.dates)[i]
                                  : origin + std::chrono::days{static_cast<long>(
                                                 std::llround(series.times[i] * kDaysPerYear))};
    out << detail::format_iso_date(day) << ',' << detail::format_double(series.values[i]) << '\n';
  }
}

/// Q_k = sum_{i<=k} (sqrt(v_i) - sqrt(v_{i-1}))^2, Q_0 = 0.
inline std::vector<double> realized_qv_sqrt(const IndexSeries& series) {
  series.validate();
  std::vector<double> qv(series.size(), 0.0);
  for (std::size_t i = 1; i < series.size(); ++i) {
    const double d = std::sqrt(series.values[i]) - std::sqrt(series.values[i - 1]);
    qv[i] = qv[i - 1] + d * d;
  }
  return qv;
}

struct CalibrationResult {
  double tau0_bar = 0.0;
  double a_bar = 0.0;
  std::vector<double> tau_series;
  std::vector<double> qv_series;
  double rms_residual = 0.0;
};

struct TrendlineFit {
  double c = 0.0;
  double a_bar = 0.0;
  double rss = 0.0;
  double objective = 0.0;  // rss / sum of squared log increments
};

namespace detail {

inline constexpr double kFitLow = -5.0;
inline constexpr double kFitHigh = 10.0;
inline constexpr int kFitGrid = 151;

// For fixed c, a_bar solves least squares through the origin in elapsed time.
inline TrendlineFit fit_slope(std::span<const double> elapsed, std::span<const double> qv, double c) {
  const double ec = std::exp(c);
  double sty = 0.0, stt = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < qv.size(); ++k) {
    const double y = std::log1p(qv[k] / ec);
    sty += elapsed[k] * y;
    stt += elapsed[k] * elapsed[k];
    syy += y * y;
  }
  TrendlineFit fit{c, sty / stt, 0.0, 0.0};
  for (std::size_t k = 0; k < qv.size(); ++k) {
    const double r = std::log1p(qv[k] / ec) - fit.a_bar * elapsed[k];
    fit.rss += r * r;
  }
  fit.objective = syy > 0.0 ? fit.rss / syy : std::numeric_limits<double>::quiet_NaN();
  return fit;
}

}  // namespace detail

/// Trendline fit on an already computed quadratic variation sequence.
/// `elapsed` is time since the first observation, where the QV is zero.
inline TrendlineFit fit_trendline_qv(std::span<const double> elapsed, std::span<const double> qv) {
  using detail::fit_slope;
  const double step = (detail::kFitHigh - detail::kFitLow) / (detail::kFitGrid - 1);
  int best = 0;
  TrendlineFit best_fit = fit_slope(elapsed, qv, detail::kFitLow);
  double worst = best_fit.objective;
  for (int i = 1; i < detail::kFitGrid; ++i) {
    const auto f = fit_slope(elapsed, qv, detail::kFitLow + i * step);
    worst = std::max(worst, f.objective);
    if (f.objective < best_fit.objective) best = i, best_fit = f;
  }
  if (!(worst > best_fit.objective) || best == 0 || best == detail::kFitGrid - 1) {
    throw Error(Errc::FitFailed, "trendline objective has no interior minimum on c in [-5, 10]");
  }
  // Golden-section search inside the bracketing grid cells.
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = detail::kFitLow + (best - 1) * step;
  double hi = detail::kFitLow + (best + 1) * step;
  double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
  auto f1 = fit_slope(elapsed, qv, x1), f2 = fit_slope(elapsed, qv, x2);
  while (hi - lo > 1e-12 * (1.0 + std::abs(lo))) {
    if (f1.objective <= f2.objective) {
      hi = x2, x2 = x1, f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = fit_slope(elapsed, qv, x1);
    } else {
      lo = x1, x1 = x2, f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = fit_slope(elapsed, qv, x2);
    }
  }
  const TrendlineFit& refined = f1.objective <= f2.objective ? f1 : f2;
  if (refined.objective < best_fit.objective) best_fit = refined;
  if (!(best_fit.a_bar > 0.0) || !std::isfinite(best_fit.a_bar)) {
    throw Error(Errc::FitFailed, "fitted slope a_bar is not positive");
  }
  return best_fit;
}

/// Fits tau_t ~ tau0_bar + a_bar t with tau_t = ln(Q_t + e^{tau(t_0)}).
/// tau0_bar refers to time zero of the series clock.
inline CalibrationResult fit_trendline(const IndexSeries& series) {
  CalibrationResult out;
  out.qv_series = realized_qv_sqrt(series);
  const double t0 = series.times.front();
  std::vector<double> elapsed(series.size());
  for (std::size_t k = 0; k < series.size(); ++k) elapsed[k] = series.times[k] - t0;
  const auto fit = fit_trendline_qv(elapsed, out.qv_series);
  out.a_bar = fit.a_bar;
  out.tau0_bar = fit.c - fit.a_bar * t0;
  out.rms_residual = std::sqrt(fit.rss / static_cast<double>(series.size()));
  out.tau_series.resize(series.size());
  const double ec = std::exp(fit.c);
  for (std::size_t k = 0; k < series.size(); ++k) out.tau_series[k] = fit.c + std::log1p(out.qv_series[k] / ec);
  return out;
}

/// CSV with columns t,qv,tau,trend.
inline void write_calibration_report(std::ostream& out, const IndexSeries& series,
                                     const CalibrationResult& result) {
  out << "t,qv,tau,trend\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const double t = series.times[k];
    out << detail::format_double(t) << ',' << detail::format_double(result.qv_series[k]) << ','
        << detail::format_double(result.tau_series[k]) << ','
        << detail::format_double(result.tau0_bar + result.a_bar * t) << '\n';
  }
}

inline void write_calibration_summary(std::ostream& out, const CalibrationResult& result) {
  out << "tau0_bar=" << detail::format_double(result.tau0_bar) << '\n'
      << "a_bar=" << detail::format_double(result.a_bar) << '\n'
      << "rms=" << detail::format_double(result.rms_residual) << '\n';
}

struct CalibrationSummary {
  double tau0_bar = 0.0;
  double a_bar = 0.0;
  double rms = 0.0;
};

/// Parses the key=value block written by write_calibration_summary. Unknown
/// keys and '#' comments are ignored; tau0_bar and a_bar are required.
inline CalibrationSummary read_calibration_summary(std::istream& in) {
  CalibrationSummary s;
  bool have_tau = false, have_a = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = detail::trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw Error(Errc::ParseError, "line " + std::to_string(line_no) + ": expected key=value");
    }
    const auto key = detail::trim(view.substr(0, eq));
    const auto value = detail::parse_double(view.substr(eq + 1));
    auto need = [&] {
      if (!value) throw Error(Errc::ParseError, "line " + std::to_string(line_no) + ": bad number");
      return *value;
    };
    if (key == "tau0_bar") s.tau0_bar = need(), have_tau = true;
    else if (key == "a_bar") s.a_bar = need(), have_a = true;
    else if (key == "rms") s.rms = need();
  }
  if (!have_tau || !have_a) throw Error(Errc::ParseError, "summary lacks tau0_bar or a_bar");
  return s;
}

}  // namespace bnp
