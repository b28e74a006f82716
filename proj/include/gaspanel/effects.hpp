#pragma once

// Price-based instruments (one-year lag and AR(3) prediction), distance
// dependent marginal effects with delta-method standard errors, and the
// elasticity arithmetic of the log-log price model.

#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gaspanel/errors.hpp"
#include "gaspanel/estimators.hpp"
#include "gaspanel/numerics.hpp"
#include "gaspanel/panel_data.hpp"

namespace gaspanel {

// ---------------------------------------------------------------------------
// Autoregressive fit

struct ArFit {
  int order = 0;
  double intercept = 0.0;
  std::vector<double> phi;
  std::vector<std::optional<double>> fitted;  // one-step-ahead, in sample
  bool intercept_only = false;
};

/// Least-squares AR(p) with intercept: x_t on (1, x_{t-1}, ..., x_{t-p}).
/// A constant series falls back to an intercept-only model.
inline ArFit ar_fit(std::span<const double> series, int p = 3) {
  if (p < 1) throw SpecError("AR order must be positive");
  const Index n = static_cast<Index>(series.size());
  const Index rows = n - p;
  if (rows < p + 1)
    throw DataError("series of length " + std::to_string(n) + " is too short for AR(" +
                    std::to_string(p) + ")");
  ArFit out;
  out.order = p;
  out.phi.assign(static_cast<std::size_t>(p), 0.0);
  out.fitted.assign(series.size(), std::nullopt);

  const bool constant = std::all_of(series.begin(), series.end(),
                                    [&](double v) { return v == series.front(); });
  if (constant) {
    out.intercept = series.front();
    out.intercept_only = true;
    for (Index t = p; t < n; ++t) out.fitted[static_cast<std::size_t>(t)] = out.intercept;
    return out;
  }

  Matrix x(rows, p + 1);
  Vector y(rows);
  for (Index r = 0; r < rows; ++r) {
    const Index t = r + p;
    y(r) = series[static_cast<std::size_t>(t)];
    x(r, 0) = 1.0;
    for (Index j = 1; j <= p; ++j) x(r, j) = series[static_cast<std::size_t>(t - j)];
  }
  const auto ls = solve_least_squares(x, y);
  if (ls.rank < p + 1) throw NumericalError("collinear lags in AR(" + std::to_string(p) + ") fit");
  out.intercept = ls.coefficients(0);
  for (Index j = 1; j <= p; ++j) out.phi[static_cast<std::size_t>(j - 1)] = ls.coefficients(j);
  for (Index r = 0; r < rows; ++r)
    out.fitted[static_cast<std::size_t>(r + p)] = y(r) - ls.residuals(r);
  return out;
}

// ---------------------------------------------------------------------------
// Instruments

inline constexpr std::string_view kLagInstrument = "price_lag1";
inline constexpr std::string_view kArInstrument = "price_ar3";

struct InstrumentSet {
  std::vector<int> years;                 // study years
  std::vector<Value> lag1_price;          // USD per MCF
  std::vector<Value> ar3_predicted_price; // USD per MCF
  ArFit ar;
  int fit_first_year = 0;
  int fit_last_year = 0;

  std::vector<int> missing_years() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < years.size(); ++i)
      if (!lag1_price[i] || !ar3_predicted_price[i]) out.push_back(years[i]);
    return out;
  }

  /// Year-keyed table with the two instrument columns, ready to broadcast.
  PanelDataset as_time_series() const {
    std::vector<RowKey> rows;
    for (int y : years) rows.push_back({0, y});
    return PanelDataset(KeyKind::TimeSeries, std::move(rows),
                        {Column{{std::string(kLagInstrument), Unit::UsdPerMcf, Role::Regressor}, lag1_price},
                         Column{{std::string(kArInstrument), Unit::UsdPerMcf, Role::Regressor},
                                ar3_predicted_price}});
  }
};

/// Builds the lagged-price and AR(3)-predicted-price instruments from the
/// yearly import price. Pre-sample `warmup` prices supply lags for the first
/// study years. The contemporaneous price is never an instrument. The AR
/// model is fitted once over `fit_window` (default: every available year)
/// and its in-sample predictions are used.
inline InstrumentSet build_instruments(const std::map<int, double>& import_price,
                                       const std::map<int, double>& warmup = {},
                                       std::optional<std::pair<int, int>> fit_window = {}) {
  constexpr int kOrder = 3;
  if (import_price.empty()) throw DataError("import price series is empty");
  std::map<int, double> combined = warmup;
  for (const auto& [year, price] : import_price) {
    if (auto it = combined.find(year); it != combined.end() && it->second != price)
      throw DataError("warm-up price for " + std::to_string(year) + " overlaps the study series");
    combined[year] = price;
  }
  int prev = combined.begin()->first - 1;
  for (const auto& [year, _] : combined) {
    if (year != prev + 1) throw DataError("price series has a gap before " + std::to_string(year));
    prev = year;
  }

  const int first = fit_window ? fit_window->first : combined.begin()->first;
  const int last = fit_window ? fit_window->second : combined.rbegin()->first;
  std::vector<double> window;
  for (const auto& [year, price] : combined)
    if (year >= first && year <= last) window.push_back(price);
  if (static_cast<int>(window.size()) < 2 * kOrder + 1)
    throw DataError("price series too short for an AR(3) fit (" + std::to_string(window.size()) +
                    " years)");

  InstrumentSet out;
  out.ar = ar_fit(window, kOrder);
  out.fit_first_year = first;
  out.fit_last_year = last;
  for (const auto& [year, _] : import_price) {
    out.years.push_back(year);
    auto lag = [&](int k) -> std::optional<double> {
      auto it = combined.find(year - k);
      return it == combined.end() ? std::nullopt : std::optional<double>(it->second);
    };
    out.lag1_price.push_back(lag(1));
    std::optional<double> predicted = out.ar.intercept;
    for (int j = 1; j <= kOrder; ++j) {
      auto l = lag(j);
      if (!l) {
        predicted.reset();
        break;
      }
      *predicted += out.ar.phi[static_cast<std::size_t>(j - 1)] * *l;
    }
    out.ar3_predicted_price.push_back(predicted);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Marginal effects

/// effect(d) = main + d * slope with the covariance of (main, slope).
struct LinearEffect {
  double main = 0.0;
  double slope = 0.0;
  double var_main = 0.0;
  double cov_main_slope = 0.0;
  double var_slope = 0.0;
  std::optional<double> df;  // t reference when known, normal otherwise

  double effect(double d) const { return main + d * slope; }

  /// Delta-method variance g'Vg with g = (1, d).
  double variance(double d) const { return var_main + 2.0 * d * cov_main_slope + d * d * var_slope; }

  double std_error(double d) const { return std::sqrt(std::max(variance(d), 0.0)); }

  double p_value(double t) const { return df ? student_t_pvalue(t, *df) : normal_pvalue(t); }
};

/// Pulls (beta_main, beta_main_x_moderator) and their covariance block out
/// of a fit. The interaction may be named either way round.
inline LinearEffect linear_effect(const FitResult& fit, const std::string& main = "ngi",
                                  const std::string& moderator = "dist") {
  const auto i_main = fit.find(main);
  auto i_slope = fit.find(main + "_x_" + moderator);
  if (!i_slope) i_slope = fit.find(moderator + "_x_" + main);
  if (!i_main || !i_slope)
    throw SpecError("fit '" + fit.model_name + "' lacks coefficients for " + main + " and its " +
                    moderator + " interaction");
  if (fit.omitted[*i_main] || fit.omitted[*i_slope] || fit.covariance.rows() == 0)
    throw NumericalError("fit '" + fit.model_name + "' has no covariance block for " + main);
  LinearEffect e;
  e.main = fit.coefficients(static_cast<Index>(*i_main));
  e.slope = fit.coefficients(static_cast<Index>(*i_slope));
  e.var_main = fit.covariance(static_cast<Index>(*i_main), static_cast<Index>(*i_main));
  e.cov_main_slope = fit.covariance(static_cast<Index>(*i_main), static_cast<Index>(*i_slope));
  e.var_slope = fit.covariance(static_cast<Index>(*i_slope), static_cast<Index>(*i_slope));
  e.df = static_cast<double>(fit.df_residual);
  return e;
}

struct StateDistance {
  std::string state;
  double dist_km = 0.0;
};

struct MarginalEffectRow {
  std::string state;
  double dist_km = 0.0;
  double effect = 0.0;  // jobs per million MCF
  double std_error = 0.0;
  double t = 0.0;
  double p_value = 1.0;
};

struct MarginalEffectTable {
  LinearEffect basis;
  std::vector<MarginalEffectRow> rows;
};

inline MarginalEffectTable marginal_effects(const LinearEffect& effect,
                                            const std::vector<StateDistance>& states) {
  MarginalEffectTable table{effect, {}};
  for (const auto& s : states) {
    MarginalEffectRow row{s.state, s.dist_km, effect.effect(s.dist_km), effect.std_error(s.dist_km)};
    row.t = row.std_error > 0.0 ? row.effect / row.std_error : 0.0;
    row.p_value = row.std_error > 0.0 ? effect.p_value(row.t) : 1.0;
    table.rows.push_back(std::move(row));
  }
  return table;
}

inline MarginalEffectTable marginal_effects(const FitResult& fit, const std::vector<StateDistance>& states,
                                            const std::string& main = "ngi",
                                            const std::string& moderator = "dist") {
  return marginal_effects(linear_effect(fit, main, moderator), states);
}

/// Unweighted mean of the per-state effects over `subset`.
inline double average_effect(const LinearEffect& effect, const std::vector<StateDistance>& subset) {
  if (subset.empty()) throw SpecError("average effect over an empty set of states");
  double sum = 0.0;
  for (const auto& s : subset) sum += effect.effect(s.dist_km);
  return sum / static_cast<double>(subset.size());
}

inline double average_effect(const FitResult& fit, const std::vector<StateDistance>& subset,
                             const std::string& main = "ngi", const std::string& moderator = "dist") {
  return average_effect(linear_effect(fit, main, moderator), subset);
}

// ---------------------------------------------------------------------------
// Elasticity

struct ElasticitySummary {
  double elasticity = 0.0;
  double price_step = 0.0;         // one percent of the mean price
  double employment_change = 0.0;  // jobs
  double percent_change = 0.0;
};

/// In a log-log model the coefficient is the percent change of employment
/// per one-percent price change.
inline ElasticitySummary elasticity_summary(double elasticity, double mean_price, double mean_employment) {
  if (!(mean_price > 0.0) || !(mean_employment > 0.0))
    throw SpecError("elasticity summary needs positive mean price and employment");
  return {elasticity, 0.01 * mean_price, elasticity / 100.0 * mean_employment, elasticity};
}

inline ElasticitySummary elasticity_summary(const FitResult& fit, const std::string& price_term,
                                            double mean_price, double mean_employment) {
  return elasticity_summary(fit.coefficient(price_term), mean_price, mean_employment);
}

}  // namespace gaspanel
