#pragma once

// Synthetic state x year panels with known coefficients and year-level
// endogeneity, plus the replication harness that measures estimator bias,
// RMSE, confidence-interval coverage and Wu-Hausman rejection rates.
//
// Generator: std::mt19937_64 seeded per replication with
// splitmix64(master_seed, replication index); normals from
// std::normal_distribution (libstdc++). Results are reproducible for a given
// standard library, independent of the number of worker threads.

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "gaspanel/diagnostics.hpp"
#include "gaspanel/effects.hpp"
#include "gaspanel/errors.hpp"
#include "gaspanel/estimators.hpp"
#include "gaspanel/panel_data.hpp"

namespace gaspanel {

inline constexpr std::string_view kRngName = "mt19937_64/splitmix64-substreams/std::normal_distribution";
inline constexpr int kRngVersion = 1;

struct DGPConfig {
  int n_states = 32;
  int n_years = 22;
  int first_year = 1998;

  double beta_pop = 371.97;         // persons per thousand population
  double beta_ngi = 276.96;         // jobs per million MCF at the border
  double beta_interaction = -0.1831;  // per km

  double sigma_mu = 50000.0;   // state fixed effects
  double sigma_eps = 20000.0;  // idiosyncratic employment shock
  /// Endogeneity: the year-level import shock u_t enters every state's
  /// employment shock as sigma_eps * rho * year_shock_loading * u_t.
  double rho = 0.0;
  double year_shock_loading = 0.1;

  // Import price: stationary AR(3) around price_mean (USD/MCF).
  double price_mean = 4.33;
  std::array<double, 3> price_phi{0.5, 0.2, 0.1};
  double price_innovation_sd = 0.9;
  int price_burn_in = 60;

  // Import volume (million MCF): responds to the lagged price and the
  // predictable part of the current price, plus the shock u_t.
  double ngi_mean = 606.29;
  double gamma_lag = 225.0;
  double gamma_ar = 225.0;
  double ngi_shock_sd = 378.0;

  // Distance (km): lognormal matched to mean and standard deviation.
  double dist_mean = 819.38;
  double dist_sd = 499.97;

  // Population (thousands): lognormal state baseline with trend growth.
  double pop_mean = 3470.35;
  double pop_sd = 2966.02;
  double pop_growth = 0.012;
  double pop_noise = 0.01;

  std::uint64_t seed = 42;

  void validate() const {
    if (n_years < 5) throw SpecError("Monte Carlo panel needs at least 5 years");
    if (n_states < 2) throw SpecError("Monte Carlo panel needs at least 2 states");
    if (rho < -1.0 || rho > 1.0) throw SpecError("rho must lie in [-1, 1]");
    for (double s : {sigma_mu, sigma_eps, year_shock_loading, price_innovation_sd, ngi_shock_sd,
                     dist_sd, pop_sd, pop_noise})
      if (s < 0.0) throw SpecError("scale parameters must be nonnegative");
    if (!(dist_mean > 0.0) || !(pop_mean > 0.0)) throw SpecError("distance and population means must be positive");
    if (price_phi[0] + price_phi[1] + price_phi[2] >= 1.0) throw SpecError("price AR(3) must be stationary");
  }
};

/// Generated data: a panel with emp, pop, ngi, dist, import_price and the
/// pre-sample prices needed for the AR(3) instrument.
struct SyntheticPanel {
  PanelDataset panel;
  std::map<int, double> import_price;
  std::map<int, double> warmup;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of replication `index` under `master`.
inline std::uint64_t sub_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

inline SyntheticPanel generate_panel(const DGPConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto lognormal = [&](double mean, double sd) {
    const double s2 = std::log1p((sd / mean) * (sd / mean));
    return std::exp(std::log(mean) - 0.5 * s2 + std::sqrt(s2) * normal(rng));
  };

  // Prices: burn-in, 3 warm-up years, then the study years.
  const auto& phi = cfg.price_phi;
  const double c = cfg.price_mean * (1.0 - phi[0] - phi[1] - phi[2]);
  const int total = cfg.price_burn_in + 3 + cfg.n_years;
  std::vector<double> price(static_cast<std::size_t>(total), cfg.price_mean);
  std::vector<double> conditional_mean(price.size(), cfg.price_mean);
  for (int t = 3; t < total; ++t) {
    const auto u = static_cast<std::size_t>(t);
    conditional_mean[u] = c + phi[0] * price[u - 1] + phi[1] * price[u - 2] + phi[2] * price[u - 3];
    price[u] = conditional_mean[u] + cfg.price_innovation_sd * normal(rng);
  }
  const int offset = cfg.price_burn_in + 3;

  SyntheticPanel out;
  for (int w = 0; w < 3; ++w)
    out.warmup[cfg.first_year - 3 + w] = price[static_cast<std::size_t>(cfg.price_burn_in + w)];

  std::vector<double> ngi(static_cast<std::size_t>(cfg.n_years));
  std::vector<double> shock(ngi.size());
  for (int t = 0; t < cfg.n_years; ++t) {
    const auto u = static_cast<std::size_t>(t + offset);
    shock[static_cast<std::size_t>(t)] = normal(rng);
    ngi[static_cast<std::size_t>(t)] = cfg.ngi_mean + cfg.gamma_lag * (price[u - 1] - cfg.price_mean) +
                                       cfg.gamma_ar * (conditional_mean[u] - cfg.price_mean) +
                                       cfg.ngi_shock_sd * shock[static_cast<std::size_t>(t)];
    out.import_price[cfg.first_year + t] = price[u];
  }

  std::vector<RowKey> rows;
  std::vector<Value> emp, pop, ngi_col, dist_col, price_col;
  std::map<int, std::string> names;
  const double mid_year = 0.5 * (cfg.n_years - 1);
  for (int s = 1; s <= cfg.n_states; ++s) {
    names[s] = "State " + std::to_string(s);
    const double dist = lognormal(cfg.dist_mean, cfg.dist_sd);
    const double base_pop = lognormal(cfg.pop_mean, cfg.pop_sd);
    // growth centred on the middle year keeps the panel mean at pop_mean
    const double mu = cfg.sigma_mu * normal(rng);
    for (int t = 0; t < cfg.n_years; ++t) {
      const double p = base_pop * std::pow(1.0 + cfg.pop_growth, t - mid_year) * std::exp(cfg.pop_noise * normal(rng));
      const double n = ngi[static_cast<std::size_t>(t)];
      const double eps = cfg.sigma_eps * (normal(rng) + cfg.rho * cfg.year_shock_loading *
                                                            shock[static_cast<std::size_t>(t)]);
      rows.push_back({s, cfg.first_year + t});
      emp.push_back(cfg.beta_pop * p + cfg.beta_ngi * n + cfg.beta_interaction * n * dist + mu + eps);
      pop.push_back(p);
      ngi_col.push_back(n);
      dist_col.push_back(dist);
      price_col.push_back(out.import_price[cfg.first_year + t]);
    }
  }
  out.panel = PanelDataset(KeyKind::Panel, std::move(rows),
                           {Column{{"emp", Unit::Persons, Role::Dependent}, std::move(emp)},
                            Column{{"pop", Unit::ThousandsOfPersons, Role::Regressor}, std::move(pop)},
                            Column{{"ngi", Unit::MillionMcf, Role::Regressor}, std::move(ngi_col)},
                            Column{{"dist", Unit::Km, Role::Regressor}, std::move(dist_col)},
                            Column{{"import_price", Unit::UsdPerMcf, Role::Auxiliary}, std::move(price_col)}},
                           std::move(names));
  return out;
}

/// Synthetic panel with the price instruments merged in.
inline PanelDataset with_instruments(const SyntheticPanel& data) {
  const auto inst = build_instruments(data.import_price, data.warmup);
  return assemble_panel({data.panel, inst.as_time_series()});
}

// ---------------------------------------------------------------------------
// Experiment

/// The quantity-effect equation as estimated in the experiment.
struct ExperimentModels {
  ModelSpec ols;
  ModelSpec fe;
  ModelSpec fe_iv;
};

inline ExperimentModels experiment_models(CovarianceVariant covariance = CovarianceVariant::HC1,
                                          IvMode mode = IvMode::InteractedInstruments) {
  ExperimentModels m;
  m.ols.name = "OLS";
  m.ols.dependent = "emp";
  m.ols.exogenous = {"pop", "ngi", "dist"};
  m.ols.interactions = {{"ngi", "dist"}};
  m.ols.covariance = covariance;
  m.fe = m.ols;
  m.fe.name = "FE";
  m.fe.exogenous = {"pop", "ngi"};
  m.fe.fixed_effects = FixedEffects::State;
  m.fe_iv = m.fe;
  m.fe_iv.name = "FE-2SLS";
  m.fe_iv.exogenous = {"pop"};
  m.fe_iv.endogenous = {"ngi"};
  m.fe_iv.instruments = {std::string(kLagInstrument), std::string(kArInstrument)};
  m.fe_iv.iv_mode = mode;
  return m;
}

inline constexpr std::array<std::string_view, 3> kTrackedCoefficients{"pop", "ngi", "ngi_x_dist"};

struct EstimatorSummary {
  std::string estimator;
  std::string coefficient;
  double truth = 0.0;
  double mean = 0.0;
  double bias = 0.0;
  double mc_se = 0.0;  // standard error of the mean estimate across replications
  double rmse = 0.0;
  double coverage = 0.0;  // share of 95% intervals containing the truth
};

struct DistributionSummary {
  double mean = 0.0;
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
  double share_below_10 = 0.0;
};

struct MCReport {
  DGPConfig config;
  std::size_t replications = 0;
  double test_level = 0.05;
  std::vector<EstimatorSummary> estimators;
  double wu_hausman_rejection_rate = 0.0;
  DistributionSummary first_stage_f;
  double wall_seconds = 0.0;
  std::string rng = std::string(kRngName);

  const EstimatorSummary& find(std::string_view estimator, std::string_view coefficient) const {
    for (const auto& e : estimators)
      if (e.estimator == estimator && e.coefficient == coefficient) return e;
    throw SpecError("report has no entry for " + std::string(estimator) + "/" + std::string(coefficient));
  }
};

/// Outcome of one replication, in fixed estimator/coefficient order.
struct ReplicationOutcome {
  std::array<std::array<double, 3>, 3> estimate{};
  std::array<std::array<double, 3>, 3> std_error{};
  double wu_hausman_p = 1.0;
  double first_stage_f = 0.0;
};

inline ReplicationOutcome run_replication(const DGPConfig& cfg, const ExperimentModels& models) {
  const auto panel = with_instruments(generate_panel(cfg));
  ReplicationOutcome out;
  const std::array<const ModelSpec*, 3> specs{&models.ols, &models.fe, &models.fe_iv};
  for (std::size_t e = 0; e < specs.size(); ++e) {
    const auto f = fit(*specs[e], panel);
    for (std::size_t c = 0; c < kTrackedCoefficients.size(); ++c) {
      const auto idx = f.index_of(kTrackedCoefficients[c]);
      out.estimate[e][c] = f.coefficients(static_cast<Index>(idx));
      out.std_error[e][c] = f.std_errors(static_cast<Index>(idx));
    }
  }
  out.wu_hausman_p = wu_hausman(models.fe_iv, panel).p_value;
  out.first_stage_f = first_stage_f(models.fe_iv, panel).statistic;
  return out;
}

/// Runs `n_reps` independent replications. Replication r uses
/// sub_seed(config.seed, r); outcomes are reduced in index order, so the
/// report does not depend on `threads`.
inline MCReport run_experiment(const DGPConfig& config, std::size_t n_reps,
                               const ExperimentModels& models = experiment_models(),
                               unsigned threads = 0) {
  if (n_reps < 1) throw SpecError("Monte Carlo needs at least one replication");
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_reps));

  std::vector<ReplicationOutcome> outcomes(n_reps);
  std::vector<std::string> errors(n_reps);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < n_reps; r = next++) {
      DGPConfig cfg = config;
      cfg.seed = sub_seed(config.seed, r);
      try {
        outcomes[r] = run_replication(cfg, models);
      } catch (const std::exception& ex) {
        errors[r] = ex.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (std::size_t r = 0; r < n_reps; ++r) {
    if (!errors[r].empty())
      throw NumericalError("replication " + std::to_string(r) + " (sub-seed " +
                           std::to_string(sub_seed(config.seed, r)) + ") failed: " + errors[r]);
  }

  MCReport report;
  report.config = config;
  report.replications = n_reps;
  const std::array<std::string, 3> estimator_names{models.ols.name, models.fe.name, models.fe_iv.name};
  const std::array<double, 3> truth{config.beta_pop, config.beta_ngi, config.beta_interaction};
  const double n = static_cast<double>(n_reps);
  const double z = 1.959963984540054;
  for (std::size_t e = 0; e < 3; ++e) {
    for (std::size_t c = 0; c < 3; ++c) {
      EstimatorSummary s{estimator_names[e], std::string(kTrackedCoefficients[c]), truth[c]};
      double sum = 0.0, sq_err = 0.0, covered = 0.0;
      for (const auto& o : outcomes) {
        const double est = o.estimate[e][c];
        sum += est;
        sq_err += (est - truth[c]) * (est - truth[c]);
        if (std::abs(est - truth[c]) <= z * o.std_error[e][c]) covered += 1.0;
      }
      s.mean = sum / n;
      s.bias = s.mean - truth[c];
      double ss = 0.0;
      for (const auto& o : outcomes) ss += (o.estimate[e][c] - s.mean) * (o.estimate[e][c] - s.mean);
      s.mc_se = n_reps > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
      s.rmse = std::sqrt(sq_err / n);
      s.coverage = covered / n;
      report.estimators.push_back(std::move(s));
    }
  }

  std::vector<double> f;
  double rejections = 0.0;
  for (const auto& o : outcomes) {
    f.push_back(o.first_stage_f);
    if (o.wu_hausman_p < report.test_level) rejections += 1.0;
  }
  report.wu_hausman_rejection_rate = rejections / n;
  std::sort(f.begin(), f.end());
  report.first_stage_f.mean = std::accumulate(f.begin(), f.end(), 0.0) / n;
  report.first_stage_f.median =
      f.size() % 2 ? f[f.size() / 2] : 0.5 * (f[f.size() / 2 - 1] + f[f.size() / 2]);
  report.first_stage_f.min = f.front();
  report.first_stage_f.max = f.back();
  report.first_stage_f.share_below_10 =
      static_cast<double>(std::count_if(f.begin(), f.end(), [](double v) { return v < kWeakInstrumentF; })) / n;
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

/// Scales (gamma_lag, gamma_ar) so that the mean first-stage F lands near
/// `target_f`, using F(s) ~ F0 + (F1 - F0) s^2 where F0 is the F with no
/// instrument relevance. Imports vary only by year, so the row-level F has
/// a floor F0 well above 1; a target below 1.25 F0 is raised to it.
inline DGPConfig calibrate_instrument_strength(DGPConfig config, double target_f,
                                               std::size_t pilot_reps = 100, int rounds = 3) {
  if (!(target_f > 1.0)) throw SpecError("target first-stage F must exceed 1");
  const auto models = experiment_models();
  DGPConfig irrelevant = config;
  irrelevant.gamma_lag = 0.0;
  irrelevant.gamma_ar = 0.0;
  const double floor = run_experiment(irrelevant, pilot_reps, models).first_stage_f.mean;
  const double target = std::max(target_f, 1.25 * floor);
  for (int round = 0; round < rounds; ++round) {
    const double f = run_experiment(config, pilot_reps, models).first_stage_f.mean;
    if (!(f > floor)) throw NumericalError("pilot first-stage F does not respond to instrument strength");
    const double scale = std::sqrt((target - floor) / (f - floor));
    config.gamma_lag *= scale;
    config.gamma_ar *= scale;
  }
  return config;
}

struct WeakInstrumentComparison {
  DGPConfig weak_config;
  DGPConfig strong_config;
  MCReport weak;    // mean first-stage F near 10, or the reachable floor
  MCReport strong;  // mean first-stage F near 100
};

/// Compares 2SLS dispersion with instruments near the weak threshold
/// against clearly strong instruments.
inline WeakInstrumentComparison weak_instrument_experiment(const DGPConfig& base, std::size_t n_reps,
                                                           double weak_f = 10.0, double strong_f = 100.0) {
  WeakInstrumentComparison out;
  out.weak_config = calibrate_instrument_strength(base, weak_f);
  out.strong_config = calibrate_instrument_strength(base, strong_f);
  out.weak = run_experiment(out.weak_config, n_reps);
  out.strong = run_experiment(out.strong_config, n_reps);
  return out;
}

}  // namespace gaspanel
