#pragma once

// Data directory loading and validation, analysis panel assembly, and the
// end-to-end replication run that produces every table.

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gaspanel/diagnostics.hpp"
#include "gaspanel/effects.hpp"
#include "gaspanel/errors.hpp"
#include "gaspanel/estimators.hpp"
#include "gaspanel/panel_data.hpp"
#include "gaspanel/report.hpp"

namespace gaspanel {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Input schemas

struct InputFile {
  std::string file;
  std::vector<ColumnSchema> schema;
};

inline const std::vector<InputFile>& input_files() {
  static const std::vector<InputFile> files{
      {"states.csv",
       {{"state_id", Unit::Dimensionless, Role::Key},
        {"state_name", Unit::Dimensionless, Role::Key},
        {"dist_border_km", Unit::Km, Role::Auxiliary},
        {"dist_cdmx_km", Unit::Km, Role::Auxiliary},
        {"is_south", Unit::Dimensionless, Role::Auxiliary}}},
      {"employment.csv",
       {{"state_id", Unit::Dimensionless, Role::Key},
        {"year", Unit::Dimensionless, Role::Key},
        {"emp_nonmining_thousands", Unit::ThousandsOfPersons, Role::Dependent},
        {"emp_mining_thousands", Unit::ThousandsOfPersons, Role::Dependent}}},
      {"population.csv",
       {{"state_id", Unit::Dimensionless, Role::Key},
        {"year", Unit::Dimensionless, Role::Key},
        {"pop_thousands", Unit::ThousandsOfPersons, Role::Regressor}}},
      {"imports.csv",
       {{"year", Unit::Dimensionless, Role::Key},
        {"ngi_million_mcf", Unit::MillionMcf, Role::Regressor},
        {"import_price_usd_mcf", Unit::UsdPerMcf, Role::Auxiliary}}},
      {"prices.csv",
       {{"state_id", Unit::Dimensionless, Role::Key},
        {"year", Unit::Dimensionless, Role::Key},
        {"ng_price_nominal_pesos_gj", Unit::PesosPerGjNominal, Role::Regressor}}},
      {"deflator.csv",
       {{"year", Unit::Dimensionless, Role::Key}, {"gdp_deflator_2015base", Unit::Index, Role::Auxiliary}}},
  };
  return files;
}

inline const std::vector<ColumnSchema>& warmup_schema() {
  static const std::vector<ColumnSchema> schema{{"year", Unit::Dimensionless, Role::Key},
                                                {"import_price_usd_mcf", Unit::UsdPerMcf, Role::Auxiliary}};
  return schema;
}

inline constexpr std::string_view kAdjacencyFile = "adjacency.csv";
inline constexpr int kDeflatorBaseYear = 2015;

/// Model-facing names: employment in persons, short names elsewhere.
inline UnitPolicy analysis_unit_policy() {
  auto policy = replication_unit_policy();
  policy.rules.push_back({"pop_thousands", Unit::ThousandsOfPersons, "pop"});
  policy.rules.push_back({"ngi_million_mcf", Unit::MillionMcf, "ngi"});
  policy.rules.push_back({"import_price_usd_mcf", Unit::UsdPerMcf, "import_price"});
  return policy;
}

struct LoadedData {
  std::map<std::string, PanelDataset> tables;  // keyed by file name
  AdjacencyMap adjacency;
  std::map<std::string, fs::path> paths;

  const PanelDataset& table(const std::string& file) const { return tables.at(file); }
};

/// Loads every input file, failing on the first schema error.
inline LoadedData load_data_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError(dir.string() + ": not a directory");
  LoadedData out;
  for (const auto& f : input_files()) {
    const auto path = dir / f.file;
    out.tables.emplace(f.file, load_csv_table(path, f.schema));
    out.paths[f.file] = path;
  }
  const auto adj = dir / std::string(kAdjacencyFile);
  out.adjacency = load_adjacency(adj);
  out.paths[std::string(kAdjacencyFile)] = adj;
  return out;
}

inline std::map<int, double> load_warmup(const fs::path& path) {
  const auto t = load_csv_table(path, warmup_schema());
  std::map<int, double> out;
  const auto& v = t.column("import_price_usd_mcf").values;
  for (std::size_t i = 0; i < t.row_count(); ++i) {
    if (!v[i]) throw DataError(path.string() + ": missing price for year " + std::to_string(t.rows()[i].year));
    out[t.rows()[i].year] = *v[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Validation

namespace detail {

inline std::set<int> years_of(const PanelDataset& t) {
  const auto y = t.years();
  return {y.begin(), y.end()};
}

inline std::set<int> states_of(const PanelDataset& t) {
  const auto s = t.state_ids();
  return {s.begin(), s.end()};
}

inline void check_nonnegative(std::vector<std::string>& out, const std::string& file, const PanelDataset& t,
                              const std::string& column, bool strictly_positive) {
  const auto& v = t.column(column).values;
  for (std::size_t i = 0; i < t.row_count(); ++i) {
    if (!v[i]) continue;
    if (*v[i] < 0.0 || (strictly_positive && *v[i] == 0.0))
      out.push_back(file + ": " + describe(t.rows()[i], t.kind()) + ": column " + column + ": value " +
                    full(*v[i]) + (strictly_positive ? " must be positive" : " must be nonnegative"));
  }
}

inline void check_complete(std::vector<std::string>& out, const std::string& file, const PanelDataset& t,
                           const std::string& column) {
  const auto& v = t.column(column).values;
  for (std::size_t i = 0; i < t.row_count(); ++i)
    if (!v[i]) out.push_back(file + ": " + describe(t.rows()[i], t.kind()) + ": column " + column + ": missing");
}

}  // namespace detail

/// Every schema, unit, key and adjacency violation found in `dir`, each
/// naming the file and the offending row and column. Empty means valid.
inline std::vector<std::string> validate_data_dir(const fs::path& dir) {
  std::vector<std::string> out;
  if (!fs::is_directory(dir)) return {dir.string() + ": not a directory"};
  std::map<std::string, PanelDataset> t;
  for (const auto& f : input_files()) {
    try {
      t.emplace(f.file, load_csv_table(dir / f.file, f.schema));
    } catch (const DataError& e) {
      out.push_back(e.what());
    }
  }
  std::optional<AdjacencyMap> adjacency;
  try {
    adjacency = load_adjacency(dir / std::string(kAdjacencyFile), false);
  } catch (const DataError& e) {
    out.push_back(e.what());
  }
  if (adjacency)
    for (const auto& v : adjacency_violations(*adjacency)) out.push_back(std::string(kAdjacencyFile) + ": " + v);

  auto has = [&](const char* f) { return t.contains(f); };

  if (has("states.csv")) {
    const auto& s = t.at("states.csv");
    const auto& south = s.column("is_south").values;
    const auto& direct = s.column("dist_border_km").values;
    const auto& cdmx = s.column("dist_cdmx_km").values;
    for (std::size_t i = 0; i < s.row_count(); ++i) {
      const auto where = "states.csv: " + describe(s.rows()[i], s.kind());
      if (!south[i] || (*south[i] != 0.0 && *south[i] != 1.0)) {
        out.push_back(where + ": column is_south: must be 0 or 1");
        continue;
      }
      if (*south[i] == 1.0 && !cdmx[i]) out.push_back(where + ": column dist_cdmx_km: required for southern states");
      if (*south[i] == 0.0 && !direct[i]) out.push_back(where + ": column dist_border_km: required");
    }
    detail::check_nonnegative(out, "states.csv", s, "dist_border_km", false);
    detail::check_nonnegative(out, "states.csv", s, "dist_cdmx_km", false);
    if (adjacency) {
      const auto known = detail::states_of(s);
      for (const auto& [a, ns] : adjacency->neighbours) {
        if (!known.contains(a))
          out.push_back(std::string(kAdjacencyFile) + ": state_id " + std::to_string(a) + " is not in states.csv");
        for (int n : ns)
          if (!known.contains(n))
            out.push_back(std::string(kAdjacencyFile) + ": neighbor_id " + std::to_string(n) +
                          " is not in states.csv");
      }
    }
  }
  if (has("employment.csv")) {
    detail::check_complete(out, "employment.csv", t.at("employment.csv"), "emp_nonmining_thousands");
    detail::check_nonnegative(out, "employment.csv", t.at("employment.csv"), "emp_nonmining_thousands", false);
    detail::check_nonnegative(out, "employment.csv", t.at("employment.csv"), "emp_mining_thousands", false);
  }
  if (has("population.csv")) {
    detail::check_complete(out, "population.csv", t.at("population.csv"), "pop_thousands");
    detail::check_nonnegative(out, "population.csv", t.at("population.csv"), "pop_thousands", true);
  }
  if (has("imports.csv")) {
    detail::check_complete(out, "imports.csv", t.at("imports.csv"), "ngi_million_mcf");
    detail::check_complete(out, "imports.csv", t.at("imports.csv"), "import_price_usd_mcf");
    detail::check_nonnegative(out, "imports.csv", t.at("imports.csv"), "ngi_million_mcf", false);
    detail::check_nonnegative(out, "imports.csv", t.at("imports.csv"), "import_price_usd_mcf", true);
  }
  if (has("prices.csv")) detail::check_nonnegative(out, "prices.csv", t.at("prices.csv"), "ng_price_nominal_pesos_gj", true);
  if (has("deflator.csv")) detail::check_nonnegative(out, "deflator.csv", t.at("deflator.csv"), "gdp_deflator_2015base", true);

  // Key-space agreement between files.
  if (has("employment.csv") && has("population.csv")) {
    const auto& e = t.at("employment.csv");
    const auto& p = t.at("population.csv");
    for (const auto& r : e.rows())
      if (!p.find_row(r)) out.push_back("population.csv: no row for " + describe(r, KeyKind::Panel));
    for (const auto& r : p.rows())
      if (!e.find_row(r)) out.push_back("employment.csv: no row for " + describe(r, KeyKind::Panel));
  }
  std::set<int> panel_states;
  std::set<int> panel_years;
  for (const char* f : {"employment.csv", "population.csv", "prices.csv"}) {
    if (!has(f)) continue;
    for (int s : t.at(f).state_ids()) panel_states.insert(s);
    for (int y : t.at(f).years()) panel_years.insert(y);
  }
  if (has("states.csv")) {
    const auto known = detail::states_of(t.at("states.csv"));
    for (int s : panel_states)
      if (!known.contains(s)) out.push_back("states.csv: no row for state " + std::to_string(s));
    for (int s : known)
      if (!panel_states.contains(s)) out.push_back("states.csv: state " + std::to_string(s) + " has no panel rows");
  }
  for (const char* f : {"imports.csv", "deflator.csv"}) {
    if (!has(f)) continue;
    const auto ys = detail::years_of(t.at(f));
    for (int y : panel_years)
      if (!ys.contains(y)) out.push_back(std::string(f) + ": missing year " + std::to_string(y));
  }
  if (has("deflator.csv") && !detail::years_of(t.at("deflator.csv")).contains(kDeflatorBaseYear))
    out.push_back("deflator.csv: missing base year " + std::to_string(kDeflatorBaseYear));
  return out;
}

// ---------------------------------------------------------------------------
// Analysis panel

struct AnalysisOptions {
  CovarianceVariant covariance = CovarianceVariant::HC1;
  IvMode iv_mode = IvMode::InteractedInstruments;
  std::optional<double> cdmx_to_border_km;
  std::map<int, double> warmup;  // pre-sample import prices
};

struct AnalysisData {
  PanelDataset panel;
  InstrumentSet instruments;
  double cdmx_to_border_km = 0.0;
};

/// Mexico City's own border distance, read from its states.csv row.
inline double cdmx_border_distance(const PanelDataset& states) {
  for (int id : states.state_ids()) {
    const auto name = states.state_name(id);
    if (name == "Ciudad de México" || name == "Mexico City" || name == "Distrito Federal") {
      const auto& v = states.column("dist_border_km").values[*states.find_row({id, 0})];
      if (!v) throw DataError("states.csv: Mexico City row lacks dist_border_km");
      return *v;
    }
  }
  throw DataError("states.csv has no Mexico City row; pass the Mexico City to border distance explicitly");
}

/// assemble -> interpolate prices -> deflate -> instruments. Columns:
/// emp_nonmining, emp_mining (persons), pop (thousands), ngi, import_price,
/// dist, is_south, ng_price_nominal_pesos_gj (interpolated), ng_price (real),
/// price_lag1, price_ar3.
inline AnalysisData build_analysis(const LoadedData& data, const AnalysisOptions& options) {
  AnalysisData out;
  const auto& states = data.table("states.csv");
  out.cdmx_to_border_km = options.cdmx_to_border_km ? *options.cdmx_to_border_km : cdmx_border_distance(states);
  const auto states_dist = with_effective_distance(states, out.cdmx_to_border_km, "dist");

  auto panel = assemble_panel({data.table("employment.csv"), data.table("population.csv"),
                               data.table("prices.csv"), states_dist, data.table("imports.csv"),
                               data.table("deflator.csv")},
                              analysis_unit_policy());
  panel = interpolate_missing_state_prices(panel, "ng_price_nominal_pesos_gj", data.adjacency);
  panel = deflate_prices(panel, "ng_price_nominal_pesos_gj", "gdp_deflator_2015base", kDeflatorBaseYear,
                         "ng_price");

  const auto& imports = data.table("imports.csv");
  std::map<int, double> price;
  const auto& pv = imports.column("import_price_usd_mcf").values;
  for (std::size_t i = 0; i < imports.row_count(); ++i)
    if (pv[i]) price[imports.rows()[i].year] = *pv[i];
  out.instruments = build_instruments(price, options.warmup);

  Column lag{{std::string(kLagInstrument), Unit::UsdPerMcf, Role::Regressor}, {}};
  Column ar{{std::string(kArInstrument), Unit::UsdPerMcf, Role::Regressor}, {}};
  for (const auto& r : panel.rows()) {
    const auto it = std::find(out.instruments.years.begin(), out.instruments.years.end(), r.year);
    const auto k = static_cast<std::size_t>(it - out.instruments.years.begin());
    const bool found = it != out.instruments.years.end();
    lag.values.push_back(found ? out.instruments.lag1_price[k] : Value{});
    ar.values.push_back(found ? out.instruments.ar3_predicted_price[k] : Value{});
  }
  out.panel = panel.with_column(std::move(lag)).with_column(std::move(ar));
  return out;
}

// ---------------------------------------------------------------------------
// Replication models

inline constexpr std::array<std::string_view, 2> kDependents{"emp_nonmining", "emp_mining"};

inline std::string dependent_label(std::string_view dep) {
  return dep == "emp_mining" ? "Mining" : "Non-mining";
}

/// Quantity-effect model; `iv` instruments ngi with the price instruments.
inline ModelSpec quantity_model(const std::string& dependent, bool state_fe, bool iv, CovarianceVariant cov,
                                IvMode mode) {
  ModelSpec s;
  s.dependent = dependent;
  s.fixed_effects = state_fe ? FixedEffects::State : FixedEffects::None;
  s.covariance = cov;
  s.interactions = {{"ngi", "dist"}};
  s.exogenous = {"pop"};
  if (!state_fe) s.exogenous.push_back("dist");
  if (iv) {
    s.endogenous = {"ngi"};
    s.instruments = {std::string(kLagInstrument), std::string(kArInstrument)};
    s.iv_mode = mode;
  } else {
    s.exogenous.insert(s.exogenous.begin() + 1, "ngi");
  }
  s.name = std::string(iv ? "iv_" : "") + (state_fe ? "fe_" : "ols_") + dependent;
  s.validate();
  return s;
}

/// Price-effect model, estimated in logs.
inline ModelSpec price_model(const std::string& dependent, bool state_fe, CovarianceVariant cov) {
  ModelSpec s;
  s.dependent = dependent;
  s.fixed_effects = state_fe ? FixedEffects::State : FixedEffects::None;
  s.covariance = cov;
  s.exogenous = {"pop", "ng_price"};
  if (!state_fe) s.exogenous.push_back("dist");
  s.interactions = {{"dist", "ng_price"}};
  s.log_columns = {dependent, "pop", "ng_price", "dist"};
  s.name = std::string("price_") + (state_fe ? "fe_" : "ols_") + dependent;
  s.validate();
  return s;
}

/// States listed in the selected-states margins table, north to south.
inline const std::vector<std::string>& selected_margin_states() {
  static const std::vector<std::string> names{"Sonora", "Tamaulipas", "Durango", "Aguascalientes",
                                              "México", "Oaxaca",     "Chiapas", "Quintana Roo"};
  return names;
}

struct ReplicationResult {
  std::vector<SummaryRow> summary;
  std::vector<FitResult> quantity;      // per dependent: OLS, FE
  std::vector<FitResult> quantity_iv;   // per dependent: OLS, FE
  std::vector<TestResult> wu_hausman;   // aligned with quantity_iv
  std::vector<TestResult> first_stage;  // aligned with quantity_iv
  std::vector<FitResult> price;         // per dependent: OLS, FE
  MarginalEffectTable margins;          // selected states
  MarginalEffectTable margins_all;      // every state
  double average_all = 0.0;
  double average_south = 0.0;
  ElasticitySummary elasticity;
  double mean_real_price = 0.0;
  double mean_mining_employment = 0.0;
  double mean_nominal_price = 0.0;
  struct Screen {
    std::string dependent;
    std::vector<std::string> columns;
    Matrix correlation;
    std::vector<VifRow> vif;
  };
  std::vector<Screen> screens_quantity;
  std::vector<Screen> screens_price;
};

namespace detail {

template <class F>
auto stage(const std::string& name, F&& f) {
  try {
    return f();
  } catch (const DataError& e) {
    throw DataError(name + ": " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(name + ": " + e.what());
  } catch (const SpecError& e) {
    throw SpecError(name + ": " + e.what());
  }
}

inline double column_mean(const PanelDataset& panel, const std::string& col, const std::string& present) {
  const auto& v = panel.column(col).values;
  const auto& p = panel.column(present).values;
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < panel.row_count(); ++i) {
    if (!v[i] || !p[i]) continue;
    sum += *v[i];
    ++n;
  }
  if (n == 0) throw DataError("no rows with both " + col + " and " + present);
  return sum / static_cast<double>(n);
}

}  // namespace detail

inline ReplicationResult run_replication(const AnalysisData& data, const AnalysisOptions& options) {
  const auto& panel = data.panel;
  ReplicationResult r;
  r.summary = detail::stage("summary statistics", [&] {
    return summary_stats(panel, {"emp_nonmining", "emp_mining", "ngi", "pop", "dist", "import_price",
                                 "ng_price_nominal_pesos_gj", "ng_price"});
  });

  for (const auto dep : kDependents) {
    const std::string d(dep);
    for (bool fe : {false, true}) {
      r.quantity.push_back(detail::stage("quantity fit", [&] {
        return fit(quantity_model(d, fe, false, options.covariance, options.iv_mode), panel);
      }));
      const auto iv = quantity_model(d, fe, true, options.covariance, options.iv_mode);
      r.quantity_iv.push_back(detail::stage("IV fit", [&] { return fit(iv, panel); }));
      r.wu_hausman.push_back(detail::stage("Wu-Hausman test", [&] { return wu_hausman(iv, panel); }));
      r.first_stage.push_back(detail::stage("first-stage F", [&] { return first_stage_f(iv, panel); }));
      r.price.push_back(detail::stage("price fit", [&] {
        return fit(price_model(d, fe, options.covariance), panel);
      }));
    }
  }

  detail::stage("margins", [&] {
    const auto& basis_fit = r.quantity_iv[1];  // IV FE, non-mining
    const auto basis = linear_effect(basis_fit, "ngi", "dist");
    std::vector<StateDistance> all;
    std::vector<StateDistance> south;
    std::map<std::string, StateDistance> by_name;
    const auto& dist = panel.column("dist").values;
    const auto& is_south = panel.column("is_south").values;
    for (int id : panel.state_ids()) {
      const auto row = *panel.find_row({id, panel.years().front()});
      StateDistance sd{panel.state_name(id), *dist[row]};
      all.push_back(sd);
      if (is_south[row] && *is_south[row] != 0.0) south.push_back(sd);
      by_name[sd.state] = sd;
    }
    std::vector<StateDistance> selected;
    for (const auto& n : selected_margin_states())
      if (auto it = by_name.find(n); it != by_name.end()) selected.push_back(it->second);
    if (selected.empty()) selected = all;
    r.margins = marginal_effects(basis, selected);
    r.margins_all = marginal_effects(basis, all);
    r.average_all = average_effect(basis, all);
    r.average_south = south.empty() ? NAN : average_effect(basis, south);
    return 0;
  });

  detail::stage("elasticity", [&] {
    r.mean_real_price = detail::column_mean(panel, "ng_price", "ng_price");
    r.mean_nominal_price = detail::column_mean(panel, "ng_price_nominal_pesos_gj", "ng_price");
    r.mean_mining_employment = detail::column_mean(panel, "emp_mining", "ng_price");
    r.elasticity = elasticity_summary(r.price[3], "log_ng_price", r.mean_real_price, r.mean_mining_employment);
    return 0;
  });

  detail::stage("multicollinearity screens", [&] {
    for (const auto dep : kDependents) {
      const std::vector<std::string> q{std::string(dep), "pop", "ngi", "dist"};
      r.screens_quantity.push_back({std::string(dep), q, correlation_matrix(panel, q),
                                    vif(panel, {q.begin() + 1, q.end()})});
      const std::vector<std::string> p{std::string(dep), "pop", "ng_price", "dist"};
      const std::set<std::string> logs(p.begin(), p.end());
      r.screens_price.push_back({std::string(dep), p, correlation_matrix(panel, p, logs),
                                 vif(panel, {p.begin() + 1, p.end()}, logs)});
    }
    return 0;
  });
  return r;
}

// ---------------------------------------------------------------------------
// Table files

struct RenderedTable {
  std::string stem;
  std::string text;
  std::string csv;
  Json json;
};

inline std::vector<std::string> variant_notes(const AnalysisOptions& o) {
  return {"Covariance: " + std::string(to_string(o.covariance)) + "; p-values in parentheses.",
          "Employment is measured as the direct count (persons)."};
}

inline std::vector<RenderedTable> render_replication(const ReplicationResult& r, const AnalysisOptions& o) {
  std::vector<RenderedTable> out;
  auto fit_columns = [](const std::vector<FitResult>& fits, const std::vector<TestResult>* wh,
                        const std::vector<TestResult>* fs) {
    std::vector<FitColumn> cols;
    for (std::size_t i = 0; i < fits.size(); ++i) {
      FitColumn c{dependent_label(fits[i].spec.dependent) + " " +
                      (fits[i].spec.fixed_effects == FixedEffects::State ? "FE" : "OLS"),
                  &fits[i], std::nullopt, std::nullopt};
      if (wh) c.wu_hausman = (*wh)[i];
      if (fs) c.first_stage = (*fs)[i];
      cols.push_back(std::move(c));
    }
    return cols;
  };
  auto fits_json = [](const std::vector<FitColumn>& cols) {
    Json j = Json::array();
    for (const auto& c : cols) {
      Json f = to_json(*c.fit);
      f["column"] = c.header;
      if (c.wu_hausman) f["wu_hausman"] = to_json(*c.wu_hausman);
      if (c.first_stage) f["first_stage_f"] = to_json(*c.first_stage);
      j.push_back(std::move(f));
    }
    return j;
  };

  {
    std::vector<std::string> notes{"Southern states: distance to Mexico City plus Mexico City's border distance.",
                                   "Prices after neighbour interpolation; real prices in 2015 Pesos."};
    out.push_back({"table2_summary", render_summary_table(r.summary, "Summary statistics", notes),
                   summary_csv(r.summary), to_json(r.summary)});
  }
  {
    const auto cols = fit_columns(r.quantity, nullptr, nullptr);
    out.push_back({"table3_quantity_ols_fe",
                   render_fit_table("OLS and state fixed-effects estimates of employment impacts (quantity effect)",
                                    cols, variant_notes(o)),
                   fits_csv(cols), fits_json(cols)});
  }
  {
    const auto cols = fit_columns(r.quantity_iv, &r.wu_hausman, &r.first_stage);
    auto notes = variant_notes(o);
    notes.push_back("Instrumented: natural gas import. Instruments: one-year lagged import price, AR(3) "
                    "predicted import price.");
    notes.push_back("Interaction handling: " + std::string(to_string(o.iv_mode)) + ".");
    out.push_back({"table4_quantity_iv",
                   render_fit_table("Instrumental variable estimates of employment impacts", cols, notes),
                   fits_csv(cols), fits_json(cols)});
  }
  {
    std::vector<std::string> notes{
        "Basis: " + r.quantity_iv[1].model_name + ", effect = " + fixed(r.margins.basis.main) + " + distance x " +
            fixed(r.margins.basis.slope, 4) + ".",
        "Average over all states: " + fixed(r.average_all) + " jobs per million MCFs.",
        "Average over southern states: " + fixed(r.average_south) + " jobs per million MCFs."};
    Json j = to_json(r.margins);
    j["all_states"] = to_json(r.margins_all)["rows"];
    j["average_all"] = json_number(r.average_all);
    j["average_south"] = json_number(r.average_south);
    out.push_back({"table5_margins",
                   render_margins_table(r.margins, "Estimated marginal employment impact of natural gas import "
                                                   "for selected states (quantity effect)",
                                        notes),
                   margins_csv(r.margins_all), j});
  }
  {
    const auto cols = fit_columns(r.price, nullptr, nullptr);
    auto notes = variant_notes(o);
    notes.push_back("Elasticity: " + elasticity_line(r.elasticity) + " at mean real price " +
                    fixed(r.mean_real_price) + " and mean mining employment " + fixed(r.mean_mining_employment) +
                    ".");
    Json j = fits_json(cols);
    Json doc{{"fits", j},
             {"elasticity", to_json(r.elasticity)},
             {"mean_real_price", r.mean_real_price},
             {"mean_nominal_price", r.mean_nominal_price},
             {"mean_mining_employment", r.mean_mining_employment}};
    out.push_back({"table6_price",
                   render_fit_table("OLS and state fixed-effects estimates of employment impacts (price effect)",
                                    cols, notes),
                   fits_csv(cols), doc});
  }
  auto screens = [&](const std::vector<ReplicationResult::Screen>& ss, const std::string& stem,
                     const std::string& title, const std::vector<std::string>& labels) {
    std::string text = title + "\n";
    std::string csv;
    Json j = Json::array();
    for (const auto& s : ss) {
      text += "\n" + render_screen_table("Dependent variable: " + dependent_label(s.dependent) + " employment",
                                         labels, s.correlation, s.vif);
      std::istringstream lines(screen_csv(s.columns, s.correlation, s.vif));
      std::string line;
      std::getline(lines, line);
      if (csv.empty()) csv = "dependent," + line.substr(line.find(',') + 1) + "\n";
      while (std::getline(lines, line)) csv += s.dependent + "," + line + "\n";
      Json block = screen_json(s.columns, s.correlation, s.vif);
      block["dependent"] = s.dependent;
      j.push_back(std::move(block));
    }
    out.push_back({stem, text, csv, j});
  };
  screens(r.screens_quantity, "tableA1_screen_quantity",
          "Correlation and multicollinearity screen for the quantity effect model",
          {"Total employment", "Total population", "Natural gas import", "Distance to border"});
  screens(r.screens_price, "tableA2_screen_price",
          "Correlation and multicollinearity screen for the price effect model (logs)",
          {"Total employment", "Total population", "Natural gas price", "Distance to border"});
  return out;
}

}  // namespace gaspanel
