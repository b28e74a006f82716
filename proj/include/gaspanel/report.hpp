#pragma once

// Rendering of fits, diagnostics, margins and Monte Carlo reports as aligned
// text tables, CSV and JSON, plus the key = value configuration reader and
// the run manifest embedded in every result file.

#include <openssl/evp.h>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gaspanel/diagnostics.hpp"
#include "gaspanel/effects.hpp"
#include "gaspanel/errors.hpp"
#include "gaspanel/estimators.hpp"
#include "gaspanel/montecarlo.hpp"
#include "gaspanel/panel_data.hpp"

namespace gaspanel {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kVersion = "1.0.0";

// ---------------------------------------------------------------------------
// Number formatting

/// Fixed-point display with `decimals` digits; negative zero prints as zero.
inline std::string fixed(double v, int decimals = 2) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
  return s;
}

/// Round-trip precision for CSV output.
inline std::string full(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  // shortest text that reads back to the same double
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline Json json_number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

inline double number_from_json(const Json& j) {
  if (j.is_number()) return j.get<double>();
  const auto s = j.get<std::string>();
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  return NAN;
}

/// Pads every column of `cells` to its widest entry.
inline std::string align_table(const std::vector<std::vector<std::string>>& cells) {
  std::vector<std::size_t> width;
  for (const auto& row : cells) {
    if (width.size() < row.size()) width.resize(row.size(), 0);
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  for (const auto& row : cells) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c == 0) {
        line += row[c] + std::string(width[c] - row[c].size(), ' ');
      } else {
        line += "  " + std::string(width[c] - row[c].size(), ' ') + row[c];
      }
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Digest and manifest

inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i)
    out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return out.str();
}

inline std::string file_sha256(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return sha256_hex(buf.str());
}

/// Provenance of a command run. Everything except the timestamp and the
/// wall time determines the result files.
struct RunManifest {
  std::string command;
  Json config = Json::object();
  std::map<std::string, std::string> input_digests;
  std::string covariance;
  std::string iv_mode;
  std::optional<std::uint64_t> seed;
  std::string timestamp;
  std::optional<double> wall_seconds;

  Json body() const {
    Json j;
    j["command"] = command;
    j["config"] = config;
    Json inputs = Json::object();
    for (const auto& [k, v] : input_digests) inputs[k] = v;
    j["inputs_sha256"] = inputs;
    j["versions"] = {{"gaspanel", std::string(kVersion)},
                     {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                   std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                   std::to_string(EIGEN_MINOR_VERSION)},
                     {"rng", std::string(kRngName) + " v" + std::to_string(kRngVersion)}};
    j["covariance"] = covariance;
    j["iv_mode"] = iv_mode;
    if (seed) j["seed"] = *seed;
    return j;
  }

  std::string id() const { return sha256_hex(body().dump()).substr(0, 16); }

  Json to_json() const {
    Json j;
    j["manifest_id"] = id();
    j["timestamp"] = timestamp;
    if (wall_seconds) j["wall_seconds"] = *wall_seconds;
    j.update(body());
    return j;
  }
};

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ---------------------------------------------------------------------------
// Configuration files

struct ConfigSection {
  std::string name;
  std::vector<std::pair<std::string, std::string>> entries;

  std::optional<std::string> get(std::string_view key) const {
    for (const auto& [k, v] : entries)
      if (k == key) return v;
    return std::nullopt;
  }
};

/// `[section]` headers followed by `key = value` lines; `;` starts a comment.
inline std::vector<ConfigSection> read_config(std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw SpecError(std::string("config: ") + e.what());
  }
  std::vector<ConfigSection> out;
  ConfigSection top{"", {}};
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      top.entries.emplace_back(name, node.data());
      continue;
    }
    ConfigSection section{name, {}};
    for (const auto& [k, v] : node) section.entries.emplace_back(k, v.data());
    out.push_back(std::move(section));
  }
  if (!top.entries.empty()) out.insert(out.begin(), std::move(top));
  return out;
}

inline std::vector<ConfigSection> read_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SpecError(path.string() + ": cannot open config file");
  return read_config(in);
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

/// One model per section. Keys: dependent, exogenous, interactions
/// (a*b, ...), log, fixed_effects, endogenous, instruments, iv_mode,
/// covariance.
inline ModelSpec model_spec_from_config(const ConfigSection& section) {
  ModelSpec spec;
  spec.name = section.name.empty() ? "model" : section.name;
  static const std::set<std::string> known{"dependent",  "exogenous",   "interactions", "log",
                                           "fixed_effects", "endogenous", "instruments", "iv_mode",
                                           "covariance"};
  for (const auto& [k, v] : section.entries)
    if (!known.contains(k)) throw SpecError("model '" + spec.name + "': unknown key '" + k + "'");
  spec.dependent = section.get("dependent").value_or("");
  if (auto v = section.get("exogenous")) spec.exogenous = split_list(*v);
  if (auto v = section.get("interactions")) {
    for (const auto& term : split_list(*v)) {
      const auto star = term.find('*');
      if (star == std::string::npos)
        throw SpecError("model '" + spec.name + "': interaction '" + term + "' must be a*b");
      spec.interactions.push_back({term.substr(0, star), term.substr(star + 1)});
    }
  }
  if (auto v = section.get("log"))
    for (auto& c : split_list(*v)) spec.log_columns.insert(c);
  if (auto v = section.get("fixed_effects")) spec.fixed_effects = fixed_effects_from_string(*v);
  if (auto v = section.get("endogenous")) spec.endogenous = split_list(*v);
  if (auto v = section.get("instruments")) spec.instruments = split_list(*v);
  if (auto v = section.get("iv_mode")) spec.iv_mode = iv_mode_from_string(*v);
  if (auto v = section.get("covariance")) spec.covariance = covariance_from_string(*v);
  spec.validate();
  return spec;
}

namespace detail {

inline double parse_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size() || v.empty()) throw SpecError("config key '" + key + "': not a number: '" + v + "'");
  return out;
}

}  // namespace detail

/// Applies `[dgp]` keys onto `base`. Unknown keys are an error.
inline DGPConfig dgp_from_config(const ConfigSection& section, DGPConfig cfg = {}) {
  std::map<std::string, double*> doubles{
      {"beta_pop", &cfg.beta_pop},
      {"beta_ngi", &cfg.beta_ngi},
      {"beta_interaction", &cfg.beta_interaction},
      {"sigma_mu", &cfg.sigma_mu},
      {"sigma_eps", &cfg.sigma_eps},
      {"rho", &cfg.rho},
      {"year_shock_loading", &cfg.year_shock_loading},
      {"price_mean", &cfg.price_mean},
      {"price_phi1", &cfg.price_phi[0]},
      {"price_phi2", &cfg.price_phi[1]},
      {"price_phi3", &cfg.price_phi[2]},
      {"price_innovation_sd", &cfg.price_innovation_sd},
      {"ngi_mean", &cfg.ngi_mean},
      {"gamma_lag", &cfg.gamma_lag},
      {"gamma_ar", &cfg.gamma_ar},
      {"ngi_shock_sd", &cfg.ngi_shock_sd},
      {"dist_mean", &cfg.dist_mean},
      {"dist_sd", &cfg.dist_sd},
      {"pop_mean", &cfg.pop_mean},
      {"pop_sd", &cfg.pop_sd},
      {"pop_growth", &cfg.pop_growth},
      {"pop_noise", &cfg.pop_noise},
  };
  std::map<std::string, int*> ints{{"n_states", &cfg.n_states},
                                   {"n_years", &cfg.n_years},
                                   {"first_year", &cfg.first_year},
                                   {"price_burn_in", &cfg.price_burn_in}};
  for (const auto& [k, v] : section.entries) {
    if (auto it = doubles.find(k); it != doubles.end()) {
      *it->second = detail::parse_double(k, v);
    } else if (auto jt = ints.find(k); jt != ints.end()) {
      auto parsed = parse_int_cell(v);
      if (!parsed) throw SpecError("config key '" + k + "': not an integer: '" + v + "'");
      *jt->second = *parsed;
    } else if (k == "seed") {
      try {
        cfg.seed = std::stoull(v);
      } catch (const std::exception&) {
        throw SpecError("config key 'seed': not an unsigned integer: '" + v + "'");
      }
    } else {
      throw SpecError("[dgp]: unknown key '" + k + "'");
    }
  }
  cfg.validate();
  return cfg;
}

inline Json to_json(const DGPConfig& c) {
  return {{"n_states", c.n_states},
          {"n_years", c.n_years},
          {"first_year", c.first_year},
          {"beta_pop", c.beta_pop},
          {"beta_ngi", c.beta_ngi},
          {"beta_interaction", c.beta_interaction},
          {"sigma_mu", c.sigma_mu},
          {"sigma_eps", c.sigma_eps},
          {"rho", c.rho},
          {"year_shock_loading", c.year_shock_loading},
          {"price_mean", c.price_mean},
          {"price_phi", {c.price_phi[0], c.price_phi[1], c.price_phi[2]}},
          {"price_innovation_sd", c.price_innovation_sd},
          {"price_burn_in", c.price_burn_in},
          {"ngi_mean", c.ngi_mean},
          {"gamma_lag", c.gamma_lag},
          {"gamma_ar", c.gamma_ar},
          {"ngi_shock_sd", c.ngi_shock_sd},
          {"dist_mean", c.dist_mean},
          {"dist_sd", c.dist_sd},
          {"pop_mean", c.pop_mean},
          {"pop_sd", c.pop_sd},
          {"pop_growth", c.pop_growth},
          {"pop_noise", c.pop_noise},
          {"seed", c.seed}};
}

// ---------------------------------------------------------------------------
// Fit serialisation

inline Json to_json(const ModelSpec& s) {
  Json inter = Json::array();
  for (const auto& i : s.interactions) inter.push_back(i.left + "*" + i.right);
  return {{"name", s.name},
          {"dependent", s.dependent},
          {"exogenous", s.exogenous},
          {"interactions", inter},
          {"log", std::vector<std::string>(s.log_columns.begin(), s.log_columns.end())},
          {"fixed_effects", std::string(to_string(s.fixed_effects))},
          {"endogenous", s.endogenous},
          {"instruments", s.instruments},
          {"iv_mode", std::string(to_string(s.iv_mode))},
          {"covariance", std::string(to_string(s.covariance))}};
}

inline Json to_json(const FitResult& f) {
  Json coefs = Json::array();
  for (std::size_t j = 0; j < f.names.size(); ++j) {
    const auto i = static_cast<Index>(j);
    coefs.push_back({{"name", f.names[j]},
                     {"estimate", json_number(f.coefficients(i))},
                     {"std_error", json_number(f.std_errors(i))},
                     {"t", json_number(f.t_stats(i))},
                     {"p_value", json_number(f.p_values(i))},
                     {"omitted", static_cast<bool>(f.omitted[j])}});
  }
  Json cov = Json::array();
  for (Index r = 0; r < f.covariance.rows(); ++r) {
    Json row = Json::array();
    for (Index c = 0; c < f.covariance.cols(); ++c) row.push_back(json_number(f.covariance(r, c)));
    cov.push_back(row);
  }
  Json fe = Json::object();
  for (const auto& [state, mu] : f.fixed_effects) fe[std::to_string(state)] = json_number(mu);
  return {{"model", f.model_name},
          {"estimator", std::string(to_string(f.estimator))},
          {"spec", to_json(f.spec)},
          {"coefficients", coefs},
          {"covariance", cov},
          {"n_obs", f.n_obs},
          {"df_residual", f.df_residual},
          {"absorbed_groups", f.absorbed_groups},
          {"r_squared", json_number(f.r_squared)},
          {"within_r_squared", json_number(f.within_r_squared)},
          {"fixed_effects", fe},
          {"notes", f.notes}};
}

/// Restores the parts of a fit needed downstream (coefficients, covariance,
/// inference). Residuals are not stored in the JSON form.
inline FitResult fit_from_json(const Json& j) {
  FitResult f;
  try {
    f.model_name = j.value("model", std::string("fit"));
    const auto& coefs = j.at("coefficients");
    const Index k = static_cast<Index>(coefs.size());
    f.coefficients.resize(k);
    f.std_errors = Vector::Zero(k);
    f.t_stats = Vector::Zero(k);
    f.p_values = Vector::Ones(k);
    for (Index i = 0; i < k; ++i) {
      const auto& c = coefs[static_cast<std::size_t>(i)];
      f.names.push_back(c.at("name").get<std::string>());
      f.coefficients(i) = number_from_json(c.at("estimate"));
      f.omitted.push_back(c.value("omitted", false));
      if (c.contains("std_error")) f.std_errors(i) = number_from_json(c["std_error"]);
      if (c.contains("t")) f.t_stats(i) = number_from_json(c["t"]);
      if (c.contains("p_value")) f.p_values(i) = number_from_json(c["p_value"]);
    }
    const auto& cov = j.at("covariance");
    if (static_cast<Index>(cov.size()) != k) throw SpecError("covariance size does not match coefficients");
    f.covariance.resize(k, k);
    for (Index r = 0; r < k; ++r) {
      if (static_cast<Index>(cov[static_cast<std::size_t>(r)].size()) != k)
        throw SpecError("covariance must be square");
      for (Index c = 0; c < k; ++c)
        f.covariance(r, c) = number_from_json(cov[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]);
    }
    f.n_obs = j.value("n_obs", Index{0});
    f.df_residual = j.value("df_residual", Index{0});
    f.r_squared = j.contains("r_squared") ? number_from_json(j["r_squared"]) : NAN;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("fit file: ") + e.what());
  }
  return f;
}

// ---------------------------------------------------------------------------
// Tables

/// Display labels for the replication's coefficient names.
inline std::string coefficient_label(const std::string& name) {
  static const std::map<std::string, std::string> labels{
      {"const", "Intercept"},
      {"pop", "Population (in 1000)"},
      {"ngi", "Natural gas import (million MCFs)"},
      {"dist", "Distance to border (km)"},
      {"ngi_x_dist", "Distance x Natural gas import"},
      {"log_pop", "Log(Population [in 1000])"},
      {"log_ng_price", "Log(Natural gas price [Peso/GJ])"},
      {"log_dist", "Log(Distance to border [km])"},
      {"log_dist_x_log_ng_price", "Log(Distance) x Log(Natural gas price)"},
      {"log_ng_price_x_log_dist", "Log(Distance) x Log(Natural gas price)"},
  };
  auto it = labels.find(name);
  return it == labels.end() ? name : it->second;
}

struct FitColumn {
  std::string header;
  const FitResult* fit = nullptr;
  std::optional<TestResult> wu_hausman;
  std::optional<TestResult> first_stage;
};

/// Side-by-side layout: estimate with the parenthesised p-value,
/// then fixed effects, diagnostics, R^2 and N.
inline std::string render_fit_table(const std::string& title, const std::vector<FitColumn>& columns,
                                    const std::vector<std::string>& notes = {}) {
  std::vector<std::string> order;
  for (const auto& c : columns)
    for (const auto& n : c.fit->names)
      if (n != "const" && std::find(order.begin(), order.end(), n) == order.end()) order.push_back(n);
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> head{""};
  for (const auto& c : columns) head.push_back(c.header);
  cells.push_back(head);
  for (const auto& name : order) {
    std::vector<std::string> row{coefficient_label(name)};
    for (const auto& c : columns) {
      const auto i = c.fit->find(name);
      if (!i || c.fit->omitted[*i]) {
        row.push_back("-");
      } else {
        const auto k = static_cast<Index>(*i);
        row.push_back(fixed(c.fit->coefficients(k)) + " (" + fixed(c.fit->p_values(k)) + ")");
      }
    }
    cells.push_back(row);
  }
  std::vector<std::string> fe{"Fixed effects"};
  std::vector<std::string> wh{"Wu-Hausman test (p-value)"};
  std::vector<std::string> fs{"First-stage F statistic"};
  std::vector<std::string> r2{"R^2"};
  std::vector<std::string> n{"Number of observations"};
  bool any_iv = false;
  for (const auto& c : columns) {
    fe.push_back(c.fit->spec.fixed_effects == FixedEffects::State ? "State" : "None");
    wh.push_back(c.wu_hausman ? fixed(c.wu_hausman->p_value) : "");
    fs.push_back(c.first_stage ? fixed(c.first_stage->statistic) : "");
    any_iv = any_iv || c.wu_hausman || c.first_stage;
    r2.push_back(fixed(c.fit->r_squared));
    n.push_back(std::to_string(c.fit->n_obs));
  }
  cells.push_back(fe);
  if (any_iv) {
    cells.push_back(wh);
    cells.push_back(fs);
  }
  cells.push_back(r2);
  cells.push_back(n);
  std::string out = title + "\n\n" + align_table(cells);
  if (!notes.empty()) {
    out += "\nNotes:\n";
    for (const auto& note : notes) out += "  " + note + "\n";
  }
  return out;
}

inline std::string fits_csv(const std::vector<FitColumn>& columns) {
  std::ostringstream out;
  out << "model,estimator,term,estimate,std_error,t,p_value,omitted,n_obs,df_residual,r_squared\n";
  for (const auto& c : columns) {
    const auto& f = *c.fit;
    for (std::size_t j = 0; j < f.names.size(); ++j) {
      const auto i = static_cast<Index>(j);
      out << c.header << ',' << to_string(f.estimator) << ',' << f.names[j] << ','
          << full(f.coefficients(i)) << ',' << full(f.std_errors(i)) << ',' << full(f.t_stats(i))
          << ',' << full(f.p_values(i)) << ',' << (f.omitted[j] ? 1 : 0) << ',' << f.n_obs << ','
          << f.df_residual << ',' << full(f.r_squared) << '\n';
    }
  }
  return out.str();
}

inline Json to_json(const TestResult& t) {
  Json inputs = Json::object();
  for (const auto& [k, v] : t.inputs) inputs[k] = v;
  return {{"name", t.name},
          {"statistic", json_number(t.statistic)},
          {"df1", t.df1},
          {"df2", t.df2},
          {"p_value", json_number(t.p_value)},
          {"null_hypothesis", t.null_hypothesis},
          {"weak_instruments", t.weak_instruments},
          {"saturated", t.saturated},
          {"inputs", inputs}};
}

inline std::string render_margins_table(const MarginalEffectTable& table, const std::string& title,
                                        const std::vector<std::string>& notes = {}) {
  std::vector<std::vector<std::string>> cells{
      {"State", "Distance to border (km)", "Estimated marginal effect", "Standard error"}};
  for (const auto& r : table.rows)
    cells.push_back({r.state, fixed(r.dist_km, 0), fixed(r.effect), fixed(r.std_error)});
  std::string out = title + "\n\n" + align_table(cells);
  out += "\nNote: standard errors by the delta method; marginal effects in jobs per million MCFs.\n";
  for (const auto& n : notes) out += n + "\n";
  return out;
}

inline std::string margins_csv(const MarginalEffectTable& table) {
  std::ostringstream out;
  out << "state,dist_km,effect,std_error,t,p_value\n";
  for (const auto& r : table.rows)
    out << r.state << ',' << full(r.dist_km) << ',' << full(r.effect) << ',' << full(r.std_error) << ','
        << full(r.t) << ',' << full(r.p_value) << '\n';
  return out.str();
}

inline Json to_json(const MarginalEffectTable& table) {
  Json rows = Json::array();
  for (const auto& r : table.rows)
    rows.push_back({{"state", r.state},
                    {"dist_km", r.dist_km},
                    {"effect", r.effect},
                    {"std_error", r.std_error},
                    {"t", json_number(r.t)},
                    {"p_value", r.p_value}});
  const auto& b = table.basis;
  return {{"basis",
           {{"main", b.main},
            {"slope", b.slope},
            {"var_main", b.var_main},
            {"cov_main_slope", b.cov_main_slope},
            {"var_slope", b.var_slope},
            {"df", b.df ? Json(*b.df) : Json(nullptr)}}},
          {"rows", rows}};
}

/// "1.82 Pesos/GJ -> +140.20 jobs (2.38%)"
inline std::string elasticity_line(const ElasticitySummary& s) {
  const std::string sign = s.employment_change >= 0.0 ? "+" : "";
  return fixed(s.price_step) + " Pesos/GJ -> " + sign + fixed(s.employment_change) + " jobs (" +
         fixed(s.percent_change) + "%)";
}

inline Json to_json(const ElasticitySummary& s) {
  return {{"elasticity", s.elasticity},
          {"price_step", s.price_step},
          {"employment_change", s.employment_change},
          {"percent_change", s.percent_change},
          {"line", elasticity_line(s)}};
}

inline std::string render_summary_table(const std::vector<SummaryRow>& rows, const std::string& title,
                                        const std::vector<std::string>& notes = {}) {
  std::vector<std::vector<std::string>> cells{{"Variable", "Unit", "N", "Mean", "Min", "Max", "Std. Dev."}};
  for (const auto& r : rows)
    cells.push_back({r.name, std::string(to_string(r.unit)), std::to_string(r.n), fixed(r.mean), fixed(r.min),
                     fixed(r.max), fixed(r.std_dev)});
  std::string out = title + "\n\n" + align_table(cells);
  for (const auto& n : notes) out += n + "\n";
  return out;
}

inline std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::ostringstream out;
  out << "variable,unit,n,mean,min,max,std_dev\n";
  for (const auto& r : rows)
    out << r.name << ',' << to_string(r.unit) << ',' << r.n << ',' << full(r.mean) << ',' << full(r.min)
        << ',' << full(r.max) << ',' << full(r.std_dev) << '\n';
  return out.str();
}

inline Json to_json(const std::vector<SummaryRow>& rows) {
  Json out = Json::array();
  for (const auto& r : rows)
    out.push_back({{"variable", r.name},
                   {"unit", std::string(to_string(r.unit))},
                   {"n", r.n},
                   {"mean", r.mean},
                   {"min", r.min},
                   {"max", r.max},
                   {"std_dev", r.std_dev}});
  return out;
}

/// Lower-triangular correlation layout with a VIF row underneath.
inline std::string render_screen_table(const std::string& title, const std::vector<std::string>& labels,
                                       const Matrix& corr, const std::vector<VifRow>& vifs) {
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> head{""};
  head.insert(head.end(), labels.begin(), labels.end());
  cells.push_back(head);
  for (Index r = 0; r < corr.rows(); ++r) {
    std::vector<std::string> row{labels[static_cast<std::size_t>(r)]};
    for (Index c = 0; c <= r; ++c) row.push_back(fixed(corr(r, c), 4));
    cells.push_back(row);
  }
  std::vector<std::string> vif_row{"VIF"};
  for (std::size_t c = 0; c < labels.size() - vifs.size(); ++c) vif_row.push_back("");
  for (const auto& v : vifs) vif_row.push_back(fixed(v.vif, 4));
  cells.push_back(vif_row);
  return title + "\n\n" + align_table(cells);
}

inline Json screen_json(const std::vector<std::string>& columns, const Matrix& corr,
                        const std::vector<VifRow>& vifs) {
  Json c = Json::array();
  for (Index r = 0; r < corr.rows(); ++r) {
    Json row = Json::array();
    for (Index k = 0; k < corr.cols(); ++k) row.push_back(corr(r, k));
    c.push_back(row);
  }
  Json v = Json::array();
  for (const auto& x : vifs)
    v.push_back({{"column", x.column}, {"r_squared", x.r_squared}, {"vif", json_number(x.vif)}});
  return {{"columns", columns}, {"correlation", c}, {"vif", v}};
}

inline std::string screen_csv(const std::vector<std::string>& columns, const Matrix& corr,
                              const std::vector<VifRow>& vifs) {
  std::ostringstream out;
  out << "row";
  for (const auto& c : columns) out << ',' << c;
  out << '\n';
  for (Index r = 0; r < corr.rows(); ++r) {
    out << columns[static_cast<std::size_t>(r)];
    for (Index c = 0; c < corr.cols(); ++c) out << ',' << full(corr(r, c));
    out << '\n';
  }
  out << "vif";
  for (const auto& c : columns) {
    auto it = std::find_if(vifs.begin(), vifs.end(), [&](const VifRow& v) { return v.column == c; });
    out << ',' << (it == vifs.end() ? "" : full(it->vif));
  }
  out << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------
// Monte Carlo

inline std::string render_mc_report(const MCReport& r, const std::string& title) {
  std::vector<std::vector<std::string>> cells{
      {"Estimator", "Coefficient", "Truth", "Mean", "Bias", "MC s.e.", "Bias/MC s.e.", "RMSE", "95% coverage"}};
  for (const auto& e : r.estimators) {
    cells.push_back({e.estimator, e.coefficient, fixed(e.truth, 4), fixed(e.mean, 4), fixed(e.bias, 4),
                     fixed(e.mc_se, 4), e.mc_se > 0 ? fixed(e.bias / e.mc_se, 2) : "-", fixed(e.rmse, 4),
                     fixed(100.0 * e.coverage, 1) + "%"});
  }
  std::ostringstream out;
  out << title << "\n\n" << align_table(cells) << '\n';
  out << "Replications: " << r.replications << "\n";
  out << "Wu-Hausman rejection rate at " << fixed(100.0 * r.test_level, 0)
      << "%: " << fixed(100.0 * r.wu_hausman_rejection_rate, 1) << "%\n";
  out << "First-stage F: mean " << fixed(r.first_stage_f.mean) << ", median " << fixed(r.first_stage_f.median)
      << ", min " << fixed(r.first_stage_f.min) << ", max " << fixed(r.first_stage_f.max) << ", share < 10 "
      << fixed(100.0 * r.first_stage_f.share_below_10, 1) << "%\n";
  out << "Endogeneity: rho " << full(r.config.rho) << ", year-shock loading " << full(r.config.year_shock_loading)
      << "\n";
  out << "RNG: " << r.rng << "\n";
  return out.str();
}

/// Report body without wall time, so reruns are byte-identical.
inline Json to_json(const MCReport& r) {
  Json est = Json::array();
  for (const auto& e : r.estimators)
    est.push_back({{"estimator", e.estimator},
                   {"coefficient", e.coefficient},
                   {"truth", e.truth},
                   {"mean", e.mean},
                   {"bias", e.bias},
                   {"mc_se", e.mc_se},
                   {"rmse", e.rmse},
                   {"coverage", e.coverage}});
  return {{"config", to_json(r.config)},
          {"replications", r.replications},
          {"test_level", r.test_level},
          {"estimators", est},
          {"wu_hausman_rejection_rate", r.wu_hausman_rejection_rate},
          {"first_stage_f",
           {{"mean", r.first_stage_f.mean},
            {"median", r.first_stage_f.median},
            {"min", r.first_stage_f.min},
            {"max", r.first_stage_f.max},
            {"share_below_10", r.first_stage_f.share_below_10}}},
          {"rng", r.rng}};
}

inline std::string mc_csv(const MCReport& r) {
  std::ostringstream out;
  out << "estimator,coefficient,truth,mean,bias,mc_se,rmse,coverage\n";
  for (const auto& e : r.estimators)
    out << e.estimator << ',' << e.coefficient << ',' << full(e.truth) << ',' << full(e.mean) << ','
        << full(e.bias) << ',' << full(e.mc_se) << ',' << full(e.rmse) << ',' << full(e.coverage) << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------
// Output files

/// Writes `<stem>.txt`, `<stem>.csv` and `<stem>.json` under `dir`, each
/// tagged with the manifest id.
inline void write_outputs(const std::filesystem::path& dir, const std::string& stem, const RunManifest& manifest,
                          const std::string& text, const std::string& csv, Json json) {
  std::filesystem::create_directories(dir);
  const auto id = manifest.id();
  {
    std::ofstream out(dir / (stem + ".txt"), std::ios::binary);
    out << "# manifest: " << id << "\n" << text;
  }
  {
    std::ofstream out(dir / (stem + ".csv"), std::ios::binary);
    out << "# manifest: " << id << "\n" << csv;
  }
  {
    Json doc;
    doc["manifest_id"] = id;
    doc["result"] = std::move(json);
    std::ofstream out(dir / (stem + ".json"), std::ios::binary);
    out << doc.dump(2) << "\n";
  }
}

inline void write_manifest(const std::filesystem::path& dir, const RunManifest& manifest) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  out << manifest.to_json().dump(2) << "\n";
}

}  // namespace gaspanel
