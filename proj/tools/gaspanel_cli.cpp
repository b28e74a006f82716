// gaspanel: command-line front end.
//
//   gaspanel validate DATA_DIR
//   gaspanel replicate DATA_DIR [--out DIR]
//   gaspanel fit SPEC_FILE DATA_DIR [--out DIR]
//   gaspanel margins FIT_FILE STATES_FILE [--out DIR]
//   gaspanel mc CONFIG_FILE [--seed N] [--threads N] [--out DIR]
//
// Exit codes: 0 success, 1 usage, 2 data/schema, 3 numerical.

#include <chrono>
#include <iostream>

#include "CLI11.hpp"
#include "gaspanel/montecarlo.hpp"
#include "gaspanel/pipeline.hpp"
#include "gaspanel/report.hpp"

using namespace gaspanel;

namespace {

struct CommonOptions {
  std::string covariance = "hc1";
  std::string iv_mode = "interacted-instruments";
  std::string warmup;
  std::optional<std::uint64_t> seed;
  std::string out = "results";
  unsigned threads = 0;
  std::optional<double> cdmx_border_km;
};

AnalysisOptions analysis_options(const CommonOptions& c) {
  AnalysisOptions o;
  o.covariance = covariance_from_string(c.covariance);
  o.iv_mode = iv_mode_from_string(c.iv_mode);
  o.cdmx_to_border_km = c.cdmx_border_km;
  if (!c.warmup.empty()) o.warmup = load_warmup(c.warmup);
  return o;
}

RunManifest base_manifest(const std::string& command, const CommonOptions& c) {
  RunManifest m;
  m.command = command;
  m.covariance = c.covariance;
  m.iv_mode = c.iv_mode;
  m.seed = c.seed;
  m.timestamp = utc_timestamp();
  if (!c.warmup.empty()) m.input_digests["warmup"] = file_sha256(c.warmup);
  if (c.cdmx_border_km) m.config["cdmx_border_km"] = *c.cdmx_border_km;
  return m;
}

void add_data_digests(RunManifest& m, const LoadedData& data) {
  for (const auto& [name, path] : data.paths) m.input_digests[name] = file_sha256(path);
}

int cmd_validate(const std::string& dir) {
  const auto violations = validate_data_dir(dir);
  if (violations.empty()) {
    std::cout << "OK\n";
    return 0;
  }
  for (const auto& v : violations) std::cout << v << "\n";
  std::cout << violations.size() << " violation(s)\n";
  return 2;
}

int cmd_replicate(const std::string& dir, const CommonOptions& c) {
  const auto options = analysis_options(c);
  const auto data = load_data_dir(dir);
  const auto analysis = build_analysis(data, options);
  const auto result = run_replication(analysis, options);

  auto manifest = base_manifest("replicate", c);
  add_data_digests(manifest, data);
  manifest.config["cdmx_border_km_used"] = analysis.cdmx_to_border_km;
  for (const auto& t : render_replication(result, options)) {
    write_outputs(c.out, t.stem, manifest, t.text, t.csv, t.json);
    std::cout << t.text << "\n";
  }
  write_manifest(c.out, manifest);
  std::cout << "Elasticity: " << elasticity_line(result.elasticity) << "\n";
  std::cout << "Wrote tables to " << c.out << " (manifest " << manifest.id() << ")\n";
  return 0;
}

int cmd_fit(const std::string& spec_file, const std::string& dir, const CommonOptions& c,
            bool covariance_set, bool iv_mode_set) {
  const auto options = analysis_options(c);
  std::vector<ModelSpec> specs;
  for (const auto& section : read_config(spec_file)) {
    auto s = model_spec_from_config(section);
    if (covariance_set) s.covariance = options.covariance;
    if (iv_mode_set && s.is_iv()) s.iv_mode = options.iv_mode;
    specs.push_back(std::move(s));
  }
  if (specs.empty()) throw SpecError(spec_file + ": no model sections");
  const auto data = load_data_dir(dir);
  const auto analysis = build_analysis(data, options);

  auto manifest = base_manifest("fit", c);
  add_data_digests(manifest, data);
  manifest.input_digests["spec"] = file_sha256(spec_file);
  Json echo = Json::array();
  for (const auto& s : specs) echo.push_back(to_json(s));
  manifest.config["models"] = echo;

  for (const auto& s : specs) {
    const auto f = fit(s, analysis.panel);
    FitColumn col{s.name, &f, std::nullopt, std::nullopt};
    if (s.is_iv() && !s.instruments.empty()) {
      col.wu_hausman = wu_hausman(s, analysis.panel);
      col.first_stage = first_stage_f(s, analysis.panel);
      if (col.first_stage->weak_instruments)
        std::cerr << "warning: " << s.name << ": first-stage F " << fixed(col.first_stage->statistic)
                  << " is below " << fixed(kWeakInstrumentF) << "\n";
    }
    std::vector<std::string> notes{"Estimator: " + std::string(to_string(f.estimator)) +
                                   "; covariance: " + std::string(to_string(s.covariance)) + "."};
    for (const auto& n : f.notes) notes.push_back(n);
    const auto text = render_fit_table(s.name, {col}, notes);
    Json j = to_json(f);
    if (col.wu_hausman) j["wu_hausman"] = to_json(*col.wu_hausman);
    if (col.first_stage) j["first_stage_f"] = to_json(*col.first_stage);
    write_outputs(c.out, s.name, manifest, text, fits_csv({col}), j);
    std::cout << text << "\n";
  }
  write_manifest(c.out, manifest);
  return 0;
}

/// Reads state distances from either (state_name, dist_km) or states.csv.
std::vector<StateDistance> read_state_distances(const std::string& path, const CommonOptions& c) {
  const auto table = read_csv(path);
  std::vector<StateDistance> out;
  if (table.header == std::vector<std::string>{"state_name", "dist_km"}) {
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      bool ok = true;
      auto d = parse_number_cell(table.rows[r][1], ok);
      if (!ok || !d)
        throw DataError(path + ":" + std::to_string(table.line_numbers[r]) + ": column dist_km: not a number");
      out.push_back({table.rows[r][0], *d});
    }
    return out;
  }
  const auto& schema = input_files().front().schema;
  const auto states = panel_from_csv(table, schema);
  const double cdmx = c.cdmx_border_km ? *c.cdmx_border_km : cdmx_border_distance(states);
  const auto with = with_effective_distance(states, cdmx, "dist");
  const auto& d = with.column("dist").values;
  for (std::size_t i = 0; i < with.row_count(); ++i) out.push_back({with.state_name(with.rows()[i].state), *d[i]});
  return out;
}

int cmd_margins(const std::string& fit_file, const std::string& states_file, const CommonOptions& c) {
  std::ifstream in(fit_file);
  if (!in) throw DataError(fit_file + ": cannot open file");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(fit_file + ": " + e.what());
  }
  const auto f = fit_from_json(doc.contains("result") ? doc["result"] : doc);
  const auto states = read_state_distances(states_file, c);
  const auto table = marginal_effects(f, states);
  const double avg = average_effect(table.basis, states);

  auto manifest = base_manifest("margins", c);
  manifest.input_digests["fit"] = file_sha256(fit_file);
  manifest.input_digests["states"] = file_sha256(states_file);
  const std::string stem = f.model_name + "_margins";
  const auto text = render_margins_table(table, "Marginal effect of natural gas import by state (" + f.model_name + ")",
                                         {"Average over listed states: " + fixed(avg) + "."});
  Json j = to_json(table);
  j["average"] = avg;
  write_outputs(c.out, stem, manifest, text, margins_csv(table), j);
  write_manifest(c.out, manifest);
  std::cout << text;
  return 0;
}

int cmd_mc(const std::string& config_file, CommonOptions& c, bool covariance_set, bool iv_mode_set) {
  const auto sections = read_config(config_file);
  DGPConfig cfg;
  std::size_t reps = 1000;
  std::string experiment = "custom";
  for (const auto& s : sections) {
    if (s.name == "dgp") {
      cfg = dgp_from_config(s, cfg);
    } else if (s.name == "experiment") {
      for (const auto& [k, v] : s.entries) {
        if (k == "replications") {
          auto n = parse_int_cell(v);
          if (!n || *n < 2) throw SpecError("[experiment] replications must be an integer >= 2");
          reps = static_cast<std::size_t>(*n);
        } else if (k == "threads") {
          auto n = parse_int_cell(v);
          if (!n || *n < 0) throw SpecError("[experiment] threads must be a nonnegative integer");
          if (c.threads == 0) c.threads = static_cast<unsigned>(*n);
        } else if (k == "covariance") {
          if (!covariance_set) c.covariance = v;
        } else if (k == "iv_mode") {
          if (!iv_mode_set) c.iv_mode = v;
        } else if (k == "name") {
          experiment = v;
        } else {
          throw SpecError("[experiment]: unknown key '" + k + "'");
        }
      }
    } else {
      throw SpecError(config_file + ": unknown section [" + s.name + "]");
    }
  }
  if (c.seed) cfg.seed = *c.seed;
  c.seed = cfg.seed;
  const auto models = experiment_models(covariance_from_string(c.covariance), iv_mode_from_string(c.iv_mode));

  const auto start = std::chrono::steady_clock::now();
  const auto report = run_experiment(cfg, reps, models, c.threads);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  auto manifest = base_manifest("mc", c);
  manifest.input_digests["config"] = file_sha256(config_file);
  manifest.config = {{"experiment", experiment}, {"replications", reps}, {"dgp", to_json(cfg)}};
  manifest.wall_seconds = wall;
  const auto text = render_mc_report(report, "Monte Carlo experiment: " + experiment);
  write_outputs(c.out, "mc_" + experiment, manifest, text, mc_csv(report), to_json(report));
  write_manifest(c.out, manifest);
  std::cout << text << "Wall time: " << fixed(wall, 2) << " s\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Panel estimation of natural gas import employment effects"};
  app.require_subcommand(1);
  CommonOptions c;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--covariance", c.covariance, "classical, hc0 or hc1")
        ->check(CLI::IsMember({"classical", "hc0", "hc1"}));
    sub->add_option("--iv-mode", c.iv_mode, "fitted-value or interacted-instruments")
        ->check(CLI::IsMember({"fitted-value", "interacted-instruments"}));
    sub->add_option("--warmup", c.warmup, "CSV with pre-sample import prices (year,import_price_usd_mcf)")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", c.seed, "random seed");
    sub->add_option("--out", c.out, "output directory");
    sub->add_option("--threads", c.threads, "worker threads (0 = hardware)");
    sub->add_option("--cdmx-border-km", c.cdmx_border_km, "Mexico City to border distance (km)");
  };

  std::string data_dir, spec_file, fit_file, states_file, config_file;
  auto* validate = app.add_subcommand("validate", "check a data directory");
  validate->add_option("DATA_DIR", data_dir)->required();
  auto* replicate = app.add_subcommand("replicate", "run the full pipeline and write every table");
  replicate->add_option("DATA_DIR", data_dir)->required();
  add_common(replicate);
  auto* fit_cmd = app.add_subcommand("fit", "fit the models of a spec file");
  fit_cmd->add_option("SPEC_FILE", spec_file)->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("DATA_DIR", data_dir)->required();
  add_common(fit_cmd);
  auto* margins = app.add_subcommand("margins", "distance-dependent marginal effects from a stored fit");
  margins->add_option("FIT_FILE", fit_file)->required()->check(CLI::ExistingFile);
  margins->add_option("STATES_FILE", states_file)->required()->check(CLI::ExistingFile);
  add_common(margins);
  auto* mc = app.add_subcommand("mc", "run a Monte Carlo experiment");
  mc->add_option("CONFIG_FILE", config_file)->required()->check(CLI::ExistingFile);
  add_common(mc);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  auto flag_set = [](CLI::App* sub, const char* name) { return sub->count(name) > 0; };
  try {
    if (*validate) return cmd_validate(data_dir);
    if (*replicate) return cmd_replicate(data_dir, c);
    if (*fit_cmd)
      return cmd_fit(spec_file, data_dir, c, flag_set(fit_cmd, "--covariance"), flag_set(fit_cmd, "--iv-mode"));
    if (*margins) return cmd_margins(fit_file, states_file, c);
    if (*mc) return cmd_mc(config_file, c, flag_set(mc, "--covariance"), flag_set(mc, "--iv-mode"));
  } catch (const SpecError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
