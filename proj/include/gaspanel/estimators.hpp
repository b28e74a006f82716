#pragma once

// Pooled OLS, state fixed-effects (within) and two-stage least squares
// estimators driven by a declarative ModelSpec.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "gaspanel/errors.hpp"
#include "gaspanel/numerics.hpp"
#include "gaspanel/panel_data.hpp"

namespace gaspanel {

enum class FixedEffects { None, State };

/// How an interaction involving an endogenous column enters 2SLS.
enum class IvMode {
  None,
  FittedValue,            // interaction rebuilt from first-stage fitted values
  InteractedInstruments,  // interaction instrumented by instrument x other factor
};

enum class Estimator { OLS, FE, TSLS, FE_TSLS };

inline std::string_view to_string(FixedEffects fe) { return fe == FixedEffects::State ? "state" : "none"; }

inline FixedEffects fixed_effects_from_string(std::string_view s) {
  if (s == "none" || s.empty()) return FixedEffects::None;
  if (s == "state") return FixedEffects::State;
  throw SpecError("unknown fixed effects '" + std::string(s) + "'");
}

inline std::string_view to_string(IvMode m) {
  switch (m) {
    case IvMode::None:
      return "none";
    case IvMode::FittedValue:
      return "fitted-value";
    case IvMode::InteractedInstruments:
      return "interacted-instruments";
  }
  return "unknown";
}

inline IvMode iv_mode_from_string(std::string_view s) {
  if (s == "none") return IvMode::None;
  if (s == "fitted-value") return IvMode::FittedValue;
  if (s == "interacted-instruments") return IvMode::InteractedInstruments;
  throw SpecError("unknown IV mode '" + std::string(s) + "'");
}

inline std::string_view to_string(Estimator e) {
  switch (e) {
    case Estimator::OLS:
      return "OLS";
    case Estimator::FE:
      return "FE";
    case Estimator::TSLS:
      return "2SLS";
    case Estimator::FE_TSLS:
      return "FE-2SLS";
  }
  return "unknown";
}

struct Interaction {
  std::string left;
  std::string right;
};

struct ModelSpec {
  std::string name;
  std::string dependent;
  std::vector<std::string> exogenous;
  std::vector<Interaction> interactions;
  std::set<std::string> log_columns;
  FixedEffects fixed_effects = FixedEffects::None;
  std::vector<std::string> endogenous;
  std::vector<std::string> instruments;
  IvMode iv_mode = IvMode::InteractedInstruments;
  CovarianceVariant covariance = CovarianceVariant::HC1;

  bool is_iv() const { return !endogenous.empty(); }

  bool is_endogenous(std::string_view column) const {
    return std::find(endogenous.begin(), endogenous.end(), column) != endogenous.end();
  }

  /// Coefficient name of a (possibly logged) column.
  std::string term_name(const std::string& column) const {
    return log_columns.contains(column) ? "log_" + column : column;
  }

  std::string term_name(const Interaction& i) const {
    return term_name(i.left) + "_x_" + term_name(i.right);
  }

  void validate() const {
    if (dependent.empty()) throw SpecError("model '" + name + "': no dependent variable");
    auto all = exogenous;
    all.insert(all.end(), endogenous.begin(), endogenous.end());
    for (const auto& i : interactions) {
      if (i.left.empty() || i.right.empty())
        throw SpecError("model '" + name + "': incomplete interaction");
      all.push_back(i.left);
      all.push_back(i.right);
    }
    if (std::find(all.begin(), all.end(), dependent) != all.end())
      throw SpecError("model '" + name + "': dependent variable used as a regressor");
    for (const auto& e : endogenous) {
      if (std::find(exogenous.begin(), exogenous.end(), e) != exogenous.end())
        throw SpecError("model '" + name + "': '" + e + "' is both exogenous and endogenous");
    }
    if (!endogenous.empty() && instruments.size() < endogenous.size())
      throw SpecError("model '" + name + "': order condition fails (" +
                      std::to_string(instruments.size()) + " instruments for " +
                      std::to_string(endogenous.size()) + " endogenous columns)");
    if (endogenous.empty() && !instruments.empty())
      throw SpecError("model '" + name + "': instruments given without endogenous columns");
    for (const auto& i : interactions) {
      if (is_endogenous(i.left) && is_endogenous(i.right))
        throw SpecError("model '" + name + "': interaction of two endogenous columns");
      if ((is_endogenous(i.left) || is_endogenous(i.right)) && iv_mode == IvMode::None)
        throw SpecError("model '" + name + "': endogenous interaction needs an IV mode");
    }
  }

  std::vector<std::string> referenced_columns() const {
    std::vector<std::string> out{dependent};
    out.insert(out.end(), exogenous.begin(), exogenous.end());
    out.insert(out.end(), endogenous.begin(), endogenous.end());
    out.insert(out.end(), instruments.begin(), instruments.end());
    for (const auto& i : interactions) {
      out.push_back(i.left);
      out.push_back(i.right);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
};

struct FitResult {
  std::string model_name;
  Estimator estimator = Estimator::OLS;
  ModelSpec spec;
  std::vector<std::string> names;
  Vector coefficients;
  Matrix covariance;
  Vector std_errors;
  Vector t_stats;
  Vector p_values;
  std::vector<bool> omitted;
  Vector residuals;
  std::vector<RowKey> rows;
  Index n_obs = 0;
  Index df_residual = 0;
  Index absorbed_groups = 0;
  double r_squared = 0.0;
  double within_r_squared = std::numeric_limits<double>::quiet_NaN();
  std::map<int, double> fixed_effects;  // state id -> mu_i
  std::vector<std::string> notes;

  std::optional<std::size_t> find(std::string_view name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return i;
    return std::nullopt;
  }

  std::size_t index_of(std::string_view name) const {
    if (auto i = find(name)) return *i;
    throw SpecError("fit '" + model_name + "' has no coefficient '" + std::string(name) + "'");
  }

  double coefficient(std::string_view name) const { return coefficients(index_of(name)); }
};

// ---------------------------------------------------------------------------
// Within transformation

/// Subtracts group means in place. A column left with only rounding noise
/// (group-invariant) is set to exactly zero so the rank check drops it even
/// when it is the only regressor.
inline void demean_by_group(Matrix& m, const std::vector<int>& group, int n_groups) {
  const Vector before = m.colwise().norm();
  Matrix sums = Matrix::Zero(n_groups, m.cols());
  std::vector<double> counts(static_cast<std::size_t>(n_groups), 0.0);
  for (Index r = 0; r < m.rows(); ++r) {
    sums.row(group[r]) += m.row(r);
    counts[group[r]] += 1.0;
  }
  for (int g = 0; g < n_groups; ++g) sums.row(g) /= counts[g];
  for (Index r = 0; r < m.rows(); ++r) m.row(r) -= sums.row(group[r]);
  for (Index j = 0; j < m.cols(); ++j)
    if (m.col(j).norm() <= kRankTolerance * before(j)) m.col(j).setZero();
}

inline Vector demeaned(const Vector& v, const std::vector<int>& group, int n_groups) {
  Matrix m = v;
  demean_by_group(m, group, n_groups);
  return m.col(0);
}

/// Replaces each named column by its deviation from the state mean, where
/// means use only rows complete in every named column. Incomplete rows
/// become missing.
inline PanelDataset within_demean(const PanelDataset& panel, const std::vector<std::string>& columns) {
  std::vector<bool> complete(panel.row_count(), true);
  for (const auto& name : columns) {
    const auto& values = panel.column(name).values;
    for (std::size_t i = 0; i < values.size(); ++i)
      if (!values[i]) complete[i] = false;
  }
  std::map<int, std::size_t> complete_rows;
  for (int s : panel.state_ids()) complete_rows[s] = 0;
  for (std::size_t i = 0; i < panel.row_count(); ++i)
    if (complete[i]) ++complete_rows[panel.rows()[i].state];
  for (const auto& [state, count] : complete_rows)
    if (count == 0)
      throw DataError("state " + std::to_string(state) + " has no complete rows to demean");

  PanelDataset out = panel;
  for (const auto& name : columns) {
    const auto& source = panel.column(name);
    std::map<int, std::pair<double, double>> acc;
    for (std::size_t i = 0; i < panel.row_count(); ++i) {
      if (!complete[i]) continue;
      auto& [sum, n] = acc[panel.rows()[i].state];
      sum += *source.values[i];
      n += 1.0;
    }
    Column c = source;
    for (std::size_t i = 0; i < panel.row_count(); ++i) {
      if (!complete[i]) {
        c.values[i].reset();
        continue;
      }
      const auto& [sum, n] = acc[panel.rows()[i].state];
      c.values[i] = *source.values[i] - sum / n;
    }
    out = out.with_column(std::move(c));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Model preparation shared by the estimators and the diagnostics

/// Design data for one spec after listwise deletion and log transforms.
/// Columns of `x` follow `names`: [intercept], exogenous, exogenous
/// interactions, endogenous, endogenous interactions.
struct PreparedModel {
  ModelSpec spec;
  std::vector<RowKey> rows;
  std::vector<int> group;       // dense group index per row
  std::vector<int> group_ids;   // state id of each group index
  Vector y_level;
  Vector y;                     // demeaned under fixed effects
  std::vector<std::string> names;
  Matrix x_level;
  Matrix x;                     // demeaned under fixed effects
  bool intercept = false;
  std::vector<Index> endogenous_cols;  // columns instrumented in the first stage
  std::vector<std::string> endogenous_names;
  /// Fitted-value mode: column `col` is x_level(:, endogenous_cols[source]) * other.
  struct DeferredProduct {
    Index col;
    std::size_t source;
    Vector other;
  };
  std::vector<DeferredProduct> deferred;
  std::vector<std::string> excluded_names;
  Matrix z_excluded_level;
  Matrix z_excluded;  // demeaned under fixed effects

  Index n() const { return y.size(); }
  int n_groups() const { return static_cast<int>(group_ids.size()); }
  bool fixed_effects() const { return spec.fixed_effects == FixedEffects::State; }
  Index absorbed() const { return fixed_effects() ? n_groups() : 0; }

  /// Exogenous block of the design (intercept and exogenous terms).
  std::vector<Index> exogenous_cols() const {
    std::vector<Index> out;
    for (Index j = 0; j < x.cols(); ++j) {
      const bool endo = std::find(endogenous_cols.begin(), endogenous_cols.end(), j) !=
                        endogenous_cols.end();
      const bool def = std::any_of(deferred.begin(), deferred.end(),
                                   [&](const DeferredProduct& d) { return d.col == j; });
      if (!endo && !def) out.push_back(j);
    }
    return out;
  }

  Vector maybe_demean(const Vector& v) const {
    return fixed_effects() ? demeaned(v, group, n_groups()) : v;
  }

  Matrix maybe_demean(Matrix m) const {
    if (fixed_effects()) demean_by_group(m, group, n_groups());
    return m;
  }
};

inline PreparedModel prepare_model(const ModelSpec& spec, const PanelDataset& panel) {
  spec.validate();
  PreparedModel pm;
  pm.spec = spec;
  const auto referenced = spec.referenced_columns();
  for (const auto& c : referenced) (void)panel.column(c);

  auto transformed = [&](const std::string& c, std::size_t row) -> std::optional<double> {
    const auto& v = panel.column(c).values[row];
    if (!v) return std::nullopt;
    if (spec.log_columns.contains(c)) {
      if (*v <= 0.0) return std::nullopt;
      return std::log(*v);
    }
    return *v;
  };

  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < panel.row_count(); ++i) {
    bool ok = true;
    for (const auto& c : referenced)
      if (!transformed(c, i)) {
        ok = false;
        break;
      }
    if (ok) keep.push_back(i);
  }
  const Index n = static_cast<Index>(keep.size());
  if (n == 0) throw DataError("model '" + spec.name + "': no complete observations");

  std::map<int, int> group_index;
  for (auto i : keep) {
    const int state = panel.rows()[i].state;
    auto [it, inserted] = group_index.emplace(state, static_cast<int>(pm.group_ids.size()));
    if (inserted) pm.group_ids.push_back(state);
    pm.group.push_back(it->second);
    pm.rows.push_back(panel.rows()[i]);
  }

  auto column_vector = [&](const std::string& c) {
    Vector v(n);
    for (Index r = 0; r < n; ++r) v(r) = *transformed(c, keep[r]);
    return v;
  };

  pm.y_level = column_vector(spec.dependent);
  std::vector<Vector> cols;
  pm.intercept = spec.fixed_effects == FixedEffects::None;
  if (pm.intercept) {
    pm.names.push_back("const");
    cols.push_back(Vector::Ones(n));
  }
  for (const auto& c : spec.exogenous) {
    pm.names.push_back(spec.term_name(c));
    cols.push_back(column_vector(c));
  }
  std::vector<const Interaction*> endogenous_interactions;
  for (const auto& i : spec.interactions) {
    if (spec.is_endogenous(i.left) || spec.is_endogenous(i.right)) {
      endogenous_interactions.push_back(&i);
      continue;
    }
    pm.names.push_back(spec.term_name(i));
    cols.push_back(column_vector(i.left).cwiseProduct(column_vector(i.right)));
  }
  for (const auto& c : spec.endogenous) {
    pm.endogenous_cols.push_back(static_cast<Index>(cols.size()));
    pm.endogenous_names.push_back(spec.term_name(c));
    pm.names.push_back(spec.term_name(c));
    cols.push_back(column_vector(c));
  }

  std::vector<Vector> excluded;
  for (const auto& z : spec.instruments) {
    pm.excluded_names.push_back(spec.term_name(z));
    excluded.push_back(column_vector(z));
  }

  for (const auto* i : endogenous_interactions) {
    const bool left_endo = spec.is_endogenous(i->left);
    const auto& endo = left_endo ? i->left : i->right;
    const auto& other = left_endo ? i->right : i->left;
    const Vector other_values = column_vector(other);
    const Index col = static_cast<Index>(cols.size());
    pm.names.push_back(spec.term_name(*i));
    cols.push_back(column_vector(endo).cwiseProduct(other_values));
    if (spec.iv_mode == IvMode::InteractedInstruments) {
      pm.endogenous_cols.push_back(col);
      pm.endogenous_names.push_back(spec.term_name(*i));
      for (std::size_t z = 0; z < spec.instruments.size(); ++z) {
        pm.excluded_names.push_back(spec.term_name(spec.instruments[z]) + "_x_" +
                                    spec.term_name(other));
        excluded.push_back(excluded[z].cwiseProduct(other_values));
      }
    } else {
      const auto pos = std::find(spec.endogenous.begin(), spec.endogenous.end(), endo) -
                       spec.endogenous.begin();
      pm.deferred.push_back({col, static_cast<std::size_t>(pos), other_values});
    }
  }

  pm.x_level.resize(n, static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) pm.x_level.col(static_cast<Index>(j)) = cols[j];
  pm.z_excluded_level.resize(n, static_cast<Index>(excluded.size()));
  for (std::size_t j = 0; j < excluded.size(); ++j)
    pm.z_excluded_level.col(static_cast<Index>(j)) = excluded[j];

  pm.y = pm.maybe_demean(pm.y_level);
  pm.x = pm.maybe_demean(pm.x_level);
  pm.z_excluded = pm.maybe_demean(pm.z_excluded_level);
  return pm;
}

/// First-stage regression of one endogenous design column on the exogenous
/// block and the excluded instruments.
struct FirstStage {
  std::string endogenous;
  std::vector<std::string> names;   // columns of w
  Matrix w;
  std::vector<Index> excluded;      // positions of excluded instruments in w
  LeastSquaresSolution solution;
  Vector fitted;
  Vector residuals;
};

inline Matrix first_stage_regressors(const PreparedModel& pm, std::vector<std::string>& names,
                                     std::vector<Index>& excluded) {
  const auto exo = pm.exogenous_cols();
  Matrix w(pm.n(), static_cast<Index>(exo.size()) + pm.z_excluded.cols());
  names.clear();
  excluded.clear();
  Index j = 0;
  for (Index c : exo) {
    w.col(j++) = pm.x.col(c);
    names.push_back(pm.names[static_cast<std::size_t>(c)]);
  }
  for (Index z = 0; z < pm.z_excluded.cols(); ++z) {
    excluded.push_back(j);
    w.col(j++) = pm.z_excluded.col(z);
    names.push_back(pm.excluded_names[static_cast<std::size_t>(z)]);
  }
  return w;
}

inline std::vector<FirstStage> first_stages(const PreparedModel& pm) {
  std::vector<FirstStage> out;
  std::vector<std::string> names;
  std::vector<Index> excluded;
  const Matrix w = first_stage_regressors(pm, names, excluded);
  for (std::size_t e = 0; e < pm.endogenous_cols.size(); ++e) {
    FirstStage fs;
    fs.endogenous = pm.endogenous_names[e];
    fs.names = names;
    fs.excluded = excluded;
    fs.w = w;
    const Vector target = pm.x.col(pm.endogenous_cols[e]);
    fs.solution = solve_least_squares(w, target);
    fs.residuals = fs.solution.residuals;
    fs.fitted = target - fs.residuals;
    out.push_back(std::move(fs));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fitting

namespace detail {

inline Matrix select_columns(const Matrix& m, const std::vector<Index>& cols) {
  Matrix out(m.rows(), static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Index>(j)) = m.col(cols[j]);
  return out;
}

/// Fills covariance and inference. `bread_design` is X for least squares and
/// the fitted-value design for 2SLS; `residuals` are structural.
inline void finish_fit(FitResult& fit, const PreparedModel& pm, const Matrix& bread_design,
                       const LeastSquaresSolution& ls, const Vector& residuals) {
  const Index k = bread_design.cols();
  fit.model_name = pm.spec.name;
  fit.spec = pm.spec;
  fit.names = pm.names;
  fit.rows = pm.rows;
  fit.coefficients = ls.coefficients;
  fit.omitted = ls.omitted;
  fit.residuals = residuals;
  fit.n_obs = pm.n();
  fit.absorbed_groups = pm.absorbed();

  const auto retained = ls.retained();
  if (retained.empty()) throw NumericalError("model '" + pm.spec.name + "': nothing identified");
  fit.df_residual = pm.n() - static_cast<Index>(retained.size()) - pm.absorbed();
  if (fit.df_residual <= 0)
    throw NumericalError("model '" + pm.spec.name + "': no residual degrees of freedom");

  const Matrix xr = select_columns(bread_design, retained);
  Matrix bread(static_cast<Index>(retained.size()), static_cast<Index>(retained.size()));
  for (std::size_t a = 0; a < retained.size(); ++a)
    for (std::size_t b = 0; b < retained.size(); ++b)
      bread(static_cast<Index>(a), static_cast<Index>(b)) = ls.xtx_inverse(retained[a], retained[b]);
  const Matrix vr = sandwich_covariance(xr, residuals, bread, pm.spec.covariance, pm.absorbed());

  fit.covariance = Matrix::Zero(k, k);
  for (std::size_t a = 0; a < retained.size(); ++a)
    for (std::size_t b = 0; b < retained.size(); ++b)
      fit.covariance(retained[a], retained[b]) = vr(static_cast<Index>(a), static_cast<Index>(b));

  fit.std_errors = fit.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
  fit.t_stats = Vector::Zero(k);
  fit.p_values = Vector::Ones(k);
  for (Index j = 0; j < k; ++j) {
    if (fit.omitted[static_cast<std::size_t>(j)]) continue;
    const double se = fit.std_errors(j);
    const double t = se > 0.0 ? fit.coefficients(j) / se
                              : (fit.coefficients(j) == 0.0 ? 0.0
                                                            : std::copysign(INFINITY, fit.coefficients(j)));
    fit.t_stats(j) = t;
    fit.p_values(j) = student_t_pvalue(t, static_cast<double>(fit.df_residual));
  }

  const double mean_y = pm.y_level.mean();
  const double sst = (pm.y_level.array() - mean_y).square().sum();
  const double ssr = residuals.squaredNorm();
  fit.r_squared = sst > 0.0 ? 1.0 - ssr / sst : (ssr == 0.0 ? 1.0 : 0.0);
  if (pm.fixed_effects()) {
    const double sst_within = pm.y.squaredNorm();
    fit.within_r_squared = sst_within > 0.0 ? 1.0 - ssr / sst_within : 1.0;
    std::vector<double> sums(static_cast<std::size_t>(pm.n_groups()), 0.0);
    std::vector<double> counts(sums.size(), 0.0);
    const Vector level_resid = pm.y_level - pm.x_level * fit.coefficients;
    for (Index r = 0; r < pm.n(); ++r) {
      sums[pm.group[r]] += level_resid(r);
      counts[pm.group[r]] += 1.0;
    }
    for (int g = 0; g < pm.n_groups(); ++g)
      fit.fixed_effects[pm.group_ids[g]] = sums[g] / counts[g];
  }
  for (std::size_t j = 0; j < fit.omitted.size(); ++j) {
    if (fit.omitted[j])
      fit.notes.push_back("coefficient '" + fit.names[j] + "' omitted (not identified)");
  }
  fit.notes.push_back("covariance: " + std::string(to_string(pm.spec.covariance)));
}

}  // namespace detail

inline FitResult fit_ols(const PreparedModel& pm) {
  if (pm.spec.is_iv()) throw SpecError("model '" + pm.spec.name + "': OLS spec has endogenous columns");
  const auto ls = solve_least_squares(pm.x, pm.y);
  FitResult fit;
  fit.estimator = pm.fixed_effects() ? Estimator::FE : Estimator::OLS;
  detail::finish_fit(fit, pm, pm.x, ls, ls.residuals);
  return fit;
}

/// Pooled least squares with an intercept.
inline FitResult fit_ols(const ModelSpec& spec, const PanelDataset& panel) {
  if (spec.fixed_effects != FixedEffects::None)
    throw SpecError("model '" + spec.name + "': fit_ols requires fixed_effects = none");
  return fit_ols(prepare_model(spec, panel));
}

/// State fixed effects through the within transformation.
inline FitResult fit_fe(const ModelSpec& spec, const PanelDataset& panel) {
  if (spec.fixed_effects != FixedEffects::State)
    throw SpecError("model '" + spec.name + "': fit_fe requires fixed_effects = state");
  const auto pm = prepare_model(spec, panel);
  return fit_ols(pm);
}

inline FitResult fit_2sls(const PreparedModel& pm) {
  if (!pm.spec.is_iv()) throw SpecError("model '" + pm.spec.name + "': 2SLS needs endogenous columns");
  const auto stages = first_stages(pm);
  for (const auto& fs : stages) {
    Index kept = 0;
    for (Index j : fs.excluded)
      if (!fs.solution.omitted[static_cast<std::size_t>(j)]) ++kept;
    if (kept == 0)
      throw NumericalError("model '" + pm.spec.name + "': excluded instruments are collinear "
                           "with the exogenous regressors in the first stage for '" +
                           fs.endogenous + "'");
  }

  Matrix x_hat = pm.x;
  for (std::size_t e = 0; e < stages.size(); ++e) x_hat.col(pm.endogenous_cols[e]) = stages[e].fitted;
  for (const auto& d : pm.deferred) {
    // Level fitted value = level endogenous column minus its first-stage residual.
    const Vector fitted_level =
        pm.x_level.col(pm.endogenous_cols[d.source]) - stages[d.source].residuals;
    x_hat.col(d.col) = pm.maybe_demean(Vector(fitted_level.cwiseProduct(d.other)));
  }

  const auto ls = solve_least_squares(x_hat, pm.y);
  for (Index j : pm.endogenous_cols)
    if (ls.omitted[static_cast<std::size_t>(j)])
      throw NumericalError("model '" + pm.spec.name + "': second stage lost rank on '" +
                           pm.names[static_cast<std::size_t>(j)] + "' (weak or collinear instruments)");
  const Vector structural = pm.y - pm.x * ls.coefficients;

  FitResult fit;
  fit.estimator = pm.fixed_effects() ? Estimator::FE_TSLS : Estimator::TSLS;
  detail::finish_fit(fit, pm, x_hat, ls, structural);
  fit.notes.push_back("iv mode: " + std::string(to_string(pm.spec.iv_mode)));
  std::string inst = "instruments:";
  for (const auto& z : pm.excluded_names) inst += " " + z;
  fit.notes.push_back(inst);
  return fit;
}

inline FitResult fit_2sls(const ModelSpec& spec, const PanelDataset& panel) {
  return fit_2sls(prepare_model(spec, panel));
}

/// Dispatches on the spec: OLS, FE, 2SLS or FE-2SLS.
inline FitResult fit(const ModelSpec& spec, const PanelDataset& panel) {
  const auto pm = prepare_model(spec, panel);
  return spec.is_iv() ? fit_2sls(pm) : fit_ols(pm);
}

}  // namespace gaspanel
