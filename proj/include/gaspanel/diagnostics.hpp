#pragma once

// Instrument strength, endogeneity and multicollinearity checks.

#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "gaspanel/errors.hpp"
#include "gaspanel/estimators.hpp"
#include "gaspanel/numerics.hpp"
#include "gaspanel/panel_data.hpp"

namespace gaspanel {

/// Weak-instrument rule of thumb for the first-stage F statistic.
inline constexpr double kWeakInstrumentF = 10.0;

/// Stand-in for a divergent statistic (exact fit, zero residual variance).
inline constexpr double kSaturatedStatistic = 1e300;

struct TestResult {
  std::string name;
  double statistic = 0.0;
  double df1 = 0.0;
  double df2 = 0.0;
  double p_value = 1.0;
  std::string null_hypothesis;
  std::map<std::string, std::string> inputs;
  bool weak_instruments = false;  // first-stage F only
  bool saturated = false;
};

namespace detail {

/// F form of the Wald test that the coefficients at `tested` (indices into
/// the retained design) are jointly zero.
inline void wald_f(TestResult& out, const Vector& beta, const Matrix& cov,
                   const std::vector<Index>& tested, Index df_residual) {
  const Index q = static_cast<Index>(tested.size());
  out.df1 = static_cast<double>(q);
  out.df2 = static_cast<double>(df_residual);
  if (q == 0) {
    out.statistic = 0.0;
    out.p_value = 1.0;
    return;
  }
  Vector b(q);
  Matrix v(q, q);
  for (Index a = 0; a < q; ++a) {
    b(a) = beta(tested[static_cast<std::size_t>(a)]);
    for (Index c = 0; c < q; ++c)
      v(a, c) = cov(tested[static_cast<std::size_t>(a)], tested[static_cast<std::size_t>(c)]);
  }
  double stat = std::numeric_limits<double>::infinity();
  Eigen::LDLT<Matrix> ldlt(v);
  const double scale = v.diagonal().cwiseAbs().maxCoeff();
  if (scale > 0.0 && ldlt.info() == Eigen::Success &&
      ldlt.vectorD().minCoeff() > 1e-14 * ldlt.vectorD().cwiseAbs().maxCoeff()) {
    stat = b.dot(ldlt.solve(b)) / static_cast<double>(q);
  } else if (b.squaredNorm() == 0.0) {
    stat = 0.0;
  }
  if (!std::isfinite(stat) || stat > kSaturatedStatistic) {
    out.statistic = kSaturatedStatistic;
    out.saturated = true;
    out.p_value = 0.0;
    return;
  }
  out.statistic = stat;
  out.p_value = df_residual > 0 ? f_pvalue(stat, out.df1, out.df2) : 1.0;
}

/// Least squares plus covariance restricted to retained columns.
struct RetainedFit {
  LeastSquaresSolution ls;
  std::vector<Index> retained;
  Vector beta;  // retained order
  Matrix cov;   // retained order
  Index df = 0;
};

inline RetainedFit retained_fit(const Matrix& x, const Vector& y, CovarianceVariant variant,
                                Index absorbed) {
  RetainedFit rf;
  rf.ls = solve_least_squares(x, y);
  rf.retained = rf.ls.retained();
  const Index r = static_cast<Index>(rf.retained.size());
  rf.df = x.rows() - r - absorbed;
  Matrix xr = select_columns(x, rf.retained);
  Matrix bread(r, r);
  rf.beta.resize(r);
  for (Index a = 0; a < r; ++a) {
    rf.beta(a) = rf.ls.coefficients(rf.retained[static_cast<std::size_t>(a)]);
    for (Index b = 0; b < r; ++b)
      bread(a, b) = rf.ls.xtx_inverse(rf.retained[static_cast<std::size_t>(a)],
                                      rf.retained[static_cast<std::size_t>(b)]);
  }
  rf.cov = rf.df > 0 ? sandwich_covariance(xr, rf.ls.residuals, bread, variant, absorbed)
                     : Matrix::Zero(r, r);
  return rf;
}

/// Positions in `rf.retained` of the requested original columns.
inline std::vector<Index> retained_positions(const RetainedFit& rf, const std::vector<Index>& cols) {
  std::vector<Index> out;
  for (Index c : cols) {
    for (std::size_t p = 0; p < rf.retained.size(); ++p)
      if (rf.retained[p] == c) out.push_back(static_cast<Index>(p));
  }
  return out;
}

}  // namespace detail

/// First-stage F for every instrumented design column. The statistic is the
/// Wald F of the excluded instruments under the spec's covariance variant.
inline std::vector<TestResult> first_stage_f_all(const ModelSpec& spec, const PanelDataset& panel) {
  if (!spec.is_iv() || spec.instruments.empty())
    throw SpecError("model '" + spec.name + "': first-stage F needs endogenous columns and instruments");
  const auto pm = prepare_model(spec, panel);
  std::vector<TestResult> out;
  for (const auto& fs : first_stages(pm)) {
    const auto rf = detail::retained_fit(fs.w, pm.x.col(pm.endogenous_cols[out.size()]),
                                         spec.covariance, pm.absorbed());
    TestResult t;
    t.name = "first-stage F (" + fs.endogenous + ")";
    t.null_hypothesis = "excluded instruments have no explanatory power for " + fs.endogenous;
    t.inputs["endogenous"] = fs.endogenous;
    std::string names;
    for (Index j : fs.excluded) names += (names.empty() ? "" : ",") + fs.names[static_cast<std::size_t>(j)];
    t.inputs["excluded_instruments"] = names;
    t.inputs["covariance"] = std::string(to_string(spec.covariance));
    t.inputs["fixed_effects"] = std::string(to_string(spec.fixed_effects));
    const auto tested = detail::retained_positions(rf, fs.excluded);
    if (tested.empty())
      throw NumericalError("model '" + spec.name + "': first stage lost every excluded instrument");
    detail::wald_f(t, rf.beta, rf.cov, tested, rf.df);
    t.weak_instruments = t.statistic < kWeakInstrumentF;
    out.push_back(std::move(t));
  }
  return out;
}

/// First-stage F of the primary (first) endogenous column.
inline TestResult first_stage_f(const ModelSpec& spec, const PanelDataset& panel) {
  return first_stage_f_all(spec, panel).front();
}

/// Regression-based Durbin-Wu-Hausman test: the structural equation is
/// augmented with the first-stage residuals and their joint significance is
/// tested with the spec's covariance variant.
inline TestResult wu_hausman(const ModelSpec& spec, const PanelDataset& panel) {
  const auto pm = prepare_model(spec, panel);
  if (!spec.is_iv()) throw SpecError("model '" + spec.name + "': Wu-Hausman needs endogenous columns");
  const auto stages = first_stages(pm);
  Matrix augmented(pm.n(), pm.x.cols() + static_cast<Index>(stages.size()));
  augmented.leftCols(pm.x.cols()) = pm.x;
  std::vector<Index> tested_cols;
  for (std::size_t e = 0; e < stages.size(); ++e) {
    const Index c = pm.x.cols() + static_cast<Index>(e);
    augmented.col(c) = stages[e].residuals;
    tested_cols.push_back(c);
  }
  const auto rf = detail::retained_fit(augmented, pm.y, spec.covariance, pm.absorbed());
  TestResult t;
  t.name = "Wu-Hausman";
  std::string endo;
  for (const auto& e : pm.endogenous_names) endo += (endo.empty() ? "" : ",") + e;
  t.null_hypothesis = "instrumented regressors (" + endo + ") are exogenous";
  t.inputs["endogenous"] = endo;
  t.inputs["covariance"] = std::string(to_string(spec.covariance));
  t.inputs["iv_mode"] = std::string(to_string(spec.iv_mode));
  const auto tested = detail::retained_positions(rf, tested_cols);
  detail::wald_f(t, rf.beta, rf.cov, tested, rf.df);
  if (tested.empty()) t.df1 = static_cast<double>(tested_cols.size());
  return t;
}

// ---------------------------------------------------------------------------
// Multicollinearity screens

/// Listwise-complete data matrix of `columns`, logged where requested.
inline Matrix complete_matrix(const PanelDataset& panel, const std::vector<std::string>& columns,
                              const std::set<std::string>& log_columns = {}) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < panel.row_count(); ++i) {
    std::vector<double> row;
    bool ok = true;
    for (const auto& c : columns) {
      const auto& v = panel.column(c).values[i];
      if (!v || (log_columns.contains(c) && *v <= 0.0)) {
        ok = false;
        break;
      }
      row.push_back(log_columns.contains(c) ? std::log(*v) : *v);
    }
    if (ok) rows.push_back(std::move(row));
  }
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(columns.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < columns.size(); ++c)
      m(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
  return m;
}

struct VifRow {
  std::string column;
  double r_squared = 0.0;
  double vif = 1.0;  // +infinity under perfect collinearity
};

inline std::vector<VifRow> vif(const Matrix& data, const std::vector<std::string>& names) {
  const Index k = data.cols();
  if (k < 2) throw SpecError("VIF needs at least two columns");
  if (data.rows() <= k) throw DataError("VIF needs more complete rows than columns");
  std::vector<VifRow> out;
  for (Index j = 0; j < k; ++j) {
    Matrix others(data.rows(), k);
    others.col(0).setOnes();
    Index c = 1;
    for (Index i = 0; i < k; ++i)
      if (i != j) others.col(c++) = data.col(i);
    const Vector target = data.col(j);
    const auto ls = solve_least_squares(others, target);
    const double sst = (target.array() - target.mean()).square().sum();
    VifRow row{names[static_cast<std::size_t>(j)]};
    if (sst <= 0.0) {
      row.r_squared = 1.0;
      row.vif = std::numeric_limits<double>::infinity();
    } else {
      row.r_squared = 1.0 - ls.residuals.squaredNorm() / sst;
      const double tolerance = 1.0 - row.r_squared;
      row.vif = tolerance <= 1e-12 ? std::numeric_limits<double>::infinity() : 1.0 / tolerance;
    }
    out.push_back(std::move(row));
  }
  return out;
}

/// VIF_j = 1 / (1 - R^2_j), regressing each column on the others plus an
/// intercept, pooled over listwise-complete rows.
inline std::vector<VifRow> vif(const PanelDataset& panel, const std::vector<std::string>& columns,
                               const std::set<std::string>& log_columns = {}) {
  return vif(complete_matrix(panel, columns, log_columns), columns);
}

inline Matrix correlation_matrix(const Matrix& data, const std::vector<std::string>& names) {
  const Index k = data.cols();
  if (data.rows() < 2) throw DataError("correlation needs at least two complete rows");
  Matrix centered = data.rowwise() - data.colwise().mean();
  Vector norms = centered.colwise().norm();
  for (Index j = 0; j < k; ++j)
    if (!(norms(j) > 0.0))
      throw DataError("column '" + names[static_cast<std::size_t>(j)] + "' has zero variance");
  Matrix corr = (centered.transpose() * centered).array() / (norms * norms.transpose()).array();
  corr = 0.5 * (corr + corr.transpose());
  for (Index j = 0; j < k; ++j) corr(j, j) = 1.0;
  return corr.cwiseMax(-1.0).cwiseMin(1.0);
}

/// Pearson correlations over listwise-complete rows.
inline Matrix correlation_matrix(const PanelDataset& panel, const std::vector<std::string>& columns,
                                 const std::set<std::string>& log_columns = {}) {
  return correlation_matrix(complete_matrix(panel, columns, log_columns), columns);
}

}  // namespace gaspanel
