#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "fixtures.hpp"
#include "gaspanel/estimators.hpp"

using namespace gaspanel;
using fixtures::make_column;

namespace {

ModelSpec fe_spec() {
  ModelSpec s;
  s.name = "fe";
  s.dependent = "y";
  s.exogenous = {"x1", "x2", "g"};
  s.interactions = {{"g", "d"}};
  s.fixed_effects = FixedEffects::State;
  return s;
}

ModelSpec ols_spec() {
  ModelSpec s;
  s.name = "ols";
  s.dependent = "y";
  s.exogenous = {"x1", "x2"};
  return s;
}

ModelSpec iv_spec(IvMode mode, FixedEffects fe) {
  ModelSpec s;
  s.name = "iv";
  s.dependent = "y";
  s.exogenous = {"x2"};
  s.endogenous = {"g"};
  s.instruments = {"z"};
  s.interactions = {{"g", "d"}};
  s.iv_mode = mode;
  s.fixed_effects = fe;
  return s;
}

/// random panel plus an instrument z correlated with g
PanelDataset with_instrument(const PanelDataset& p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  std::vector<Value> inst;
  for (const auto& g : p.column("g").values) inst.push_back(*g + 0.5 * z(rng));
  return p.with_column(make_column("z", inst));
}

PanelDataset scaled(const PanelDataset& p, const std::string& col, double c) {
  Column out = p.column(col);
  for (auto& v : out.values) *v *= c;
  return p.with_column(out);
}

PanelDataset shuffled(const PanelDataset& p, std::uint64_t seed) {
  std::vector<std::size_t> order(p.row_count());
  std::iota(order.begin(), order.end(), 0u);
  std::shuffle(order.begin(), order.end(), std::mt19937_64(seed));
  std::vector<RowKey> rows;
  std::vector<Column> cols = p.columns();
  for (auto& c : cols) c.values.clear();
  for (auto i : order) {
    rows.push_back(p.rows()[i]);
    for (std::size_t j = 0; j < cols.size(); ++j) cols[j].values.push_back(p.columns()[j].values[i]);
  }
  return PanelDataset(p.kind(), rows, cols, p.state_names());
}

void expect_rel(const Vector& a, const Vector& b, double tol) {
  ASSERT_EQ(a.size(), b.size());
  for (Index i = 0; i < a.size(); ++i) EXPECT_NEAR(a(i), b(i), tol * std::max(1.0, std::abs(b(i)))) << "index " << i;
}

}  // namespace

TEST(WithinDemean, Examples) {
  const PanelDataset p(KeyKind::Panel, {{1, 1}, {1, 2}, {1, 3}, {2, 1}, {2, 2}, {2, 3}},
                       {make_column("v", {1.0, 2.0, 3.0, 5.0, 5.0, 8.0}), make_column("d", {7.0, 7.0, 7.0, 2.0, 2.0, 2.0})});
  const auto once = within_demean(p, {"v", "d"});
  EXPECT_DOUBLE_EQ(*once.column("v").values[0], -1.0);
  EXPECT_DOUBLE_EQ(*once.column("v").values[1], 0.0);
  EXPECT_DOUBLE_EQ(*once.column("v").values[2], 1.0);
  for (const auto& v : once.column("d").values) EXPECT_EQ(*v, 0.0);
  const auto twice = within_demean(once, {"v", "d"});
  for (std::size_t i = 0; i < p.row_count(); ++i)
    EXPECT_NEAR(*twice.column("v").values[i], *once.column("v").values[i], 1e-15);
}

TEST(WithinDemean, EmptyGroupFails) {
  const PanelDataset p(KeyKind::Panel, {{1, 1}, {2, 1}}, {make_column("v", {1.0, Value{}})});
  EXPECT_THROW(within_demean(p, {"v"}), DataError);
}

TEST(Ols, PerfectFit) {
  const PanelDataset p(KeyKind::Panel, {{1, 1}, {1, 2}, {2, 1}, {2, 2}, {3, 1}},
                       {make_column("y", {3.0, 5.0, 7.0, 9.0, 11.0}), make_column("x1", {1.0, 2.0, 3.0, 4.0, 5.0})});
  ModelSpec s;
  s.name = "exact";
  s.dependent = "y";
  s.exogenous = {"x1"};
  const auto f = fit_ols(s, p);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
  EXPECT_LT(f.residuals.norm(), 1e-12);
  EXPECT_NEAR(f.coefficient("x1"), 2.0, 1e-12);
  EXPECT_NEAR(f.coefficient("const"), 1.0, 1e-12);
}

TEST(Ols, IrrelevantRegressorNeverLowersR2) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto p = fixtures::random_panel(seed, 5, 6);
    std::mt19937_64 rng(seed * 7);
    std::normal_distribution<double> z;
    std::vector<Value> noise;
    for (std::size_t i = 0; i < p.row_count(); ++i) noise.push_back(z(rng));
    p = p.with_column(make_column("noise", noise));
    auto s = ols_spec();
    const double base = fit_ols(s, p).r_squared;
    s.exogenous.push_back("noise");
    EXPECT_GE(fit_ols(s, p).r_squared, base - 1e-12);
  }
}

TEST(Ols, ResultInvariants) {
  const auto p = fixtures::random_panel(4, 6, 7);
  for (const auto& s : {ols_spec(), fe_spec()}) {
    const auto f = fit(s, p);
    for (Index j = 0; j < f.coefficients.size(); ++j)
      EXPECT_NEAR(f.std_errors(j), std::sqrt(f.covariance(j, j)), 1e-12 * std::max(1.0, f.std_errors(j)));
    const double scale = fixtures::column_vector(p, "y").cwiseAbs().maxCoeff();
    EXPECT_LT(std::abs(f.residuals.mean()), 1e-8 * scale);
  }
}

TEST(Ols, RejectsMismatchedSpec) {
  const auto p = fixtures::random_panel(4);
  EXPECT_THROW(fit_ols(fe_spec(), p), SpecError);
  EXPECT_THROW(fit_fe(ols_spec(), p), SpecError);
}

TEST(FixedEffects, MatchesLsdvOnSmallFixture) {
  const auto p = fixtures::random_panel(99, 4, 5);
  const auto f = fit_fe(fe_spec(), p);
  const auto pm = prepare_model(fe_spec(), p);
  const auto lsdv = fixtures::lsdv_coefficients(p.with_column(make_column("gd", [&] {
    std::vector<Value> v;
    for (std::size_t i = 0; i < p.row_count(); ++i) v.push_back(*p.column("g").values[i] * *p.column("d").values[i]);
    return v;
  }())), "y", {"x1", "x2", "g", "gd"});
  expect_rel(f.coefficients, lsdv, 1e-8);
  EXPECT_EQ(f.absorbed_groups, 4);
  EXPECT_EQ(f.df_residual, 20 - 4 - 4);
  EXPECT_EQ(f.estimator, Estimator::FE);
  (void)pm;
}

TEST(FixedEffects, MatchesLsdvOnRandomFixtures) {
  for (std::uint64_t seed = 200; seed < 230; ++seed) {
    const int states = 3 + static_cast<int>(seed % 6);
    const int years = 4 + static_cast<int>(seed % 5);
    const auto p = fixtures::random_panel(seed, states, years);
    ModelSpec s = fe_spec();
    s.interactions.clear();
    const auto f = fit_fe(s, p);
    expect_rel(f.coefficients, fixtures::lsdv_coefficients(p, "y", {"x1", "x2", "g"}), 1e-8);
  }
}

TEST(FixedEffects, RecoveredEffectsReproduceLevels) {
  const auto p = fixtures::random_panel(8, 5, 6);
  ModelSpec s = fe_spec();
  const auto f = fit_fe(s, p);
  const auto pm = prepare_model(s, p);
  const Vector fitted = pm.x_level * f.coefficients;
  // level residuals minus the recovered state effect have zero mean per state
  std::map<int, double> sums;
  for (Index r = 0; r < pm.n(); ++r)
    sums[pm.rows[static_cast<std::size_t>(r)].state] += pm.y_level(r) - fitted(r) - f.fixed_effects.at(pm.rows[static_cast<std::size_t>(r)].state);
  for (const auto& [state, sum] : sums) EXPECT_NEAR(sum, 0.0, 1e-9);
}

TEST(FixedEffects, GroupInvariantColumnIsOmitted) {
  const auto p = fixtures::random_panel(5, 5, 6);
  ModelSpec s = fe_spec();
  s.exogenous.push_back("d");
  const auto f = fit_fe(s, p);
  EXPECT_TRUE(f.omitted[f.index_of("d")]);
  EXPECT_EQ(f.coefficient("d"), 0.0);
  EXPECT_FALSE(f.notes.empty());

  ModelSpec only;
  only.name = "dist only";
  only.dependent = "y";
  only.exogenous = {"d"};
  only.fixed_effects = FixedEffects::State;
  EXPECT_THROW(fit_fe(only, p), NumericalError);
}

TEST(FixedEffects, NoHeterogeneityMatchesDemeanedPooled) {
  // identical state means: FE equals OLS without intercept on demeaned data
  const auto p = fixtures::random_panel(31, 4, 6);
  const auto dm = within_demean(p, {"y", "x1", "x2"});
  ModelSpec fe = fe_spec();
  fe.exogenous = {"x1", "x2"};
  fe.interactions.clear();
  const auto f = fit_fe(fe, p);
  Matrix x(static_cast<Index>(dm.row_count()), 2);
  x.col(0) = fixtures::column_vector(dm, "x1");
  x.col(1) = fixtures::column_vector(dm, "x2");
  const auto ls = solve_least_squares(x, fixtures::column_vector(dm, "y"));
  expect_rel(f.coefficients, ls.coefficients, 1e-10);
}

TEST(Tsls, SelfInstrumentingEqualsOls) {
  const auto p = fixtures::random_panel(12, 6, 6);
  ModelSpec iv;
  iv.name = "self";
  iv.dependent = "y";
  iv.exogenous = {"x2"};
  iv.endogenous = {"x1"};
  iv.instruments = {"x1"};
  ModelSpec ols = ols_spec();
  ols.exogenous = {"x2", "x1"};
  const auto a = fit_2sls(iv, p);
  const auto b = fit_ols(ols, p);
  expect_rel(a.coefficients, b.coefficients, 1e-10);
  expect_rel(a.std_errors, b.std_errors, 1e-10);
}

TEST(Tsls, ExactlyIdentifiedMatchesIndirectLeastSquares) {
  const PanelDataset p(KeyKind::Panel, {{1, 1}, {1, 2}, {2, 1}, {2, 2}, {3, 1}, {3, 2}},
                       {make_column("y", {2.0, 3.5, 1.0, 6.0, 4.2, 5.1}),
                        make_column("x", {1.0, 2.0, 0.5, 3.5, 2.2, 2.9}),
                        make_column("z", {0.3, 1.1, -0.2, 2.0, 0.9, 1.7})});
  ModelSpec s;
  s.name = "ils";
  s.dependent = "y";
  s.endogenous = {"x"};
  s.instruments = {"z"};
  const auto f = fit_2sls(s, p);
  Matrix X(6, 2), Z(6, 2);
  X.col(0).setOnes();
  Z.col(0).setOnes();
  X.col(1) = fixtures::column_vector(p, "x");
  Z.col(1) = fixtures::column_vector(p, "z");
  const Vector y = fixtures::column_vector(p, "y");
  const Vector ils = (Z.transpose() * X).inverse() * (Z.transpose() * y);
  expect_rel(f.coefficients, ils, 1e-10);
  EXPECT_EQ(f.estimator, Estimator::TSLS);
}

TEST(Tsls, StructuralResidualContract) {
  const auto p = with_instrument(fixtures::random_panel(77, 8, 6), 5);
  for (auto mode : {IvMode::InteractedInstruments, IvMode::FittedValue}) {
    for (auto fe : {FixedEffects::None, FixedEffects::State}) {
      const auto s = iv_spec(mode, fe);
      const auto f = fit_2sls(s, p);
      const auto pm = prepare_model(s, p);
      const Vector expected = pm.y - pm.x * f.coefficients;
      EXPECT_LT((f.residuals - expected).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, expected.cwiseAbs().maxCoeff()));
      EXPECT_EQ(f.estimator, fe == FixedEffects::State ? Estimator::FE_TSLS : Estimator::TSLS);
      const std::string tag = "iv mode: " + std::string(to_string(mode));
      EXPECT_NE(std::find(f.notes.begin(), f.notes.end(), tag), f.notes.end());
    }
  }
}

TEST(Tsls, InteractedModeUsesInteractedInstruments) {
  const auto p = with_instrument(fixtures::random_panel(78, 8, 6), 6);
  const auto pm = prepare_model(iv_spec(IvMode::InteractedInstruments, FixedEffects::State), p);
  EXPECT_EQ(pm.endogenous_cols.size(), 2u);
  EXPECT_EQ(pm.excluded_names, (std::vector<std::string>{"z", "z_x_d"}));
  const auto fv = prepare_model(iv_spec(IvMode::FittedValue, FixedEffects::State), p);
  EXPECT_EQ(fv.endogenous_cols.size(), 1u);
  EXPECT_EQ(fv.deferred.size(), 1u);
}

TEST(Tsls, SpecValidation) {
  ModelSpec s = iv_spec(IvMode::InteractedInstruments, FixedEffects::None);
  s.instruments.clear();
  EXPECT_THROW(s.validate(), SpecError);
  s = iv_spec(IvMode::None, FixedEffects::None);
  EXPECT_THROW(s.validate(), SpecError);
  s = ols_spec();
  s.endogenous = {"x1"};
  s.instruments = {"x2"};
  EXPECT_THROW(s.validate(), SpecError);  // x1 both exogenous and endogenous
  s = ols_spec();
  s.exogenous.push_back("y");
  EXPECT_THROW(s.validate(), SpecError);
  s = ols_spec();
  s.exogenous.push_back("nope");
  EXPECT_THROW(fit(s, fixtures::random_panel(1)), DataError);
}

TEST(Tsls, CollinearInstrumentFails) {
  const auto p = fixtures::random_panel(13, 5, 5);
  ModelSpec s;
  s.name = "bad";
  s.dependent = "y";
  s.exogenous = {"x2"};
  s.endogenous = {"x1"};
  s.instruments = {"x2"};
  EXPECT_THROW(fit_2sls(s, p), NumericalError);
}

TEST(Invariance, DependentScaling) {
  const auto p = with_instrument(fixtures::random_panel(41, 6, 7), 9);
  for (const auto& s : {ols_spec(), fe_spec(), iv_spec(IvMode::InteractedInstruments, FixedEffects::State)}) {
    const auto a = fit(s, p);
    const auto b = fit(s, scaled(p, "y", 3.5));
    expect_rel(b.coefficients, Vector(a.coefficients * 3.5), 1e-10);
    expect_rel(b.std_errors, Vector(a.std_errors * 3.5), 1e-10);
    expect_rel(b.t_stats, a.t_stats, 1e-10);
    expect_rel(b.p_values, a.p_values, 1e-10);
    EXPECT_NEAR(b.r_squared, a.r_squared, 1e-10);
  }
}

TEST(Invariance, RegressorScaling) {
  const auto p = fixtures::random_panel(42, 6, 7);
  const auto a = fit(fe_spec(), p);
  const auto b = fit(fe_spec(), scaled(p, "x1", 4.0));
  const auto j = a.index_of("x1");
  EXPECT_NEAR(b.coefficients(j), a.coefficients(j) / 4.0, 1e-10 * std::abs(a.coefficients(j)));
  EXPECT_NEAR(b.std_errors(j), a.std_errors(j) / 4.0, 1e-10 * a.std_errors(j));
  expect_rel(b.t_stats, a.t_stats, 1e-10);
  expect_rel(b.p_values, a.p_values, 1e-10);
}

TEST(Invariance, RowPermutation) {
  const auto p = with_instrument(fixtures::random_panel(43, 6, 7), 10);
  for (const auto& s : {ols_spec(), fe_spec(), iv_spec(IvMode::FittedValue, FixedEffects::State)}) {
    const auto a = fit(s, p);
    const auto b = fit(s, shuffled(p, 3));
    EXPECT_EQ(a.coefficients, b.coefficients);
    EXPECT_EQ(a.covariance, b.covariance);
    EXPECT_EQ(a.r_squared, b.r_squared);
  }
}

TEST(Invariance, LogColumnsDropNonpositiveRows) {
  auto p = fixtures::random_panel(44, 4, 5);
  std::vector<Value> pos;
  for (std::size_t i = 0; i < p.row_count(); ++i) pos.push_back(i == 3 ? 0.0 : 1.0 + static_cast<double>(i));
  p = p.with_column(make_column("pos", pos));
  ModelSpec s = ols_spec();
  s.exogenous = {"x1"};
  s.dependent = "pos";
  s.log_columns = {"pos"};
  const auto f = fit(s, p);
  EXPECT_EQ(f.n_obs, static_cast<Index>(p.row_count()) - 1);
}
