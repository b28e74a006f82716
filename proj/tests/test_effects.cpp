#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "gaspanel/effects.hpp"
#include "reference_tables.hpp"

using namespace gaspanel;

namespace {

/// (V22, V23, V33) solved from three published (distance, SE) rows.
Eigen::Vector3d solve_covariance_block(const reference::MarginRow& a, const reference::MarginRow& b,
                                       const reference::MarginRow& c) {
  Eigen::Matrix3d m;
  Eigen::Vector3d rhs;
  for (int i = 0; const auto* r : {&a, &b, &c}) {
    m.row(i) << 1.0, 2.0 * r->dist_km, r->dist_km * r->dist_km;
    rhs(i) = r->std_error * r->std_error;
    ++i;
  }
  return m.fullPivLu().solve(rhs);
}

LinearEffect published_effect() {
  const auto v = solve_covariance_block(reference::kMargins[0], reference::kMargins[4], reference::kMargins[7]);
  LinearEffect e;
  e.main = reference::kBetaNgi;
  e.slope = reference::kBetaInteraction;
  e.var_main = v(0);
  e.cov_main_slope = v(1);
  e.var_slope = v(2);
  return e;
}

FitResult fake_fit(const LinearEffect& e, bool reversed_name = false) {
  FitResult f;
  f.model_name = "fake";
  f.names = {"pop", "ngi", reversed_name ? "dist_x_ngi" : "ngi_x_dist"};
  f.coefficients = Vector(3);
  f.coefficients << 371.97, e.main, e.slope;
  f.covariance = Matrix::Zero(3, 3);
  f.covariance(0, 0) = 1.0;
  f.covariance(1, 1) = e.var_main;
  f.covariance(1, 2) = f.covariance(2, 1) = e.cov_main_slope;
  f.covariance(2, 2) = e.var_slope;
  f.omitted = {false, false, false};
  f.df_residual = 669;
  return f;
}

std::vector<StateDistance> published_states() {
  std::vector<StateDistance> out;
  for (const auto& r : reference::kMargins) out.push_back({std::string(r.state), r.dist_km});
  return out;
}

}  // namespace

TEST(ArFit, NoiselessRecovery) {
  std::vector<double> x{1.0, 2.0, 3.0};
  for (int t = 3; t < 60; ++t) x.push_back(0.5 * x[t - 1] + 0.3 * x[t - 2] + 0.1 * x[t - 3]);
  const auto fit = ar_fit(x, 3);
  EXPECT_NEAR(fit.phi[0], 0.5, 1e-8);
  EXPECT_NEAR(fit.phi[1], 0.3, 1e-8);
  EXPECT_NEAR(fit.phi[2], 0.1, 1e-8);
  EXPECT_NEAR(fit.intercept, 0.0, 1e-8);
}

TEST(ArFit, ConstantSeries) {
  const std::vector<double> x(12, 4.5);
  const auto fit = ar_fit(x, 3);
  EXPECT_TRUE(fit.intercept_only);
  for (std::size_t t = 0; t < x.size(); ++t) {
    EXPECT_EQ(fit.fitted[t].has_value(), t >= 3);
    if (fit.fitted[t]) {
      EXPECT_EQ(*fit.fitted[t], 4.5);
    }
  }
}

TEST(ArFit, WhiteNoiseFittedVarianceBounded) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(30);
    for (auto& v : x) v = n(rng);
    const auto fit = ar_fit(x, 3);
    std::vector<double> f, y;
    for (std::size_t t = 3; t < x.size(); ++t) {
      f.push_back(*fit.fitted[t]);
      y.push_back(x[t]);
    }
    auto var = [](const std::vector<double>& v) {
      const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
      double s = 0.0;
      for (double a : v) s += (a - m) * (a - m);
      return s;
    };
    EXPECT_LE(var(f), var(y) + 1e-12);
  }
}

TEST(ArFit, TooShort) {
  const std::vector<double> x{1.0, 2.0, 1.5, 3.0, 2.5, 2.0};
  EXPECT_THROW(ar_fit(x, 3), DataError);
  EXPECT_THROW(ar_fit(x, 0), SpecError);
}

TEST(Instruments, WithoutWarmup) {
  std::map<int, double> price;
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n;
  for (int y = 1998; y < 2020; ++y) price[y] = 4.0 + n(rng);
  const auto inst = build_instruments(price);
  ASSERT_EQ(inst.years.size(), 22u);
  EXPECT_EQ(inst.missing_years(), (std::vector<int>{1998, 1999, 2000}));
  EXPECT_FALSE(inst.lag1_price[0]);
  EXPECT_EQ(*inst.lag1_price[1], price.at(1998));
  EXPECT_TRUE(inst.ar3_predicted_price[3].has_value());
  EXPECT_FALSE(inst.ar3_predicted_price[2].has_value());
  // prediction for a year uses only earlier prices
  const double expected = inst.ar.intercept + inst.ar.phi[0] * price.at(2000) + inst.ar.phi[1] * price.at(1999) +
                          inst.ar.phi[2] * price.at(1998);
  EXPECT_NEAR(*inst.ar3_predicted_price[3], expected, 1e-12);
}

TEST(Instruments, WarmupGivesFullCoverage) {
  std::map<int, double> price, warm;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  for (int y = 1998; y < 2020; ++y) price[y] = 4.0 + n(rng);
  for (int y = 1995; y < 1998; ++y) warm[y] = 4.0 + n(rng);
  const auto inst = build_instruments(price, warm);
  EXPECT_TRUE(inst.missing_years().empty());
  EXPECT_EQ(*inst.lag1_price[0], warm.at(1997));

  // broadcast to a 32 x 22 panel: every row usable, constant within year
  std::vector<RowKey> rows;
  std::vector<Value> ones;
  for (int s = 1; s <= 32; ++s)
    for (int y = 1998; y < 2020; ++y) {
      rows.push_back({s, y});
      ones.push_back(1.0);
    }
  const PanelDataset p(KeyKind::Panel, rows, {fixtures::make_column("one", ones)});
  const auto merged = assemble_panel({p, inst.as_time_series()});
  EXPECT_EQ(merged.row_count(), 704u);
  EXPECT_EQ(merged.missing_count(kArInstrument), 0u);
  EXPECT_EQ(merged.missing_count(kLagInstrument), 0u);
  EXPECT_FALSE(merged.has_column("import_price"));
}

TEST(Instruments, ErrorsAndOverlap) {
  std::map<int, double> shortp{{2000, 1.0}, {2001, 2.0}, {2002, 1.0}, {2003, 3.0}, {2004, 2.0}};
  EXPECT_THROW(build_instruments(shortp), DataError);
  std::map<int, double> gap{{2000, 1.0}, {2002, 2.0}};
  EXPECT_THROW(build_instruments(gap), DataError);
  std::map<int, double> warm{{2000, 9.0}};
  EXPECT_THROW(build_instruments(shortp, warm), DataError);
}

TEST(Margins, PublishedPointEstimates) {
  const auto table = marginal_effects(published_effect(), published_states());
  ASSERT_EQ(table.rows.size(), 8u);
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_NEAR(table.rows[i].effect, reference::kMargins[i].effect, 0.01) << reference::kMargins[i].state;
    EXPECT_EQ(table.rows[i].state, reference::kMargins[i].state);
  }
}

TEST(Margins, DeltaMethodPredictsPublishedErrors) {
  const auto e = published_effect();
  EXPECT_NEAR(e.var_main, 2392.4, 1.0);
  EXPECT_NEAR(e.cov_main_slope, -1.9083, 0.002);
  EXPECT_NEAR(e.var_slope, 0.0016119, 2e-6);
  const auto table = marginal_effects(e, published_states());
  for (std::size_t i = 0; i < 8; ++i)
    EXPECT_NEAR(table.rows[i].std_error, reference::kMargins[i].std_error, 0.02) << reference::kMargins[i].state;
}

TEST(Margins, FromFitResult) {
  const auto e = published_effect();
  for (bool reversed : {false, true}) {
    const auto f = fake_fit(e, reversed);
    const auto table = marginal_effects(f, published_states());
    EXPECT_NEAR(table.rows[0].effect, 243.27, 0.01);
    EXPECT_EQ(*table.basis.df, 669.0);
    EXPECT_NEAR(table.rows[0].p_value, student_t_pvalue(table.rows[0].t, 669.0), 1e-15);
  }
  FitResult missing = fake_fit(e);
  missing.names[2] = "other";
  EXPECT_THROW(marginal_effects(missing, published_states()), SpecError);
  FitResult omitted = fake_fit(e);
  omitted.omitted[2] = true;
  EXPECT_THROW(linear_effect(omitted), NumericalError);
}

TEST(Margins, LinearityAndParabola) {
  const auto e = published_effect();
  const double d1 = 100, d2 = 700, d3 = 1900;
  const double slope12 = (e.effect(d2) - e.effect(d1)) / (d2 - d1);
  const double slope23 = (e.effect(d3) - e.effect(d2)) / (d3 - d2);
  EXPECT_NEAR(slope12, slope23, 1e-12);
  EXPECT_GE(e.var_slope, 0.0);
  const double dstar = -e.cov_main_slope / e.var_slope;
  for (double delta : {1.0, 50.0, 500.0}) {
    EXPECT_GT(e.variance(dstar + delta), e.variance(dstar));
    EXPECT_GT(e.variance(dstar - delta), e.variance(dstar));
  }
}

TEST(Margins, DeltaMethodEqualsQuadraticForm) {
  const auto e = published_effect();
  Eigen::Matrix2d v;
  v << e.var_main, e.cov_main_slope, e.cov_main_slope, e.var_slope;
  for (double d : {0.0, 132.0, 819.38, 1348.8, 2032.0}) {
    const Eigen::Vector2d g(1.0, d);
    const double direct = std::sqrt(g.dot(v * g));
    EXPECT_NEAR(e.std_error(d), direct, 1e-12 * direct);
  }
}

TEST(Average, MeanDistanceAndSouth) {
  const auto e = published_effect();
  EXPECT_NEAR(e.effect(reference::kMeanDistance), reference::kAverageEffect, 0.01);
  // averaging over states equals the effect at their mean distance
  const auto states = published_states();
  double mean = 0.0;
  for (const auto& s : states) mean += s.dist_km / static_cast<double>(states.size());
  EXPECT_NEAR(average_effect(e, states), e.effect(mean), 1e-10);
  EXPECT_NEAR(e.effect(1348.8), reference::kSouthAverage, 0.5);
  EXPECT_DOUBLE_EQ(average_effect(e, {states[3]}), e.effect(states[3].dist_km));
  EXPECT_THROW(average_effect(e, {}), SpecError);
}

TEST(Elasticity, PublishedArithmetic) {
  const auto s = elasticity_summary(reference::kElasticity, reference::kMeanRealPrice, reference::kMeanMiningEmployment);
  EXPECT_NEAR(s.price_step, reference::kPriceStep, 0.005);
  EXPECT_NEAR(s.employment_change, reference::kJobChange, 0.05);
  EXPECT_EQ(s.percent_change, 2.38);
  const auto zero = elasticity_summary(0.0, 55.0, 1234.0);
  EXPECT_EQ(zero.employment_change, 0.0);
  EXPECT_EQ(zero.percent_change, 0.0);
  EXPECT_THROW(elasticity_summary(1.0, 0.0, 10.0), SpecError);
  EXPECT_THROW(elasticity_summary(1.0, 10.0, -1.0), SpecError);
}
