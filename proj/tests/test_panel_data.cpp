#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "gaspanel/panel_data.hpp"

using namespace gaspanel;
using fixtures::make_column;

namespace {

CsvTable csv_from(const std::string& text, std::string source = "mem.csv") {
  std::istringstream in(text);
  return parse_csv(in, std::move(source));
}

const std::vector<ColumnSchema> kPopSchema{{"state_id", Unit::Dimensionless, Role::Key},
                                           {"year", Unit::Dimensionless, Role::Key},
                                           {"pop", Unit::ThousandsOfPersons, Role::Regressor}};

PanelDataset series(std::vector<double> values, int first_year = 2000) {
  std::vector<RowKey> rows;
  std::vector<Value> v;
  for (std::size_t i = 0; i < values.size(); ++i) {
    rows.push_back({1, first_year + static_cast<int>(i)});
    v.push_back(values[i]);
  }
  return PanelDataset(KeyKind::Panel, rows, {make_column("x", v)});
}

/// One-year panel of `n` states with the given prices.
PanelDataset price_year(const std::vector<Value>& prices) {
  std::vector<RowKey> rows;
  for (std::size_t i = 0; i < prices.size(); ++i) rows.push_back({static_cast<int>(i) + 1, 2005});
  return PanelDataset(KeyKind::Panel, rows, {make_column("p", prices)});
}

AdjacencyMap graph(const std::vector<std::pair<int, int>>& edges) {
  AdjacencyMap a;
  for (auto [x, y] : edges) {
    a.neighbours[x].insert(y);
    a.neighbours[y].insert(x);
  }
  return a;
}

}  // namespace

TEST(LoadCsv, WellFormedTable) {
  const auto p = panel_from_csv(csv_from("state_id,year,pop\n1,2000,10\n1,2001,11\n2,2000,7\n"), kPopSchema);
  EXPECT_EQ(p.row_count(), 3u);
  EXPECT_EQ(p.kind(), KeyKind::Panel);
  EXPECT_EQ(p.column("pop").schema.unit, Unit::ThousandsOfPersons);
  EXPECT_EQ(*p.column("pop").values[2], 7.0);
}

TEST(LoadCsv, DuplicateKeyNamesTheRow) {
  try {
    panel_from_csv(csv_from("state_id,year,pop\n26,2005,1\n26,2006,2\n26,2005,3\n"), kPopSchema);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("duplicate key"), std::string::npos) << msg;
    EXPECT_NE(msg.find(":4:"), std::string::npos) << msg;
  }
}

TEST(LoadCsv, EmptyCellsBecomeMissing) {
  const std::string text = "state_id,year,pop\n1,2000,\n1,2001,4\n2,2000,\n2,2001,5\n3,2000,6\n";
  const auto p = panel_from_csv(csv_from(text), kPopSchema);
  // independent scan: count lines ending in a comma
  std::size_t expected = 0;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty() && line.back() == ',') ++expected;
  EXPECT_EQ(p.missing_count("pop"), expected);
}

TEST(LoadCsv, SchemaAndParseErrors) {
  EXPECT_THROW(panel_from_csv(csv_from("state_id,year\n1,2000\n"), kPopSchema), DataError);
  EXPECT_THROW(panel_from_csv(csv_from("state_id,year,popx\n1,2000,1\n"), kPopSchema), DataError);
  try {
    panel_from_csv(csv_from("state_id,year,pop\n1,2000,abc\n"), kPopSchema);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("column pop"), std::string::npos);
  }
}

TEST(Adjacency, AsymmetryIsReported) {
  const auto t = csv_from("state_id,neighbor_id\n1,2\n2,1\n2,3\n");
  EXPECT_THROW(adjacency_from_csv(t), DataError);
  const auto lax = adjacency_from_csv(t, false);
  EXPECT_EQ(adjacency_violations(lax).size(), 1u);
}

TEST(Assemble, EmploymentAndImportsBroadcast) {
  std::vector<RowKey> rows;
  std::vector<Value> emp;
  for (int s = 1; s <= 32; ++s)
    for (int y = 1997; y <= 2018; ++y) {
      rows.push_back({s, y});
      emp.push_back(1000.0 + s + y);
    }
  std::vector<RowKey> yrs;
  std::vector<Value> ngi;
  for (int y = 1997; y <= 2018; ++y) {
    yrs.push_back({0, y});
    ngi.push_back(10.0 * (y - 1990));
  }
  std::vector<RowKey> st;
  std::vector<Value> dist;
  for (int s = 1; s <= 32; ++s) {
    st.push_back({s, 0});
    dist.push_back(100.0 + 3 * s);
  }
  const PanelDataset e(KeyKind::Panel, rows, {make_column("emp", emp, Unit::ThousandsOfPersons)});
  const PanelDataset i(KeyKind::TimeSeries, yrs, {make_column("ngi", ngi, Unit::MillionMcf)});
  const PanelDataset d(KeyKind::CrossSection, st, {make_column("dist", dist, Unit::Km)});
  const auto p = assemble_panel({e, i, d}, UnitPolicy{{{"emp", Unit::Persons, ""}}});
  EXPECT_EQ(p.row_count(), 704u);
  EXPECT_TRUE(p.is_balanced());

  std::map<int, double> by_year;
  std::map<int, double> by_state;
  for (std::size_t r = 0; r < p.row_count(); ++r) {
    const auto key = p.rows()[r];
    auto [it, fresh] = by_year.emplace(key.year, *p.column("ngi").values[r]);
    EXPECT_EQ(it->second, *p.column("ngi").values[r]);
    auto [jt, fresh2] = by_state.emplace(key.state, *p.column("dist").values[r]);
    EXPECT_EQ(jt->second, *p.column("dist").values[r]);
    EXPECT_EQ(*p.column("emp").values[r], (1000.0 + key.state + key.year) * 1000.0);
  }

  // the mean of a broadcast column is the row-weighted mean of the source
  const auto s = summary_stats(p, {"ngi"}).front();
  double expected = 0.0;
  for (const auto& v : ngi) expected += *v * 32.0;
  EXPECT_NEAR(s.mean, expected / 704.0, 1e-12 * s.mean);

  // order independence
  const auto q = assemble_panel({d, i, e}, UnitPolicy{{{"emp", Unit::Persons, ""}}});
  ASSERT_EQ(q.columns().size(), p.columns().size());
  for (std::size_t c = 0; c < p.columns().size(); ++c) {
    EXPECT_EQ(p.columns()[c].name(), q.columns()[c].name());
    EXPECT_EQ(p.columns()[c].values, q.columns()[c].values);
  }
}

TEST(Assemble, ThousandsToPersons) {
  const PanelDataset e(KeyKind::Panel, {{1, 2000}, {2, 2000}},
                       {make_column("emp_nonmining_thousands", {1403.33, 1403.33}, Unit::ThousandsOfPersons),
                        make_column("emp_mining_thousands", {1.0, 2.0}, Unit::ThousandsOfPersons)});
  const auto p = assemble_panel({e}, replication_unit_policy());
  const auto s = summary_stats(p, {"emp_nonmining"}).front();
  EXPECT_NEAR(s.mean, 1403330.0, 1e-6);
  EXPECT_EQ(p.column("emp_nonmining").schema.unit, Unit::Persons);
  EXPECT_THROW(unit_factor(Unit::Km, Unit::Persons), DataError);
}

TEST(Assemble, KeySpaceMismatch) {
  const PanelDataset e(KeyKind::Panel, {{1, 2000}, {2, 2000}}, {make_column("y", {1.0, 2.0})});
  const PanelDataset d(KeyKind::CrossSection, {{1, 0}}, {make_column("d", {1.0})});
  EXPECT_THROW(assemble_panel({e, d}), DataError);
  const PanelDataset t(KeyKind::TimeSeries, {{0, 2001}}, {make_column("g", {1.0})});
  EXPECT_THROW(assemble_panel({e, t}), DataError);
  const PanelDataset dup(KeyKind::Panel, {{1, 2000}, {2, 2000}}, {make_column("y", {1.0, 3.0})});
  EXPECT_THROW(assemble_panel({e, dup}), DataError);
}

TEST(Lag, ShiftDefinition) {
  const auto p = lag_series(series({2.0, 3.0, 4.0}), "x", 1);
  const auto& v = p.column("x_lag1").values;
  EXPECT_FALSE(v[0]);
  EXPECT_EQ(*v[1], 2.0);
  EXPECT_EQ(*v[2], 3.0);
  EXPECT_THROW(lag_series(series({2.0, 3.0, 4.0}), "x", 3), SpecError);
}

TEST(Lag, ThreeYearsOnLongSeries) {
  std::vector<double> x(22);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i) * 1.5;
  const auto p = lag_series(series(x, 1997), "x", 3);
  const auto& v = p.column("x_lag3").values;
  for (std::size_t i = 0; i < 22; ++i) EXPECT_EQ(v[i].has_value(), i >= 3);
}

TEST(Lag, CompositionOnOverlap) {
  auto p = fixtures::random_panel(21, 3, 8);
  for (auto [j, k] : {std::pair{1, 1}, std::pair{1, 2}, std::pair{2, 3}}) {
    const auto once = lag_series(lag_series(p, "x1", j, "a"), "a", k, "b");
    const auto direct = lag_series(p, "x1", j + k, "c");
    const auto& b = once.column("b").values;
    const auto& c = direct.column("c").values;
    for (std::size_t i = 0; i < b.size(); ++i) {
      EXPECT_EQ(b[i].has_value(), c[i].has_value());
      if (b[i] && c[i]) {
        EXPECT_EQ(*b[i], *c[i]);
      }
    }
  }
}

TEST(Deflate, IdentityAndRoundTrip) {
  const PanelDataset p(KeyKind::Panel, {{1, 2014}, {1, 2015}, {1, 2016}, {2, 2014}, {2, 2015}, {2, 2016}},
                       {make_column("nom", {100.0, 120.0, Value{}, 90.0, 95.0, 140.0}),
                        make_column("one", {1.0, 1.0, 1.0, 1.0, 1.0, 1.0}),
                        make_column("idx", {93.7, 100.0, 104.9, 93.7, 100.0, 104.9})});
  const auto id = deflate_prices(p, "nom", "one", 2015, "real");
  EXPECT_EQ(id.column("real").values, p.column("nom").values);

  const auto r = deflate_prices(p, "nom", "idx", 2015, "real");
  for (std::size_t i = 0; i < p.row_count(); ++i) {
    const auto& nom = p.column("nom").values[i];
    const auto& real = r.column("real").values[i];
    ASSERT_EQ(nom.has_value(), real.has_value());
    if (!nom) continue;
    const double back = *real * (*p.column("idx").values[i] / 100.0);
    EXPECT_NEAR(back, *nom, 1e-12 * *nom);
  }
  EXPECT_EQ(r.column("real").schema.unit, Unit::PesosPerGj2015);
}

TEST(Deflate, Errors) {
  const PanelDataset no_base(KeyKind::Panel, {{1, 2014}}, {make_column("n", {1.0}), make_column("d", {1.0})});
  EXPECT_THROW(deflate_prices(no_base, "n", "d"), DataError);
  const PanelDataset neg(KeyKind::Panel, {{1, 2014}, {1, 2015}},
                         {make_column("n", {1.0, 1.0}), make_column("d", {-1.0, 1.0})});
  EXPECT_THROW(deflate_prices(neg, "n", "d"), DataError);
  const PanelDataset gap(KeyKind::Panel, {{1, 2014}, {1, 2015}},
                         {make_column("n", {1.0, 1.0}), make_column("d", {Value{}, 1.0})});
  EXPECT_THROW(deflate_prices(gap, "n", "d"), DataError);
}

TEST(Interpolate, TwoNeighbourAverage) {
  const auto p = price_year({100.0, Value{}, 200.0});
  const auto out = interpolate_missing_state_prices(p, "p", graph({{1, 2}, {2, 3}}));
  EXPECT_DOUBLE_EQ(*out.column("p").values[1], 150.0);
  EXPECT_EQ(*out.column("p").values[0], 100.0);
}

TEST(Interpolate, AllObservedIsNoOp) {
  const auto p = price_year({1.0, 2.0, 3.0});
  const auto out = interpolate_missing_state_prices(p, "p", graph({{1, 2}, {2, 3}}));
  EXPECT_EQ(out.column("p").values, p.column("p").values);
}

TEST(Interpolate, ChainReachesFixedPoint) {
  const auto p = price_year({100.0, Value{}, Value{}});
  const auto out = interpolate_missing_state_prices(p, "p", graph({{1, 2}, {2, 3}}));
  EXPECT_DOUBLE_EQ(*out.column("p").values[1], 100.0);
  EXPECT_DOUBLE_EQ(*out.column("p").values[2], 100.0);
}

TEST(Interpolate, IdempotentAndObservedUntouched) {
  const auto p = price_year({100.0, Value{}, 300.0, Value{}, Value{}, 50.0});
  const auto g = graph({{1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}, {2, 5}});
  const auto once = interpolate_missing_state_prices(p, "p", g);
  const auto twice = interpolate_missing_state_prices(once, "p", g);
  EXPECT_EQ(once.column("p").values, twice.column("p").values);
  for (std::size_t i : {0u, 2u, 5u}) EXPECT_EQ(once.column("p").values[i], p.column("p").values[i]);
  for (const auto& v : once.column("p").values) EXPECT_TRUE(v.has_value());
}

TEST(Interpolate, DisconnectedStateFails) {
  const auto p = price_year({100.0, Value{}, Value{}});
  EXPECT_THROW(interpolate_missing_state_prices(p, "p", graph({{1, 2}})), DataError);
}

TEST(EffectiveDistance, RoutingRule) {
  const std::map<int, std::optional<double>> direct{{26, 184.0}, {9, 780.0}, {12, std::nullopt}};
  const std::map<int, std::optional<double>> cdmx{{26, 1700.0}, {9, 0.0}, {12, 300.0}};
  const auto d = compute_effective_distance(direct, cdmx, {9, 12}, 780.0);
  EXPECT_EQ(d.at(26), 184.0);
  EXPECT_EQ(d.at(9), 780.0);
  EXPECT_EQ(d.at(12), 1080.0);
  const std::map<int, std::optional<double>> missing{{26, std::nullopt}};
  EXPECT_THROW(compute_effective_distance(missing, cdmx, {}, 780.0), DataError);
}

TEST(Summary, HandComputed) {
  const std::vector<Value> v{1.0, 2.0, Value{}, 3.0};
  const auto s = summarize("x", Unit::Dimensionless, v);
  EXPECT_EQ(s.n, 3u);
  EXPECT_DOUBLE_EQ(s.mean, 2.0);
  EXPECT_DOUBLE_EQ(s.std_dev, 1.0);
  EXPECT_EQ(s.min, 1.0);
  EXPECT_EQ(s.max, 3.0);
  const std::vector<Value> c{4.0, 4.0, 4.0};
  EXPECT_EQ(summarize("c", Unit::Dimensionless, c).std_dev, 0.0);
  const std::vector<Value> none{Value{}};
  EXPECT_THROW(summarize("e", Unit::Dimensionless, none), DataError);
}

TEST(PanelDataset, RowOrderIsCanonical) {
  const PanelDataset a(KeyKind::Panel, {{2, 2001}, {1, 2000}, {1, 2001}}, {make_column("v", {3.0, 1.0, 2.0})});
  EXPECT_EQ(a.rows()[0], (RowKey{1, 2000}));
  EXPECT_EQ(*a.column("v").values[2], 3.0);
  EXPECT_THROW(PanelDataset(KeyKind::Panel, {{1, 2000}, {1, 2000}}, {make_column("v", {1.0, 2.0})}), DataError);
  EXPECT_THROW(PanelDataset(KeyKind::Panel, {{1, 2000}}, {make_column("v", {NAN})}), DataError);
}
