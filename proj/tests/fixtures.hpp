#pragma once

// Shared fixtures for the test suite: small random panels and the
// explicit-dummy (LSDV) and closed-form IV oracles.

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "gaspanel/csv.hpp"
#include "gaspanel/estimators.hpp"
#include "gaspanel/panel_data.hpp"

namespace fixtures {

using namespace gaspanel;

inline std::filesystem::path source_dir() { return GASPANEL_SOURCE_DIR; }
inline std::filesystem::path demo_dir() { return source_dir() / "data" / "demo"; }

inline Column make_column(std::string name, std::vector<Value> values, Unit unit = Unit::Dimensionless) {
  return Column{{std::move(name), unit, Role::Regressor}, std::move(values)};
}

/// Balanced random panel with y, x1, x2 (time-varying), a year-only column
/// g, a state-only column d and their product structure.
inline PanelDataset random_panel(std::uint64_t seed, int states = 4, int years = 5) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<RowKey> rows;
  std::vector<Value> y, x1, x2, g, d;
  std::vector<double> mu(static_cast<std::size_t>(states));
  std::vector<double> dist(static_cast<std::size_t>(states));
  std::vector<double> year_shock(static_cast<std::size_t>(years));
  for (auto& m : mu) m = 3.0 * z(rng);
  for (auto& v : dist) v = 5.0 + 2.0 * z(rng);
  for (auto& v : year_shock) v = 10.0 + z(rng);
  for (int s = 0; s < states; ++s) {
    for (int t = 0; t < years; ++t) {
      rows.push_back({s + 1, 2000 + t});
      const double a = z(rng) + 0.3 * mu[static_cast<std::size_t>(s)];
      const double b = z(rng);
      const double gv = year_shock[static_cast<std::size_t>(t)];
      const double dv = dist[static_cast<std::size_t>(s)];
      x1.push_back(a);
      x2.push_back(b);
      g.push_back(gv);
      d.push_back(dv);
      y.push_back(1.5 * a - 0.7 * b + 0.4 * gv - 0.05 * gv * dv + mu[static_cast<std::size_t>(s)] +
                  0.5 * z(rng));
    }
  }
  return PanelDataset(KeyKind::Panel, rows,
                      {make_column("y", y), make_column("x1", x1), make_column("x2", x2), make_column("g", g),
                       make_column("d", d)});
}

/// Explicit state dummies plus OLS without intercept; returns the
/// coefficients of `columns` (in order).
inline Vector lsdv_coefficients(const PanelDataset& p, const std::string& dep,
                                const std::vector<std::string>& columns) {
  const auto states = p.state_ids();
  const Index n = static_cast<Index>(p.row_count());
  const Index k = static_cast<Index>(columns.size());
  Matrix x = Matrix::Zero(n, k + static_cast<Index>(states.size()));
  Vector y(n);
  for (Index i = 0; i < n; ++i) {
    y(i) = *p.column(dep).values[static_cast<std::size_t>(i)];
    for (Index j = 0; j < k; ++j) x(i, j) = *p.column(columns[static_cast<std::size_t>(j)]).values[static_cast<std::size_t>(i)];
    const int s = p.rows()[static_cast<std::size_t>(i)].state;
    const auto pos = std::find(states.begin(), states.end(), s) - states.begin();
    x(i, k + pos) = 1.0;
  }
  // normal equations, independent of the QR path under test
  const Vector beta = (x.transpose() * x).ldlt().solve(x.transpose() * y);
  return beta.head(k);
}

inline Vector column_vector(const PanelDataset& p, const std::string& name) {
  Vector v(static_cast<Index>(p.row_count()));
  for (std::size_t i = 0; i < p.row_count(); ++i) v(static_cast<Index>(i)) = *p.column(name).values[i];
  return v;
}

struct TailRow {
  std::string kind;
  double statistic, df1, df2, p_value;
};

inline std::vector<TailRow> tail_reference() {
  const auto t = read_csv(source_dir() / "tests" / "reference" / "tail_probabilities.csv");
  std::vector<TailRow> out;
  for (const auto& r : t.rows) out.push_back({r[0], std::stod(r[1]), std::stod(r[2]), std::stod(r[3]), std::stod(r[4])});
  return out;
}

}  // namespace fixtures
