#pragma once

// State x year panel container and the transformations that build the
// analysis panel from raw extracts: merging with broadcast, lags, deflation,
// neighbour interpolation of state prices, distance routing, summaries.

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gaspanel/csv.hpp"
#include "gaspanel/errors.hpp"

namespace gaspanel {

// ---------------------------------------------------------------------------
// Schema

enum class Unit {
  Persons,
  ThousandsOfPersons,
  MillionMcf,
  PesosPerGjNominal,
  PesosPerGj2015,
  UsdPerMcf,
  Km,
  Index,
  Dimensionless,
};

enum class Role { Dependent, Regressor, Key, Auxiliary };

inline constexpr std::array<std::pair<Unit, std::string_view>, 9> kUnitNames{{
    {Unit::Persons, "persons"},
    {Unit::ThousandsOfPersons, "thousands-of-persons"},
    {Unit::MillionMcf, "million-MCF"},
    {Unit::PesosPerGjNominal, "Pesos-per-GJ-nominal"},
    {Unit::PesosPerGj2015, "Pesos-per-GJ-2015"},
    {Unit::UsdPerMcf, "USD-per-MCF"},
    {Unit::Km, "km"},
    {Unit::Index, "index"},
    {Unit::Dimensionless, "dimensionless"},
}};

inline std::string_view to_string(Unit unit) {
  for (const auto& [u, name] : kUnitNames)
    if (u == unit) return name;
  return "unknown";
}

inline Unit unit_from_string(std::string_view name) {
  for (const auto& [u, n] : kUnitNames)
    if (n == name) return u;
  throw DataError("unknown unit '" + std::string(name) + "'");
}

struct ColumnSchema {
  std::string name;
  Unit unit = Unit::Dimensionless;
  Role role = Role::Auxiliary;
};

/// A cell is either a finite number or explicitly missing.
using Value = std::optional<double>;

struct Column {
  ColumnSchema schema;
  std::vector<Value> values;

  const std::string& name() const { return schema.name; }
};

enum class KeyKind { Panel, TimeSeries, CrossSection };

/// (state, year). Time series rows carry state 0; cross-section rows year 0.
struct RowKey {
  int state = 0;
  int year = 0;
  auto operator<=>(const RowKey&) const = default;
};

inline std::string describe(const RowKey& key, KeyKind kind) {
  switch (kind) {
    case KeyKind::Panel:
      return "(state " + std::to_string(key.state) + ", year " + std::to_string(key.year) + ")";
    case KeyKind::TimeSeries:
      return "(year " + std::to_string(key.year) + ")";
    case KeyKind::CrossSection:
      return "(state " + std::to_string(key.state) + ")";
  }
  return {};
}

// ---------------------------------------------------------------------------
// PanelDataset

/// Immutable table keyed by (state, year). Rows are kept in ascending
/// (state, year) order regardless of construction order, so every derived
/// statistic is invariant to input row order.
class PanelDataset {
 public:
  PanelDataset() = default;

  PanelDataset(KeyKind kind, std::vector<RowKey> rows, std::vector<Column> columns,
               std::map<int, std::string> state_names = {})
      : kind_(kind), state_names_(std::move(state_names)) {
    for (auto& key : rows) {
      if (kind_ == KeyKind::TimeSeries) key.state = 0;
      if (kind_ == KeyKind::CrossSection) key.year = 0;
    }
    std::vector<std::size_t> order(rows.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return rows[a] < rows[b]; });
    rows_.reserve(rows.size());
    for (auto i : order) rows_.push_back(rows[i]);
    for (std::size_t i = 1; i < rows_.size(); ++i) {
      if (rows_[i] == rows_[i - 1])
        throw DataError("duplicate key " + describe(rows_[i], kind_));
    }
    std::set<std::string> seen;
    for (auto& column : columns) {
      if (!seen.insert(column.name()).second)
        throw DataError("duplicate column '" + column.name() + "'");
      if (column.values.size() != rows_.size())
        throw DataError("column '" + column.name() + "' has " +
                        std::to_string(column.values.size()) + " values for " +
                        std::to_string(rows_.size()) + " rows");
      std::vector<Value> sorted;
      sorted.reserve(order.size());
      for (auto i : order) {
        const auto& v = column.values[i];
        if (v && !std::isfinite(*v))
          throw DataError("non-finite value in column '" + column.name() + "'");
        sorted.push_back(v);
      }
      column.values = std::move(sorted);
      columns_.push_back(std::move(column));
    }
  }

  KeyKind kind() const { return kind_; }
  std::size_t row_count() const { return rows_.size(); }
  std::span<const RowKey> rows() const { return rows_; }
  const std::vector<Column>& columns() const { return columns_; }
  const std::map<int, std::string>& state_names() const { return state_names_; }

  bool has_column(std::string_view name) const {
    return std::any_of(columns_.begin(), columns_.end(),
                       [&](const Column& c) { return c.name() == name; });
  }

  const Column& column(std::string_view name) const {
    for (const auto& c : columns_)
      if (c.name() == name) return c;
    throw DataError("unknown column '" + std::string(name) + "'");
  }

  std::vector<int> state_ids() const {
    std::set<int> ids;
    for (const auto& r : rows_) ids.insert(r.state);
    return {ids.begin(), ids.end()};
  }

  std::vector<int> years() const {
    std::set<int> ys;
    for (const auto& r : rows_) ys.insert(r.year);
    return {ys.begin(), ys.end()};
  }

  std::string state_name(int id) const {
    auto it = state_names_.find(id);
    return it == state_names_.end() ? std::to_string(id) : it->second;
  }

  /// True when every state has exactly one row for every year.
  bool is_balanced() const {
    return kind_ == KeyKind::Panel && rows_.size() == state_ids().size() * years().size();
  }

  std::optional<std::size_t> find_row(RowKey key) const {
    auto it = std::lower_bound(rows_.begin(), rows_.end(), key);
    if (it == rows_.end() || *it != key) return std::nullopt;
    return static_cast<std::size_t>(it - rows_.begin());
  }

  std::size_t missing_count(std::string_view name) const {
    const auto& values = column(name).values;
    return static_cast<std::size_t>(
        std::count_if(values.begin(), values.end(), [](const Value& v) { return !v; }));
  }

  /// Returns a copy with `column` added, or replacing a column of the same name.
  PanelDataset with_column(Column column) const {
    if (column.values.size() != rows_.size())
      throw DataError("column '" + column.name() + "' length does not match panel");
    PanelDataset out = *this;
    for (auto& c : out.columns_) {
      if (c.name() == column.name()) {
        c = std::move(column);
        return out;
      }
    }
    out.columns_.push_back(std::move(column));
    return out;
  }

  PanelDataset with_state_names(std::map<int, std::string> names) const {
    PanelDataset out = *this;
    out.state_names_ = std::move(names);
    return out;
  }

  /// Rows whose key satisfies `keep`, all columns retained.
  template <class Pred>
  PanelDataset filter_rows(Pred keep) const {
    std::vector<RowKey> rows;
    std::vector<Column> columns = columns_;
    for (auto& c : columns) c.values.clear();
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      if (!keep(rows_[i])) continue;
      rows.push_back(rows_[i]);
      for (std::size_t j = 0; j < columns.size(); ++j)
        columns[j].values.push_back(columns_[j].values[i]);
    }
    return PanelDataset(kind_, std::move(rows), std::move(columns), state_names_);
  }

 private:
  KeyKind kind_ = KeyKind::Panel;
  std::vector<RowKey> rows_;
  std::vector<Column> columns_;
  std::map<int, std::string> state_names_;
};

// ---------------------------------------------------------------------------
// CSV ingestion

inline constexpr std::string_view kStateIdColumn = "state_id";
inline constexpr std::string_view kYearColumn = "year";
inline constexpr std::string_view kStateNameColumn = "state_name";

/// Parses an in-memory CSV table against `schema`. The key columns state_id
/// and year (integers) select the key kind; state_name is a text label.
inline PanelDataset panel_from_csv(const CsvTable& table, const std::vector<ColumnSchema>& schema) {
  const auto& src = table.source;
  if (table.header.size() != schema.size())
    throw DataError(src + ": header has " + std::to_string(table.header.size()) +
                    " columns, schema expects " + std::to_string(schema.size()));
  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < table.header.size(); ++i) position[table.header[i]] = i;
  for (const auto& s : schema) {
    if (!position.contains(s.name))
      throw DataError(src + ": schema column '" + s.name + "' not found in header");
  }

  const bool has_state = position.contains(std::string(kStateIdColumn));
  const bool has_year = position.contains(std::string(kYearColumn));
  if (!has_state && !has_year) throw DataError(src + ": no state_id or year key column");
  const KeyKind kind = has_state && has_year ? KeyKind::Panel
                       : has_state           ? KeyKind::CrossSection
                                             : KeyKind::TimeSeries;

  std::vector<RowKey> rows;
  std::vector<Column> columns;
  std::map<int, std::string> names;
  for (const auto& s : schema) {
    if (s.name == kStateIdColumn || s.name == kYearColumn || s.name == kStateNameColumn) continue;
    columns.push_back(Column{s, {}});
  }

  std::map<RowKey, std::size_t> first_line;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& fields = table.rows[r];
    const auto line = std::to_string(table.line_numbers[r]);
    RowKey key;
    if (has_state) {
      auto v = parse_int_cell(fields[position.at(std::string(kStateIdColumn))]);
      if (!v) throw DataError(src + ":" + line + ": column state_id: not an integer");
      key.state = *v;
    }
    if (has_year) {
      auto v = parse_int_cell(fields[position.at(std::string(kYearColumn))]);
      if (!v) throw DataError(src + ":" + line + ": column year: not an integer");
      key.year = *v;
    }
    if (auto [it, inserted] = first_line.emplace(key, table.line_numbers[r]); !inserted) {
      throw DataError(src + ":" + line + ": duplicate key " + describe(key, kind) +
                      " (first seen on line " + std::to_string(it->second) + ")");
    }
    if (auto it = position.find(std::string(kStateNameColumn)); it != position.end())
      names[key.state] = fields[it->second];
    for (auto& column : columns) {
      bool ok = true;
      auto value = parse_number_cell(fields[position.at(column.name())], ok);
      if (!ok)
        throw DataError(src + ":" + line + ": column " + column.name() + ": cannot parse '" +
                        fields[position.at(column.name())] + "' as a number");
      column.values.push_back(value);
    }
    rows.push_back(key);
  }
  return PanelDataset(kind, std::move(rows), std::move(columns), std::move(names));
}

inline PanelDataset load_csv_table(const std::filesystem::path& path,
                                   const std::vector<ColumnSchema>& schema) {
  return panel_from_csv(read_csv(path), schema);
}

// ---------------------------------------------------------------------------
// Adjacency

/// Undirected border graph between states.
struct AdjacencyMap {
  std::map<int, std::set<int>> neighbours;

  const std::set<int>& of(int state) const {
    static const std::set<int> empty;
    auto it = neighbours.find(state);
    return it == neighbours.end() ? empty : it->second;
  }
};

/// Symmetry and self-loop violations, one message per offending pair.
inline std::vector<std::string> adjacency_violations(const AdjacencyMap& adjacency) {
  std::vector<std::string> out;
  for (const auto& [state, set] : adjacency.neighbours) {
    for (int n : set) {
      if (n == state) {
        out.push_back("state " + std::to_string(state) + " lists itself as a neighbour");
      } else if (!adjacency.of(n).contains(state)) {
        out.push_back("asymmetric adjacency: " + std::to_string(state) + " -> " +
                      std::to_string(n) + " has no reverse row");
      }
    }
  }
  return out;
}

inline AdjacencyMap adjacency_from_csv(const CsvTable& table, bool require_valid = true) {
  if (table.header != std::vector<std::string>{"state_id", "neighbor_id"})
    throw DataError(table.source + ": expected header state_id,neighbor_id");
  AdjacencyMap adjacency;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    auto a = parse_int_cell(table.rows[r][0]);
    auto b = parse_int_cell(table.rows[r][1]);
    if (!a || !b)
      throw DataError(table.source + ":" + std::to_string(table.line_numbers[r]) +
                      ": state ids must be integers");
    adjacency.neighbours[*a].insert(*b);
  }
  if (require_valid) {
    if (auto v = adjacency_violations(adjacency); !v.empty())
      throw DataError(table.source + ": " + v.front());
  }
  return adjacency;
}

inline AdjacencyMap load_adjacency(const std::filesystem::path& path, bool require_valid = true) {
  return adjacency_from_csv(read_csv(path), require_valid);
}

// ---------------------------------------------------------------------------
// Units and merging

/// Multiplicative factor converting `from` to `to`. Only the person-count
/// conversions are defined; everything else is a schema error.
inline double unit_factor(Unit from, Unit to) {
  if (from == to) return 1.0;
  if (from == Unit::ThousandsOfPersons && to == Unit::Persons) return 1000.0;
  if (from == Unit::Persons && to == Unit::ThousandsOfPersons) return 1e-3;
  throw DataError("no conversion from " + std::string(to_string(from)) + " to " +
                  std::string(to_string(to)));
}

inline Column convert_unit(const Column& column, Unit to, std::string rename = {}) {
  const double factor = unit_factor(column.schema.unit, to);
  Column out = column;
  out.schema.unit = to;
  if (!rename.empty()) out.schema.name = std::move(rename);
  for (auto& v : out.values)
    if (v) *v *= factor;
  return out;
}

struct UnitRule {
  std::string column;
  Unit to;
  std::string rename;  // empty keeps the name
};

struct UnitPolicy {
  std::vector<UnitRule> rules;
};

/// Employment to direct person counts (renamed without the _thousands
/// suffix); population stays in thousands.
inline UnitPolicy replication_unit_policy() {
  return UnitPolicy{{
      {"emp_nonmining_thousands", Unit::Persons, "emp_nonmining"},
      {"emp_mining_thousands", Unit::Persons, "emp_mining"},
  }};
}

/// Merges panel, time-series and cross-section tables onto one state x year
/// grid. The grid is the union of all panel keys (or states x years when
/// only broadcast tables are given). Time series are broadcast across states
/// and may cover extra years; cross-sections are broadcast across years and
/// must cover exactly the grid's states.
inline PanelDataset assemble_panel(const std::vector<PanelDataset>& tables,
                                   const UnitPolicy& unit_policy = {}) {
  std::set<RowKey> grid;
  bool any_cross = false;
  bool any_series = false;
  std::map<int, std::string> names;

  for (const auto& t : tables) {
    for (const auto& [id, name] : t.state_names()) {
      auto [it, inserted] = names.emplace(id, name);
      if (!inserted && it->second != name)
        throw DataError("conflicting names for state " + std::to_string(id) + ": '" +
                        it->second + "' vs '" + name + "'");
    }
    switch (t.kind()) {
      case KeyKind::Panel:
        for (const auto& r : t.rows()) grid.insert(r);
        break;
      case KeyKind::CrossSection:
        any_cross = true;
        break;
      case KeyKind::TimeSeries:
        any_series = true;
        break;
    }
  }
  if (grid.empty()) {
    if (!any_cross || !any_series)
      throw DataError("cannot form a state x year grid without a panel table or both a "
                      "cross-section and a time series");
    std::set<int> states;
    std::set<int> years;
    for (const auto& t : tables) {
      if (t.kind() == KeyKind::CrossSection)
        for (int s : t.state_ids()) states.insert(s);
      if (t.kind() == KeyKind::TimeSeries)
        for (int y : t.years()) years.insert(y);
    }
    for (int s : states)
      for (int y : years) grid.insert({s, y});
  }

  std::set<int> grid_states;
  std::set<int> grid_years;
  for (const auto& r : grid) {
    grid_states.insert(r.state);
    grid_years.insert(r.year);
  }
  const std::vector<RowKey> rows(grid.begin(), grid.end());

  std::vector<Column> merged;
  auto add_column = [&](Column column) {
    for (const auto& existing : merged) {
      if (existing.name() != column.name()) continue;
      if (existing.schema.unit != column.schema.unit || existing.values != column.values)
        throw DataError("conflicting duplicate column '" + column.name() + "'");
      return;
    }
    merged.push_back(std::move(column));
  };

  for (const auto& t : tables) {
    if (t.kind() == KeyKind::CrossSection) {
      const auto ids = t.state_ids();
      const std::set<int> have(ids.begin(), ids.end());
      for (int s : grid_states)
        if (!have.contains(s))
          throw DataError("key-space mismatch: cross-section table lacks state " +
                          std::to_string(s));
      for (int s : have)
        if (!grid_states.contains(s))
          throw DataError("key-space mismatch: state " + std::to_string(s) +
                          " has no panel rows");
    }
    if (t.kind() == KeyKind::TimeSeries) {
      const auto ys = t.years();
      const std::set<int> have(ys.begin(), ys.end());
      for (int y : grid_years)
        if (!have.contains(y))
          throw DataError("key-space mismatch: time series lacks year " + std::to_string(y));
    }
    for (const auto& column : t.columns()) {
      Column out{column.schema, {}};
      out.values.reserve(rows.size());
      for (const auto& r : rows) {
        RowKey lookup = r;
        if (t.kind() == KeyKind::TimeSeries) lookup.state = 0;
        if (t.kind() == KeyKind::CrossSection) lookup.year = 0;
        auto idx = t.find_row(lookup);
        out.values.push_back(idx ? column.values[*idx] : Value{});
      }
      add_column(std::move(out));
    }
  }

  for (const auto& rule : unit_policy.rules) {
    auto it = std::find_if(merged.begin(), merged.end(),
                           [&](const Column& c) { return c.name() == rule.column; });
    if (it == merged.end()) continue;
    *it = convert_unit(*it, rule.to, rule.rename);
  }
  std::sort(merged.begin(), merged.end(),
            [](const Column& a, const Column& b) { return a.name() < b.name(); });
  return PanelDataset(KeyKind::Panel, rows, std::move(merged), std::move(names));
}

// ---------------------------------------------------------------------------
// Lags, deflation, interpolation

/// Shifts `column` by k calendar years within each state. Rows whose
/// (state, year - k) is absent get a missing value.
inline PanelDataset lag_series(const PanelDataset& panel, std::string_view column, int k,
                               std::string out_name = {}) {
  if (k < 1) throw SpecError("lag order must be positive");
  const auto years = panel.years();
  if (static_cast<std::size_t>(k) >= years.size())
    throw SpecError("lag order " + std::to_string(k) + " exceeds the " +
                    std::to_string(years.size()) + " available periods");
  const auto& source = panel.column(column);
  if (out_name.empty()) out_name = std::string(column) + "_lag" + std::to_string(k);
  Column out{source.schema, {}};
  out.schema.name = std::move(out_name);
  out.values.reserve(panel.row_count());
  for (const auto& r : panel.rows()) {
    auto idx = panel.find_row({r.state, r.year - k});
    out.values.push_back(idx ? source.values[*idx] : Value{});
  }
  return panel.with_column(std::move(out));
}

/// real = nominal / deflator, with the deflator rescaled so the base year is 1.
inline PanelDataset deflate_prices(const PanelDataset& panel, std::string_view nominal_col,
                                   std::string_view deflator_col, int base_year = 2015,
                                   std::string out_col = "ng_price_real") {
  const auto& nominal = panel.column(nominal_col);
  const auto& deflator = panel.column(deflator_col);
  std::optional<double> base;
  for (std::size_t i = 0; i < panel.row_count(); ++i) {
    if (panel.rows()[i].year == base_year && deflator.values[i]) {
      base = deflator.values[i];
      break;
    }
  }
  if (!base) throw DataError("deflator has no value for base year " + std::to_string(base_year));
  if (*base <= 0.0) throw DataError("nonpositive deflator in base year");

  Column out{{std::move(out_col), Unit::PesosPerGj2015, nominal.schema.role}, {}};
  out.values.reserve(panel.row_count());
  for (std::size_t i = 0; i < panel.row_count(); ++i) {
    const auto& d = deflator.values[i];
    const auto& p = nominal.values[i];
    if (!d) {
      if (p)
        throw DataError("missing deflator for year " + std::to_string(panel.rows()[i].year));
      out.values.emplace_back();
      continue;
    }
    if (*d <= 0.0)
      throw DataError("nonpositive deflator for year " + std::to_string(panel.rows()[i].year));
    out.values.push_back(p ? Value{*p / (*d / *base)} : Value{});
  }
  return panel.with_column(std::move(out));
}

/// Fills missing state prices year by year. First pass: each missing state
/// takes the simple average of its observed neighbours. Later passes fill the
/// remaining states from neighbours that now have a value; filled values are
/// never revised. Years with no observation at all are left untouched.
inline PanelDataset interpolate_missing_state_prices(const PanelDataset& panel,
                                                     std::string_view price_col,
                                                     const AdjacencyMap& adjacency) {
  const auto& source = panel.column(price_col);
  Column out = source;
  for (int year : panel.years()) {
    std::map<int, std::size_t> row_of;
    std::map<int, Value> value;
    for (std::size_t i = 0; i < panel.row_count(); ++i) {
      if (panel.rows()[i].year != year) continue;
      row_of[panel.rows()[i].state] = i;
      value[panel.rows()[i].state] = source.values[i];
    }
    const bool any_observed =
        std::any_of(value.begin(), value.end(), [](const auto& kv) { return kv.second.has_value(); });
    if (!any_observed) continue;

    for (;;) {
      std::map<int, double> filled;
      bool remaining = false;
      for (const auto& [state, v] : value) {
        if (v) continue;
        remaining = true;
        double sum = 0.0;
        int count = 0;
        for (int n : adjacency.of(state)) {
          auto it = value.find(n);
          if (it != value.end() && it->second) {
            sum += *it->second;
            ++count;
          }
        }
        if (count > 0) filled[state] = sum / count;
      }
      if (!remaining) break;
      if (filled.empty()) {
        for (const auto& [state, v] : value)
          if (!v)
            throw DataError("state " + std::to_string(state) + " has no path to an observed " +
                            std::string(price_col) + " in year " + std::to_string(year));
      }
      for (const auto& [state, v] : filled) {
        value[state] = v;
        out.values[row_of[state]] = v;
      }
    }
  }
  return panel.with_column(std::move(out));
}

// ---------------------------------------------------------------------------
// Distance routing

inline const std::vector<std::string>& southern_state_names() {
  static const std::vector<std::string> names{
      "Guerrero", "Morelos",  "Puebla",   "Tlaxcala",     "Veracruz", "Oaxaca",
      "Chiapas",  "Tabasco",  "Campeche", "Quintana Roo", "Yucatán"};
  return names;
}

/// Border distance used by the models: direct distance for states north of
/// Mexico City, distance to Mexico City plus Mexico City's border distance
/// for the southern states.
inline std::map<int, double> compute_effective_distance(
    const std::map<int, std::optional<double>>& direct_to_border,
    const std::map<int, std::optional<double>>& to_cdmx, const std::set<int>& south_states,
    double cdmx_to_border) {
  std::map<int, double> out;
  std::set<int> states;
  for (const auto& [s, _] : direct_to_border) states.insert(s);
  for (int s : south_states) states.insert(s);
  for (int s : states) {
    if (south_states.contains(s)) {
      auto it = to_cdmx.find(s);
      if (it == to_cdmx.end() || !it->second)
        throw DataError("southern state " + std::to_string(s) + " lacks a distance to Mexico City");
      out[s] = *it->second + cdmx_to_border;
    } else {
      auto it = direct_to_border.find(s);
      if (it == direct_to_border.end() || !it->second)
        throw DataError("state " + std::to_string(s) + " lacks a direct border distance");
      out[s] = *it->second;
    }
  }
  return out;
}

/// Adds `dist_km` to a states cross-section holding dist_border_km,
/// dist_cdmx_km and is_south.
inline PanelDataset with_effective_distance(const PanelDataset& states, double cdmx_to_border,
                                            std::string out_col = "dist_km") {
  std::map<int, std::optional<double>> direct;
  std::map<int, std::optional<double>> cdmx;
  std::set<int> south;
  const auto& d = states.column("dist_border_km").values;
  const auto& c = states.column("dist_cdmx_km").values;
  const auto& flag = states.column("is_south").values;
  for (std::size_t i = 0; i < states.row_count(); ++i) {
    const int id = states.rows()[i].state;
    direct[id] = d[i];
    cdmx[id] = c[i];
    if (flag[i] && *flag[i] != 0.0) south.insert(id);
  }
  const auto dist = compute_effective_distance(direct, cdmx, south, cdmx_to_border);
  Column out{{std::move(out_col), Unit::Km, Role::Regressor}, {}};
  for (const auto& r : states.rows()) out.values.push_back(dist.at(r.state));
  return states.with_column(std::move(out));
}

// ---------------------------------------------------------------------------
// Summary statistics

struct SummaryRow {
  std::string name;
  Unit unit = Unit::Dimensionless;
  std::size_t n = 0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  double std_dev = 0.0;  // n - 1 denominator
};

inline SummaryRow summarize(std::string name, Unit unit, std::span<const Value> values) {
  std::vector<double> x;
  for (const auto& v : values)
    if (v) x.push_back(*v);
  if (x.empty()) throw DataError("column '" + name + "' has no observed values");
  SummaryRow row{std::move(name), unit, x.size()};
  row.mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  row.min = *lo;
  row.max = *hi;
  double ss = 0.0;
  for (double v : x) ss += (v - row.mean) * (v - row.mean);
  row.std_dev = x.size() > 1 ? std::sqrt(ss / static_cast<double>(x.size() - 1)) : 0.0;
  return row;
}

inline std::vector<SummaryRow> summary_stats(const PanelDataset& panel,
                                             const std::vector<std::string>& columns) {
  std::vector<SummaryRow> out;
  for (const auto& name : columns) {
    const auto& c = panel.column(name);
    out.push_back(summarize(name, c.schema.unit, c.values));
  }
  return out;
}

}  // namespace gaspanel
