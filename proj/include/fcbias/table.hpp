#pragma once

// Typed result tables with CSV and JSON export/import.
//
// Reals are rounded to 4 decimal places when stored, and printed with exactly
// 4 decimals in CSV, so export -> parse -> export is byte-identical. In CSV an
// empty field is null for nullable columns. JSON documents look like
//   {"kind": "...", "columns": [{"name", "type", "nullable"}], "rows": [{...}]}

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "fcbias/csv.hpp"

namespace fcbias {

enum class ColumnType { string, integer, real };

inline const char* to_string(ColumnType t) {
  switch (t) {
    case ColumnType::string: return "string";
    case ColumnType::integer: return "integer";
    case ColumnType::real: return "real";
  }
  return "?";
}

inline ColumnType parse_column_type(std::string_view s) {
  if (s == "string") return ColumnType::string;
  if (s == "integer") return ColumnType::integer;
  if (s == "real") return ColumnType::real;
  throw std::invalid_argument("unknown column type '" + std::string(s) + "'");
}

struct Column {
  std::string name;
  ColumnType type = ColumnType::string;
  bool nullable = false;
  friend bool operator==(const Column&, const Column&) = default;
};

using Cell = std::variant<std::monostate, std::string, std::int64_t, double>;

inline double round4(double x) {
  const double r = std::round(x * 10000.0) / 10000.0;
  return r == 0 ? 0.0 : r;  // no negative zero
}

inline std::string format4(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", round4(x));
  return buf;
}

class Table {
 public:
  Table() = default;
  Table(std::string kind, std::vector<Column> columns) : kind_(std::move(kind)), columns_(std::move(columns)) {}

  const std::string& kind() const { return kind_; }
  const std::vector<Column>& columns() const { return columns_; }
  const std::vector<std::vector<Cell>>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }

  std::size_t column_index(std::string_view name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i)
      if (columns_[i].name == name) return i;
    throw std::out_of_range("table '" + kind_ + "' has no column '" + std::string(name) + "'");
  }

  /// Validates types and normalizes the row (reals rounded, ints accepted in
  /// real columns, "" -> null in nullable string columns).
  void add_row(std::vector<Cell> row) {
    if (row.size() != columns_.size())
      throw std::invalid_argument("table '" + kind_ + "': row has " + std::to_string(row.size()) + " cells, expected " +
                                  std::to_string(columns_.size()));
    for (std::size_t i = 0; i < row.size(); ++i) {
      const Column& c = columns_[i];
      Cell& cell = row[i];
      if (c.type == ColumnType::real && std::holds_alternative<std::int64_t>(cell))
        cell = static_cast<double>(std::get<std::int64_t>(cell));
      if (c.type == ColumnType::string && c.nullable && std::holds_alternative<std::string>(cell) &&
          std::get<std::string>(cell).empty())
        cell = std::monostate{};
      if (std::holds_alternative<double>(cell)) {
        const double v = std::get<double>(cell);
        if (!std::isfinite(v)) throw std::invalid_argument("table '" + kind_ + "': non-finite value in '" + c.name + "'");
        cell = round4(v);
      }
      const bool ok = std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>) return c.nullable;
            if constexpr (std::is_same_v<T, std::string>) return c.type == ColumnType::string;
            if constexpr (std::is_same_v<T, std::int64_t>) return c.type == ColumnType::integer;
            if constexpr (std::is_same_v<T, double>) return c.type == ColumnType::real;
          },
          cell);
      if (!ok) throw std::invalid_argument("table '" + kind_ + "': bad value type in column '" + c.name + "'");
    }
    rows_.push_back(std::move(row));
  }

  void append(const Table& other) {
    if (other.kind_ != kind_ || other.columns_ != columns_)
      throw std::invalid_argument("cannot append table '" + other.kind_ + "' to '" + kind_ + "'");
    rows_.insert(rows_.end(), other.rows_.begin(), other.rows_.end());
  }

  friend bool operator==(const Table&, const Table&) = default;

 private:
  std::string kind_;
  std::vector<Column> columns_;
  std::vector<std::vector<Cell>> rows_;
};

// ---- CSV ------------------------------------------------------------------

inline std::string cell_text(const Cell& cell) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) return "";
        if constexpr (std::is_same_v<T, std::string>) return v;
        if constexpr (std::is_same_v<T, std::int64_t>) return std::to_string(v);
        if constexpr (std::is_same_v<T, double>) return format4(v);
      },
      cell);
}

inline std::string to_csv(const Table& t) {
  std::ostringstream out;
  csv::Row header;
  for (const auto& c : t.columns()) header.push_back(c.name);
  csv::write_row(out, header);
  for (const auto& row : t.rows()) {
    csv::Row r;
    for (const auto& cell : row) r.push_back(cell_text(cell));
    csv::write_row(out, r);
  }
  return out.str();
}

inline Cell parse_cell(const std::string& text, const Column& c) {
  if (text.empty() && (c.nullable || c.type != ColumnType::string)) {
    if (!c.nullable) throw std::invalid_argument("empty value in non-nullable column '" + c.name + "'");
    return std::monostate{};
  }
  try {
    std::size_t used = 0;
    switch (c.type) {
      case ColumnType::string: return text;
      case ColumnType::integer: {
        const long long v = std::stoll(text, &used);
        if (used != text.size()) break;
        return static_cast<std::int64_t>(v);
      }
      case ColumnType::real: {
        const double v = std::stod(text, &used);
        if (used != text.size()) break;
        return v;
      }
    }
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("bad " + std::string(to_string(c.type)) + " value '" + text + "' in column '" + c.name + "'");
}

/// Parses CSV produced by to_csv for a known column layout.
inline Table table_from_csv(std::istream& in, std::string kind, const std::vector<Column>& columns) {
  const auto rows = csv::read_all(in);
  if (rows.empty()) throw std::invalid_argument("csv: missing header");
  Table t(std::move(kind), columns);
  if (rows[0].size() != columns.size()) throw std::invalid_argument("csv: header does not match schema");
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (rows[0][i] != columns[i].name) throw std::invalid_argument("csv: unexpected column '" + rows[0][i] + "'");
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != columns.size())
      throw std::invalid_argument("csv: row " + std::to_string(r + 1) + " has wrong field count");
    std::vector<Cell> cells;
    for (std::size_t i = 0; i < columns.size(); ++i) cells.push_back(parse_cell(rows[r][i], columns[i]));
    t.add_row(std::move(cells));
  }
  return t;
}

// ---- JSON -----------------------------------------------------------------

inline nlohmann::ordered_json to_json(const Table& t) {
  nlohmann::ordered_json j;
  j["kind"] = t.kind();
  auto cols = nlohmann::ordered_json::array();
  for (const auto& c : t.columns())
    cols.push_back({{"name", c.name}, {"type", to_string(c.type)}, {"nullable", c.nullable}});
  j["columns"] = std::move(cols);
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : t.rows()) {
    nlohmann::ordered_json r = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>) {
              r[t.columns()[i].name] = nullptr;
            } else {
              r[t.columns()[i].name] = v;
            }
          },
          row[i]);
    }
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  return j;
}

inline std::string to_json_text(const Table& t) {
  return to_json(t).dump(2, ' ', false, nlohmann::ordered_json::error_handler_t::replace) + "\n";
}

/// {"tables": [...]}: several tables in one document.
inline std::string tables_json_text(const std::vector<Table>& tables) {
  nlohmann::ordered_json j;
  j["tables"] = nlohmann::ordered_json::array();
  for (const auto& t : tables) j["tables"].push_back(to_json(t));
  return j.dump(2, ' ', false, nlohmann::ordered_json::error_handler_t::replace) + "\n";
}

inline Table table_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.contains("columns") || !j.contains("rows"))
    throw std::invalid_argument("table json: expected an object with kind, columns and rows");
  std::vector<Column> cols;
  for (const auto& c : j.at("columns"))
    cols.push_back({c.at("name").get<std::string>(), parse_column_type(c.at("type").get<std::string>()),
                    c.value("nullable", false)});
  Table t(j.at("kind").get<std::string>(), cols);
  for (const auto& r : j.at("rows")) {
    if (!r.is_object()) throw std::invalid_argument("table json: row is not an object");
    std::vector<Cell> cells;
    for (const auto& c : cols) {
      auto it = r.find(c.name);
      if (it == r.end()) throw std::invalid_argument("table json: row missing '" + c.name + "'");
      if (it->is_null()) {
        cells.emplace_back(std::monostate{});
      } else if (c.type == ColumnType::string && it->is_string()) {
        cells.emplace_back(it->get<std::string>());
      } else if (c.type == ColumnType::integer && it->is_number_integer()) {
        cells.emplace_back(it->get<std::int64_t>());
      } else if (c.type == ColumnType::real && it->is_number()) {
        cells.emplace_back(it->get<double>());
      } else {
        throw std::invalid_argument("table json: bad value for column '" + c.name + "'");
      }
    }
    t.add_row(std::move(cells));
  }
  return t;
}

// ---- files ----------------------------------------------------------------

enum class TableFormat { csv, json };

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

inline void export_table(const Table& t, TableFormat format, const std::filesystem::path& path) {
  write_text_file(path, format == TableFormat::csv ? to_csv(t) : to_json_text(t));
}

inline std::vector<Table> read_table_documents(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  std::vector<Table> out;
  // A file holds either one table document or {"tables": [...]}.
  if (j.is_object() && j.contains("tables")) {
    for (const auto& t : j.at("tables")) out.push_back(table_from_json(t));
  } else {
    out.push_back(table_from_json(j));
  }
  return out;
}

}  // namespace fcbias
