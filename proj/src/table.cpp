#include "cascadelab/table.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>

#include <json.hpp>

#include "cascadelab/types.hpp"

namespace cascadelab {

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) throw Error("table row width does not match header");
  rows.push_back(std::move(row));
}

Cell optional_cell(const std::optional<double>& v) {
  if (!v) return std::monostate{};
  return *v;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string cell_text(const Cell& cell) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return {};
        } else if constexpr (std::is_same_v<T, std::string>) {
          return csv_field(v);
        } else if constexpr (std::is_same_v<T, double>) {
          return format_double(v);
        } else {
          return std::to_string(v);
        }
      },
      cell);
}

nlohmann::ordered_json cell_json(const Cell& cell) {
  return std::visit(
      [](const auto& v) -> nlohmann::ordered_json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return nullptr;
        } else if constexpr (std::is_same_v<T, double>) {
          if (!std::isfinite(v)) return nullptr;
          return v;
        } else {
          return v;
        }
      },
      cell);
}

}  // namespace

void write_csv(std::ostream& out, const Table& table) {
  for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << csv_field(table.columns[i]);
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << cell_text(row[i]);
    out << '\n';
  }
}

void write_json(std::ostream& out, const Table& table) {
  out << "[";
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < table.columns.size(); ++i) obj[table.columns[i]] = cell_json(table.rows[r][i]);
    out << (r ? ",\n " : "\n ") << obj.dump();
  }
  out << (table.rows.empty() ? "]\n" : "\n]\n");
}

void write_table(std::ostream& out, const Table& table, TableFormat format) {
  if (format == TableFormat::csv) {
    write_csv(out, table);
  } else {
    write_json(out, table);
  }
}

std::filesystem::path write_table_file(const std::filesystem::path& dir, const std::string& stem, const Table& table,
                                       TableFormat format) {
  const auto path = dir / (stem + (format == TableFormat::csv ? ".csv" : ".json"));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_table(out, table, format);
  if (!out) throw Error("failed writing " + path.string());
  return path;
}

}  // namespace cascadelab
