#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace cascadelab {

enum class TableFormat : std::uint8_t { csv, json };

/// Empty cells render as an empty CSV field or JSON null.
using Cell = std::variant<std::monostate, std::string, std::int64_t, std::uint64_t, double>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row);
};

Cell optional_cell(const std::optional<double>& v);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

void write_csv(std::ostream& out, const Table& table);
void write_json(std::ostream& out, const Table& table);
void write_table(std::ostream& out, const Table& table, TableFormat format);

/// Writes `<stem>.csv` or `<stem>.json` under `dir`; returns the path written.
std::filesystem::path write_table_file(const std::filesystem::path& dir, const std::string& stem, const Table& table,
                                       TableFormat format);

}  // namespace cascadelab
