#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace psgdlab::cli {

/// Empty cells print as "" in CSV and null in JSON.
using Cell = std::variant<std::monostate, std::string, double, std::int64_t, bool>;

class Table {
 public:
  explicit Table(std::vector<std::string> columns);

  const std::vector<std::string>& columns() const noexcept { return columns_; }
  const std::vector<std::vector<Cell>>& rows() const noexcept { return rows_; }

  /// Starts a row with every cell empty.
  void new_row();
  /// Sets a cell of the last row. Throws std::out_of_range for unknown columns.
  void set(const std::string& column, Cell value);
  const Cell& at(std::size_t row, const std::string& column) const;

  std::string to_csv() const;
  /// Array of objects, keys in column order, empty cells omitted.
  std::string to_json() const;
  std::string render(const std::string& format) const;

 private:
  std::size_t index_of(const std::string& column) const;

  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

Cell count_cell(std::size_t x);

}  // namespace psgdlab::cli
