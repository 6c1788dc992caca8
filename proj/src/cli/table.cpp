#include "psgdlab/cli/table.hpp"

#include "psgdlab/io.hpp"

#include <json.hpp>

#include <cmath>
#include <stdexcept>

namespace psgdlab::cli {

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

Table::Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void Table::new_row() { rows_.emplace_back(columns_.size()); }

std::size_t Table::index_of(const std::string& column) const {
  for (std::size_t k = 0; k < columns_.size(); ++k) {
    if (columns_[k] == column) return k;
  }
  throw std::out_of_range("table: no column '" + column + "'");
}

void Table::set(const std::string& column, Cell value) {
  if (rows_.empty()) throw std::logic_error("table: set before new_row");
  rows_.back()[index_of(column)] = std::move(value);
}

const Cell& Table::at(std::size_t row, const std::string& column) const {
  return rows_.at(row)[index_of(column)];
}

std::string Table::to_csv() const {
  std::string out;
  for (std::size_t k = 0; k < columns_.size(); ++k) out += (k ? "," : "") + csv_escape(columns_[k]);
  out += '\n';
  for (const auto& row : rows_) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k) out += ',';
      std::visit(
          [&](const auto& v) {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, std::string>) out += csv_escape(v);
            else if constexpr (std::is_same_v<V, double>) out += std::isfinite(v) ? format_double(v) : (std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf"));
            else if constexpr (std::is_same_v<V, std::int64_t>) out += std::to_string(v);
            else if constexpr (std::is_same_v<V, bool>) out += v ? "true" : "false";
          },
          row[k]);
    }
    out += '\n';
  }
  return out;
}

std::string Table::to_json() const {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& row : rows_) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t k = 0; k < row.size(); ++k) {
      std::visit(
          [&](const auto& v) {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, double>) {
              if (std::isfinite(v)) obj[columns_[k]] = v;
              else obj[columns_[k]] = std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
            } else if constexpr (!std::is_same_v<V, std::monostate>) {
              obj[columns_[k]] = v;
            }
          },
          row[k]);
    }
    arr.push_back(std::move(obj));
  }
  return arr.dump(2) + "\n";
}

std::string Table::render(const std::string& format) const {
  return format == "json" ? to_json() : to_csv();
}

Cell count_cell(std::size_t x) { return static_cast<std::int64_t>(x); }

}  // namespace psgdlab::cli
