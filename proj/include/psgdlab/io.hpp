#pragma once

#include "psgdlab/losses.hpp"
#include "psgdlab/optimizer.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

namespace psgdlab {

/// 17 significant digits, '.' decimal point, no locale.
std::string format_double(double x);
/// Strict parse of a whole field; throws std::invalid_argument.
double parse_double(std::string_view text);

/// Header "label,x0,x1,..." for labeled data or "z0,z1,..." for sign vectors,
/// then one row per point.
void write_dataset_csv(const Dataset& S, std::ostream& out);
Dataset read_dataset_csv(std::istream& in);

void save_dataset(const Dataset& S, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

/// {"final":[...],"average":[...],"sum_alpha":..,"sum_alpha_sq":..,"T":..,"seed":..}
std::string trajectory_json(const Trajectory& trajectory);
Trajectory trajectory_from_json(const std::string& text);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace psgdlab
