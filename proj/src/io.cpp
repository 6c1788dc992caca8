#include "psgdlab/io.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <system_error>
#include <vector>

namespace psgdlab {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

nlohmann::json to_array(const Vector& v) {
  auto arr = nlohmann::json::array();
  for (double x : v) arr.push_back(x);
  return arr;
}

Vector from_array(const nlohmann::json& arr) {
  std::vector<double> values;
  for (const auto& x : arr) values.push_back(x.get<double>());
  return Vector(std::move(values));
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || first == last) {
    throw std::invalid_argument("not a number: '" + std::string(text) + "'");
  }
  return value;
}

void write_dataset_csv(const Dataset& S, std::ostream& out) {
  const bool labeled = S.kind() == DataKind::labeled;
  if (labeled) out << "label";
  for (std::size_t k = 0; k < S.dim(); ++k) {
    if (labeled || k > 0) out << ',';
    out << (labeled ? "x" : "z") << k;
  }
  out << '\n';
  for (const auto& z : S) {
    if (labeled) {
      const auto& p = std::get<LabeledPoint>(z);
      out << p.label;
      for (double x : p.features) out << ',' << format_double(x);
    } else {
      const auto& s = std::get<SignVector>(z).signs;
      for (std::size_t k = 0; k < s.size(); ++k) out << (k ? "," : "") << format_double(s[k]);
    }
    out << '\n';
  }
}

Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("dataset csv: missing header");
  const auto header = split_fields(strip_cr(line));
  if (header.empty()) throw std::invalid_argument("dataset csv: empty header");
  const bool labeled = header.front() == "label";
  const std::size_t d = labeled ? header.size() - 1 : header.size();
  for (std::size_t k = 0; k < d; ++k) {
    const std::string expected = (labeled ? "x" : "z") + std::to_string(k);
    if (header[labeled ? k + 1 : k] != expected) {
      throw std::invalid_argument("dataset csv: unexpected column '" + header[labeled ? k + 1 : k] + "'");
    }
  }
  std::vector<DataPoint> points;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw std::invalid_argument("dataset csv: row " + std::to_string(row) + " has wrong field count");
    }
    std::vector<double> coords;
    coords.reserve(d);
    for (std::size_t k = labeled ? 1 : 0; k < fields.size(); ++k) coords.push_back(parse_double(fields[k]));
    if (labeled) {
      const double label = parse_double(fields[0]);
      if (label != 1.0 && label != -1.0) throw std::invalid_argument("dataset csv: label must be +1 or -1");
      points.push_back(make_labeled(Vector(std::move(coords)), static_cast<int>(label)));
    } else {
      points.push_back(make_sign_vector(Vector(std::move(coords))));
    }
  }
  return Dataset(std::move(points));
}

void save_dataset(const Dataset& S, const std::filesystem::path& path) {
  std::ostringstream out;
  write_dataset_csv(S, out);
  write_file_atomic(path, out.str());
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  return read_dataset_csv(in);
}

std::string trajectory_json(const Trajectory& trajectory) {
  nlohmann::ordered_json j;
  j["final"] = to_array(trajectory.final_iterate);
  j["average"] = to_array(trajectory.average);
  j["sum_alpha"] = trajectory.sum_alpha;
  j["sum_alpha_sq"] = trajectory.sum_alpha_sq;
  j["T"] = trajectory.steps;
  j["seed"] = trajectory.seed;
  return j.dump();
}

Trajectory trajectory_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  Trajectory t;
  t.final_iterate = from_array(j.at("final"));
  t.average = from_array(j.at("average"));
  t.sum_alpha = j.at("sum_alpha").get<double>();
  t.sum_alpha_sq = j.at("sum_alpha_sq").get<double>();
  t.steps = j.at("T").get<std::size_t>();
  t.seed = j.at("seed").get<std::uint64_t>();
  return t;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw std::runtime_error("failed writing " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot rename to " + path.string() + ": " + ec.message());
  }
}

}  // namespace psgdlab
