#pragma once

#include "psgdlab/estimators.hpp"
#include "psgdlab/losses.hpp"
#include "psgdlab/optimizer.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace psgdlab::cli {

/// Bad configuration or command line; maps to exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One experiment, read from a `key = value` file ('#' starts a comment,
/// lists are comma separated). Every key is optional; unknown keys are errors.
struct ExperimentConfig {
  std::string loss = "one_sided";
  std::vector<std::size_t> n{100};
  std::vector<std::size_t> d{5};
  std::vector<std::size_t> T{1000};
  std::string schedule = "inverse_sqrt:1";  // cap defaults to 1/L
  std::string noise = "none";               // none | gaussian | minibatch
  double sigma = 0.0;
  std::size_t batch = 1;
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  double constant_c = 1.0;
  double constant_C = 1.0;
  double radius = 1.0;
  double margin = 1.0;
  double epsilon = 1e-3;
  double mu = 1.0;
  double label_flip = 0.1;
  std::vector<double> eps_grid{1e-1, 1e-2, 1e-3, 1e-4};
  std::size_t search_starts = 256;
  std::size_t search_top = 8;
  std::size_t search_steps = 200;
  std::optional<double> search_rate;  // "auto" = 0.05 * radius
  std::size_t limit_steps = 200000;
  std::size_t fallback_steps = 100000;
  std::string out;             // empty = stdout
  std::string format = "csv";  // csv | json
  std::string inject_fault = "none";  // none | projection_scale

  /// Sets one key from its text form. Throws UsageError.
  void set(std::string_view key, std::string_view value);

  static ExperimentConfig parse(std::string_view text);
  static ExperimentConfig load(const std::filesystem::path& path);
  /// Every key in a fixed order; parse(serialize()) == *this.
  std::string serialize() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Recognised keys in serialization order.
const std::vector<std::string>& config_keys();

LossModel make_model(const ExperimentConfig& config, std::size_t d);
Sampler make_sampler(const ExperimentConfig& config, std::size_t d);
NoiseModel make_noise(const ExperimentConfig& config);
/// The configured schedule, capped at 1/L when no cap is given.
StepSchedule make_schedule(const ExperimentConfig& config, double smoothness);
SupSearchConfig make_search(const ExperimentConfig& config);

}  // namespace psgdlab::cli
