#pragma once

#include "psgdlab/geometry.hpp"
#include "psgdlab/losses.hpp"
#include "psgdlab/numerics.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace psgdlab {

enum class ScheduleKind { constant, inverse_sqrt, inverse_t };

/// alpha_t = min(cap, c), min(cap, c / sqrt(t + 1)) or min(cap, c / (t + 1)), t zero-based.
class StepSchedule {
 public:
  StepSchedule(ScheduleKind kind, double c,
               double cap = std::numeric_limits<double>::infinity());

  static StepSchedule constant(double c) { return {ScheduleKind::constant, c}; }
  static StepSchedule inverse_sqrt(double c) { return {ScheduleKind::inverse_sqrt, c}; }
  static StepSchedule inverse_t(double c) { return {ScheduleKind::inverse_t, c}; }
  /// Same schedule with cap = 1 / smoothness.
  static StepSchedule capped_for(ScheduleKind kind, double c, double smoothness);

  /// "constant:0.1", "inverse_sqrt:1:0.5", "inverse_t:2".
  static StepSchedule parse(const std::string& spec);
  std::string to_string() const;

  ScheduleKind kind() const noexcept { return kind_; }
  double c() const noexcept { return c_; }
  double cap() const noexcept { return cap_; }

  double operator()(std::size_t t) const noexcept;
  /// alpha_0, the largest step of every kind.
  double max_step() const noexcept;

  struct Sums {
    double sum = 0.0;     // sum_{t<T} alpha_t
    double sum_sq = 0.0;  // sum_{t<T} alpha_t^2
  };
  Sums sums(std::size_t T) const;

  /// Throws std::invalid_argument unless max_step() <= 1 / smoothness.
  void validate_for(double smoothness) const;

  friend bool operator==(const StepSchedule&, const StepSchedule&) = default;

 private:
  ScheduleKind kind_;
  double c_;
  double cap_;
};

const char* to_string(ScheduleKind kind) noexcept;

enum class NoiseKind { none, isotropic_gaussian, minibatch };

/// Gradient noise eps_t. Gaussian noise has per-coordinate standard deviation
/// sigma / sqrt(d), so E|eps_t|^2 = sigma^2. Minibatch steps use the average
/// gradient of `batch` points drawn with replacement from S.
struct NoiseModel {
  NoiseKind kind = NoiseKind::none;
  double sigma = 0.0;
  std::size_t batch = 1;

  static NoiseModel none() { return {}; }
  static NoiseModel isotropic_gaussian(double sigma);
  static NoiseModel minibatch(std::size_t batch);

  friend bool operator==(const NoiseModel&, const NoiseModel&) = default;
};

const char* to_string(NoiseKind kind) noexcept;

/// Raised when an emitted perturbation exceeds its declared bound.
class BoundViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PerturbationSpec {
  std::function<Vector(std::size_t t, const Vector& w)> generator;
  std::function<double(std::size_t t)> bound;

  /// p_t = value for every t, with bound |value|.
  static PerturbationSpec constant(Vector value);
  static PerturbationSpec zero(std::size_t dim);
};

struct Trajectory {
  Vector final_iterate;
  Vector average;  // sum_k alpha_k w_{k+1} / sum_k alpha_k
  double sum_alpha = 0.0;
  double sum_alpha_sq = 0.0;
  std::size_t steps = 0;
  std::uint64_t seed = 0;
  std::vector<Vector> history;  // w_1 .. w_T when requested
  double max_perturbation_norm = 0.0;
};

struct RunOptions {
  bool record_history = false;
};

/// One step w_{t+1} = P(w_t - alpha (grad + eps_t)).
Vector psgd_step(const EmpiricalObjective& objective, const ConvexSet& set, const Vector& w,
                 double alpha, const NoiseModel& noise, RngStream& rng);

Trajectory run_psgd(const EmpiricalObjective& objective, const ConvexSet& set, const Vector& w0,
                    const StepSchedule& schedule, const NoiseModel& noise, std::size_t T,
                    RngStream& rng, RunOptions options = {});

Trajectory run_psgd(const LossModel& model, const Dataset& S, const ConvexSet& set,
                    const Vector& w0, const StepSchedule& schedule, const NoiseModel& noise,
                    std::size_t T, RngStream& rng, RunOptions options = {});

/// Snapshots of one run at each step count in `checkpoints` (strictly
/// increasing). Entry k equals run_psgd with T = checkpoints[k] and the same rng.
std::vector<Trajectory> run_psgd_checkpoints(const EmpiricalObjective& objective,
                                             const ConvexSet& set, const Vector& w0,
                                             const StepSchedule& schedule,
                                             const NoiseModel& noise,
                                             const std::vector<std::size_t>& checkpoints,
                                             RngStream& rng);

/// Inexact PSGD on `evaluated`: w_{t+1} = P(w_t - alpha_t (grad + eps_t) - alpha_t p_t).
/// A zero perturbation reproduces run_psgd bit for bit.
Trajectory run_perturbed_psgd(const EmpiricalObjective& evaluated,
                              const PerturbationSpec& perturbation, const ConvexSet& set,
                              const Vector& w0, const StepSchedule& schedule,
                              const NoiseModel& noise, std::size_t T, RngStream& rng);

/// PSGD driven by `driver` viewed as inexact PSGD on `evaluated` with
/// p_t = grad(driver) - grad(evaluated). Iterates are those of run_psgd on the
/// driver; p_t is only measured, and checked against `bound` when given.
Trajectory run_perturbed_psgd(const EmpiricalObjective& evaluated,
                              const EmpiricalObjective& driver, std::optional<double> bound,
                              const ConvexSet& set, const Vector& w0,
                              const StepSchedule& schedule, const NoiseModel& noise,
                              std::size_t T, RngStream& rng);

/// eps_t at w: a Gaussian draw, or batch gradient minus full gradient.
Vector sample_gradient_noise(const EmpiricalObjective& objective, const Vector& w,
                             const NoiseModel& noise, RngStream& rng);

struct ReferenceSolution {
  Vector minimizer;
  double value = 0.0;
  std::size_t steps = 0;
};

/// Noiseless projected gradient descent with step 1/L. Stops early once an
/// iterate moves less than `tolerance`.
ReferenceSolution minimize_empirical(const EmpiricalObjective& objective, const ConvexSet& set,
                                     const Vector& w0, std::size_t max_steps,
                                     double tolerance = 0.0);

}  // namespace psgdlab
