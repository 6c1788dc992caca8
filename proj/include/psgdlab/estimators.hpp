#pragma once

#include "psgdlab/bounds.hpp"
#include "psgdlab/geometry.hpp"
#include "psgdlab/losses.hpp"
#include "psgdlab/optimizer.hpp"
#include "psgdlab/parallel.hpp"
#include "psgdlab/stats.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace psgdlab {

/// Multi-start projected ascent for sup over the set of a gradient gap.
/// Starts are drawn in blocks of 256, each block refining its own best
/// `refine_top` points, so more starts never lower the result.
struct SupSearchConfig {
  std::size_t random_starts = 256;
  std::size_t refine_top = 8;
  std::size_t refine_steps = 200;
  std::optional<double> refine_rate;  // defaults to 0.05 * enclosing radius

  static constexpr std::size_t block_size = 256;
};

struct DeltaSearchResult {
  double value = 0.0;  // lower bound on the supremum
  Vector argmax;
};

/// sup_w |grad l(S, w) - grad l(S', w)| over the set, searched numerically.
DeltaSearchResult estimate_delta(const EmpiricalObjective& S, const EmpiricalObjective& S_prime,
                                 const ConvexSet& set, const SupSearchConfig& search,
                                 const RngStream& rng);

/// |grad l(S, w) - grad l(S', w)| at one point.
double gradient_gap(const EmpiricalObjective& S, const EmpiricalObjective& S_prime, const Vector& w);

/// Mean of estimate_delta over independent pairs (S, S') of size n.
Estimate estimate_delta_mean(const LossModel& model, const Sampler& sampler, std::size_t n,
                             const ConvexSet& set, const SupSearchConfig& search,
                             std::size_t trials, const RngStream& rng,
                             Execution exec = Execution::parallel);

/// Everything a generalization-error run needs besides T, trials and seed.
struct GenErrorExperiment {
  LossModel model;
  ConvexSet set;
  Sampler sampler;
  std::size_t n = 1;
  StepSchedule schedule;
  NoiseModel noise;
  Vector w0;
};

struct GenErrorPoint {
  std::size_t T = 0;
  Estimate gen_error;         // l(w_hat; S') - l(w_hat; S)
  Estimate train_loss;        // l(w_hat; S)
  Estimate train_loss_final;  // l(w_T; S)
};

/// One PSGD run per trial, read at every checkpoint, so all T share the same
/// datasets and noise. Trial i draws S, S' and the noise from separate
/// children of rng.split(i).
std::vector<GenErrorPoint> estimate_gen_error_curve(const GenErrorExperiment& experiment,
                                                    const std::vector<std::size_t>& checkpoints,
                                                    std::size_t trials, const RngStream& rng,
                                                    Execution exec = Execution::parallel);

Estimate estimate_gen_error(const GenErrorExperiment& experiment, std::size_t T,
                            std::size_t trials, const RngStream& rng,
                            Execution exec = Execution::parallel);

struct FallbackSolver {
  double epsilon = 1e-3;
  std::size_t steps = 100000;
};

struct MinimizerGenError {
  Estimate estimate;
  std::vector<double> per_trial;
  std::vector<bool> event_I;  // per trial
  std::size_t event_I_trials = 0;
  std::size_t fallback_trials = 0;
};

/// Counterexample generalization error at a minimizer: the closed-form
/// minimizer under event I, otherwise the unperturbed loss at a long PSGD
/// solve of the perturbed problem on the unit ball.
MinimizerGenError gen_error_at_minimizer(std::size_t n, std::size_t d, std::size_t trials,
                                         const RngStream& rng, FallbackSolver fallback = {},
                                         Execution exec = Execution::parallel);

struct DeltaAtPointReport {
  Estimate estimate;
  double bound = 0.0;
  bool pass = false;  // estimate.mean <= bound + 3 stderr
};

DeltaAtPointReport check_delta_at_w(const LossModel& model, const Sampler& sampler, std::size_t n,
                                    const Vector& w, double sigma_star, double R,
                                    std::size_t trials, const RngStream& rng,
                                    Execution exec = Execution::parallel);

struct TailRow {
  double u = 0.0;
  std::size_t exceed = 0;
  double frequency = 0.0;
  BinomialInterval interval;
  double bound = 0.0;  // 2 K exp(-u^2 / d(w1, w2)^2) at the calibrated c
};

struct IncrementTailReport {
  std::vector<TailRow> rows;
  double metric_unit = 0.0;  // L |w1 - w2| / sqrt(n), so d(w1, w2) = c * metric_unit
  double K = 1.0;
  std::optional<double> calibrated_c;  // none if no c on the grid works
  std::optional<double> tail_slope;    // fitted slope of log(frequency) against u^2
  std::optional<double> slope_reference;  // -1 / (calibrated_c * metric_unit)^2
};

/// Empirical tail of |Z_w1 - Z_w2| with Z_w = |grad l(S, w) - grad l(S', w)|.
/// K defaults to the dimension.
IncrementTailReport check_increment_tail(const LossModel& model, const Sampler& sampler,
                                         std::size_t n, const Vector& w1, const Vector& w2,
                                         const std::vector<double>& u_grid, std::size_t trials,
                                         const RngStream& rng,
                                         const std::vector<double>& c_grid = {},
                                         Execution exec = Execution::parallel);

/// Default calibration grid for check_increment_tail.
std::vector<double> default_c_grid();

/// P(some column all +1 and some column all -1) for n Rademacher rows in d columns.
double event_I_probability(std::size_t n, std::size_t d);
/// 1 - event_I_probability, computed without cancellation.
double event_I_complement(std::size_t n, std::size_t d);

struct LimitRow {
  double epsilon = 0.0;
  Vector solution;
  double distance = 0.0;          // to the unperturbed closed-form minimizer
  double norm = 0.0;
  double population_risk = 0.0;
  double plus_spread = 0.0;       // max - min over all-plus columns
  bool plus_negative = false;     // every all-plus coordinate < 0
};

struct LimitReport {
  std::vector<LimitRow> rows;
  bool distances_decreasing = false;
};

/// Solves the perturbed problem for each epsilon by noiseless PSGD with
/// step 1 on the unit ball from the origin. Throws std::domain_error without event I.
LimitReport perturbed_minimizer_limit_check(const Dataset& S, const std::vector<double>& eps_grid,
                                            std::size_t steps = 200000);

struct SuboptimalityPoint {
  std::size_t T = 0;
  Estimate suboptimality;  // l(w_hat_T; S) - l*
};

/// Suboptimality of the averaged iterate on a fixed objective over independent
/// noise draws, read at each checkpoint. With a perturbation, runs inexact PSGD.
std::vector<SuboptimalityPoint> measure_suboptimality(
    const EmpiricalObjective& objective, const ConvexSet& set, const Vector& w0,
    const StepSchedule& schedule, const NoiseModel& noise,
    const std::vector<std::size_t>& checkpoints, double optimal_value, std::size_t trials,
    const RngStream& rng, const std::optional<PerturbationSpec>& perturbation = std::nullopt,
    Execution exec = Execution::parallel);

struct ChainCheckReport {
  double delta_estimate = 0.0;
  double pbar = 0.0;
  double observed_max_perturbation = 0.0;
  Estimate excess_risk;  // l(w_hat_T(S); S') - min l(.; S')
  BoundReport bound;
  bool pass = false;
};

/// PSGD on S read as inexact PSGD on S': compares the excess risk on S'
/// with the inexact bound at pbar = estimate_delta(S, S') + slack.
ChainCheckReport check_inexact_chain(const EmpiricalObjective& S, const EmpiricalObjective& S_prime,
                                     const ConvexSet& set, const Vector& w0,
                                     const StepSchedule& schedule, const NoiseModel& noise,
                                     std::size_t T, std::size_t trials,
                                     const SupSearchConfig& search, double slack,
                                     std::size_t reference_steps, const RngStream& rng,
                                     Execution exec = Execution::parallel);

}  // namespace psgdlab
