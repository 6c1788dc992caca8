#pragma once

#include "psgdlab/numerics.hpp"

#include <cstddef>
#include <cstdint>
#include <exception>
#include <utility>
#include <vector>

namespace psgdlab {

enum class Execution {
  serial,    // reference loop, kept for testing and benchmarking
  parallel,  // OpenMP over trials
};

/// Runs `trial(i, rng_i)` for i in [0, trials), where rng_i = master.split(i).
/// Results are stored by trial index, so serial and parallel execution give
/// bitwise-identical output whatever the thread schedule.
template <class Result, class TrialFn>
std::vector<Result> run_trials(std::size_t trials, const RngStream& master, TrialFn&& trial,
                               Execution exec = Execution::parallel) {
  std::vector<Result> results(trials);
  if (exec == Execution::serial) {
    for (std::size_t i = 0; i < trials; ++i) {
      RngStream rng = master.split(i);
      results[i] = trial(i, rng);
    }
    return results;
  }

  std::exception_ptr failure;
  const auto count = static_cast<std::int64_t>(trials);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      const auto index = static_cast<std::size_t>(i);
      RngStream rng = master.split(index);
      results[index] = trial(index, rng);
    } catch (...) {
#pragma omp critical(psgdlab_trial_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

}  // namespace psgdlab
