#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace psgdlab {

/// Monte Carlo result. `std_error` is the sample standard deviation over
/// sqrt(trials).
struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
};

/// Pairwise summation in index order; the result does not depend on how the
/// values were produced.
double pairwise_sum(std::span<const double> values) noexcept;

/// Mean and standard error of per-trial values. Requires at least two values.
Estimate summarize(std::span<const double> values, std::uint64_t seed);

double combined_std_error(const Estimate& a, const Estimate& b) noexcept;

struct BinomialInterval {
  double lower = 0.0;
  double upper = 1.0;
};

/// Exact (Clopper-Pearson) two-sided interval for `successes` out of `trials`.
BinomialInterval clopper_pearson(std::size_t successes, std::size_t trials,
                                 double confidence = 0.95);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Ordinary least squares of y on x. Needs two or more distinct x values.
LineFit least_squares(std::span<const double> x, std::span<const double> y);

/// Least-squares slope of log(y) against log(x). All values must be positive.
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace psgdlab
