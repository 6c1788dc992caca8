#pragma once

#include "psgdlab/optimizer.hpp"

#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace psgdlab {

struct BoundReport {
  std::string name;
  double value = 0.0;
  std::map<std::string, double> inputs;
  std::map<std::string, double> terms;  // named addends
  std::string notes;
  bool divergent = false;       // value is +inf
  bool unbounded_in_T = false;  // grows without limit as T increases
};

/// |w0 - w*|^2 / (2 sum alpha) + sigma^2 sum alpha^2 / sum alpha over the first T steps.
BoundReport opt_error_bound(std::size_t T, const StepSchedule& schedule, double w0_dist,
                            double sigma);

/// (2 B^2 / n) sum_{t<T} alpha_t.
BoundReport stability_bound(std::size_t n, const StepSchedule& schedule, std::size_t T, double B);

/// 2 B^2 / (mu n). mu = 0 gives an infinite value flagged divergent.
BoundReport strongly_convex_bound(std::size_t n, double B, double mu);

struct MainTheoremInputs {
  std::size_t T = 1;
  StepSchedule schedule = StepSchedule::inverse_sqrt(1.0);
  double w0_dist = 0.0;
  double sigma = 0.0;
  double sigma_star = 0.0;
  double L = 1.0;
  double R = 1.0;
  std::size_t d = 1;
  std::size_t n = 1;
  double C = 1.0;
};

/// opt_error_bound + C (sigma* R + L R^2 sqrt(d)) / sqrt(n); the second
/// addend is reported as the "plateau" term.
BoundReport main_theorem_bound(const MainTheoremInputs& in);

/// (1 + 2 c R L / (eps sqrt(n)))^d. Overflows to +inf for large d.
double covering_number_bound(double eps, double R, double L, std::size_t n, std::size_t d,
                             double c = 1.0);
/// Natural log of covering_number_bound, finite for every eps > 0.
double log_covering_number_bound(double eps, double R, double L, std::size_t n, std::size_t d,
                                 double c = 1.0);

struct CoveringScale {
  double epsilon0 = 0.0;      // 2 c L R / sqrt(n)
  double radius_bound = 0.0;  // epsilon0 / 2, bounds the set radius in the metric
};
CoveringScale covering_scale(double R, double L, std::size_t n, double c = 1.0);

/// eps -> log N(eps), nonincreasing in eps.
using LogCoveringFn = std::function<double(double eps)>;

LogCoveringFn covering_bound_fn(double R, double L, std::size_t n, std::size_t d, double c = 1.0);

struct DudleyScale {
  int j = 0;
  double log_N = 0.0;       // log N at radius 2^-j
  double log_M = 0.0;       // log N_j + log N_{j-1}
  double a = 0.0;           // 4 2^-j sqrt(log(K 2^{j-i} M_j))
  double term = 0.0;        // 2^-j sqrt(log(K N_j))
};

struct DudleyScales {
  int i = 0;  // largest integer with 2^-i >= R_hat
  std::vector<DudleyScale> scales;
};

struct DudleyResult {
  double value = 0.0;
  DudleyScales scales;
};

/// sum_{j > i} 2^-j sqrt(log(K N_{2^-j})), truncated once j >= i + 60 and the
/// term is below 1e-12. Throws std::invalid_argument if K < 1 or R_hat <= 0.
DudleyResult dudley_discrete_bound(double R_hat, double K, const LogCoveringFn& log_covering);

/// integral_0^R_hat sqrt(log(K N_eps)) d eps by tanh-sinh quadrature.
double dudley_integral_bound(double R_hat, double K, const LogCoveringFn& log_covering);

/// opt_error_bound + 2 R sum_t alpha_t pbar_t / sum_t alpha_t. pbar.size() must equal T.
BoundReport inexact_bound(std::size_t T, const StepSchedule& schedule, double w0_dist,
                          double sigma, double R, const std::vector<double>& pbar);

/// 5 (sigma* + L R) / sqrt(n).
double single_point_delta_bound(double sigma_star, double L, double R, std::size_t n);

/// Terms of the expected gradient-gap bound, reported separately: the
/// single-point term, the chaining integral with K = d over the covering
/// bound, and the (sigma* + L R sqrt(d)) / sqrt(n) scaling term.
BoundReport delta_mean_bound(double sigma_star, double L, double R, std::size_t d, std::size_t n,
                             double c = 1.0);

}  // namespace psgdlab
