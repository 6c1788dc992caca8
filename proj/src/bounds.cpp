#include "psgdlab/bounds.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace psgdlab {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

void require_nonnegative(double x, const char* what) {
  if (!(x >= 0.0) || std::isnan(x)) {
    throw std::invalid_argument(std::string(what) + " must be nonnegative");
  }
}

void require_positive(double x, const char* what) {
  if (!(x > 0.0)) throw std::invalid_argument(std::string(what) + " must be positive");
}

void add_schedule_inputs(BoundReport& r, const StepSchedule& schedule) {
  r.inputs["schedule_c"] = schedule.c();
  r.inputs["schedule_cap"] = schedule.cap();
}

}  // namespace

BoundReport opt_error_bound(std::size_t T, const StepSchedule& schedule, double w0_dist,
                            double sigma) {
  if (T == 0) throw std::invalid_argument("opt_error_bound: T must be at least 1");
  require_nonnegative(w0_dist, "opt_error_bound: w0_dist");
  require_nonnegative(sigma, "opt_error_bound: sigma");
  const auto s = schedule.sums(T);
  BoundReport r;
  r.name = "opt_error";
  r.terms["initial_distance"] = w0_dist * w0_dist / (2.0 * s.sum);
  r.terms["noise"] = sigma * sigma * s.sum_sq / s.sum;
  r.value = r.terms["initial_distance"] + r.terms["noise"];
  r.inputs = {{"T", static_cast<double>(T)}, {"w0_dist", w0_dist}, {"sigma", sigma},
              {"sum_alpha", s.sum}, {"sum_alpha_sq", s.sum_sq}};
  add_schedule_inputs(r, schedule);
  return r;
}

BoundReport stability_bound(std::size_t n, const StepSchedule& schedule, std::size_t T, double B) {
  if (n == 0) throw std::invalid_argument("stability_bound: n must be positive");
  if (T == 0) throw std::invalid_argument("stability_bound: T must be at least 1");
  require_nonnegative(B, "stability_bound: B");
  const auto s = schedule.sums(T);
  BoundReport r;
  r.name = "stability";
  r.value = 2.0 * B * B / static_cast<double>(n) * s.sum;
  r.inputs = {{"n", static_cast<double>(n)}, {"T", static_cast<double>(T)}, {"B", B},
              {"sum_alpha", s.sum}};
  add_schedule_inputs(r, schedule);
  // every supported schedule has a divergent step sum
  r.unbounded_in_T = true;
  r.notes = "grows with the step sum";
  return r;
}

BoundReport strongly_convex_bound(std::size_t n, double B, double mu) {
  if (n == 0) throw std::invalid_argument("strongly_convex_bound: n must be positive");
  require_nonnegative(B, "strongly_convex_bound: B");
  if (mu < 0.0 || std::isnan(mu)) throw std::invalid_argument("strongly_convex_bound: mu must be nonnegative");
  BoundReport r;
  r.name = "strongly_convex";
  r.inputs = {{"n", static_cast<double>(n)}, {"B", B}, {"mu", mu}};
  if (mu == 0.0) {
    r.value = inf;
    r.divergent = true;
    r.notes = "requires mu > 0";
    return r;
  }
  r.value = 2.0 * B * B / (mu * static_cast<double>(n));
  return r;
}

BoundReport main_theorem_bound(const MainTheoremInputs& in) {
  if (in.n == 0 || in.d == 0) throw std::invalid_argument("main_theorem_bound: n and d must be positive");
  require_positive(in.C, "main_theorem_bound: C");
  require_nonnegative(in.sigma_star, "main_theorem_bound: sigma_star");
  require_nonnegative(in.L, "main_theorem_bound: L");
  require_nonnegative(in.R, "main_theorem_bound: R");
  BoundReport r = opt_error_bound(in.T, in.schedule, in.w0_dist, in.sigma);
  const double opt = r.value;
  r.name = "main_theorem";
  const double plateau = in.C *
                         (in.sigma_star * in.R + in.L * in.R * in.R * std::sqrt(static_cast<double>(in.d))) /
                         std::sqrt(static_cast<double>(in.n));
  r.terms = {{"opt_error", opt}, {"plateau", plateau}};
  r.value = opt + plateau;
  r.inputs["sigma_star"] = in.sigma_star;
  r.inputs["L"] = in.L;
  r.inputs["R"] = in.R;
  r.inputs["d"] = static_cast<double>(in.d);
  r.inputs["n"] = static_cast<double>(in.n);
  r.inputs["C"] = in.C;
  return r;
}

CoveringScale covering_scale(double R, double L, std::size_t n, double c) {
  if (n == 0) throw std::invalid_argument("covering_scale: n must be positive");
  require_positive(R, "covering_scale: R");
  require_positive(L, "covering_scale: L");
  require_positive(c, "covering_scale: c");
  const double eps0 = 2.0 * c * L * R / std::sqrt(static_cast<double>(n));
  return {eps0, 0.5 * eps0};
}

double log_covering_number_bound(double eps, double R, double L, std::size_t n, std::size_t d,
                                 double c) {
  require_positive(eps, "covering number: eps");
  if (d == 0) throw std::invalid_argument("covering number: d must be positive");
  const double eps0 = covering_scale(R, L, n, c).epsilon0;
  const double ratio = eps0 / eps;
  const double dd = static_cast<double>(d);
  if (ratio > 1e300) return dd * (std::log(eps0) - std::log(eps));
  return dd * std::log1p(ratio);
}

double covering_number_bound(double eps, double R, double L, std::size_t n, std::size_t d,
                             double c) {
  return std::exp(log_covering_number_bound(eps, R, L, n, d, c));
}

LogCoveringFn covering_bound_fn(double R, double L, std::size_t n, std::size_t d, double c) {
  log_covering_number_bound(1.0, R, L, n, d, c);
  return [=](double eps) { return log_covering_number_bound(eps, R, L, n, d, c); };
}

DudleyResult dudley_discrete_bound(double R_hat, double K, const LogCoveringFn& log_covering) {
  if (!(K >= 1.0)) throw std::invalid_argument("dudley_discrete_bound: K must be at least 1");
  require_positive(R_hat, "dudley_discrete_bound: R_hat");
  if (!std::isfinite(R_hat)) throw std::invalid_argument("dudley_discrete_bound: R_hat must be finite");

  int i = static_cast<int>(std::floor(-std::log2(R_hat)));
  while (std::ldexp(1.0, -(i + 1)) >= R_hat) ++i;
  while (std::ldexp(1.0, -i) < R_hat) --i;

  DudleyResult out;
  out.scales.i = i;
  const double log_K = std::log(K);
  double log_prev = log_covering(std::ldexp(1.0, -i));
  double sum = 0.0;
  for (int j = i + 1; j <= i + 1000; ++j) {
    const double radius = std::ldexp(1.0, -j);
    const double log_N = log_covering(radius);
    if (!(log_N >= 0.0)) throw std::invalid_argument("dudley_discrete_bound: covering numbers must be >= 1");
    if (log_N < log_prev - 1e-12 * std::max(1.0, log_prev)) {
      throw std::invalid_argument("dudley_discrete_bound: covering numbers must be nonincreasing in eps");
    }
    DudleyScale s;
    s.j = j;
    s.log_N = log_N;
    s.log_M = log_N + log_prev;
    s.a = 4.0 * radius * std::sqrt(log_K + (j - i) * std::log(2.0) + s.log_M);
    s.term = radius * std::sqrt(log_K + log_N);
    sum += s.term;
    out.scales.scales.push_back(s);
    log_prev = log_N;
    if (j >= i + 60 && s.term < 1e-12) break;
  }
  out.value = sum;
  return out;
}

double dudley_integral_bound(double R_hat, double K, const LogCoveringFn& log_covering) {
  if (!(K >= 1.0)) throw std::invalid_argument("dudley_integral_bound: K must be at least 1");
  require_positive(R_hat, "dudley_integral_bound: R_hat");
  const double log_K = std::log(K);
  auto integrand = [&](double eps) {
    if (eps <= 0.0) return inf;
    return std::sqrt(std::max(0.0, log_K + log_covering(eps)));
  };
  boost::math::quadrature::tanh_sinh<double> integrator;
  return integrator.integrate(integrand, 0.0, R_hat);
}

BoundReport inexact_bound(std::size_t T, const StepSchedule& schedule, double w0_dist,
                          double sigma, double R, const std::vector<double>& pbar) {
  if (pbar.size() != T) throw std::invalid_argument("inexact_bound: pbar must have T entries");
  require_nonnegative(R, "inexact_bound: R");
  BoundReport r = opt_error_bound(T, schedule, w0_dist, sigma);
  const double opt = r.value;
  r.name = "inexact";
  double weighted = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    require_nonnegative(pbar[t], "inexact_bound: pbar");
    weighted += schedule(t) * pbar[t];
  }
  const double perturbation = 2.0 * R * weighted / r.inputs["sum_alpha"];
  r.terms["opt_error"] = opt;
  r.terms["perturbation"] = perturbation;
  r.value = opt + perturbation;
  r.inputs["R"] = R;
  return r;
}

double single_point_delta_bound(double sigma_star, double L, double R, std::size_t n) {
  if (n == 0) throw std::invalid_argument("single_point_delta_bound: n must be positive");
  require_nonnegative(sigma_star, "single_point_delta_bound: sigma_star");
  return 5.0 * (sigma_star + L * R) / std::sqrt(static_cast<double>(n));
}

BoundReport delta_mean_bound(double sigma_star, double L, double R, std::size_t d, std::size_t n,
                             double c) {
  const CoveringScale scale = covering_scale(R, L, n, c);
  BoundReport r;
  r.name = "delta_mean";
  r.terms["single_point"] = single_point_delta_bound(sigma_star, L, R, n);
  r.terms["chaining"] = dudley_integral_bound(scale.radius_bound, static_cast<double>(d),
                                              covering_bound_fn(R, L, n, d, c));
  r.terms["scaling"] = (sigma_star + L * R * std::sqrt(static_cast<double>(d))) /
                       std::sqrt(static_cast<double>(n));
  r.value = r.terms["single_point"] + r.terms["chaining"];
  r.inputs = {{"sigma_star", sigma_star}, {"L", L}, {"R", R}, {"d", static_cast<double>(d)},
              {"n", static_cast<double>(n)}, {"c", c}};
  r.notes = "value = single_point + chaining, each up to an unspecified absolute constant";
  return r;
}

}  // namespace psgdlab
