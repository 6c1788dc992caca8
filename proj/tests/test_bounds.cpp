#include "psgdlab/bounds.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace psgdlab;

TEST_CASE("optimization error bound by hand") {
  const auto r = opt_error_bound(4, StepSchedule::constant(0.5), 2.0, 3.0);
  // sum alpha = 2, sum alpha^2 = 1: 4 / 4 + 9 / 2
  CHECK(r.value == doctest::Approx(1.0 + 4.5).epsilon(1e-15));
  CHECK(r.terms.at("initial_distance") == doctest::Approx(1.0));
  CHECK(r.terms.at("noise") == doctest::Approx(4.5));

  const auto noiseless = opt_error_bound(100, StepSchedule::inverse_sqrt(1.0), 1.0, 0.0);
  CHECK(noiseless.terms.at("noise") == 0.0);
  // decreasing in T for a divergent step sum
  CHECK(opt_error_bound(10000, StepSchedule::inverse_sqrt(1.0), 1.0, 0.5).value <
        opt_error_bound(100, StepSchedule::inverse_sqrt(1.0), 1.0, 0.5).value);
}

TEST_CASE("stability and strong convexity bounds") {
  const auto s = stability_bound(10, StepSchedule::constant(0.5), 4, 3.0);
  CHECK(s.value == doctest::Approx(2.0 * 9.0 / 10.0 * 2.0));
  CHECK(s.unbounded_in_T);
  const auto big = stability_bound(100, StepSchedule::inverse_sqrt(1.0), 100000, 1.0);
  const auto small = stability_bound(100, StepSchedule::inverse_sqrt(1.0), 1000, 1.0);
  CHECK(big.value / small.value > 9.0);

  CHECK(strongly_convex_bound(10, 2.0, 0.5).value == doctest::Approx(1.6));
  const auto flat = strongly_convex_bound(10, 2.0, 0.0);
  CHECK(flat.divergent);
  CHECK(std::isinf(flat.value));
  CHECK_THROWS(strongly_convex_bound(10, 2.0, -1.0));
}

TEST_CASE("main theorem bound is opt error plus plateau") {
  MainTheoremInputs in;
  in.T = 1000;
  in.schedule = StepSchedule::inverse_sqrt(1.0);
  in.w0_dist = 2.0;
  in.sigma = 0.5;
  in.sigma_star = 0.3;
  in.L = 2.0;
  in.R = 1.5;
  in.d = 16;
  in.n = 400;
  in.C = 1.0;
  const auto r = main_theorem_bound(in);
  const double plateau = (0.3 * 1.5 + 2.0 * 1.5 * 1.5 * 4.0) / 20.0;
  CHECK(r.terms.at("plateau") == doctest::Approx(plateau));
  CHECK(r.value == doctest::Approx(opt_error_bound(1000, in.schedule, 2.0, 0.5).value + plateau));
}

TEST_CASE("covering numbers") {
  CHECK(covering_number_bound(0.5, 1.0, 1.0, 4, 2) == doctest::Approx(9.0));
  CHECK(log_covering_number_bound(0.5, 1.0, 1.0, 4, 2) == doctest::Approx(std::log(9.0)));
  // huge d overflows the number but not its log
  CHECK(std::isinf(covering_number_bound(1e-3, 1.0, 1.0, 4, 5000)));
  CHECK(std::isfinite(log_covering_number_bound(1e-300, 1.0, 1.0, 4, 5000)));
  CHECK(log_covering_number_bound(1e-300, 1.0, 1.0, 4, 5000) ==
        doctest::Approx(5000.0 * std::log(1.0 / 1e-300)).epsilon(1e-6));
  const auto scale = covering_scale(1.0, 2.0, 16);
  CHECK(scale.epsilon0 == doctest::Approx(1.0));
  CHECK(scale.radius_bound == doctest::Approx(0.5));
}

TEST_CASE("dudley sum against the integral") {
  // constant log N = 1, K = 1, R_hat = 1: both forms equal 1
  const LogCoveringFn one = [](double) { return 1.0; };
  const auto discrete = dudley_discrete_bound(1.0, 1.0, one);
  CHECK(discrete.scales.i == 0);
  CHECK(discrete.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(dudley_integral_bound(1.0, 1.0, one) == doctest::Approx(1.0).epsilon(1e-10));

  for (std::size_t n : {16u, 100u, 1000u}) {
    for (std::size_t d : {1u, 5u, 20u}) {
      const auto fn = covering_bound_fn(1.0, 1.0, n, d);
      const double r_hat = covering_scale(1.0, 1.0, n).radius_bound;
      const double sum = dudley_discrete_bound(r_hat, d, fn).value;
      const double integral = dudley_integral_bound(r_hat, d, fn);
      CHECK(sum > 0.0);
      CHECK(sum <= 2.0 * integral);
    }
  }

  CHECK_THROWS(dudley_discrete_bound(1.0, 0.5, one));
  CHECK_THROWS(dudley_discrete_bound(0.0, 1.0, one));
  const LogCoveringFn increasing = [](double eps) { return eps; };
  CHECK_THROWS(dudley_discrete_bound(1.0, 1.0, increasing));
}

TEST_CASE("dudley bounds shrink like 1/sqrt(n)") {
  const std::size_t d = 10;
  auto integral = [&](std::size_t n) {
    return dudley_integral_bound(covering_scale(1.0, 1.0, n).radius_bound, d, covering_bound_fn(1.0, 1.0, n, d));
  };
  auto discrete = [&](std::size_t n) {
    return dudley_discrete_bound(covering_scale(1.0, 1.0, n).radius_bound, d, covering_bound_fn(1.0, 1.0, n, d)).value;
  };
  for (std::size_t n : {100u, 400u, 1600u}) {
    const double ratio = integral(2 * n) / integral(n);
    CHECK(ratio > 0.6);
    CHECK(ratio < 0.8);
    const double q = discrete(4 * n) / discrete(n);
    CHECK(q > 0.36);
    CHECK(q < 0.64);
  }
}

TEST_CASE("inexact bound") {
  const auto schedule = StepSchedule::constant(0.5);
  const auto zero = inexact_bound(4, schedule, 2.0, 1.0, 1.0, std::vector<double>(4, 0.0));
  CHECK(zero.value == doctest::Approx(opt_error_bound(4, schedule, 2.0, 1.0).value));
  const auto r = inexact_bound(4, schedule, 2.0, 1.0, 3.0, {0.1, 0.1, 0.3, 0.3});
  CHECK(r.terms.at("perturbation") == doctest::Approx(2.0 * 3.0 * 0.2));
  CHECK_THROWS(inexact_bound(4, schedule, 2.0, 1.0, 1.0, {0.1}));
}

TEST_CASE("gradient gap bounds") {
  CHECK(single_point_delta_bound(0.0, 1.0, 1.0, 100) == doctest::Approx(0.5));
  const auto r = delta_mean_bound(0.2, 1.0, 1.0, 9, 100);
  CHECK(r.terms.at("single_point") == doctest::Approx(0.6));
  CHECK(r.terms.at("scaling") == doctest::Approx((0.2 + 3.0) / 10.0));
  CHECK(r.value == doctest::Approx(r.terms.at("single_point") + r.terms.at("chaining")));
  CHECK(delta_mean_bound(0.2, 1.0, 1.0, 9, 400).value < r.value);
}
