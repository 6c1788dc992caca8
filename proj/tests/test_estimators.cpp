#include "psgdlab/estimators.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace psgdlab;

namespace {

double brute_event_I(std::size_t n, std::size_t d) {
  const std::size_t cells = n * d;
  std::size_t hits = 0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << cells); ++mask) {
    bool plus = false, minus = false;
    for (std::size_t k = 0; k < d; ++k) {
      bool all_plus = true, all_minus = true;
      for (std::size_t i = 0; i < n; ++i) {
        const bool bit = (mask >> (i * d + k)) & 1u;
        all_plus = all_plus && bit;
        all_minus = all_minus && !bit;
      }
      plus = plus || all_plus;
      minus = minus || all_minus;
    }
    hits += plus && minus;
  }
  return static_cast<double>(hits) / static_cast<double>(std::size_t{1} << cells);
}

std::vector<double> plus_fractions(const Dataset& S) {
  std::vector<double> p(S.dim());
  for (const auto& z : S) {
    const auto& s = std::get<SignVector>(z).signs;
    for (std::size_t k = 0; k < S.dim(); ++k) p[k] += s[k] > 0 ? 1.0 : 0.0;
  }
  for (double& x : p) x /= static_cast<double>(S.size());
  return p;
}

GenErrorExperiment labeled_experiment() {
  return {LossModel::one_sided_quadratic(1.0, 1.0),
          ConvexSet::ball(3, 1.0),
          noisy_halfspace_sampler(Vector{1, 0, 0}, 0.1),
          20,
          StepSchedule::capped_for(ScheduleKind::inverse_sqrt, 1.0, 1.0),
          NoiseModel::isotropic_gaussian(0.3),
          Vector(3)};
}

}  // namespace

TEST_CASE("event I probability against enumeration") {
  for (auto [n, d] : {std::pair<std::size_t, std::size_t>{1, 2}, {2, 3}, {3, 3}, {2, 5}, {4, 4}}) {
    CHECK(event_I_probability(n, d) == doctest::Approx(brute_event_I(n, d)).epsilon(1e-12));
    CHECK(event_I_probability(n, d) + event_I_complement(n, d) == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK(event_I_probability(5, 1) == 0.0);
  CHECK(event_I_complement(5, 2000) < 1e-20);
  CHECK(event_I_complement(5, 2000) > 0.0);
}

TEST_CASE("gradient gap search matches the closed form for the counterexample") {
  const std::size_t d = 8, n = 30;
  const auto model = LossModel::counterexample();
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    RngStream rng(seed);
    const Dataset S = sample_rademacher_dataset(n, d, rng);
    const Dataset Sp = sample_rademacher_dataset(n, d, rng);
    const auto p = plus_fractions(S), q = plus_fractions(Sp);
    double max_gap = 0.0;
    for (std::size_t k = 0; k < d; ++k) max_gap = std::max(max_gap, std::abs(p[k] - q[k]));
    const double R = 1.5;
    const EmpiricalObjective a(model, S), b(model, Sp);
    const auto found = estimate_delta(a, b, ConvexSet::ball(d, R), SupSearchConfig{}, RngStream(seed));
    CHECK(found.value <= R * max_gap * (1.0 + 1e-9));
    CHECK(found.value >= 0.98 * R * max_gap);
    CHECK(gradient_gap(a, b, found.argmax) == found.value);
  }
}

TEST_CASE("more search starts never lower the estimate") {
  const std::size_t d = 5;
  RngStream rng(4);
  const Dataset S = sample_dataset(noisy_halfspace_sampler(Vector{1, 0, 0, 0, 0}, 0.2), 25, rng);
  const Dataset Sp = sample_dataset(noisy_halfspace_sampler(Vector{1, 0, 0, 0, 0}, 0.2), 25, rng);
  const auto model = LossModel::one_sided_quadratic(1.0, 1.0);
  const EmpiricalObjective a(model, S), b(model, Sp);
  SupSearchConfig small, large;
  large.random_starts = 1024;
  const auto lo = estimate_delta(a, b, ConvexSet::ball(d, 1.0), small, RngStream(9));
  const auto hi = estimate_delta(a, b, ConvexSet::ball(d, 1.0), large, RngStream(9));
  CHECK(hi.value >= lo.value);
}

TEST_CASE("serial and parallel trials agree bit for bit") {
  const auto exp = labeled_experiment();
  const auto s = estimate_gen_error_curve(exp, {10, 100}, 16, RngStream(5), Execution::serial);
  const auto p = estimate_gen_error_curve(exp, {10, 100}, 16, RngStream(5), Execution::parallel);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(s[k].gen_error.mean == p[k].gen_error.mean);
    CHECK(s[k].gen_error.std_error == p[k].gen_error.std_error);
    CHECK(s[k].train_loss_final.mean == p[k].train_loss_final.mean);
  }

  const auto ds = estimate_delta_mean(LossModel::counterexample(), rademacher_sampler(6), 20,
                                      ConvexSet::ball(6, 1.0), SupSearchConfig{}, 6, RngStream(2), Execution::serial);
  const auto dp = estimate_delta_mean(LossModel::counterexample(), rademacher_sampler(6), 20,
                                      ConvexSet::ball(6, 1.0), SupSearchConfig{}, 6, RngStream(2), Execution::parallel);
  CHECK(ds.mean == dp.mean);

  const auto ms = gen_error_at_minimizer(5, 40, 30, RngStream(3), {1e-3, 2000}, Execution::serial);
  const auto mp = gen_error_at_minimizer(5, 40, 30, RngStream(3), {1e-3, 2000}, Execution::parallel);
  CHECK(ms.per_trial == mp.per_trial);
}

TEST_CASE("gen error curve agrees with single-T estimates") {
  const auto exp = labeled_experiment();
  const auto curve = estimate_gen_error_curve(exp, {5, 50}, 8, RngStream(6));
  CHECK(estimate_gen_error(exp, 50, 8, RngStream(6)).mean == curve[1].gen_error.mean);
  CHECK(curve[0].T == 5);
}

TEST_CASE("minimizer generalization error under event I is the population risk") {
  const auto r = gen_error_at_minimizer(5, 300, 50, RngStream(8), {1e-3, 5000});
  REQUIRE(r.event_I_trials > 0);
  for (std::size_t i = 0; i < r.per_trial.size(); ++i) {
    if (r.event_I[i]) CHECK(std::abs(r.per_trial[i] - 0.25) <= std::nextafter(0.25, 1.0) - 0.25);
  }
  CHECK(r.event_I_trials + r.fallback_trials == 50);
}

TEST_CASE("gradient gap at a point") {
  const auto report = check_delta_at_w(LossModel::counterexample(), rademacher_sampler(10), 100,
                                       Vector{0.3, 0.3, 0, 0, 0, 0, 0, 0, 0, 0.2}, 0.0, 1.0, 500, RngStream(1));
  CHECK(report.bound == doctest::Approx(0.5));
  CHECK(report.pass);
}

TEST_CASE("increment tail calibration") {
  Vector w1(10), w2(10);
  w1[0] = 0.3;
  w2[1] = 0.3;
  const auto r = check_increment_tail(LossModel::counterexample(), rademacher_sampler(10), 100, w1, w2,
                                      {0.002, 0.01, 0.03}, 4000, RngStream(3));
  REQUIRE(r.calibrated_c.has_value());
  for (const auto& row : r.rows) CHECK(row.bound >= row.frequency);
  CHECK(r.rows[0].frequency >= r.rows[2].frequency);
  CHECK(r.metric_unit == doctest::Approx(0.3 * std::sqrt(2.0) / 10.0));

  // identical points: the increment vanishes
  const auto zero = check_increment_tail(LossModel::counterexample(), rademacher_sampler(10), 100, w1, w1,
                                         {0.001}, 200, RngStream(3));
  CHECK(zero.rows[0].exceed == 0);
}

TEST_CASE("perturbed minimizers approach the closed form") {
  Dataset S = [] {
    for (std::uint64_t a = 0;; ++a) {
      RngStream r(100, a);
      Dataset D = sample_rademacher_dataset(4, 40, r);
      if (detect_event_I(D).holds) return D;
    }
  }();
  const auto report = perturbed_minimizer_limit_check(S, {1e-1, 1e-2, 1e-3}, 50000);
  CHECK(report.distances_decreasing);
  CHECK(report.rows.back().distance < report.rows.front().distance);
  CHECK(report.rows.back().population_risk == doctest::Approx(0.25).epsilon(0.05));
}

TEST_CASE("suboptimality stays under the optimization bound") {
  const auto model = LossModel::quadratic_strongly_convex(0.5, 1.0, 1.0);
  RngStream rng(2);
  const Dataset S = sample_dataset(noisy_halfspace_sampler(Vector{1, 0, 0}, 0.1), 50, rng);
  const EmpiricalObjective obj(model, S);
  const ConvexSet set = ConvexSet::ball(3, 1.0);
  const auto ref = minimize_empirical(obj, set, Vector(3), 100000, 1e-15);
  const auto schedule = StepSchedule::capped_for(ScheduleKind::inverse_sqrt, 1.0, model.smoothness());
  const auto pts = measure_suboptimality(obj, set, Vector(3), schedule, NoiseModel::isotropic_gaussian(0.5),
                                         {100, 1000}, ref.value, 40, RngStream(4));
  for (const auto& p : pts) {
    CHECK(p.suboptimality.mean >= -1e-12);
    CHECK(p.suboptimality.mean <= opt_error_bound(p.T, schedule, 2.0, 0.5).value + 3.0 * p.suboptimality.std_error);
  }
}
