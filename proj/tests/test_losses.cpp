#include "psgdlab/losses.hpp"
#include "psgdlab/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace psgdlab;

namespace {

double naive_empirical(const LossModel& model, const Vector& w, const Dataset& S) {
  double total = 0.0;
  for (const auto& z : S) total += loss_value(model, w, z);
  return total / static_cast<double>(S.size());
}

}  // namespace

TEST_CASE("one-sided quadratic by hand") {
  const auto model = LossModel::one_sided_quadratic(1.0, 1.0);
  const DataPoint z = make_labeled(Vector{0.6, 0.8}, -1);
  const Vector w{0.5, 0.0};
  // slack = 1 - (-1)(0.3) = 1.3
  const auto [f, g] = eval_and_grad(model, w, z);
  CHECK(f == doctest::Approx(0.5 * 1.3 * 1.3));
  CHECK(g[0] == doctest::Approx(1.3 * 0.6));
  CHECK(g[1] == doctest::Approx(1.3 * 0.8));
  const DataPoint easy = make_labeled(Vector{1.0, 0.0}, 1);
  CHECK(loss_value(model, Vector{2.0, 0.0}, easy) == 0.0);
  CHECK(model.smoothness() == 1.0);
}

TEST_CASE("counterexample loss by hand") {
  const auto model = LossModel::counterexample();
  const DataPoint z = make_sign_vector(Vector{1.0, -1.0, 1.0});
  const Vector w{0.5, 0.5, -0.2};
  const auto [f, g] = eval_and_grad(model, w, z);
  CHECK(f == doctest::Approx(0.125));
  CHECK(g == Vector{0.5, 0.0, 0.0});

  const auto perturbed = LossModel::counterexample_perturbed(0.1, 3);
  CHECK(loss_value(perturbed, w, z) == doctest::Approx(0.125 + 0.1 * (0.5 - 0.5 - 0.2)));
}

TEST_CASE("strongly convex quadratic by hand") {
  const auto model = LossModel::quadratic_strongly_convex(0.5, 1.0, 1.0);
  const DataPoint z = make_labeled(Vector{1.0, 0.0}, 1);
  const Vector w{0.2, 0.4};
  const auto [f, g] = eval_and_grad(model, w, z);
  CHECK(f == doctest::Approx(0.5 * 0.64 + 0.25 * 0.2));
  CHECK(g[0] == doctest::Approx(-0.8 + 0.1));
  CHECK(g[1] == doctest::Approx(0.2));
}

TEST_CASE("empirical objective matches the per-point average") {
  RngStream rng(11);
  const std::size_t d = 6;
  Vector dir(d);
  dir[0] = 1.0;
  const std::vector<std::pair<LossModel, Sampler>> cases{
      {LossModel::one_sided_quadratic(1.0, 1.0), noisy_halfspace_sampler(dir, 0.2)},
      {LossModel::quadratic_strongly_convex(0.3, 1.0, 1.0), noisy_halfspace_sampler(dir, 0.2)},
      {LossModel::counterexample(), rademacher_sampler(d)},
      {LossModel::counterexample_perturbed(0.05, d), rademacher_sampler(d)},
  };
  for (const auto& [model, sampler] : cases) {
    const Dataset S = sample_dataset(sampler, 37, rng);
    const EmpiricalObjective obj(model, S);
    for (int i = 0; i < 20; ++i) {
      const Vector w = gaussian_vector(d, rng);
      CHECK(obj.value(w) == doctest::Approx(naive_empirical(model, w, S)).epsilon(1e-13));
      const Vector g = obj.grad(w);
      const Vector g_ref = empirical_grad(model, w, S);
      CHECK(distance(g, g_ref) <= 1e-13 * (1.0 + euclidean_norm(g_ref)));
    }
  }
}

TEST_CASE("counterexample population risk is |w|^2 / 4") {
  RngStream rng(5);
  const std::size_t d = 8;
  const auto model = LossModel::counterexample();
  const Vector w = gaussian_vector(d, rng);
  std::vector<double> values(100000);
  const Sampler sampler = rademacher_sampler(d);
  for (double& v : values) v = loss_value(model, w, sampler(rng));
  const Estimate e = summarize(values, 5);
  CHECK(std::abs(e.mean - counterexample_population_risk(w)) < 4.0 * e.std_error);
  CHECK(counterexample_population_risk(w) == doctest::Approx(squared_norm(w) / 4.0));
}

TEST_CASE("event I and the closed-form minimizer") {
  const Dataset S({make_sign_vector(Vector{1, -1, 1, 1}), make_sign_vector(Vector{1, -1, -1, 1}),
                   make_sign_vector(Vector{1, 1, 1, -1})});
  const EventI ev = detect_event_I(S);
  CHECK(ev.holds == false);
  CHECK(ev.plus_cols == std::vector<std::size_t>{0});
  CHECK_THROWS_AS(counterexample_minimizer(S), std::domain_error);

  const Dataset T({make_sign_vector(Vector{1, -1, 1, 1}), make_sign_vector(Vector{1, -1, -1, 1}),
                   make_sign_vector(Vector{1, -1, 1, 1})});
  const EventI ev2 = detect_event_I(T);
  CHECK(ev2.holds);
  CHECK(ev2.plus_cols == std::vector<std::size_t>{0, 3});
  CHECK(ev2.minus_cols == std::vector<std::size_t>{1});
  const Vector w = counterexample_minimizer(T);
  CHECK(euclidean_norm(w) == doctest::Approx(1.0).epsilon(1e-15));
  const EmpiricalObjective obj(LossModel::counterexample(), T);
  CHECK(obj.value(w) == 0.0);
  CHECK(w[0] < 0.0);
  CHECK(w[1] > 0.0);
  CHECK(w[2] == 0.0);
}

TEST_CASE("sigma star of the counterexample at the origin is zero") {
  RngStream rng(1);
  const auto est = estimate_sigma_star(LossModel::counterexample(), Vector(10), rademacher_sampler(10), 1000, rng);
  CHECK(est.sigma_star == 0.0);
  CHECK(est.upper == 0.0);
}

TEST_CASE("dataset validation") {
  CHECK_THROWS(Dataset({}));
  CHECK_THROWS(Dataset({make_sign_vector(Vector{1, 1}), make_sign_vector(Vector{1, 1, 1})}));
  CHECK_THROWS(make_labeled(Vector{1.0}, 0));
  CHECK_THROWS(make_sign_vector(Vector{0.5}));
}
