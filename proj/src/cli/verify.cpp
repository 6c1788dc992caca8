#include "psgdlab/cli/commands.hpp"

#include "psgdlab/bounds.hpp"
#include "psgdlab/estimators.hpp"
#include "psgdlab/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>

namespace psgdlab::cli {

namespace {

using Projector = std::function<Vector(const Vector&)>;

struct Family {
  std::string name;
  LossModel model;
  Sampler sampler;
};

std::vector<Family> families(std::size_t d) {
  Vector direction(d);
  direction[0] = 1.0;
  const Sampler halfspace = noisy_halfspace_sampler(direction, 0.1);
  return {
      {"one_sided", LossModel::one_sided_quadratic(1.0, 1.0), halfspace},
      {"strongly_convex", LossModel::quadratic_strongly_convex(0.5, 1.0, 1.0), halfspace},
      {"counterexample", LossModel::counterexample(1.0), rademacher_sampler(d)},
      {"counterexample_perturbed", LossModel::counterexample_perturbed(0.1, d, 1.0),
       rademacher_sampler(d)},
  };
}

Vector scaled(const Vector& w, double s) {
  Vector out = w;
  for (double& x : out) x *= s;
  return out;
}

Vector difference(const Vector& a, const Vector& b) {
  Vector out = a;
  axpy(-1.0, b, out);
  return out;
}

std::string short_text(double x) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  (void)ec;
  return std::string(buf, ptr);
}

VerifyCheck make_check(std::string name, double measured, double bound, bool pass,
                       std::string detail = {}) {
  return {std::move(name), measured, bound, pass, std::move(detail)};
}

VerifyCheck at_most(std::string name, double measured, double bound, std::string detail = {}) {
  return make_check(std::move(name), measured, bound, measured <= bound, std::move(detail));
}

void rng_checks(std::vector<VerifyCheck>& out, std::uint64_t seed) {
  RngStream a(seed, 7), b(seed, 7), c(seed, 8);
  std::size_t mismatches = 0, collisions = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto x = a.next_u64();
    mismatches += x != b.next_u64();
    collisions += x == c.next_u64();
  }
  out.push_back(at_most("rng_replay", static_cast<double>(mismatches), 0.0, "same seed and stream"));
  out.push_back(at_most("rng_stream_independence", static_cast<double>(collisions), 0.0,
                        "distinct streams"));
}

void loss_checks(std::vector<VerifyCheck>& out, const RngStream& rng) {
  constexpr std::size_t d = 5;
  std::uint64_t child = 0;
  for (const auto& f : families(d)) {
    RngStream r = rng.split(child++);
    const ConvexSet set = ConvexSet::ball(d, 1.0);
    double convexity = 0.0, smoothness = 0.0, fd = 0.0;
    for (int i = 0; i < 300; ++i) {
      const DataPoint z = f.sampler(r);
      const Vector a = set.sample_uniform(r);
      const Vector b = set.sample_uniform(r);
      const double lambda = r.uniform();
      Vector mid = scaled(a, lambda);
      axpy(1.0 - lambda, b, mid);
      const auto [fa, ga] = eval_and_grad(f.model, a, z);
      const auto [fb, gb] = eval_and_grad(f.model, b, z);
      const double fm = loss_value(f.model, mid, z);
      convexity = std::max(convexity, fm - (lambda * fa + (1.0 - lambda) * fb));
      const double lhs = euclidean_norm(difference(ga, gb));
      smoothness = std::max(smoothness, lhs - f.model.smoothness() * distance(a, b));

      constexpr double h = 1e-7;
      Vector num(d);
      for (std::size_t k = 0; k < d; ++k) {
        Vector plus = a, minus = a;
        plus[k] += h;
        minus[k] -= h;
        num[k] = (loss_value(f.model, plus, z) - loss_value(f.model, minus, z)) / (2.0 * h);
      }
      fd = std::max(fd, euclidean_norm(difference(num, ga)) / std::max(1.0, euclidean_norm(ga)));
    }
    out.push_back(at_most("convexity/" + f.name, convexity, 1e-12, "max Jensen violation"));
    out.push_back(at_most("smoothness/" + f.name, smoothness, 1e-12,
                          "max of |grad a - grad b| - L |a - b|"));
    out.push_back(at_most("gradient_fd/" + f.name, fd, 1e-6, "relative central-difference error"));
  }
}

void projection_checks(std::vector<VerifyCheck>& out, const ExperimentConfig& config,
                       const RngStream& rng) {
  constexpr std::size_t d = 5;
  Vector lo(d), hi(d);
  for (std::size_t k = 0; k < d; ++k) {
    lo[k] = -0.5 - 0.1 * static_cast<double>(k);
    hi[k] = 0.25 + 0.2 * static_cast<double>(k);
  }
  const std::vector<std::pair<std::string, ConvexSet>> sets{
      {"ball", ConvexSet::ball(d, 1.0)}, {"box", ConvexSet::box(lo, hi)}};
  const double fault = config.inject_fault == "projection_scale" ? 1.1 : 1.0;
  std::uint64_t child = 0;
  for (const auto& [name, set] : sets) {
    const Projector P = [&set = set, fault](const Vector& w) { return scaled(project(set, w), fault); };
    RngStream r = rng.split(child++);
    double idempotence = 0.0, expansion = 0.0, optimality = 0.0;
    for (int i = 0; i < 2000; ++i) {
      const Vector a = scaled(gaussian_vector(d, r), 1.5);
      const Vector b = scaled(gaussian_vector(d, r), 1.5);
      const Vector pa = P(a), pb = P(b);
      idempotence = std::max(idempotence, distance(P(pa), pa));
      expansion = std::max(expansion, distance(pa, pb) - distance(a, b));
      const Vector u = set.sample_uniform(r);
      optimality = std::max(optimality, distance(pa, a) - distance(u, a));
    }
    const std::string detail = fault == 1.0 ? "" : "fault injected: projection scaled by 1.1";
    out.push_back(at_most("projection_idempotent/" + name, idempotence, 1e-12, detail));
    out.push_back(at_most("projection_nonexpansive/" + name, expansion, 1e-12, detail));
    out.push_back(at_most("projection_nearest/" + name, optimality, 1e-12, detail));
  }
}

void projection_lemma_checks(std::vector<VerifyCheck>& out, const RngStream& rng) {
  constexpr std::size_t d = 5;
  const ConvexSet set = ConvexSet::ball(d, 1.0);
  const VectorSampler noise = standard_gaussian_sampler(d);
  Vector boundary(d);
  boundary[0] = 1.0;
  std::uint64_t child = 0;
  for (double alpha : {0.0, 0.05, 0.2, 1.0}) {
    for (const auto& [where, v] : {std::pair{std::string("center"), Vector(d)},
                                   std::pair{std::string("boundary"), boundary}}) {
      const auto report = check_projection_lemma(set, v, noise, alpha, 100000, rng.split(child++));
      out.push_back(make_check("projection_lemma/" + where + "/alpha=" + short_text(alpha),
                               report.lhs, report.rhs + report.tolerance, report.pass,
                               "|E N.P(v - aN)| against a E|N|^2"));
    }
  }
  // a set too large to bind: the inequality is an identity
  const ConvexSet huge = ConvexSet::ball(d, 1e6);
  const auto report = check_projection_lemma(huge, Vector(d), noise, 0.2, 100000, rng.split(child++));
  const double gap = std::abs(report.lhs - report.rhs);
  out.push_back(at_most("projection_lemma/identity_saturation", gap, 1e-12 * report.rhs,
                        "lhs equals rhs when the projection is the identity"));
}

void optimizer_checks(std::vector<VerifyCheck>& out, const RngStream& rng) {
  constexpr std::size_t d = 5, n = 50, T = 2000;
  Vector direction(d);
  direction[0] = 1.0;
  const LossModel model = LossModel::one_sided_quadratic(1.0, 1.0);
  RngStream data_rng = rng.split(0);
  const Dataset S = sample_dataset(noisy_halfspace_sampler(direction, 0.1), n, data_rng);
  const EmpiricalObjective objective(model, S);
  const ConvexSet set = ConvexSet::ball(d, 1.0);
  const StepSchedule schedule = StepSchedule::capped_for(ScheduleKind::inverse_sqrt, 1.0, 1.0);

  RngStream run_rng = rng.split(1);
  const Trajectory traj = run_psgd(objective, set, Vector(d), schedule,
                                   NoiseModel::isotropic_gaussian(0.5), T, run_rng, {true});
  Vector weighted(d);
  double total = 0.0, feasibility = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    axpy(schedule(t), traj.history[t], weighted);
    total += schedule(t);
    feasibility = std::max(feasibility, set.distance_to(traj.history[t]));
  }
  const double avg_gap = distance(scaled(weighted, 1.0 / total), traj.average);
  out.push_back(at_most("running_average", avg_gap, 1e-10, "incremental against direct weighted mean"));
  out.push_back(at_most("iterates_feasible", feasibility, 1e-10, "max distance to the set"));

  // E[eps] = 0 for minibatch noise, per coordinate within 4 standard errors
  RngStream noise_rng = rng.split(2);
  RngStream w_rng = rng.split(3);
  const Vector w = set.sample_uniform(w_rng);
  constexpr std::size_t draws = 20000;
  std::vector<std::vector<double>> coords(d, std::vector<double>(draws));
  for (std::size_t i = 0; i < draws; ++i) {
    const Vector eps = sample_gradient_noise(objective, w, NoiseModel::minibatch(4), noise_rng);
    for (std::size_t k = 0; k < d; ++k) coords[k][i] = eps[k];
  }
  double worst = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    const Estimate e = summarize(coords[k], 0);
    if (e.std_error > 0.0) worst = std::max(worst, std::abs(e.mean) / e.std_error);
  }
  out.push_back(at_most("minibatch_unbiased", worst, 4.0, "max |mean| / stderr over coordinates"));

  const double sigma = 0.5;
  const auto sums = schedule.sums(T);
  const BoundReport opt = opt_error_bound(T, schedule, 2.0, sigma);
  const double expected = 4.0 / (2.0 * sums.sum) + sigma * sigma * sums.sum_sq / sums.sum;
  out.push_back(at_most("opt_error_bound_formula", std::abs(opt.value - expected),
                        1e-12 * expected, "calculator against direct sums"));
}

void generalization_checks(std::vector<VerifyCheck>& out, const RngStream& rng) {
  constexpr std::size_t d = 10, n = 100;
  const LossModel model = LossModel::counterexample(1.0);
  const Sampler sampler = rademacher_sampler(d);
  RngStream sigma_rng = rng.split(0);
  const double sigma_star = estimate_sigma_star(model, Vector(d), sampler, 10000, sigma_rng).upper;
  const ConvexSet set = ConvexSet::ball(d, 1.0);

  RngStream w_rng = rng.split(1);
  for (int i = 0; i < 3; ++i) {
    const Vector w = set.sample_uniform(w_rng);
    const auto report = check_delta_at_w(model, sampler, n, w, sigma_star, 1.0, 2000,
                                         rng.split(2 + static_cast<std::uint64_t>(i)));
    out.push_back(make_check("delta_at_point/" + std::to_string(i), report.estimate.mean,
                             report.bound, report.pass, "mean gradient gap at a fixed point"));
  }

  Vector w1(d), w2(d);
  w1[0] = 0.25;
  w2[1] = 0.25;
  const std::vector<double> u_grid{0.002, 0.005, 0.01, 0.02, 0.03, 0.05};
  const auto tail = check_increment_tail(model, sampler, n, w1, w2, u_grid, 20000, rng.split(10));
  out.push_back(make_check("increment_tail_calibration", tail.calibrated_c.value_or(NAN),
                           default_c_grid().back(), tail.calibrated_c.has_value(),
                           "smallest c whose tail bound covers every frequency"));

  Vector direction(5);
  direction[0] = 1.0;
  const LossModel labeled = LossModel::one_sided_quadratic(1.0, 1.0);
  const Sampler halfspace = noisy_halfspace_sampler(direction, 0.1);
  RngStream data_rng = rng.split(11);
  const Dataset S = sample_dataset(halfspace, n, data_rng);
  const Dataset S_prime = sample_dataset(halfspace, n, data_rng);
  const EmpiricalObjective objS(labeled, S), objS_prime(labeled, S_prime);
  const auto chain = check_inexact_chain(
      objS, objS_prime, ConvexSet::ball(5, 1.0), Vector(5),
      StepSchedule::capped_for(ScheduleKind::inverse_sqrt, 1.0, 1.0),
      NoiseModel::isotropic_gaussian(0.5), 2000, 20, SupSearchConfig{}, 0.0, 20000, rng.split(12));
  out.push_back(make_check("inexact_bound", chain.excess_risk.mean, chain.bound.value, chain.pass,
                           "excess risk on S' of PSGD on S"));
}

}  // namespace

std::vector<VerifyCheck> run_property_suites(const ExperimentConfig& config) {
  const RngStream master(config.seed);
  std::vector<VerifyCheck> out;
  rng_checks(out, config.seed);
  loss_checks(out, master.split(1));
  projection_checks(out, config, master.split(2));
  projection_lemma_checks(out, master.split(3));
  optimizer_checks(out, master.split(4));
  generalization_checks(out, master.split(5));
  return out;
}

}  // namespace psgdlab::cli
