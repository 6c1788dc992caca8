#include "psgdlab/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace psgdlab {

namespace {

// Gradient gap with reusable buffers.
class GapEvaluator {
 public:
  GapEvaluator(const EmpiricalObjective& a, const EmpiricalObjective& b)
      : a_(a), b_(b), ga_(a.dim()), gb_(a.dim()) {
    if (a.dim() != b.dim()) throw std::invalid_argument("gradient gap: datasets differ in dimension");
  }

  double operator()(const Vector& w) {
    a_.value_and_grad(w, ga_);
    b_.value_and_grad(w, gb_);
    double s = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double diff = ga_[k] - gb_[k];
      s += diff * diff;
    }
    return std::sqrt(s);
  }

 private:
  const EmpiricalObjective& a_;
  const EmpiricalObjective& b_;
  Vector ga_, gb_;
};

struct Candidate {
  double value;
  Vector w;
};

// Projected ascent along a central-difference gradient; only improving steps
// are taken, otherwise the step is halved.
Candidate refine(GapEvaluator& gap, const ConvexSet& set, Candidate start, double rate,
                 std::size_t steps) {
  const double h = 1e-7 * std::max(1.0, set.enclosing_radius());
  const double min_step = 1e-12 * std::max(1.0, set.enclosing_radius());
  const std::size_t d = start.w.size();
  Vector dir(d);
  double step = rate;
  for (std::size_t s = 0; s < steps && step > min_step; ++s) {
    Vector probe = start.w;
    for (std::size_t k = 0; k < d; ++k) {
      const double orig = probe[k];
      probe[k] = orig + h;
      const double up = gap(probe);
      probe[k] = orig - h;
      const double down = gap(probe);
      probe[k] = orig;
      dir[k] = (up - down) / (2.0 * h);
    }
    const double norm = euclidean_norm(dir);
    if (!(norm > 0.0)) break;
    Vector next = start.w;
    axpy(step / norm, dir, next);
    set.project_in_place(next);
    const double value = gap(next);
    if (value > start.value) {
      start.value = value;
      start.w = std::move(next);
    } else {
      step *= 0.5;
    }
  }
  return start;
}

Dataset draw(const Sampler& sampler, std::size_t n, const RngStream& parent, std::uint64_t child) {
  RngStream r = parent.split(child);
  return sample_dataset(sampler, n, r);
}

std::vector<double> column(const std::vector<std::vector<double>>& rows, std::size_t k) {
  std::vector<double> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = rows[i][k];
  return out;
}

double noise_sigma(const NoiseModel& noise) {
  switch (noise.kind) {
    case NoiseKind::none: return 0.0;
    case NoiseKind::isotropic_gaussian: return noise.sigma;
    case NoiseKind::minibatch: break;
  }
  throw std::invalid_argument("bound needs a known noise level; minibatch noise is not supported");
}

}  // namespace

double gradient_gap(const EmpiricalObjective& S, const EmpiricalObjective& S_prime, const Vector& w) {
  GapEvaluator gap(S, S_prime);
  return gap(w);
}

DeltaSearchResult estimate_delta(const EmpiricalObjective& S, const EmpiricalObjective& S_prime,
                                 const ConvexSet& set, const SupSearchConfig& search,
                                 const RngStream& rng) {
  if (S.dim() != S_prime.dim() || set.dim() != S.dim()) {
    throw std::invalid_argument("estimate_delta: dimension mismatch");
  }
  if (search.random_starts == 0) throw std::invalid_argument("estimate_delta: need at least one start");
  const double rate = search.refine_rate.value_or(0.05 * set.enclosing_radius());
  if (!(rate > 0.0)) throw std::invalid_argument("estimate_delta: refine rate must be positive");

  GapEvaluator gap(S, S_prime);
  DeltaSearchResult best{-1.0, Vector(S.dim())};
  const std::size_t blocks =
      (search.random_starts + SupSearchConfig::block_size - 1) / SupSearchConfig::block_size;
  for (std::size_t b = 0; b < blocks; ++b) {
    RngStream block_rng = rng.split(b);
    const std::size_t count =
        std::min(SupSearchConfig::block_size, search.random_starts - b * SupSearchConfig::block_size);
    std::vector<Candidate> starts;
    starts.reserve(count);
    for (std::size_t s = 0; s < count; ++s) {
      Vector w = set.sample_uniform(block_rng);
      const double value = gap(w);
      starts.push_back({value, std::move(w)});
    }
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      return starts[x].value > starts[y].value;
    });
    const std::size_t top = std::min(search.refine_top, count);
    for (std::size_t r = 0; r < std::max<std::size_t>(top, 1); ++r) {
      Candidate c = r < top ? refine(gap, set, starts[order[r]], rate, search.refine_steps)
                            : starts[order[r]];
      if (c.value > best.value) best = {c.value, std::move(c.w)};
    }
  }
  return best;
}

Estimate estimate_delta_mean(const LossModel& model, const Sampler& sampler, std::size_t n,
                             const ConvexSet& set, const SupSearchConfig& search,
                             std::size_t trials, const RngStream& rng, Execution exec) {
  if (trials < 2) throw std::invalid_argument("estimate_delta_mean: need at least two trials");
  const auto values = run_trials<double>(
      trials, rng,
      [&](std::size_t, RngStream& r) {
        const Dataset S = draw(sampler, n, r, 0);
        const Dataset Sp = draw(sampler, n, r, 1);
        const EmpiricalObjective a(model, S), b(model, Sp);
        return estimate_delta(a, b, set, search, r.split(2)).value;
      },
      exec);
  return summarize(values, rng.seed());
}

std::vector<GenErrorPoint> estimate_gen_error_curve(const GenErrorExperiment& experiment,
                                                    const std::vector<std::size_t>& checkpoints,
                                                    std::size_t trials, const RngStream& rng,
                                                    Execution exec) {
  if (trials < 2) throw std::invalid_argument("estimate_gen_error: need at least two trials");
  const std::size_t m = checkpoints.size();
  // per trial: gen error, train loss of the average, train loss of the last iterate
  const auto rows = run_trials<std::vector<double>>(
      trials, rng,
      [&](std::size_t, RngStream& r) {
        const Dataset S = draw(experiment.sampler, experiment.n, r, 0);
        const Dataset Sp = draw(experiment.sampler, experiment.n, r, 1);
        const EmpiricalObjective train(experiment.model, S), fresh(experiment.model, Sp);
        RngStream noise_rng = r.split(2);
        const auto runs = run_psgd_checkpoints(train, experiment.set, experiment.w0,
                                               experiment.schedule, experiment.noise,
                                               checkpoints, noise_rng);
        std::vector<double> out(3 * m);
        for (std::size_t k = 0; k < m; ++k) {
          const double train_avg = train.value(runs[k].average);
          out[3 * k] = fresh.value(runs[k].average) - train_avg;
          out[3 * k + 1] = train_avg;
          out[3 * k + 2] = train.value(runs[k].final_iterate);
        }
        return out;
      },
      exec);
  std::vector<GenErrorPoint> points(m);
  for (std::size_t k = 0; k < m; ++k) {
    points[k].T = checkpoints[k];
    points[k].gen_error = summarize(column(rows, 3 * k), rng.seed());
    points[k].train_loss = summarize(column(rows, 3 * k + 1), rng.seed());
    points[k].train_loss_final = summarize(column(rows, 3 * k + 2), rng.seed());
  }
  return points;
}

Estimate estimate_gen_error(const GenErrorExperiment& experiment, std::size_t T,
                            std::size_t trials, const RngStream& rng, Execution exec) {
  return estimate_gen_error_curve(experiment, {T}, trials, rng, exec).front().gen_error;
}

MinimizerGenError gen_error_at_minimizer(std::size_t n, std::size_t d, std::size_t trials,
                                         const RngStream& rng, FallbackSolver fallback,
                                         Execution exec) {
  if (trials < 2) throw std::invalid_argument("gen_error_at_minimizer: need at least two trials");
  if (n == 0 || d == 0) throw std::invalid_argument("gen_error_at_minimizer: n and d must be positive");
  struct Row {
    double value = 0.0;
    bool event = false;
  };
  const LossModel plain = LossModel::counterexample();
  const LossModel perturbed = LossModel::counterexample_perturbed(fallback.epsilon, d);
  const ConvexSet ball = ConvexSet::ball(d, 1.0);
  const auto rows = run_trials<Row>(
      trials, rng,
      [&](std::size_t, RngStream& r) {
        RngStream data_rng = r.split(0);
        const Dataset S = sample_rademacher_dataset(n, d, data_rng);
        const EmpiricalObjective objective(plain, S);
        if (detect_event_I(S).holds) {
          const Vector w = counterexample_minimizer(S);
          return Row{counterexample_population_risk(w) - objective.value(w), true};
        }
        const EmpiricalObjective solve(perturbed, S);
        RngStream unused = r.split(1);
        const Trajectory traj = run_psgd(solve, ball, Vector(d), StepSchedule::constant(1.0),
                                         NoiseModel::none(), fallback.steps, unused);
        const Vector& w = traj.final_iterate;
        return Row{counterexample_population_risk(w) - objective.value(w), false};
      },
      exec);
  MinimizerGenError out;
  out.per_trial.resize(trials);
  out.event_I.resize(trials);
  for (std::size_t i = 0; i < trials; ++i) {
    out.per_trial[i] = rows[i].value;
    out.event_I[i] = rows[i].event;
    if (rows[i].event) ++out.event_I_trials;
  }
  out.fallback_trials = trials - out.event_I_trials;
  out.estimate = summarize(out.per_trial, rng.seed());
  return out;
}

DeltaAtPointReport check_delta_at_w(const LossModel& model, const Sampler& sampler, std::size_t n,
                                    const Vector& w, double sigma_star, double R,
                                    std::size_t trials, const RngStream& rng, Execution exec) {
  if (trials < 2) throw std::invalid_argument("check_delta_at_w: need at least two trials");
  const auto values = run_trials<double>(
      trials, rng,
      [&](std::size_t, RngStream& r) {
        const Dataset S = draw(sampler, n, r, 0);
        const Dataset Sp = draw(sampler, n, r, 1);
        const EmpiricalObjective a(model, S), b(model, Sp);
        return gradient_gap(a, b, w);
      },
      exec);
  DeltaAtPointReport out;
  out.estimate = summarize(values, rng.seed());
  out.bound = single_point_delta_bound(sigma_star, model.smoothness(), R, n);
  out.pass = out.estimate.mean <= out.bound + 3.0 * out.estimate.std_error;
  return out;
}

std::vector<double> default_c_grid() {
  std::vector<double> grid;
  for (double c = 0.01; c <= 100.0; c *= 1.05) grid.push_back(c);
  return grid;
}

IncrementTailReport check_increment_tail(const LossModel& model, const Sampler& sampler,
                                         std::size_t n, const Vector& w1, const Vector& w2,
                                         const std::vector<double>& u_grid, std::size_t trials,
                                         const RngStream& rng, const std::vector<double>& c_grid,
                                         Execution exec) {
  require_same_dim(w1, w2, "check_increment_tail");
  if (trials < 2) throw std::invalid_argument("check_increment_tail: need at least two trials");
  if (u_grid.empty()) throw std::invalid_argument("check_increment_tail: empty u grid");
  const auto increments = run_trials<double>(
      trials, rng,
      [&](std::size_t, RngStream& r) {
        const Dataset S = draw(sampler, n, r, 0);
        const Dataset Sp = draw(sampler, n, r, 1);
        const EmpiricalObjective a(model, S), b(model, Sp);
        GapEvaluator gap(a, b);
        return std::abs(gap(w1) - gap(w2));
      },
      exec);

  IncrementTailReport report;
  report.K = static_cast<double>(w1.size());
  report.metric_unit = model.smoothness() * distance(w1, w2) / std::sqrt(static_cast<double>(n));
  for (double u : u_grid) {
    TailRow row;
    row.u = u;
    row.exceed = static_cast<std::size_t>(
        std::count_if(increments.begin(), increments.end(), [u](double x) { return x >= u; }));
    row.frequency = static_cast<double>(row.exceed) / static_cast<double>(trials);
    row.interval = clopper_pearson(row.exceed, trials);
    report.rows.push_back(row);
  }

  auto tail_bound = [&](double c, double u) {
    const double scale = c * report.metric_unit;
    if (scale == 0.0) return u > 0.0 ? 0.0 : 2.0 * report.K;
    return 2.0 * report.K * std::exp(-(u * u) / (scale * scale));
  };
  std::vector<double> grid = c_grid.empty() ? default_c_grid() : c_grid;
  std::sort(grid.begin(), grid.end());
  for (double c : grid) {
    const bool holds = std::all_of(report.rows.begin(), report.rows.end(), [&](const TailRow& row) {
      return tail_bound(c, row.u) >= row.frequency;
    });
    if (holds) {
      report.calibrated_c = c;
      break;
    }
  }
  for (auto& row : report.rows) {
    if (report.calibrated_c) row.bound = tail_bound(*report.calibrated_c, row.u);
  }

  std::vector<double> x, y;
  for (const auto& row : report.rows) {
    if (row.exceed > 0 && row.u > 0.0) {
      x.push_back(row.u * row.u);
      y.push_back(std::log(row.frequency));
    }
  }
  if (x.size() >= 2 && *std::max_element(x.begin(), x.end()) > *std::min_element(x.begin(), x.end())) {
    report.tail_slope = least_squares(x, y).slope;
  }
  if (report.calibrated_c && report.metric_unit > 0.0) {
    const double scale = *report.calibrated_c * report.metric_unit;
    report.slope_reference = -1.0 / (scale * scale);
  }
  return report;
}

double event_I_complement(std::size_t n, std::size_t d) {
  if (n == 0 || d == 0) throw std::invalid_argument("event_I_probability: n and d must be positive");
  const double q = std::ldexp(1.0, -static_cast<int>(std::min<std::size_t>(n, 2000)));
  const double dd = static_cast<double>(d);
  const double no_plus = std::exp(dd * std::log1p(-q));      // no all-+1 column
  const double neither = std::exp(dd * std::log1p(-2.0 * q));  // no constant column
  return std::clamp(2.0 * no_plus - neither, 0.0, 1.0);
}

double event_I_probability(std::size_t n, std::size_t d) {
  return 1.0 - event_I_complement(n, d);
}

LimitReport perturbed_minimizer_limit_check(const Dataset& S, const std::vector<double>& eps_grid,
                                            std::size_t steps) {
  const EventI event = detect_event_I(S);
  const Vector target = counterexample_minimizer(S);
  const std::size_t d = S.dim();
  const ConvexSet ball = ConvexSet::ball(d, 1.0);
  LimitReport report;
  for (double eps : eps_grid) {
    const LossModel model = LossModel::counterexample_perturbed(eps, d);
    const EmpiricalObjective objective(model, S);
    RngStream unused(0);
    const Trajectory traj = run_psgd(objective, ball, Vector(d), StepSchedule::constant(1.0),
                                     NoiseModel::none(), steps, unused);
    LimitRow row;
    row.epsilon = eps;
    row.solution = traj.final_iterate;
    row.distance = distance(row.solution, target);
    row.norm = euclidean_norm(row.solution);
    row.population_risk = counterexample_population_risk(row.solution);
    double lo = row.solution[event.plus_cols.front()], hi = lo;
    row.plus_negative = true;
    for (std::size_t k : event.plus_cols) {
      lo = std::min(lo, row.solution[k]);
      hi = std::max(hi, row.solution[k]);
      row.plus_negative = row.plus_negative && row.solution[k] < 0.0;
    }
    row.plus_spread = hi - lo;
    report.rows.push_back(std::move(row));
  }
  report.distances_decreasing = true;
  for (std::size_t k = 1; k < report.rows.size(); ++k) {
    if (!(report.rows[k].distance < report.rows[k - 1].distance)) report.distances_decreasing = false;
  }
  return report;
}

std::vector<SuboptimalityPoint> measure_suboptimality(
    const EmpiricalObjective& objective, const ConvexSet& set, const Vector& w0,
    const StepSchedule& schedule, const NoiseModel& noise,
    const std::vector<std::size_t>& checkpoints, double optimal_value, std::size_t trials,
    const RngStream& rng, const std::optional<PerturbationSpec>& perturbation, Execution exec) {
  if (trials < 2) throw std::invalid_argument("measure_suboptimality: need at least two trials");
  const std::size_t m = checkpoints.size();
  const auto rows = run_trials<std::vector<double>>(
      trials, rng,
      [&](std::size_t, RngStream& r) {
        std::vector<double> out(m);
        if (perturbation) {
          for (std::size_t k = 0; k < m; ++k) {
            RngStream run_rng = r;
            const Trajectory traj = run_perturbed_psgd(objective, *perturbation, set, w0, schedule,
                                                       noise, checkpoints[k], run_rng);
            out[k] = objective.value(traj.average) - optimal_value;
          }
          return out;
        }
        const auto runs = run_psgd_checkpoints(objective, set, w0, schedule, noise, checkpoints, r);
        for (std::size_t k = 0; k < m; ++k) out[k] = objective.value(runs[k].average) - optimal_value;
        return out;
      },
      exec);
  std::vector<SuboptimalityPoint> points(m);
  for (std::size_t k = 0; k < m; ++k) {
    points[k].T = checkpoints[k];
    points[k].suboptimality = summarize(column(rows, k), rng.seed());
  }
  return points;
}

ChainCheckReport check_inexact_chain(const EmpiricalObjective& S, const EmpiricalObjective& S_prime,
                                     const ConvexSet& set, const Vector& w0,
                                     const StepSchedule& schedule, const NoiseModel& noise,
                                     std::size_t T, std::size_t trials,
                                     const SupSearchConfig& search, double slack,
                                     std::size_t reference_steps, const RngStream& rng,
                                     Execution exec) {
  if (trials < 2) throw std::invalid_argument("check_inexact_chain: need at least two trials");
  if (!(slack >= 0.0)) throw std::invalid_argument("check_inexact_chain: slack must be nonnegative");
  const double sigma = noise_sigma(noise);
  ChainCheckReport out;
  out.delta_estimate = estimate_delta(S, S_prime, set, search, rng.split(0)).value;
  out.pbar = out.delta_estimate + slack;
  const ReferenceSolution reference = minimize_empirical(S_prime, set, w0, reference_steps);

  struct Row {
    double excess = 0.0;
    double max_p = 0.0;
  };
  const auto rows = run_trials<Row>(
      trials, rng.split(1),
      [&](std::size_t, RngStream& r) {
        const Trajectory traj =
            run_perturbed_psgd(S_prime, S, std::nullopt, set, w0, schedule, noise, T, r);
        return Row{S_prime.value(traj.average) - reference.value, traj.max_perturbation_norm};
      },
      exec);
  std::vector<double> excess(trials);
  for (std::size_t i = 0; i < trials; ++i) {
    excess[i] = rows[i].excess;
    out.observed_max_perturbation = std::max(out.observed_max_perturbation, rows[i].max_p);
  }
  out.excess_risk = summarize(excess, rng.seed());
  out.bound = inexact_bound(T, schedule, distance(w0, reference.minimizer), sigma,
                            set.enclosing_radius(), std::vector<double>(T, out.pbar));
  out.pass = out.observed_max_perturbation <= out.pbar &&
             out.excess_risk.mean <= out.bound.value + 3.0 * out.excess_risk.std_error;
  return out;
}

}  // namespace psgdlab
