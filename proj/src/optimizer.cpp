#include "psgdlab/optimizer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace psgdlab {

namespace {

double parse_double(const std::string& text, const char* what) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw std::invalid_argument(std::string("schedule: bad ") + what + " '" + text + "'");
  }
  return value;
}

std::string shortest(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  (void)ec;
  return std::string(buf, ptr);
}

struct RunningAverage {
  Vector average;
  double sum = 0.0;
  double sum_sq = 0.0;

  explicit RunningAverage(std::size_t d) : average(d) {}

  void add(double alpha, const Vector& w) {
    sum += alpha;
    sum_sq += alpha * alpha;
    const double weight = alpha / sum;
    for (std::size_t k = 0; k < w.size(); ++k) average[k] += weight * (w[k] - average[k]);
  }
};

void check_run_inputs(const EmpiricalObjective& objective, const ConvexSet& set, const Vector& w0,
                      const StepSchedule& schedule) {
  if (w0.size() != objective.dim() || set.dim() != objective.dim()) {
    throw std::invalid_argument("run_psgd: dimension mismatch");
  }
  if (!set.contains(w0)) throw std::invalid_argument("run_psgd: w0 must lie in the feasible set");
  schedule.validate_for(objective.model().smoothness());
}

// Writes grad + eps_t into `direction`.
void noisy_gradient(const EmpiricalObjective& objective, const Vector& w, const NoiseModel& noise,
                    RngStream& rng, Vector& direction) {
  switch (noise.kind) {
    case NoiseKind::none:
      objective.value_and_grad(w, direction);
      return;
    case NoiseKind::isotropic_gaussian: {
      objective.value_and_grad(w, direction);
      if (noise.sigma == 0.0) return;
      const double scale = noise.sigma / std::sqrt(static_cast<double>(w.size()));
      for (std::size_t k = 0; k < w.size(); ++k) direction[k] += scale * rng.normal();
      return;
    }
    case NoiseKind::minibatch: {
      std::fill(direction.begin(), direction.end(), 0.0);
      const Dataset& S = objective.dataset();
      const double scale = 1.0 / static_cast<double>(noise.batch);
      for (std::size_t j = 0; j < noise.batch; ++j) {
        accumulate_loss_grad(objective.model(), w, S[rng.uniform_index(S.size())], scale,
                             direction);
      }
      return;
    }
  }
}

// Hook(t, w_t, alpha_t, next) may adjust the unprojected next iterate.
template <class Hook>
std::vector<Trajectory> run_core(const EmpiricalObjective& objective, const ConvexSet& set,
                                 const Vector& w0, const StepSchedule& schedule,
                                 const NoiseModel& noise,
                                 const std::vector<std::size_t>& checkpoints, RngStream& rng,
                                 bool record_history, Hook&& hook) {
  check_run_inputs(objective, set, w0, schedule);
  if (checkpoints.empty() || checkpoints.front() == 0) {
    throw std::invalid_argument("run_psgd: T must be at least 1");
  }
  for (std::size_t k = 1; k < checkpoints.size(); ++k) {
    if (checkpoints[k] <= checkpoints[k - 1]) {
      throw std::invalid_argument("run_psgd: checkpoints must be strictly increasing");
    }
  }

  std::vector<Trajectory> out;
  out.reserve(checkpoints.size());
  const std::size_t d = w0.size();
  Vector w = w0;
  Vector direction(d);
  RunningAverage avg(d);
  std::vector<Vector> history;
  double max_p = 0.0;
  std::size_t next_checkpoint = 0;

  for (std::size_t t = 0; t < checkpoints.back(); ++t) {
    const double alpha = schedule(t);
    noisy_gradient(objective, w, noise, rng, direction);
    Vector next = w;
    axpy(-alpha, direction, next);
    max_p = std::max(max_p, hook(t, w, alpha, next));
    set.project_in_place(next);
    next.require_finite("PSGD iterate");
    w = std::move(next);
    avg.add(alpha, w);
    if (record_history) history.push_back(w);

    if (t + 1 == checkpoints[next_checkpoint]) {
      Trajectory traj;
      traj.final_iterate = w;
      traj.average = avg.average;
      traj.sum_alpha = avg.sum;
      traj.sum_alpha_sq = avg.sum_sq;
      traj.steps = t + 1;
      traj.seed = rng.seed();
      traj.max_perturbation_norm = max_p;
      if (record_history) traj.history = history;
      out.push_back(std::move(traj));
      ++next_checkpoint;
    }
  }
  return out;
}

constexpr auto no_hook = [](std::size_t, const Vector&, double, Vector&) { return 0.0; };

}  // namespace

StepSchedule::StepSchedule(ScheduleKind kind, double c, double cap) : kind_(kind), c_(c), cap_(cap) {
  if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("StepSchedule: c must be positive");
  if (!(cap > 0.0)) throw std::invalid_argument("StepSchedule: cap must be positive");
}

StepSchedule StepSchedule::capped_for(ScheduleKind kind, double c, double smoothness) {
  if (!(smoothness > 0.0)) throw std::invalid_argument("StepSchedule: smoothness must be positive");
  return {kind, c, 1.0 / smoothness};
}

const char* to_string(ScheduleKind kind) noexcept {
  switch (kind) {
    case ScheduleKind::constant: return "constant";
    case ScheduleKind::inverse_sqrt: return "inverse_sqrt";
    case ScheduleKind::inverse_t: return "inverse_t";
  }
  return "?";
}

StepSchedule StepSchedule::parse(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream in(spec);
  for (std::string part; std::getline(in, part, ':');) parts.push_back(part);
  if (parts.empty() || parts.size() > 3) {
    throw std::invalid_argument("schedule: expected kind[:c[:cap]], got '" + spec + "'");
  }
  ScheduleKind kind;
  if (parts[0] == "constant") kind = ScheduleKind::constant;
  else if (parts[0] == "inverse_sqrt") kind = ScheduleKind::inverse_sqrt;
  else if (parts[0] == "inverse_t") kind = ScheduleKind::inverse_t;
  else throw std::invalid_argument("schedule: unknown kind '" + parts[0] + "'");
  const double c = parts.size() > 1 ? parse_double(parts[1], "c") : 1.0;
  if (parts.size() > 2 && parts[2] != "inf") return {kind, c, parse_double(parts[2], "cap")};
  return {kind, c};
}

std::string StepSchedule::to_string() const {
  std::string s = std::string(psgdlab::to_string(kind_)) + ":" + shortest(c_);
  if (std::isfinite(cap_)) s += ":" + shortest(cap_);
  return s;
}

double StepSchedule::operator()(std::size_t t) const noexcept {
  const double k = static_cast<double>(t) + 1.0;
  double alpha = c_;
  switch (kind_) {
    case ScheduleKind::constant: break;
    case ScheduleKind::inverse_sqrt: alpha = c_ / std::sqrt(k); break;
    case ScheduleKind::inverse_t: alpha = c_ / k; break;
  }
  return std::min(alpha, cap_);
}

double StepSchedule::max_step() const noexcept { return std::min(c_, cap_); }

StepSchedule::Sums StepSchedule::sums(std::size_t T) const {
  Sums s;
  for (std::size_t t = 0; t < T; ++t) {
    const double a = (*this)(t);
    s.sum += a;
    s.sum_sq += a * a;
  }
  return s;
}

void StepSchedule::validate_for(double smoothness) const {
  if (!(smoothness > 0.0)) throw std::invalid_argument("StepSchedule: smoothness must be positive");
  if (max_step() * smoothness > 1.0 + 1e-12) {
    throw std::invalid_argument("StepSchedule: largest step " + shortest(max_step()) +
                                " exceeds 1/L = " + shortest(1.0 / smoothness));
  }
}

NoiseModel NoiseModel::isotropic_gaussian(double sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("NoiseModel: sigma must be finite and nonnegative");
  }
  return {NoiseKind::isotropic_gaussian, sigma, 1};
}

NoiseModel NoiseModel::minibatch(std::size_t batch) {
  if (batch == 0) throw std::invalid_argument("NoiseModel: batch must be at least 1");
  return {NoiseKind::minibatch, 0.0, batch};
}

const char* to_string(NoiseKind kind) noexcept {
  switch (kind) {
    case NoiseKind::none: return "none";
    case NoiseKind::isotropic_gaussian: return "gaussian";
    case NoiseKind::minibatch: return "minibatch";
  }
  return "?";
}

PerturbationSpec PerturbationSpec::constant(Vector value) {
  const double norm = euclidean_norm(value);
  return {[value = std::move(value)](std::size_t, const Vector&) { return value; },
          [norm](std::size_t) { return norm; }};
}

PerturbationSpec PerturbationSpec::zero(std::size_t dim) { return constant(Vector(dim)); }

Vector psgd_step(const EmpiricalObjective& objective, const ConvexSet& set, const Vector& w,
                 double alpha, const NoiseModel& noise, RngStream& rng) {
  if (w.size() != objective.dim() || set.dim() != objective.dim()) {
    throw std::invalid_argument("psgd_step: dimension mismatch");
  }
  if (!(alpha > 0.0)) throw std::invalid_argument("psgd_step: alpha must be positive");
  Vector direction(w.size());
  noisy_gradient(objective, w, noise, rng, direction);
  Vector next = w;
  axpy(-alpha, direction, next);
  set.project_in_place(next);
  next.require_finite("PSGD iterate");
  return next;
}

Trajectory run_psgd(const EmpiricalObjective& objective, const ConvexSet& set, const Vector& w0,
                    const StepSchedule& schedule, const NoiseModel& noise, std::size_t T,
                    RngStream& rng, RunOptions options) {
  return std::move(run_core(objective, set, w0, schedule, noise, {T}, rng,
                            options.record_history, no_hook)
                       .front());
}

Trajectory run_psgd(const LossModel& model, const Dataset& S, const ConvexSet& set,
                    const Vector& w0, const StepSchedule& schedule, const NoiseModel& noise,
                    std::size_t T, RngStream& rng, RunOptions options) {
  const EmpiricalObjective objective(model, S);
  return run_psgd(objective, set, w0, schedule, noise, T, rng, options);
}

std::vector<Trajectory> run_psgd_checkpoints(const EmpiricalObjective& objective,
                                             const ConvexSet& set, const Vector& w0,
                                             const StepSchedule& schedule,
                                             const NoiseModel& noise,
                                             const std::vector<std::size_t>& checkpoints,
                                             RngStream& rng) {
  return run_core(objective, set, w0, schedule, noise, checkpoints, rng, false, no_hook);
}

Trajectory run_perturbed_psgd(const EmpiricalObjective& evaluated,
                              const PerturbationSpec& perturbation, const ConvexSet& set,
                              const Vector& w0, const StepSchedule& schedule,
                              const NoiseModel& noise, std::size_t T, RngStream& rng) {
  if (!perturbation.generator || !perturbation.bound) {
    throw std::invalid_argument("run_perturbed_psgd: perturbation needs a generator and a bound");
  }
  auto hook = [&](std::size_t t, const Vector& w, double alpha, Vector& next) {
    const Vector p = perturbation.generator(t, w);
    require_same_dim(p, w, "run_perturbed_psgd");
    const double norm = euclidean_norm(p);
    const double bound = perturbation.bound(t);
    if (norm > bound) {
      throw BoundViolation("run_perturbed_psgd: |p_t| = " + shortest(norm) + " exceeds bound " +
                           shortest(bound) + " at t = " + std::to_string(t));
    }
    axpy(-alpha, p, next);
    return norm;
  };
  return std::move(run_core(evaluated, set, w0, schedule, noise, {T}, rng, false, hook).front());
}

Trajectory run_perturbed_psgd(const EmpiricalObjective& evaluated,
                              const EmpiricalObjective& driver, std::optional<double> bound,
                              const ConvexSet& set, const Vector& w0,
                              const StepSchedule& schedule, const NoiseModel& noise,
                              std::size_t T, RngStream& rng) {
  if (evaluated.dim() != driver.dim()) {
    throw std::invalid_argument("run_perturbed_psgd: datasets differ in dimension");
  }
  Vector g_driver(driver.dim()), g_eval(driver.dim());
  auto hook = [&](std::size_t t, const Vector& w, double, Vector&) {
    driver.value_and_grad(w, g_driver);
    evaluated.value_and_grad(w, g_eval);
    const double norm = distance(g_driver, g_eval);
    if (bound && norm > *bound) {
      throw BoundViolation("run_perturbed_psgd: |p_t| = " + shortest(norm) + " exceeds bound " +
                           shortest(*bound) + " at t = " + std::to_string(t));
    }
    return norm;
  };
  return std::move(run_core(driver, set, w0, schedule, noise, {T}, rng, false, hook).front());
}

Vector sample_gradient_noise(const EmpiricalObjective& objective, const Vector& w,
                             const NoiseModel& noise, RngStream& rng) {
  if (w.size() != objective.dim()) throw std::invalid_argument("sample_gradient_noise: dimension mismatch");
  Vector noisy(w.size());
  noisy_gradient(objective, w, noise, rng, noisy);
  noisy -= objective.grad(w);
  return noisy;
}

ReferenceSolution minimize_empirical(const EmpiricalObjective& objective, const ConvexSet& set,
                                     const Vector& w0, std::size_t max_steps, double tolerance) {
  if (w0.size() != objective.dim() || set.dim() != objective.dim()) {
    throw std::invalid_argument("minimize_empirical: dimension mismatch");
  }
  const double alpha = 1.0 / objective.model().smoothness();
  Vector w = project(set, w0);
  Vector grad(w.size());
  ReferenceSolution best{w, objective.value(w), 0};
  std::size_t t = 0;
  while (t < max_steps) {
    ++t;
    objective.value_and_grad(w, grad);
    Vector next = w;
    axpy(-alpha, grad, next);
    set.project_in_place(next);
    const double moved = distance(next, w);
    w = std::move(next);
    const double value = objective.value(w);
    if (value < best.value) {
      best.minimizer = w;
      best.value = value;
    }
    if (moved <= tolerance) break;
  }
  best.steps = t;
  return best;
}

}  // namespace psgdlab
