#include "psgdlab/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace psgdlab {

namespace {

const DataPoint& check_kind(const LossModel& model, const DataPoint& z) {
  if (kind_of(z) != model.data_kind()) {
    throw std::invalid_argument(std::string("loss ") + to_string(model.family()) +
                                ": data point kind does not match the loss family");
  }
  return z;
}

void check_dims(const Vector& w, const DataPoint& z) {
  if (w.size() != dim_of(z)) throw std::invalid_argument("loss: dimension mismatch");
}

// 0.5 * x * max(x, 0)
double half_positive_square(double x) noexcept { return x > 0.0 ? 0.5 * x * x : 0.0; }

}  // namespace

DataPoint make_labeled(Vector features, int label) {
  if (label != 1 && label != -1) throw std::invalid_argument("labeled point: label must be +1 or -1");
  return LabeledPoint{std::move(features), label};
}

DataPoint make_sign_vector(Vector signs) {
  for (double v : signs) {
    if (v != 1.0 && v != -1.0) throw std::invalid_argument("sign vector: entries must be +1 or -1");
  }
  return SignVector{std::move(signs)};
}

DataKind kind_of(const DataPoint& z) noexcept {
  return std::holds_alternative<LabeledPoint>(z) ? DataKind::labeled : DataKind::sign_vector;
}

std::size_t dim_of(const DataPoint& z) noexcept {
  return std::visit(
      [](const auto& p) -> std::size_t {
        if constexpr (std::is_same_v<std::decay_t<decltype(p)>, LabeledPoint>) {
          return p.features.size();
        } else {
          return p.signs.size();
        }
      },
      z);
}

Dataset::Dataset(std::vector<DataPoint> points) : points_(std::move(points)) {
  if (points_.empty()) throw std::invalid_argument("Dataset: must contain at least one point");
  kind_ = kind_of(points_.front());
  dim_ = dim_of(points_.front());
  if (dim_ == 0) throw std::invalid_argument("Dataset: points must have positive dimension");
  for (const auto& z : points_) {
    if (kind_of(z) != kind_ || dim_of(z) != dim_) {
      throw std::invalid_argument("Dataset: points must share kind and dimension");
    }
  }
}

bool operator==(const Dataset& a, const Dataset& b) {
  if (a.size() != b.size() || a.kind() != b.kind() || a.dim() != b.dim()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.kind() == DataKind::labeled) {
      const auto& p = std::get<LabeledPoint>(a[i]);
      const auto& q = std::get<LabeledPoint>(b[i]);
      if (p.label != q.label || p.features != q.features) return false;
    } else if (std::get<SignVector>(a[i]).signs != std::get<SignVector>(b[i]).signs) {
      return false;
    }
  }
  return true;
}

const char* to_string(LossFamily family) noexcept {
  switch (family) {
    case LossFamily::one_sided_quadratic: return "one_sided";
    case LossFamily::counterexample: return "counterexample";
    case LossFamily::counterexample_perturbed: return "counterexample_perturbed";
    case LossFamily::quadratic_strongly_convex: return "strongly_convex";
  }
  return "unknown";
}

LossModel LossModel::one_sided_quadratic(double feature_norm_bound, double working_radius,
                                         double margin) {
  if (!(feature_norm_bound > 0.0) || !(working_radius > 0.0) || !std::isfinite(margin)) {
    throw std::invalid_argument("one_sided_quadratic: need positive bounds and finite margin");
  }
  LossModel m;
  m.family_ = LossFamily::one_sided_quadratic;
  m.margin_ = margin;
  m.smoothness_ = feature_norm_bound * feature_norm_bound;
  m.gradient_bound_ =
      std::max(0.0, margin + working_radius * feature_norm_bound) * feature_norm_bound;
  return m;
}

LossModel LossModel::counterexample(double working_radius) {
  if (!(working_radius > 0.0)) throw std::invalid_argument("counterexample: radius must be positive");
  LossModel m;
  m.family_ = LossFamily::counterexample;
  m.smoothness_ = 1.0;
  m.gradient_bound_ = working_radius;
  // population risk |w|^2/4 is minimized at 0, where every gradient vanishes
  m.sigma_star_ = 0.0;
  return m;
}

LossModel LossModel::counterexample_perturbed(double epsilon, std::optional<std::size_t> dim,
                                              double working_radius) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("counterexample_perturbed: epsilon must be positive");
  if (!(working_radius > 0.0)) {
    throw std::invalid_argument("counterexample_perturbed: radius must be positive");
  }
  LossModel m;
  m.family_ = LossFamily::counterexample_perturbed;
  m.epsilon_ = epsilon;
  m.smoothness_ = 1.0;
  if (dim) m.gradient_bound_ = working_radius + epsilon * std::sqrt(static_cast<double>(*dim));
  // the linear term has zero mean, so w* = 0 and |grad f(0; z)| = eps sqrt(d) is constant
  m.sigma_star_ = 0.0;
  return m;
}

LossModel LossModel::quadratic_strongly_convex(double mu, double feature_norm_bound,
                                               double working_radius, double label_bound) {
  if (!(mu > 0.0)) throw std::invalid_argument("quadratic_strongly_convex: mu must be positive");
  if (!(feature_norm_bound >= 0.0) || !(working_radius > 0.0) || !(label_bound >= 0.0)) {
    throw std::invalid_argument("quadratic_strongly_convex: invalid bounds");
  }
  LossModel m;
  m.family_ = LossFamily::quadratic_strongly_convex;
  m.mu_ = mu;
  m.smoothness_ = feature_norm_bound * feature_norm_bound + mu;
  m.gradient_bound_ =
      (working_radius * feature_norm_bound + label_bound) * feature_norm_bound + mu * working_radius;
  return m;
}

DataKind LossModel::data_kind() const noexcept {
  switch (family_) {
    case LossFamily::one_sided_quadratic:
    case LossFamily::quadratic_strongly_convex: return DataKind::labeled;
    default: return DataKind::sign_vector;
  }
}

LossModel LossModel::with_sigma_star(double sigma_star) const {
  if (!(sigma_star >= 0.0) || !std::isfinite(sigma_star)) {
    throw std::invalid_argument("with_sigma_star: must be finite and nonnegative");
  }
  LossModel m = *this;
  m.sigma_star_ = sigma_star;
  return m;
}

double accumulate_loss_grad(const LossModel& model, const Vector& w, const DataPoint& z,
                            double scale, Vector& grad) {
  check_kind(model, z);
  check_dims(w, z);
  switch (model.family()) {
    case LossFamily::one_sided_quadratic: {
      const auto& p = std::get<LabeledPoint>(z);
      const double y = p.label;
      const double slack = model.margin() - y * dot(w, p.features);
      // kink at slack == 0 takes the flat branch
      if (slack <= 0.0) return 0.0;
      axpy(-scale * slack * y, p.features, grad);
      return 0.5 * slack * slack;
    }
    case LossFamily::quadratic_strongly_convex: {
      const auto& p = std::get<LabeledPoint>(z);
      const double residual = dot(w, p.features) - p.label;
      axpy(scale * residual, p.features, grad);
      axpy(scale * model.mu(), w, grad);
      return 0.5 * residual * residual + 0.5 * model.mu() * squared_norm(w);
    }
    case LossFamily::counterexample:
    case LossFamily::counterexample_perturbed: {
      const auto& s = std::get<SignVector>(z).signs;
      const double eps = model.epsilon();
      double value = 0.0;
      for (std::size_t k = 0; k < w.size(); ++k) {
        const double product = s[k] * w[k];
        if (product > 0.0) {
          value += 0.5 * product * product;
          grad[k] += scale * w[k];
        }
        if (eps != 0.0) {
          value += eps * product;
          grad[k] += scale * eps * s[k];
        }
      }
      return value;
    }
  }
  return 0.0;
}

std::pair<double, Vector> eval_and_grad(const LossModel& model, const Vector& w,
                                        const DataPoint& z) {
  Vector grad(w.size());
  const double value = accumulate_loss_grad(model, w, z, 1.0, grad);
  return {value, std::move(grad)};
}

double loss_value(const LossModel& model, const Vector& w, const DataPoint& z) {
  check_kind(model, z);
  check_dims(w, z);
  switch (model.family()) {
    case LossFamily::one_sided_quadratic: {
      const auto& p = std::get<LabeledPoint>(z);
      const double slack = model.margin() - p.label * dot(w, p.features);
      return slack > 0.0 ? 0.5 * slack * slack : 0.0;
    }
    case LossFamily::quadratic_strongly_convex: {
      const auto& p = std::get<LabeledPoint>(z);
      const double residual = dot(w, p.features) - p.label;
      return 0.5 * residual * residual + 0.5 * model.mu() * squared_norm(w);
    }
    case LossFamily::counterexample:
    case LossFamily::counterexample_perturbed: {
      const auto& s = std::get<SignVector>(z).signs;
      double value = 0.0;
      for (std::size_t k = 0; k < w.size(); ++k) {
        const double product = s[k] * w[k];
        value += half_positive_square(product) + model.epsilon() * product;
      }
      return value;
    }
  }
  return 0.0;
}

double empirical_loss(const LossModel& model, const Vector& w, const Dataset& S) {
  double total = 0.0;
  for (const auto& z : S) total += loss_value(model, w, z);
  return total / static_cast<double>(S.size());
}

Vector empirical_grad(const LossModel& model, const Vector& w, const Dataset& S) {
  Vector grad(w.size());
  const double scale = 1.0 / static_cast<double>(S.size());
  for (const auto& z : S) accumulate_loss_grad(model, w, z, scale, grad);
  return grad;
}

EmpiricalObjective::EmpiricalObjective(const LossModel& model, const Dataset& S)
    : model_(model), dataset_(&S) {
  if (S.kind() != model.data_kind()) {
    throw std::invalid_argument("EmpiricalObjective: dataset kind does not match the loss family");
  }
  if (model.data_kind() == DataKind::labeled) {
    features_.reserve(S.size() * S.dim());
    labels_.reserve(S.size());
    for (const auto& z : S) {
      const auto& p = std::get<LabeledPoint>(z);
      features_.insert(features_.end(), p.features.begin(), p.features.end());
      labels_.push_back(p.label);
    }
    return;
  }
  column_summary_ = true;
  const std::size_t d = S.dim();
  plus_fraction_.assign(d, 0.0);
  minus_fraction_.assign(d, 0.0);
  mean_sign_.assign(d, 0.0);
  std::vector<std::size_t> plus_count(d, 0);
  for (const auto& z : S) {
    const auto& s = std::get<SignVector>(z).signs;
    for (std::size_t k = 0; k < d; ++k) plus_count[k] += s[k] > 0.0 ? 1 : 0;
  }
  const auto n = static_cast<double>(S.size());
  for (std::size_t k = 0; k < d; ++k) {
    const auto plus = static_cast<double>(plus_count[k]);
    plus_fraction_[k] = plus / n;
    minus_fraction_[k] = (n - plus) / n;
    mean_sign_[k] = (2.0 * plus - n) / n;
  }
}

double EmpiricalObjective::labeled_value_and_grad(const Vector& w, Vector* grad) const {
  const std::size_t d = dim();
  const std::size_t n = labels_.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  const bool one_sided = model_.family() == LossFamily::one_sided_quadratic;
  if (grad) std::fill(grad->begin(), grad->end(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* x = features_.data() + i * d;
    double margin = 0.0;
    for (std::size_t k = 0; k < d; ++k) margin += w[k] * x[k];
    double coef = 0.0;
    if (one_sided) {
      const double slack = model_.margin() - labels_[i] * margin;
      if (slack <= 0.0) continue;
      total += 0.5 * slack * slack;
      coef = -slack * labels_[i];
    } else {
      const double residual = margin - labels_[i];
      total += 0.5 * residual * residual;
      coef = residual;
    }
    if (grad) {
      coef *= inv_n;
      for (std::size_t k = 0; k < d; ++k) (*grad)[k] += coef * x[k];
    }
  }
  double value = total * inv_n;
  if (!one_sided) {
    value += 0.5 * model_.mu() * squared_norm(w);
    if (grad) axpy(model_.mu(), w, *grad);
  }
  return value;
}

double EmpiricalObjective::value(const Vector& w) const {
  if (w.size() != dim()) throw std::invalid_argument("EmpiricalObjective: dimension mismatch");
  if (!column_summary_) return labeled_value_and_grad(w, nullptr);
  const double eps = model_.epsilon();
  double value = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double active = w[k] > 0.0 ? plus_fraction_[k] : (w[k] < 0.0 ? minus_fraction_[k] : 0.0);
    value += 0.5 * active * w[k] * w[k] + eps * mean_sign_[k] * w[k];
  }
  return value;
}

double EmpiricalObjective::value_and_grad(const Vector& w, Vector& grad) const {
  require_same_dim(w, grad, "EmpiricalObjective::value_and_grad");
  if (w.size() != dim()) throw std::invalid_argument("EmpiricalObjective: dimension mismatch");
  if (!column_summary_) return labeled_value_and_grad(w, &grad);
  const double eps = model_.epsilon();
  double value = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double active = w[k] > 0.0 ? plus_fraction_[k] : (w[k] < 0.0 ? minus_fraction_[k] : 0.0);
    value += 0.5 * active * w[k] * w[k] + eps * mean_sign_[k] * w[k];
    grad[k] = active * w[k] + eps * mean_sign_[k];
  }
  return value;
}

Vector EmpiricalObjective::grad(const Vector& w) const {
  Vector g(w.size());
  value_and_grad(w, g);
  return g;
}

Dataset sample_dataset(const Sampler& sampler, std::size_t n, RngStream& rng) {
  if (n == 0) throw std::invalid_argument("sample_dataset: n must be positive");
  std::vector<DataPoint> points;
  points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) points.push_back(sampler(rng));
  return Dataset(std::move(points));
}

Sampler rademacher_sampler(std::size_t d) {
  if (d == 0) throw std::invalid_argument("rademacher_sampler: d must be positive");
  return [d](RngStream& rng) -> DataPoint {
    Vector z(d);
    for (std::size_t k = 0; k < d; ++k) z[k] = rng.rademacher();
    return SignVector{std::move(z)};
  };
}

Dataset sample_rademacher_dataset(std::size_t n, std::size_t d, RngStream& rng) {
  return sample_dataset(rademacher_sampler(d), n, rng);
}

Sampler noisy_halfspace_sampler(Vector direction, double flip_probability) {
  if (direction.empty()) throw std::invalid_argument("noisy_halfspace_sampler: empty direction");
  if (!(flip_probability >= 0.0 && flip_probability <= 1.0)) {
    throw std::invalid_argument("noisy_halfspace_sampler: flip probability must lie in [0, 1]");
  }
  return [direction = std::move(direction), flip_probability](RngStream& rng) -> DataPoint {
    const std::size_t d = direction.size();
    Vector x = gaussian_vector(d, rng);
    const double norm = euclidean_norm(x);
    const double radius = std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
    x *= norm > 0.0 ? radius / norm : 0.0;
    int label = dot(direction, x) >= 0.0 ? 1 : -1;
    if (rng.bernoulli(flip_probability)) label = -label;
    return LabeledPoint{std::move(x), label};
  };
}

EventI detect_event_I(const Dataset& S) {
  if (S.kind() != DataKind::sign_vector) {
    throw std::invalid_argument("detect_event_I: requires a sign-vector dataset");
  }
  EventI out;
  for (std::size_t k = 0; k < S.dim(); ++k) {
    bool all_plus = true, all_minus = true;
    for (const auto& z : S) {
      const double s = std::get<SignVector>(z).signs[k];
      all_plus = all_plus && s > 0.0;
      all_minus = all_minus && s < 0.0;
    }
    if (all_plus) out.plus_cols.push_back(k);
    if (all_minus) out.minus_cols.push_back(k);
  }
  out.holds = !out.plus_cols.empty() && !out.minus_cols.empty();
  return out;
}

Vector counterexample_minimizer(const Dataset& S) {
  const EventI event = detect_event_I(S);
  if (!event.holds) throw std::domain_error("counterexample_minimizer: event I does not hold");
  const auto m = static_cast<double>(event.plus_cols.size() + event.minus_cols.size());
  const double magnitude = 1.0 / std::sqrt(m);
  Vector w(S.dim());
  for (std::size_t k : event.plus_cols) w[k] = -magnitude;
  for (std::size_t k : event.minus_cols) w[k] = magnitude;
  return w;
}

double counterexample_population_risk(const Vector& w) noexcept {
  // fma-split squares with Neumaier summation, so |w|^2 is faithfully rounded
  double sum = 0.0, carry = 0.0;
  for (double x : w) {
    const double sq = x * x;
    carry += std::fma(x, x, -sq);
    const double t = sum + sq;
    carry += std::abs(sum) >= std::abs(sq) ? (sum - t) + sq : (sq - t) + sum;
    sum = t;
  }
  return 0.25 * (sum + carry);
}

SigmaStarEstimate estimate_sigma_star(const LossModel& model, const Vector& population_minimizer,
                                      const Sampler& sampler, std::size_t trials, RngStream& rng) {
  if (trials < 2) throw std::invalid_argument("estimate_sigma_star: need at least two trials");
  std::vector<double> norms(trials);
  for (std::size_t i = 0; i < trials; ++i) {
    const DataPoint z = sampler(rng);
    norms[i] = euclidean_norm(eval_and_grad(model, population_minimizer, z).second);
  }
  const double mean = pairwise_sum(norms) / static_cast<double>(trials);
  // squared deviations rescaled so that their mean is the unbiased sample variance
  const double rescale = static_cast<double>(trials) / static_cast<double>(trials - 1);
  std::vector<double> deviations(trials);
  for (std::size_t i = 0; i < trials; ++i) {
    deviations[i] = rescale * (norms[i] - mean) * (norms[i] - mean);
  }
  SigmaStarEstimate out;
  out.variance = summarize(deviations, rng.seed());
  out.sigma_star = std::sqrt(std::max(0.0, out.variance.mean));
  out.upper = std::sqrt(std::max(0.0, out.variance.mean + 3.0 * out.variance.std_error));
  return out;
}

}  // namespace psgdlab
