#pragma once

#include "psgdlab/numerics.hpp"
#include "psgdlab/stats.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

namespace psgdlab {

struct LabeledPoint {
  Vector features;
  int label = 1;  // +1 or -1
};

struct SignVector {
  Vector signs;  // every coordinate +1 or -1
};

using DataPoint = std::variant<LabeledPoint, SignVector>;

enum class DataKind { labeled, sign_vector };

DataPoint make_labeled(Vector features, int label);
DataPoint make_sign_vector(Vector signs);

DataKind kind_of(const DataPoint& z) noexcept;
std::size_t dim_of(const DataPoint& z) noexcept;

/// Non-empty, homogeneous (same kind, same dimension) collection of points.
class Dataset {
 public:
  explicit Dataset(std::vector<DataPoint> points);

  std::size_t size() const noexcept { return points_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  DataKind kind() const noexcept { return kind_; }

  const DataPoint& operator[](std::size_t i) const noexcept { return points_[i]; }
  std::span<const DataPoint> points() const noexcept { return points_; }
  auto begin() const noexcept { return points_.begin(); }
  auto end() const noexcept { return points_.end(); }

  friend bool operator==(const Dataset& a, const Dataset& b);

 private:
  std::vector<DataPoint> points_;
  std::size_t dim_ = 0;
  DataKind kind_ = DataKind::labeled;
};

enum class LossFamily {
  one_sided_quadratic,        // 0.5 (margin - y w.x)_+^2
  counterexample,             // sum_k 0.5 (z_k w_k)_+^2
  counterexample_perturbed,   // eps z.w + sum_k 0.5 (z_k w_k)_+^2
  quadratic_strongly_convex,  // 0.5 (w.x - y)^2 + 0.5 mu |w|^2
};

const char* to_string(LossFamily family) noexcept;

/// A loss family f(w; z) with its smoothness constant and, when known, a
/// gradient bound over the working set and the minimizer-variance bound.
class LossModel {
 public:
  /// `feature_norm_bound` bounds |x| over the data; L = feature_norm_bound^2.
  static LossModel one_sided_quadratic(double feature_norm_bound, double working_radius,
                                       double margin = 1.0);
  static LossModel counterexample(double working_radius = 1.0);
  /// The gradient bound needs the dimension; it is left unset without one.
  static LossModel counterexample_perturbed(double epsilon = 1e-3,
                                            std::optional<std::size_t> dim = std::nullopt,
                                            double working_radius = 1.0);
  static LossModel quadratic_strongly_convex(double mu, double feature_norm_bound,
                                             double working_radius, double label_bound = 1.0);

  LossFamily family() const noexcept { return family_; }
  DataKind data_kind() const noexcept;
  double smoothness() const noexcept { return smoothness_; }
  std::optional<double> gradient_bound() const noexcept { return gradient_bound_; }
  std::optional<double> sigma_star() const noexcept { return sigma_star_; }
  double margin() const noexcept { return margin_; }
  double epsilon() const noexcept { return epsilon_; }
  double mu() const noexcept { return mu_; }

  LossModel with_sigma_star(double sigma_star) const;

 private:
  LossModel() = default;

  LossFamily family_ = LossFamily::counterexample;
  double smoothness_ = 1.0;
  std::optional<double> gradient_bound_;
  std::optional<double> sigma_star_;
  double margin_ = 1.0;
  double epsilon_ = 0.0;
  double mu_ = 0.0;
};

/// f(w; z) and its gradient.
std::pair<double, Vector> eval_and_grad(const LossModel& model, const Vector& w,
                                        const DataPoint& z);

/// Adds `scale * grad f(w; z)` into `grad` and returns f(w; z). Allocation-free.
double accumulate_loss_grad(const LossModel& model, const Vector& w, const DataPoint& z,
                            double scale, Vector& grad);

double loss_value(const LossModel& model, const Vector& w, const DataPoint& z);

double empirical_loss(const LossModel& model, const Vector& w, const Dataset& S);
Vector empirical_grad(const LossModel& model, const Vector& w, const Dataset& S);

/// Empirical loss and gradient bound to one dataset. For the counterexample
/// families the loss depends on S only through per-column sign frequencies,
/// which are precomputed so each evaluation costs O(d) instead of O(nd).
/// Labeled data is copied into a contiguous matrix.
class EmpiricalObjective {
 public:
  EmpiricalObjective(const LossModel& model, const Dataset& S);

  const LossModel& model() const noexcept { return model_; }
  const Dataset& dataset() const noexcept { return *dataset_; }
  std::size_t dim() const noexcept { return dataset_->dim(); }

  double value(const Vector& w) const;
  /// Overwrites `grad` with the gradient and returns the loss.
  double value_and_grad(const Vector& w, Vector& grad) const;
  Vector grad(const Vector& w) const;

 private:
  double labeled_value_and_grad(const Vector& w, Vector* grad) const;

  LossModel model_;
  const Dataset* dataset_;
  bool column_summary_ = false;
  std::vector<double> features_;  // row-major n x d, labeled families only
  std::vector<double> labels_;
  std::vector<double> plus_fraction_;
  std::vector<double> minus_fraction_;
  std::vector<double> mean_sign_;
};

using Sampler = std::function<DataPoint(RngStream&)>;

Dataset sample_dataset(const Sampler& sampler, std::size_t n, RngStream& rng);
Dataset sample_rademacher_dataset(std::size_t n, std::size_t d, RngStream& rng);

/// Sign vectors with i.i.d. uniform +-1 entries.
Sampler rademacher_sampler(std::size_t d);

/// x uniform in the unit ball, y = sign(direction . x) flipped with
/// probability `flip_probability`.
Sampler noisy_halfspace_sampler(Vector direction, double flip_probability);

struct EventI {
  bool holds = false;
  std::vector<std::size_t> plus_cols;
  std::vector<std::size_t> minus_cols;
};

/// Columns where every point is +1 (resp. -1). Holds when both are non-empty.
EventI detect_event_I(const Dataset& S);

/// Unit-norm zero-loss minimizer: -1/sqrt(m) on all-plus columns, +1/sqrt(m)
/// on all-minus columns, 0 elsewhere. Throws std::domain_error without event I.
Vector counterexample_minimizer(const Dataset& S);

/// Population risk of the counterexample loss under uniform sign vectors: |w|^2 / 4.
double counterexample_population_risk(const Vector& w) noexcept;

struct SigmaStarEstimate {
  Estimate variance;       // sample variance of |grad f(w*; z)|, with standard error
  double sigma_star = 0.0; // sqrt(variance.mean)
  double upper = 0.0;      // sqrt(variance.mean + 3 * variance.std_error)
};

SigmaStarEstimate estimate_sigma_star(const LossModel& model, const Vector& population_minimizer,
                                      const Sampler& sampler, std::size_t trials, RngStream& rng);

}  // namespace psgdlab
