#pragma once

#include "psgdlab/numerics.hpp"
#include "psgdlab/parallel.hpp"
#include "psgdlab/stats.hpp"

#include <functional>
#include <optional>
#include <variant>

namespace psgdlab {

struct Ball {
  Vector center;
  double radius = 1.0;
};

struct Box {
  Vector lower;
  Vector upper;
};

/// Compact convex feasible set contained in the origin-centred ball of
/// radius `enclosing_radius()`.
class ConvexSet {
 public:
  /// Origin-centred ball.
  static ConvexSet ball(std::size_t dim, double radius);
  /// `enclosing_radius` defaults to |center| + radius and may only be looser.
  static ConvexSet ball(Vector center, double radius,
                        std::optional<double> enclosing_radius = std::nullopt);
  /// `enclosing_radius` defaults to the norm of the farthest corner.
  static ConvexSet box(Vector lower, Vector upper,
                       std::optional<double> enclosing_radius = std::nullopt);

  std::size_t dim() const noexcept;
  double enclosing_radius() const noexcept { return enclosing_radius_; }
  const std::variant<Ball, Box>& shape() const noexcept { return shape_; }

  /// Euclidean projection, written into `w`.
  void project_in_place(Vector& w) const;
  bool contains(const Vector& w, double tolerance = 1e-10) const;
  /// Distance from `w` to the set.
  double distance_to(const Vector& w) const;
  /// Uniform draw from the set.
  Vector sample_uniform(RngStream& rng) const;

 private:
  ConvexSet(std::variant<Ball, Box> shape, double enclosing_radius)
      : shape_(std::move(shape)), enclosing_radius_(enclosing_radius) {}

  std::variant<Ball, Box> shape_;
  double enclosing_radius_;
};

/// argmin over the set of |u - w|.
Vector project(const ConvexSet& set, const Vector& w);

using VectorSampler = std::function<Vector(RngStream&)>;

/// Isotropic standard normal vectors in dimension d.
VectorSampler standard_gaussian_sampler(std::size_t d);

struct ProjectionLemmaReport {
  Estimate inner_product;  // per-trial N . P(v - alpha N)
  Estimate noise_energy;   // per-trial |N|^2
  double lhs = 0.0;        // |mean inner product|
  double rhs = 0.0;        // alpha * mean |N|^2
  double tolerance = 0.0;  // 3 * combined standard error of lhs and rhs
  bool pass = false;       // lhs <= rhs + tolerance
};

/// Monte Carlo check of |E[N . P(v - alpha N)]| <= alpha E|N|^2 for a
/// zero-mean noise sampler. Throws std::invalid_argument if v is outside the set.
ProjectionLemmaReport check_projection_lemma(const ConvexSet& set, const Vector& v,
                                             const VectorSampler& noise, double alpha,
                                             std::size_t trials, const RngStream& rng,
                                             Execution exec = Execution::parallel);

}  // namespace psgdlab
