#include "psgdlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace psgdlab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void check_enclosing(double tight, std::optional<double> supplied, double& out) {
  if (!supplied) {
    out = tight;
    return;
  }
  if (!std::isfinite(*supplied) || *supplied < tight * (1.0 - 1e-12)) {
    throw std::invalid_argument("ConvexSet: enclosing radius must cover the set");
  }
  out = *supplied;
}

}  // namespace

ConvexSet ConvexSet::ball(std::size_t dim, double radius) {
  if (dim == 0) throw std::invalid_argument("ConvexSet::ball: dimension must be positive");
  return ball(Vector(dim), radius);
}

ConvexSet ConvexSet::ball(Vector center, double radius, std::optional<double> enclosing_radius) {
  if (center.empty()) throw std::invalid_argument("ConvexSet::ball: dimension must be positive");
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("ConvexSet::ball: radius must be positive and finite");
  }
  double enclosing = 0.0;
  check_enclosing(euclidean_norm(center) + radius, enclosing_radius, enclosing);
  return ConvexSet(Ball{std::move(center), radius}, enclosing);
}

ConvexSet ConvexSet::box(Vector lower, Vector upper, std::optional<double> enclosing_radius) {
  require_same_dim(lower, upper, "ConvexSet::box");
  if (lower.empty()) throw std::invalid_argument("ConvexSet::box: dimension must be positive");
  double corner = 0.0;
  for (std::size_t k = 0; k < lower.size(); ++k) {
    if (lower[k] > upper[k]) throw std::invalid_argument("ConvexSet::box: lower must not exceed upper");
    const double far = std::max(std::abs(lower[k]), std::abs(upper[k]));
    corner += far * far;
  }
  double enclosing = 0.0;
  check_enclosing(std::sqrt(corner), enclosing_radius, enclosing);
  return ConvexSet(Box{std::move(lower), std::move(upper)}, enclosing);
}

std::size_t ConvexSet::dim() const noexcept {
  return std::visit(overloaded{[](const Ball& b) { return b.center.size(); },
                               [](const Box& b) { return b.lower.size(); }},
                    shape_);
}

void ConvexSet::project_in_place(Vector& w) const {
  if (w.size() != dim()) throw std::invalid_argument("project: dimension mismatch");
  std::visit(overloaded{[&](const Ball& b) {
                          const double dist = distance(w, b.center);
                          if (dist <= b.radius) return;
                          const double scale = b.radius / dist;
                          for (std::size_t k = 0; k < w.size(); ++k) {
                            w[k] = b.center[k] + (w[k] - b.center[k]) * scale;
                          }
                        },
                        [&](const Box& b) {
                          for (std::size_t k = 0; k < w.size(); ++k) {
                            w[k] = std::clamp(w[k], b.lower[k], b.upper[k]);
                          }
                        }},
             shape_);
}

bool ConvexSet::contains(const Vector& w, double tolerance) const {
  return distance_to(w) <= tolerance;
}

double ConvexSet::distance_to(const Vector& w) const {
  return distance(w, project(*this, w));
}

Vector ConvexSet::sample_uniform(RngStream& rng) const {
  return std::visit(overloaded{[&](const Ball& b) {
                                 const std::size_t d = b.center.size();
                                 Vector u = gaussian_vector(d, rng);
                                 const double norm = euclidean_norm(u);
                                 const double r = b.radius *
                                                  std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
                                 u *= norm > 0.0 ? r / norm : 0.0;
                                 u += b.center;
                                 return u;
                               },
                               [&](const Box& b) {
                                 Vector u(b.lower.size());
                                 for (std::size_t k = 0; k < u.size(); ++k) {
                                   u[k] = rng.uniform(b.lower[k], b.upper[k]);
                                 }
                                 return u;
                               }},
                    shape_);
}

Vector project(const ConvexSet& set, const Vector& w) {
  Vector out = w;
  set.project_in_place(out);
  return out;
}

VectorSampler standard_gaussian_sampler(std::size_t d) {
  if (d == 0) throw std::invalid_argument("standard_gaussian_sampler: d must be positive");
  return [d](RngStream& rng) { return gaussian_vector(d, rng); };
}

ProjectionLemmaReport check_projection_lemma(const ConvexSet& set, const Vector& v,
                                             const VectorSampler& noise, double alpha,
                                             std::size_t trials, const RngStream& rng,
                                             Execution exec) {
  if (v.size() != set.dim()) throw std::invalid_argument("check_projection_lemma: dimension mismatch");
  if (!set.contains(v)) throw std::invalid_argument("check_projection_lemma: v must lie in the set");
  if (!(alpha >= 0.0)) throw std::invalid_argument("check_projection_lemma: alpha must be nonnegative");

  struct Sample {
    double inner = 0.0;
    double energy = 0.0;
  };
  const auto samples = run_trials<Sample>(
      trials, rng,
      [&](std::size_t, RngStream& trial_rng) {
        const Vector n = noise(trial_rng);
        Vector shifted = v;
        axpy(-alpha, n, shifted);
        set.project_in_place(shifted);
        return Sample{dot(n, shifted), squared_norm(n)};
      },
      exec);

  std::vector<double> inner(trials), energy(trials);
  for (std::size_t i = 0; i < trials; ++i) {
    inner[i] = samples[i].inner;
    energy[i] = samples[i].energy;
  }
  ProjectionLemmaReport report;
  report.inner_product = summarize(inner, rng.seed());
  report.noise_energy = summarize(energy, rng.seed());
  report.lhs = std::abs(report.inner_product.mean);
  report.rhs = alpha * report.noise_energy.mean;
  report.tolerance =
      3.0 * std::hypot(report.inner_product.std_error, alpha * report.noise_energy.std_error);
  report.pass = report.lhs <= report.rhs + report.tolerance;
  return report;
}

}  // namespace psgdlab
