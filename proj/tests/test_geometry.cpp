#include "psgdlab/geometry.hpp"

#include <doctest.h>

#include <cmath>

using namespace psgdlab;

TEST_CASE("ball projection") {
  const ConvexSet ball = ConvexSet::ball(2, 2.0);
  const Vector outside = project(ball, Vector{3.0, 4.0});
  CHECK(outside[0] == doctest::Approx(1.2).epsilon(1e-15));
  CHECK(outside[1] == doctest::Approx(1.6).epsilon(1e-15));
  CHECK(project(ball, Vector{0.5, -1.0}) == Vector{0.5, -1.0});
  CHECK(ball.enclosing_radius() == 2.0);
  CHECK(ball.distance_to(Vector{3.0, 4.0}) == doctest::Approx(3.0));

  const ConvexSet shifted = ConvexSet::ball(Vector{1.0, 0.0}, 1.0);
  CHECK(shifted.enclosing_radius() == 2.0);
  const Vector p = project(shifted, Vector{1.0, 3.0});
  CHECK(p[0] == doctest::Approx(1.0));
  CHECK(p[1] == doctest::Approx(1.0));
  CHECK_THROWS(ConvexSet::ball(Vector{1.0, 0.0}, 1.0, 1.5));
}

TEST_CASE("box projection clamps coordinates") {
  const ConvexSet box = ConvexSet::box(Vector{-1.0, 0.0}, Vector{1.0, 0.5});
  CHECK(project(box, Vector{2.0, -3.0}) == Vector{1.0, 0.0});
  CHECK(box.enclosing_radius() == doctest::Approx(std::sqrt(1.25)));
  CHECK(box.contains(Vector{0.0, 0.25}));
  CHECK_FALSE(box.contains(Vector{0.0, 0.75}));
  CHECK_THROWS(ConvexSet::box(Vector{1.0}, Vector{0.0}));
}

TEST_CASE("projection properties on random points") {
  RngStream rng(9);
  const ConvexSet sets[] = {ConvexSet::ball(4, 1.0),
                            ConvexSet::box(Vector{-1, -0.5, 0, -2}, Vector{0.5, 0.5, 1, -1})};
  for (const auto& set : sets) {
    for (int i = 0; i < 500; ++i) {
      Vector a = gaussian_vector(4, rng), b = gaussian_vector(4, rng);
      a *= 2.0;
      b *= 2.0;
      const Vector pa = project(set, a), pb = project(set, b);
      CHECK(set.contains(pa));
      CHECK(distance(project(set, pa), pa) <= 1e-15);
      CHECK(distance(pa, pb) <= distance(a, b) + 1e-15);
      // obtuse angle condition: (a - Pa).(u - Pa) <= 0 for u in the set
      const Vector u = set.sample_uniform(rng);
      CHECK(dot(a - pa, u - pa) <= 1e-12);
    }
  }
}

TEST_CASE("uniform ball samples") {
  RngStream rng(2);
  const ConvexSet ball = ConvexSet::ball(3, 1.0);
  int inside_half = 0;
  const int trials = 40000;
  for (int i = 0; i < trials; ++i) {
    const Vector w = ball.sample_uniform(rng);
    CHECK(euclidean_norm(w) <= 1.0);
    inside_half += euclidean_norm(w) <= 0.5;
  }
  // volume fraction 1/8
  const double p = 0.125;
  CHECK(std::abs(inside_half / double(trials) - p) < 4.0 * std::sqrt(p * (1 - p) / trials));
}

TEST_CASE("projection lemma") {
  const ConvexSet ball = ConvexSet::ball(5, 1.0);
  const auto noise = standard_gaussian_sampler(5);
  const Vector v{1.0, 0.0, 0.0, 0.0, 0.0};

  const auto zero = check_projection_lemma(ball, v, noise, 0.0, 20000, RngStream(1));
  CHECK(zero.rhs == 0.0);
  CHECK(zero.lhs <= 3.0 * zero.inner_product.std_error);
  CHECK(zero.pass);

  const auto mid = check_projection_lemma(ball, v, noise, 0.2, 20000, RngStream(2));
  CHECK(mid.pass);
  CHECK(mid.lhs < mid.rhs);

  CHECK_THROWS(check_projection_lemma(ball, Vector{2, 0, 0, 0, 0}, noise, 0.1, 100, RngStream(1)));
  CHECK_THROWS(check_projection_lemma(ball, v, noise, -0.1, 100, RngStream(1)));

  const auto serial = check_projection_lemma(ball, v, noise, 0.2, 2000, RngStream(3), Execution::serial);
  const auto parallel = check_projection_lemma(ball, v, noise, 0.2, 2000, RngStream(3), Execution::parallel);
  CHECK(serial.lhs == parallel.lhs);
  CHECK(serial.rhs == parallel.rhs);
}
