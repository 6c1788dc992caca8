#include "psgdlab/numerics.hpp"
#include "psgdlab/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace psgdlab;

TEST_CASE("vector arithmetic") {
  const Vector a{3.0, 4.0};
  const Vector b{1.0, -2.0};
  CHECK(dot(a, b) == -5.0);
  CHECK(euclidean_norm(a) == 5.0);
  CHECK(squared_norm(b) == 5.0);
  CHECK(distance(a, b) == doctest::Approx(std::sqrt(4.0 + 36.0)));
  Vector y = b;
  axpy(2.0, a, y);
  CHECK(y == Vector{7.0, 6.0});
  CHECK_THROWS(dot(a, Vector{1.0}));
  CHECK_THROWS(Vector{std::nan("")});
}

TEST_CASE("rng replays and splits") {
  RngStream a(42), b(42);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());

  const RngStream master(42);
  RngStream c0 = master.split(0), c0again = master.split(0), c1 = master.split(1);
  int same = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto x = c0.next_u64();
    CHECK(x == c0again.next_u64());
    same += x == c1.next_u64();
  }
  CHECK(same == 0);
}

TEST_CASE("normal draws have unit variance") {
  RngStream rng(7);
  std::vector<double> x(200000), sq(200000);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = rng.normal();
    sq[i] = x[i] * x[i];
  }
  const Estimate m = summarize(x, 7);
  const Estimate v = summarize(sq, 7);
  CHECK(std::abs(m.mean) < 4.0 * m.std_error);
  CHECK(std::abs(v.mean - 1.0) < 4.0 * v.std_error);
}

TEST_CASE("uniform_index covers the range") {
  RngStream rng(3);
  std::vector<int> counts(5);
  for (int i = 0; i < 50000; ++i) ++counts[rng.uniform_index(5)];
  for (int c : counts) CHECK(std::abs(c - 10000) < 500);
}

TEST_CASE("summarize") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const Estimate e = summarize(v, 9);
  CHECK(e.mean == 2.5);
  CHECK(e.std_error == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0).epsilon(1e-15));
  CHECK(e.trials == 4);
  CHECK(e.seed == 9);
  CHECK_THROWS(summarize(std::vector<double>{1.0}, 0));
}

TEST_CASE("pairwise sum is exact on representable data") {
  std::vector<double> v(1000);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
  CHECK(pairwise_sum(v) == 499500.0);
}

TEST_CASE("clopper-pearson closed forms") {
  // zero successes: upper = 1 - (alpha/2)^(1/n)
  const auto zero = clopper_pearson(0, 10);
  CHECK(zero.lower == 0.0);
  CHECK(zero.upper == doctest::Approx(1.0 - std::pow(0.025, 0.1)).epsilon(1e-10));
  const auto all = clopper_pearson(10, 10);
  CHECK(all.upper == 1.0);
  CHECK(all.lower == doctest::Approx(std::pow(0.025, 0.1)).epsilon(1e-10));
  const auto mid = clopper_pearson(5, 10);
  CHECK(mid.lower < 0.5);
  CHECK(mid.upper > 0.5);
  CHECK(mid.lower == doctest::Approx(1.0 - mid.upper).epsilon(1e-10));
}

TEST_CASE("log-log slope on planted power law") {
  std::vector<double> n{25, 100, 400, 1600, 6400}, y;
  for (double x : n) y.push_back(3.7 / std::sqrt(x));
  CHECK(std::abs(loglog_slope(n, y) + 0.5) < 1e-9);
  const std::vector<double> x{0, 1, 2}, z{1, 3, 5};
  const LineFit fit = least_squares(x, z);
  CHECK(fit.slope == doctest::Approx(2.0));
  CHECK(fit.intercept == doctest::Approx(1.0));
}
