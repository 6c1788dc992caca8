#include "psgdlab/numerics.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace psgdlab {

namespace {

void check_finite_values(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("Vector: non-finite coordinate");
  }
}

constexpr std::uint64_t splitmix64(std::uint64_t& x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t mix_pair(std::uint64_t a, std::uint64_t b) noexcept {
  std::uint64_t x = a;
  std::uint64_t h = splitmix64(x);
  x = b ^ 0x6a09e667f3bcc909ULL;
  h ^= splitmix64(x) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

Vector::Vector(std::size_t dim, double fill) : coords_(dim, fill) {
  if (!std::isfinite(fill)) throw std::invalid_argument("Vector: non-finite fill value");
}

Vector::Vector(std::initializer_list<double> values) : coords_(values) {
  check_finite_values(coords_);
}

Vector::Vector(std::vector<double> values) : coords_(std::move(values)) {
  check_finite_values(coords_);
}

bool Vector::all_finite() const noexcept {
  for (double v : coords_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void Vector::require_finite(const char* what) const {
  if (!all_finite()) throw NumericalError(std::string(what) + ": non-finite value");
}

Vector& Vector::operator+=(const Vector& other) {
  require_same_dim(*this, other, "operator+=");
  for (std::size_t k = 0; k < coords_.size(); ++k) coords_[k] += other.coords_[k];
  return *this;
}

Vector& Vector::operator-=(const Vector& other) {
  require_same_dim(*this, other, "operator-=");
  for (std::size_t k = 0; k < coords_.size(); ++k) coords_[k] -= other.coords_[k];
  return *this;
}

Vector& Vector::operator*=(double s) noexcept {
  for (double& v : coords_) v *= s;
  return *this;
}

Vector operator+(Vector a, const Vector& b) { return a += b; }
Vector operator-(Vector a, const Vector& b) { return a -= b; }
Vector operator*(double s, Vector a) { return a *= s; }
Vector operator*(Vector a, double s) { return a *= s; }

void require_same_dim(const Vector& a, const Vector& b, const char* op) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(std::string(op) + ": dimension mismatch (" +
                                std::to_string(a.size()) + " vs " + std::to_string(b.size()) +
                                ")");
  }
}

double dot(const Vector& a, const Vector& b) {
  require_same_dim(a, b, "dot");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double squared_norm(const Vector& a) noexcept {
  double s = 0.0;
  for (double v : a) s += v * v;
  return s;
}

double euclidean_norm(const Vector& a) noexcept { return std::sqrt(squared_norm(a)); }

double distance(const Vector& a, const Vector& b) {
  require_same_dim(a, b, "distance");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    s += diff * diff;
  }
  return std::sqrt(s);
}

void axpy(double a, const Vector& x, Vector& y) {
  require_same_dim(x, y, "axpy");
  for (std::size_t k = 0; k < x.size(); ++k) y[k] += a * x[k];
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  std::uint64_t key = mix_pair(seed, stream_id) ^ algorithm_version;
  for (auto& word : state_) word = splitmix64(key);
  // xoshiro must not start from the all-zero state
  if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
}

RngStream RngStream::split(std::uint64_t child_id) const noexcept {
  return RngStream(mix_pair(seed_, stream_id_), child_id);
}

std::uint64_t RngStream::next_u64() noexcept {
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double RngStream::uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform_open() noexcept {
  return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
}

double RngStream::uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

double RngStream::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  const double u1 = uniform_open();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_normal_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

int RngStream::rademacher() noexcept { return (next_u64() >> 63) != 0 ? 1 : -1; }

bool RngStream::bernoulli(double p) noexcept { return uniform() < p; }

std::size_t RngStream::uniform_index(std::size_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: empty range");
  // Lemire's multiply-shift with rejection, unbiased for every n
  const auto range = static_cast<std::uint64_t>(n);
  std::uint64_t x = next_u64();
  __uint128_t m = static_cast<__uint128_t>(x) * range;
  auto low = static_cast<std::uint64_t>(m);
  if (low < range) {
    const std::uint64_t threshold = (0 - range) % range;
    while (low < threshold) {
      x = next_u64();
      m = static_cast<__uint128_t>(x) * range;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::size_t>(m >> 64);
}

Vector gaussian_vector(std::size_t d, RngStream& rng) {
  if (d == 0) throw std::invalid_argument("gaussian_vector: dimension must be positive");
  Vector out(d);
  for (std::size_t k = 0; k < d; ++k) out[k] = rng.normal();
  return out;
}

}  // namespace psgdlab
