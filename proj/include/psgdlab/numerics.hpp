#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <vector>

namespace psgdlab {

/// Raised when a computation produces NaN or Inf where a finite value is required.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense real vector. Constructors reject non-finite entries; there is no
/// resizing API, so a vector keeps the dimension it was built with.
class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t dim, double fill = 0.0);
  Vector(std::initializer_list<double> values);
  explicit Vector(std::vector<double> values);

  std::size_t size() const noexcept { return coords_.size(); }
  bool empty() const noexcept { return coords_.empty(); }

  double operator[](std::size_t k) const noexcept { return coords_[k]; }
  double& operator[](std::size_t k) noexcept { return coords_[k]; }

  std::span<const double> coords() const noexcept { return coords_; }
  std::span<double> coords() noexcept { return coords_; }

  auto begin() const noexcept { return coords_.begin(); }
  auto end() const noexcept { return coords_.end(); }
  auto begin() noexcept { return coords_.begin(); }
  auto end() noexcept { return coords_.end(); }

  bool all_finite() const noexcept;
  /// Throws NumericalError naming `what` if any coordinate is NaN or Inf.
  void require_finite(const char* what) const;

  Vector& operator+=(const Vector& other);
  Vector& operator-=(const Vector& other);
  Vector& operator*=(double s) noexcept;

  friend bool operator==(const Vector&, const Vector&) = default;

 private:
  std::vector<double> coords_;
};

Vector operator+(Vector a, const Vector& b);
Vector operator-(Vector a, const Vector& b);
Vector operator*(double s, Vector a);
Vector operator*(Vector a, double s);

void require_same_dim(const Vector& a, const Vector& b, const char* op);

double dot(const Vector& a, const Vector& b);
double squared_norm(const Vector& a) noexcept;
double euclidean_norm(const Vector& a) noexcept;
double distance(const Vector& a, const Vector& b);

/// y += a * x
void axpy(double a, const Vector& x, Vector& y);

/// Seeded pseudo-random stream: xoshiro256** state initialised from a
/// SplitMix64 hash of (seed, stream_id). Versioned so replays stay stable.
class RngStream {
 public:
  static constexpr std::uint32_t algorithm_version = 1;

  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  /// Child stream keyed by (this stream's identity, child_id). Does not
  /// advance this stream, so trial i always gets the same child.
  RngStream split(std::uint64_t child_id) const noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform on (0, 1).
  double uniform_open() noexcept;
  double uniform(double lo, double hi) noexcept;
  /// Standard normal via Box-Muller; the second variate is cached.
  double normal() noexcept;
  /// +1 or -1 with probability 1/2 each.
  int rademacher() noexcept;
  bool bernoulli(double p) noexcept;
  /// Uniform integer in [0, n). n must be positive.
  std::size_t uniform_index(std::size_t n);

 private:
  std::array<std::uint64_t, 4> state_{};
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// d independent standard normal draws.
Vector gaussian_vector(std::size_t d, RngStream& rng);

}  // namespace psgdlab
