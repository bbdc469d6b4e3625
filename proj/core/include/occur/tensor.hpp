#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace occur {

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);

/// Dense row-major array of doubles with explicit shape metadata.
///
/// Values are immutable after construction; every constructor rejects
/// non-finite entries and shape/data length mismatches.
class DenseArray {
 public:
  DenseArray() = default;
  explicit DenseArray(Shape shape);
  DenseArray(Shape shape, std::vector<double> data);

  static DenseArray filled(Shape shape, double value);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<const double> values() const noexcept { return data_; }
  double operator[](std::size_t i) const { return data_[i]; }

  double at(std::size_t row, std::size_t col) const;
  double at(std::size_t row, std::size_t col, std::size_t channel) const;

  /// Same data under a new shape with an equal element count.
  DenseArray reshaped(Shape shape) const;

  friend bool operator==(const DenseArray&, const DenseArray&) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// out[i] = a[i] * b[i]. `b` may also drop `a`'s trailing axis, in which case
/// it is broadcast across that axis (a per-pixel mask over channels).
DenseArray elementwise_mul(const DenseArray& a, const DenseArray& b);

/// Seeded pseudo-random generator.
///
/// Backed by std::mt19937_64, whose output sequence is fixed by the standard.
/// The distributions below are written out by hand because the std::
/// distribution objects are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform01();
  /// Uniform in [lo, hi); throws std::invalid_argument when lo >= hi.
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n); unbiased by rejection.
  std::size_t uniform_index(std::size_t n);
  /// Standard normal via Box-Muller (one value per call, no caching).
  double normal();

  /// Independent child generator; advances this generator by two draws.
  Rng fork();

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(items[i - 1], items[j]);
    }
  }

  /// Full engine state as text; restores bit-exactly via from_state.
  std::string state() const;
  static Rng from_state(std::uint64_t seed, const std::string& state);

  friend bool operator==(const Rng& a, const Rng& b) { return a.engine_ == b.engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

double rng_uniform(Rng& rng, double lo, double hi);

}  // namespace occur
