#include "occur/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace occur {

namespace {

std::size_t element_count(const Shape& shape) {
  if (shape.empty()) return 0;
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

void require_finite(std::span<const double> data) {
  for (double v : data) {
    if (!std::isfinite(v)) throw std::domain_error("DenseArray: non-finite element");
  }
}

}  // namespace

std::string shape_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += 'x';
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

DenseArray::DenseArray(Shape shape) : shape_(std::move(shape)), data_(element_count(shape_), 0.0) {}

DenseArray::DenseArray(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (element_count(shape_) != data_.size()) {
    throw std::invalid_argument("DenseArray: shape " + shape_string(shape_) + " does not match " +
                                std::to_string(data_.size()) + " elements");
  }
  require_finite(data_);
}

DenseArray DenseArray::filled(Shape shape, double value) {
  std::vector<double> data(element_count(shape), value);
  return DenseArray(std::move(shape), std::move(data));
}

double DenseArray::at(std::size_t row, std::size_t col) const {
  if (rank() != 2) throw std::out_of_range("DenseArray::at: rank != 2");
  return data_.at(row * shape_[1] + col);
}

double DenseArray::at(std::size_t row, std::size_t col, std::size_t channel) const {
  if (rank() != 3) throw std::out_of_range("DenseArray::at: rank != 3");
  return data_.at((row * shape_[1] + col) * shape_[2] + channel);
}

DenseArray DenseArray::reshaped(Shape shape) const {
  return DenseArray(std::move(shape), data_);
}

DenseArray elementwise_mul(const DenseArray& a, const DenseArray& b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  std::vector<double> out(a.size());
  if (sa == sb) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
  } else if (sb.size() + 1 == sa.size() && std::equal(sb.begin(), sb.end(), sa.begin()) && !b.empty()) {
    std::size_t channels = sa.back();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i / channels];
  } else {
    throw std::invalid_argument("elementwise_mul: shape mismatch " + shape_string(sa) + " vs " +
                                shape_string(sb));
  }
  return DenseArray(sa, std::move(out));
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

std::uint64_t Rng::next_u64() { return engine_(); }

double Rng::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("Rng::uniform: lo must be < hi");
  double v = lo + (hi - lo) * uniform01();
  return v < hi ? v : lo;
}

std::size_t Rng::uniform_index(std::size_t n) {
  if (n == 0) throw std::invalid_argument("Rng::uniform_index: n must be positive");
  const std::uint64_t range = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - (std::numeric_limits<std::uint64_t>::max() % range);
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return static_cast<std::size_t>(x % range);
}

double Rng::normal() {
  double u1 = 1.0 - uniform01();  // (0, 1]
  double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Rng Rng::fork() {
  std::uint64_t hi = engine_();
  std::uint64_t lo = engine_();
  // splitmix64 finalizer decorrelates the child seed from the parent stream
  std::uint64_t z = hi ^ (lo << 1) ^ 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return Rng(z);
}

std::string Rng::state() const {
  std::ostringstream os;
  os << engine_;
  return os.str();
}

Rng Rng::from_state(std::uint64_t seed, const std::string& state) {
  Rng rng(seed);
  std::istringstream is(state);
  is >> rng.engine_;
  if (!is) throw std::invalid_argument("Rng::from_state: malformed generator state");
  return rng;
}

double rng_uniform(Rng& rng, double lo, double hi) { return rng.uniform(lo, hi); }

}  // namespace occur
