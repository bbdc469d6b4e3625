#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace occur {

/// Discrete probability masses over `bins()` intervals with explicit edges.
class Histogram {
 public:
  static constexpr double kMassTolerance = 1e-12;

  Histogram(std::vector<double> masses, std::vector<double> edges);

  /// Masses over b equal-width bins spanning [0, 1].
  static Histogram over_unit_interval(std::vector<double> masses);
  static std::vector<double> unit_edges(std::size_t bins);

  std::size_t bins() const noexcept { return masses_.size(); }
  std::span<const double> masses() const noexcept { return masses_; }
  std::span<const double> edges() const noexcept { return edges_; }
  double operator[](std::size_t i) const { return masses_[i]; }

  bool same_bins(const Histogram& other) const noexcept { return edges_ == other.edges_; }

  friend bool operator==(const Histogram&, const Histogram&) = default;

 private:
  std::vector<double> masses_;
  std::vector<double> edges_;
};

}  // namespace occur
