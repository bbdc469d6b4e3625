#include "occur/histogram.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace occur {

Histogram::Histogram(std::vector<double> masses, std::vector<double> edges)
    : masses_(std::move(masses)), edges_(std::move(edges)) {
  if (masses_.empty()) throw std::invalid_argument("Histogram: at least one bin required");
  if (edges_.size() != masses_.size() + 1) {
    throw std::invalid_argument("Histogram: expected " + std::to_string(masses_.size() + 1) +
                                " edges, got " + std::to_string(edges_.size()));
  }
  for (std::size_t i = 0; i + 1 < edges_.size(); ++i) {
    if (!(edges_[i] < edges_[i + 1])) throw std::invalid_argument("Histogram: edges must increase strictly");
  }
  double total = 0.0;
  for (double m : masses_) {
    if (!(m >= 0.0) || !std::isfinite(m)) throw std::invalid_argument("Histogram: masses must be finite and >= 0");
    total += m;
  }
  if (std::abs(total - 1.0) > kMassTolerance) {
    throw std::invalid_argument("Histogram: masses sum to " + std::to_string(total) + ", expected 1");
  }
}

std::vector<double> Histogram::unit_edges(std::size_t bins) {
  std::vector<double> edges(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) edges[i] = static_cast<double>(i) / static_cast<double>(bins);
  return edges;
}

Histogram Histogram::over_unit_interval(std::vector<double> masses) {
  std::size_t b = masses.size();
  return Histogram(std::move(masses), unit_edges(b));
}

}  // namespace occur
