#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "occur/histogram.hpp"

namespace occur {

/// Square non-negative ground cost with zero diagonal and symmetric entries.
class CostMatrix {
 public:
  CostMatrix(std::size_t bins, std::vector<double> values);

  /// (scale * |i - j|)^exponent over bin indices.
  static CostMatrix bin_distance(std::size_t bins, double exponent = 1.0, double scale = 1.0);

  std::size_t bins() const noexcept { return bins_; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * bins_ + j]; }
  double max() const;

 private:
  std::size_t bins_;
  std::vector<double> values_;
};

/// Coupling γ between two histograms, row-major.
class TransportPlan {
 public:
  static constexpr double kMarginalTolerance = 1e-9;

  TransportPlan(std::size_t bins, std::vector<double> mass);

  std::size_t bins() const noexcept { return bins_; }
  double operator()(std::size_t i, std::size_t j) const { return mass_[i * bins_ + j]; }
  std::span<const double> mass() const noexcept { return mass_; }

  std::vector<double> row_marginal() const;
  std::vector<double> col_marginal() const;
  double cost(const CostMatrix& cost) const;

  /// Largest absolute deviation of either marginal from the given masses.
  double marginal_violation(std::span<const double> p, std::span<const double> q) const;

 private:
  std::size_t bins_;
  std::vector<double> mass_;
};

struct TransportSolution {
  TransportPlan plan;
  double objective = 0.0;
};

inline constexpr std::size_t kMaxExactBins = 256;

/// W1 with unit cost between adjacent bins: Σ |CDF_P(i) - CDF_Q(i)|.
double w1_1d(const Histogram& p, const Histogram& q);

/// Exact discrete optimal transport by successive shortest augmenting paths
/// on the bipartite transportation network. Supports up to kMaxExactBins bins.
TransportSolution solve_transport(const Histogram& p, const Histogram& q, const CostMatrix& cost);

struct SinkhornResult {
  /// ⟨γ, C⟩ for the entropic plan (entropy term excluded).
  double cost = 0.0;
  /// Σ_i |Σ_j γ_ij - p_i| after the final column update.
  double marginal_error = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  TransportPlan plan;
};

/// Entropic-regularized transport solved in the log domain with ε-scaling.
/// Non-convergence within `max_iter` is reported, not thrown.
SinkhornResult sinkhorn(const Histogram& p, const Histogram& q, const CostMatrix& cost, double epsilon,
                        std::size_t max_iter, double tol);

enum class GroundScale { bin_index, occlusion_fraction };

/// W1 between the occlusion histograms of two stages on shared bins.
double stage_transition_distance(std::span<const double> levels_t, std::span<const double> levels_next,
                                 std::size_t bins, GroundScale scale = GroundScale::bin_index);

}  // namespace occur
