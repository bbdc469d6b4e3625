#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "occur/curriculum.hpp"
#include "occur/geometry.hpp"
#include "occur/network.hpp"

namespace occur {

enum class MetricKind { loss_curvature, identity };

MetricKind parse_metric_kind(std::string_view name);
std::string_view to_string(MetricKind kind);

struct GeometryConfig {
  MetricKind metric = MetricKind::loss_curvature;
  /// Coordinates of the projected head-parameter subspace (at most 20).
  std::size_t projection_dim = 4;
  /// g = I + beta * Ĥ.
  double beta = 1.0;
  /// Samples used to estimate the curvature term.
  std::size_t probe_size = 32;
  std::uint64_t projection_seed = 0x5eed;
  ShootingConfig shooting{20, Integrator::rk4, 1e-8, 100, kDefaultFdStep};

  void validate() const;
};

/// Fixed random d-dimensional subspace of the head layer's parameters with
/// orthonormal basis columns.
class HeadSubspace {
 public:
  HeadSubspace(const ModelState& model, std::size_t dim, std::uint64_t seed);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(basis_.cols()); }
  const Mat& basis() const noexcept { return basis_; }

  /// Coordinates Pᵀ θ_head of a model's head parameters.
  Vec project(const ModelState& model) const;
  /// Head parameters θ_ref + P (x - Pᵀ θ_ref): the reference head moved
  /// within the subspace to coordinates x.
  std::vector<double> head_params_at(const ModelState& reference, const Vec& x) const;

 private:
  std::size_t head_offset_;
  Mat basis_;
};

/// g(x) = I + beta * Ĥ(x) on the subspace, where Ĥ is the Gauss-Newton
/// curvature of the mean cross-entropy over `probe` with the reference
/// model's backbone held fixed. The logit Jacobian is taken by central
/// differences; Ĥ is symmetrized and its eigenvalues floored at 1e-6.
MetricField loss_curvature_metric(const ModelState& reference, const HeadSubspace& subspace,
                                  std::span<const Sample> probe, double beta, double fd_step = kDefaultFdStep);

}  // namespace occur
