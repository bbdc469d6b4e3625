#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace occur {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Riemannian metric g(x) on a d-dimensional coordinate chart.
class MetricField {
 public:
  using Evaluator = std::function<Mat(const Vec&)>;

  static constexpr double kSymmetryTolerance = 1e-12;

  MetricField(std::size_t dim, Evaluator evaluator);

  std::size_t dim() const noexcept { return dim_; }

  /// g(x), symmetrized. Throws std::domain_error if the raw value is not
  /// symmetric within kSymmetryTolerance or fails a Cholesky factorization.
  Mat evaluate(const Vec& x) const;

  static MetricField euclidean(std::size_t dim);
  /// Flat plane in (r, φ): diag(1, r²). Defined for r > 0.
  static MetricField polar();
  /// Poincaré half-plane in (x, y): diag(1/y², 1/y²). Defined for y > 0.
  static MetricField halfplane();

 private:
  std::size_t dim_;
  Evaluator evaluator_;
};

/// Γ^λ_{μν} stored as [λ][μ][ν].
class Christoffel {
 public:
  explicit Christoffel(std::size_t dim) : dim_(dim), values_(dim * dim * dim, 0.0) {}

  std::size_t dim() const noexcept { return dim_; }
  double& operator()(std::size_t l, std::size_t m, std::size_t n) { return values_[(l * dim_ + m) * dim_ + n]; }
  double operator()(std::size_t l, std::size_t m, std::size_t n) const {
    return values_[(l * dim_ + m) * dim_ + n];
  }

  /// a^λ = -Γ^λ_{μν} v^μ v^ν.
  Vec acceleration(const Vec& v) const;

 private:
  std::size_t dim_;
  std::vector<double> values_;
};

inline constexpr double kDefaultFdStep = 1e-4;

/// Christoffel symbols of the second kind from central differences of g.
Christoffel christoffel(const MetricField& g, const Vec& x, double fd_step = kDefaultFdStep);

struct GeodesicState {
  Vec x;
  Vec v;
};

/// x' = x + h v,  v' = v - h Γ(x) v v.
GeodesicState geodesic_step_euler(const Vec& x, const Vec& v, const MetricField& g, double h,
                                  double fd_step = kDefaultFdStep);

/// Classical four-stage Runge-Kutta step on the first-order system (x, v).
GeodesicState geodesic_step_rk4(const Vec& x, const Vec& v, const MetricField& g, double h,
                                double fd_step = kDefaultFdStep);

enum class Integrator { euler, rk4 };

Integrator parse_integrator(std::string_view name);

struct GeodesicPath {
  std::vector<Vec> points;
  std::vector<Vec> velocities;
  double step = 0.0;
};

/// Raised when the metric fails partway along a path.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(std::size_t step, const std::string& what);
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

GeodesicPath integrate_geodesic(const Vec& x0, const Vec& v0, const MetricField& g, double h, std::size_t steps,
                                Integrator method, double fd_step = kDefaultFdStep);

/// Σ_k sqrt(Δx_kᵀ g(midpoint_k) Δx_k).
double path_length(std::span<const Vec> points, const MetricField& g);
double path_length(const GeodesicPath& path, const MetricField& g);

/// g_ij v^i v^j at x.
double squared_speed(const MetricField& g, const Vec& x, const Vec& v);

struct ShootingConfig {
  std::size_t steps = 1000;
  Integrator method = Integrator::rk4;
  double tol = 1e-8;
  std::size_t max_iter = 100;
  double fd_step = kDefaultFdStep;
};

struct GeodesicSolution {
  GeodesicPath path;
  double length = 0.0;
  double residual = 0.0;
  std::size_t iterations = 0;
};

class ShootingError : public std::runtime_error {
 public:
  ShootingError(double residual, std::size_t iterations);
  double residual() const noexcept { return residual_; }
  std::size_t iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  std::size_t iterations_;
};

/// Boundary-value geodesic from a to b over t ∈ [0, 1]: damped Newton on the
/// initial velocity with a finite-difference Jacobian of the endpoint.
GeodesicSolution solve_geodesic(const Vec& a, const Vec& b, const MetricField& g, const ShootingConfig& cfg = {});

/// Length of the geodesic found by solve_geodesic; 0 when a == b.
double geodesic_distance(const Vec& a, const Vec& b, const MetricField& g, const ShootingConfig& cfg = {});

struct ConvergenceTrace {
  std::vector<double> errors;
  std::vector<double> ratios;
  double estimated_rate = 0.0;
};

/// r = max ε_{n+1}/ε_n over the final two-thirds of the sequence. The
/// sequence is cut at its first zero; at least three positive entries must
/// remain.
ConvergenceTrace estimate_rate(std::span<const double> errors);

}  // namespace occur
