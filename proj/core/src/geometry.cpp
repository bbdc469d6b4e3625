#include "occur/geometry.hpp"

#include <cmath>
#include <limits>

namespace occur {

MetricField::MetricField(std::size_t dim, Evaluator evaluator) : dim_(dim), evaluator_(std::move(evaluator)) {
  if (dim_ == 0) throw std::invalid_argument("MetricField: dimension must be positive");
  if (!evaluator_) throw std::invalid_argument("MetricField: evaluator is empty");
}

Mat MetricField::evaluate(const Vec& x) const {
  if (static_cast<std::size_t>(x.size()) != dim_) throw std::invalid_argument("MetricField: point has wrong dimension");
  Mat g = evaluator_(x);
  if (static_cast<std::size_t>(g.rows()) != dim_ || static_cast<std::size_t>(g.cols()) != dim_) {
    throw std::domain_error("MetricField: evaluator returned the wrong shape");
  }
  if (!g.allFinite()) throw std::domain_error("MetricField: non-finite metric");
  if ((g - g.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance) {
    throw std::domain_error("MetricField: metric is not symmetric");
  }
  Mat sym = 0.5 * (g + g.transpose());
  Eigen::LLT<Mat> llt(sym);
  if (llt.info() != Eigen::Success) throw std::domain_error("MetricField: metric is not positive definite");
  return sym;
}

MetricField MetricField::euclidean(std::size_t dim) {
  return MetricField(dim, [dim](const Vec&) { return Mat::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)); });
}

MetricField MetricField::polar() {
  return MetricField(2, [](const Vec& x) {
    if (!(x[0] > 0.0)) throw std::domain_error("polar metric: r must be positive");
    Mat g = Mat::Zero(2, 2);
    g(0, 0) = 1.0;
    g(1, 1) = x[0] * x[0];
    return g;
  });
}

MetricField MetricField::halfplane() {
  return MetricField(2, [](const Vec& x) {
    if (!(x[1] > 0.0)) throw std::domain_error("half-plane metric: y must be positive");
    double s = 1.0 / (x[1] * x[1]);
    Mat g = Mat::Zero(2, 2);
    g(0, 0) = s;
    g(1, 1) = s;
    return g;
  });
}

Vec Christoffel::acceleration(const Vec& v) const {
  Vec a = Vec::Zero(static_cast<Eigen::Index>(dim_));
  for (std::size_t l = 0; l < dim_; ++l) {
    double s = 0.0;
    for (std::size_t m = 0; m < dim_; ++m)
      for (std::size_t n = 0; n < dim_; ++n) s += (*this)(l, m, n) * v[m] * v[n];
    a[l] = -s;
  }
  return a;
}

Christoffel christoffel(const MetricField& g, const Vec& x, double fd_step) {
  if (!(fd_step > 0.0)) throw std::invalid_argument("christoffel: fd_step must be positive");
  const std::size_t d = g.dim();
  const auto di = static_cast<Eigen::Index>(d);

  Mat metric = g.evaluate(x);
  Eigen::LLT<Mat> llt(metric);
  if (llt.info() != Eigen::Success) throw std::domain_error("christoffel: singular metric");
  Mat inverse = llt.solve(Mat::Identity(di, di));

  // dg[s](i, j) = ∂g_ij / ∂x^s
  std::vector<Mat> dg(d);
  for (std::size_t s = 0; s < d; ++s) {
    Vec plus = x;
    Vec minus = x;
    plus[static_cast<Eigen::Index>(s)] += fd_step;
    minus[static_cast<Eigen::Index>(s)] -= fd_step;
    dg[s] = (g.evaluate(plus) - g.evaluate(minus)) / (2.0 * fd_step);
  }

  Christoffel gamma(d);
  std::vector<double> lowered(d);
  for (std::size_t m = 0; m < d; ++m) {
    for (std::size_t n = m; n < d; ++n) {
      for (std::size_t s = 0; s < d; ++s) {
        const auto mi = static_cast<Eigen::Index>(m), ni = static_cast<Eigen::Index>(n),
                   si = static_cast<Eigen::Index>(s);
        lowered[s] = dg[n](mi, si) + dg[m](ni, si) - dg[s](mi, ni);
      }
      for (std::size_t l = 0; l < d; ++l) {
        double sum = 0.0;
        for (std::size_t s = 0; s < d; ++s) {
          sum += inverse(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(s)) * lowered[s];
        }
        gamma(l, m, n) = 0.5 * sum;
        gamma(l, n, m) = 0.5 * sum;
      }
    }
  }
  return gamma;
}

GeodesicState geodesic_step_euler(const Vec& x, const Vec& v, const MetricField& g, double h, double fd_step) {
  if (!(h > 0.0)) throw std::invalid_argument("geodesic step: h must be positive");
  Christoffel gamma = christoffel(g, x, fd_step);
  return {x + h * v, v + h * gamma.acceleration(v)};
}

GeodesicState geodesic_step_rk4(const Vec& x, const Vec& v, const MetricField& g, double h, double fd_step) {
  if (!(h > 0.0)) throw std::invalid_argument("geodesic step: h must be positive");
  auto accel = [&](const Vec& px, const Vec& pv) { return christoffel(g, px, fd_step).acceleration(pv); };

  const Vec k1x = v;
  const Vec k1v = accel(x, v);
  const Vec k2x = v + 0.5 * h * k1v;
  const Vec k2v = accel(x + 0.5 * h * k1x, k2x);
  const Vec k3x = v + 0.5 * h * k2v;
  const Vec k3v = accel(x + 0.5 * h * k2x, k3x);
  const Vec k4x = v + h * k3v;
  const Vec k4v = accel(x + h * k3x, k4x);

  return {x + (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
          v + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)};
}

Integrator parse_integrator(std::string_view name) {
  if (name == "euler") return Integrator::euler;
  if (name == "rk4") return Integrator::rk4;
  throw std::invalid_argument("unknown integrator '" + std::string(name) + "'");
}

IntegrationError::IntegrationError(std::size_t step, const std::string& what)
    : std::runtime_error("geodesic integration failed at step " + std::to_string(step) + ": " + what), step_(step) {}

GeodesicPath integrate_geodesic(const Vec& x0, const Vec& v0, const MetricField& g, double h, std::size_t steps,
                                Integrator method, double fd_step) {
  if (steps < 1) throw std::invalid_argument("integrate_geodesic: steps must be >= 1");
  if (static_cast<std::size_t>(x0.size()) != g.dim() || static_cast<std::size_t>(v0.size()) != g.dim()) {
    throw std::invalid_argument("integrate_geodesic: initial state has wrong dimension");
  }
  GeodesicPath path;
  path.step = h;
  path.points.reserve(steps + 1);
  path.velocities.reserve(steps + 1);
  path.points.push_back(x0);
  path.velocities.push_back(v0);
  for (std::size_t k = 0; k < steps; ++k) {
    GeodesicState next;
    try {
      next = method == Integrator::rk4 ? geodesic_step_rk4(path.points.back(), path.velocities.back(), g, h, fd_step)
                                       : geodesic_step_euler(path.points.back(), path.velocities.back(), g, h, fd_step);
    } catch (const std::domain_error& e) {
      throw IntegrationError(k, e.what());
    }
    if (!next.x.allFinite() || !next.v.allFinite()) throw IntegrationError(k, "state diverged");
    path.points.push_back(std::move(next.x));
    path.velocities.push_back(std::move(next.v));
  }
  return path;
}

double squared_speed(const MetricField& g, const Vec& x, const Vec& v) { return v.dot(g.evaluate(x) * v); }

double path_length(std::span<const Vec> points, const MetricField& g) {
  double total = 0.0;
  for (std::size_t k = 1; k < points.size(); ++k) {
    Vec delta = points[k] - points[k - 1];
    Vec mid = 0.5 * (points[k] + points[k - 1]);
    total += std::sqrt(std::max(0.0, delta.dot(g.evaluate(mid) * delta)));
  }
  return total;
}

double path_length(const GeodesicPath& path, const MetricField& g) { return path_length(path.points, g); }

ShootingError::ShootingError(double residual, std::size_t iterations)
    : std::runtime_error("geodesic shooting did not converge: residual " + std::to_string(residual) + " after " +
                         std::to_string(iterations) + " iterations"),
      residual_(residual),
      iterations_(iterations) {}

GeodesicSolution solve_geodesic(const Vec& a, const Vec& b, const MetricField& g, const ShootingConfig& cfg) {
  if (static_cast<std::size_t>(a.size()) != g.dim() || static_cast<std::size_t>(b.size()) != g.dim()) {
    throw std::invalid_argument("solve_geodesic: endpoints have wrong dimension");
  }
  if (cfg.steps < 1) throw std::invalid_argument("solve_geodesic: steps must be >= 1");
  const double h = 1.0 / static_cast<double>(cfg.steps);
  const auto d = static_cast<Eigen::Index>(g.dim());

  if (a == b) {
    GeodesicPath path;
    path.step = h;
    path.points = {a, b};
    path.velocities = {Vec::Zero(d), Vec::Zero(d)};
    return {std::move(path), 0.0, 0.0, 0};
  }

  auto endpoint = [&](const Vec& v0) {
    return integrate_geodesic(a, v0, g, h, cfg.steps, cfg.method, cfg.fd_step).points.back();
  };
  auto residual_norm = [&](const Vec& v0) {
    try {
      return (endpoint(v0) - b).norm();
    } catch (const IntegrationError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  Vec v0 = b - a;
  double res = residual_norm(v0);
  std::size_t iter = 0;
  while (res > cfg.tol && iter < cfg.max_iter) {
    ++iter;
    Mat jac(d, d);
    Vec r;
    try {
      r = endpoint(v0) - b;
      const double delta = 1e-6 * std::max(1.0, v0.norm());
      for (Eigen::Index k = 0; k < d; ++k) {
        Vec up = v0, down = v0;
        up[k] += delta;
        down[k] -= delta;
        jac.col(k) = (endpoint(up) - endpoint(down)) / (2.0 * delta);
      }
    } catch (const IntegrationError&) {
      // no usable Jacobian here; report the best residual so far
      break;
    }
    Vec step = jac.colPivHouseholderQr().solve(-r);
    double damping = 1.0;
    double trial = residual_norm(v0 + step);
    while (!(trial < res) && damping > 1e-6) {
      damping *= 0.5;
      trial = residual_norm(v0 + damping * step);
    }
    if (!(trial < res)) break;
    v0 += damping * step;
    res = trial;
  }
  if (!(res <= cfg.tol)) throw ShootingError(res, iter);

  GeodesicPath path = integrate_geodesic(a, v0, g, h, cfg.steps, cfg.method, cfg.fd_step);
  double length = path_length(path, g);
  return {std::move(path), length, res, iter};
}

double geodesic_distance(const Vec& a, const Vec& b, const MetricField& g, const ShootingConfig& cfg) {
  return solve_geodesic(a, b, g, cfg).length;
}

ConvergenceTrace estimate_rate(std::span<const double> errors) {
  ConvergenceTrace trace;
  for (double e : errors) {
    if (e < 0.0 || !std::isfinite(e)) throw std::invalid_argument("estimate_rate: errors must be finite and >= 0");
    if (e == 0.0) break;
    trace.errors.push_back(e);
  }
  if (trace.errors.size() < 3) {
    throw std::invalid_argument("estimate_rate: need at least three positive errors");
  }
  const std::size_t start = trace.errors.size() / 3;
  trace.estimated_rate = -std::numeric_limits<double>::infinity();
  for (std::size_t n = start; n + 1 < trace.errors.size(); ++n) {
    double ratio = trace.errors[n + 1] / trace.errors[n];
    trace.ratios.push_back(ratio);
    trace.estimated_rate = std::max(trace.estimated_rate, ratio);
  }
  return trace;
}

}  // namespace occur
