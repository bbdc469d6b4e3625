#include "occur/loss_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

namespace occur {

MetricKind parse_metric_kind(std::string_view name) {
  if (name == "loss") return MetricKind::loss_curvature;
  if (name == "identity") return MetricKind::identity;
  throw std::invalid_argument("unknown metric '" + std::string(name) + "' (expected loss or identity)");
}

std::string_view to_string(MetricKind kind) { return kind == MetricKind::identity ? "identity" : "loss"; }

void GeometryConfig::validate() const {
  if (projection_dim == 0 || projection_dim > 20) throw std::invalid_argument("projection_dim must lie in [1, 20]");
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be >= 0");
  if (probe_size == 0) throw std::invalid_argument("geometry probe_size must be positive");
  if (shooting.steps == 0) throw std::invalid_argument("geodesic steps must be positive");
}

HeadSubspace::HeadSubspace(const ModelState& model, std::size_t dim, std::uint64_t seed) {
  const LayerSpec& head = model.layers.back();
  const auto rows = static_cast<Eigen::Index>(head.fan_in * head.fan_out + head.fan_out);
  if (dim == 0 || static_cast<Eigen::Index>(dim) > rows) {
    throw std::invalid_argument("HeadSubspace: dimension must lie in [1, head parameter count]");
  }
  head_offset_ = model.layer_offset(model.layers.size() - 1);
  Rng rng(seed);
  Mat gaussian(rows, static_cast<Eigen::Index>(dim));
  for (Eigen::Index c = 0; c < gaussian.cols(); ++c)
    for (Eigen::Index r = 0; r < rows; ++r) gaussian(r, c) = rng.normal();
  Eigen::HouseholderQR<Mat> qr(gaussian);
  basis_ = qr.householderQ() * Mat::Identity(rows, static_cast<Eigen::Index>(dim));
}

Vec HeadSubspace::project(const ModelState& model) const {
  const auto rows = basis_.rows();
  Eigen::Map<const Vec> head(model.params.data() + head_offset_, rows);
  return basis_.transpose() * head;
}

std::vector<double> HeadSubspace::head_params_at(const ModelState& reference, const Vec& x) const {
  const auto rows = basis_.rows();
  Eigen::Map<const Vec> head(reference.params.data() + head_offset_, rows);
  Vec moved = head + basis_ * (x - basis_.transpose() * head);
  return std::vector<double>(moved.data(), moved.data() + moved.size());
}

MetricField loss_curvature_metric(const ModelState& reference, const HeadSubspace& subspace,
                                  std::span<const Sample> probe, double beta, double fd_step) {
  if (probe.empty()) throw std::invalid_argument("loss_curvature_metric: probe set is empty");
  const std::size_t d = subspace.dim();
  const auto di = static_cast<Eigen::Index>(d);
  const bool binary = reference.layers.back().activation == Activation::sigmoid;

  // Everything captured is immutable, so the evaluator is reentrant.
  struct Cache {
    ModelState model;
    HeadSubspace subspace;
    std::vector<std::vector<double>> features;
    std::vector<Mat> jacobians;  // logits x d, constant because logits are affine in x
  };
  auto cache = std::make_shared<Cache>(Cache{reference, subspace, {}, {}});
  const Vec origin = subspace.project(reference);
  for (const Sample& s : probe) {
    auto features = penultimate_features(reference, s.image.values());
    const auto k = static_cast<Eigen::Index>(reference.output_size());
    Mat jac(k, di);
    for (Eigen::Index a = 0; a < di; ++a) {
      Vec up = origin, down = origin;
      up[a] += fd_step;
      down[a] -= fd_step;
      auto zu = head_logits(reference, features, subspace.head_params_at(reference, up));
      auto zd = head_logits(reference, features, subspace.head_params_at(reference, down));
      for (Eigen::Index c = 0; c < k; ++c) jac(c, a) = (zu[static_cast<std::size_t>(c)] - zd[static_cast<std::size_t>(c)]) / (2.0 * fd_step);
    }
    cache->features.push_back(std::move(features));
    cache->jacobians.push_back(std::move(jac));
  }

  return MetricField(d, [cache, beta, binary, di](const Vec& x) {
    auto head = cache->subspace.head_params_at(cache->model, x);
    Mat curvature = Mat::Zero(di, di);
    for (std::size_t n = 0; n < cache->features.size(); ++n) {
      auto z = head_logits(cache->model, cache->features[n], head);
      const Mat& jac = cache->jacobians[n];
      Mat hz;
      if (binary) {
        double p = 1.0 / (1.0 + std::exp(-z[0]));
        hz = Mat::Constant(1, 1, p * (1.0 - p));
      } else {
        double hi = *std::max_element(z.begin(), z.end());
        Vec p(static_cast<Eigen::Index>(z.size()));
        for (std::size_t c = 0; c < z.size(); ++c) p[static_cast<Eigen::Index>(c)] = std::exp(z[c] - hi);
        p /= p.sum();
        hz = Mat(p.asDiagonal()) - p * p.transpose();
      }
      curvature += jac.transpose() * hz * jac;
    }
    curvature /= static_cast<double>(cache->features.size());
    curvature = 0.5 * (curvature + curvature.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> eig(curvature);
    Vec floored = eig.eigenvalues().cwiseMax(1e-6);
    Mat rebuilt = eig.eigenvectors() * floored.asDiagonal() * eig.eigenvectors().transpose();
    rebuilt = 0.5 * (rebuilt + rebuilt.transpose());
    return Mat(Mat::Identity(di, di) + beta * rebuilt);
  });
}

}  // namespace occur
