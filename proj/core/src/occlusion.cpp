#include "occur/occlusion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace occur {

namespace {

void require_positive_dims(int height, int width) {
  if (height <= 0 || width <= 0) {
    throw std::invalid_argument("mask dimensions must be positive, got " + std::to_string(height) + "x" +
                                std::to_string(width));
  }
}

void require_fraction(double f) {
  if (!(f >= 0.0 && f <= 1.0)) throw std::invalid_argument("target fraction must lie in [0, 1]");
}

Mask filled_rect(std::size_t h, std::size_t w, std::size_t top, std::size_t left, std::size_t rh,
                 std::size_t rw) {
  std::vector<std::uint8_t> bits(h * w, 1);
  for (std::size_t r = top; r < top + rh; ++r) {
    std::fill_n(bits.begin() + static_cast<std::ptrdiff_t>(r * w + left), rw, std::uint8_t{0});
  }
  return Mask(h, w, std::move(bits));
}

std::size_t ring_area(std::size_t rh, std::size_t rw, std::size_t bw) {
  std::size_t inner_h = rh > 2 * bw ? rh - 2 * bw : 0;
  std::size_t inner_w = rw > 2 * bw ? rw - 2 * bw : 0;
  return rh * rw - inner_h * inner_w;
}

std::size_t clamp_extent(double v, std::size_t hi) {
  auto r = static_cast<long long>(std::llround(v));
  return static_cast<std::size_t>(std::clamp<long long>(r, 1, static_cast<long long>(hi)));
}

struct Candidate {
  std::size_t rh = 0;
  std::size_t rw = 0;
  double error = 0.0;
};

}  // namespace

Mask::Mask(std::size_t height, std::size_t width, std::vector<std::uint8_t> bits)
    : height_(height), width_(width), bits_(std::move(bits)) {
  if (height_ == 0 || width_ == 0) throw std::invalid_argument("Mask: dimensions must be positive");
  if (bits_.size() != height_ * width_) throw std::invalid_argument("Mask: bit count does not match dimensions");
  for (auto b : bits_) {
    if (b > 1) throw std::invalid_argument("Mask: entries must be 0 or 1");
  }
}

Mask Mask::ones(std::size_t height, std::size_t width) {
  return Mask(height, width, std::vector<std::uint8_t>(height * width, 1));
}

Mask Mask::zeros(std::size_t height, std::size_t width) {
  return Mask(height, width, std::vector<std::uint8_t>(height * width, 0));
}

std::size_t Mask::zero_count() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{0}));
}

DenseArray Mask::as_array() const {
  std::vector<double> data(bits_.begin(), bits_.end());
  return DenseArray({height_, width_}, std::move(data));
}

OcclusionStrategy parse_occlusion_strategy(std::string_view name) {
  if (name == "areal") return OcclusionStrategy::areal;
  if (name == "border") return OcclusionStrategy::border;
  throw std::invalid_argument("unknown occlusion strategy '" + std::string(name) + "'");
}

std::string_view to_string(OcclusionStrategy strategy) {
  return strategy == OcclusionStrategy::areal ? "areal" : "border";
}

Mask generate_areal_mask(int height, int width, double target_fraction, Rng& rng) {
  require_positive_dims(height, width);
  require_fraction(target_fraction);
  const auto h = static_cast<std::size_t>(height);
  const auto w = static_cast<std::size_t>(width);
  if (target_fraction == 0.0) return Mask::ones(h, w);

  const double total = static_cast<double>(h * w);
  const double area = target_fraction * total;
  Candidate best{0, 0, std::numeric_limits<double>::infinity()};
  for (int attempt = 0; attempt < kMaskAttempts; ++attempt) {
    double aspect = rng.uniform(0.5, 2.0);  // rows / cols
    std::size_t rh = clamp_extent(std::sqrt(area * aspect), h);
    std::size_t rw = clamp_extent(area / static_cast<double>(rh), w);
    if (static_cast<double>(rh * rw) < area) rh = clamp_extent(area / static_cast<double>(rw), h);
    double error = std::abs(static_cast<double>(rh * rw) / total - target_fraction);
    if (error < best.error) best = {rh, rw, error};
    if (error <= kMaskFractionTolerance) break;
  }
  std::size_t top = rng.uniform_index(h - best.rh + 1);
  std::size_t left = rng.uniform_index(w - best.rw + 1);
  return filled_rect(h, w, top, left, best.rh, best.rw);
}

Mask generate_border_mask(int height, int width, Rect rect, int border_width) {
  require_positive_dims(height, width);
  if (border_width < 1) throw std::invalid_argument("border width must be >= 1");
  const auto h = static_cast<std::size_t>(height);
  const auto w = static_cast<std::size_t>(width);
  if (rect.top > rect.bottom || rect.left > rect.right || rect.bottom >= h || rect.right >= w) {
    throw std::invalid_argument("border rectangle (" + std::to_string(rect.top) + "," + std::to_string(rect.left) +
                                "," + std::to_string(rect.bottom) + "," + std::to_string(rect.right) +
                                ") is out of bounds for " + std::to_string(h) + "x" + std::to_string(w));
  }
  const auto bw = static_cast<std::size_t>(border_width);
  std::vector<std::uint8_t> bits(h * w, 1);
  for (std::size_t r = rect.top; r <= rect.bottom; ++r) {
    for (std::size_t c = rect.left; c <= rect.right; ++c) {
      std::size_t inset = std::min({r - rect.top, rect.bottom - r, c - rect.left, rect.right - c});
      if (inset < bw) bits[r * w + c] = 0;
    }
  }
  return Mask(h, w, std::move(bits));
}

Mask generate_border_mask_for_level(int height, int width, double target_fraction, int border_width,
                                    Rng& rng) {
  require_positive_dims(height, width);
  require_fraction(target_fraction);
  if (border_width < 1) throw std::invalid_argument("border width must be >= 1");
  const auto h = static_cast<std::size_t>(height);
  const auto w = static_cast<std::size_t>(width);
  if (target_fraction == 0.0) return Mask::ones(h, w);

  const auto bw = static_cast<std::size_t>(border_width);
  const double total = static_cast<double>(h * w);
  Candidate best{0, 0, std::numeric_limits<double>::infinity()};
  for (int attempt = 0; attempt < kMaskAttempts; ++attempt) {
    double aspect = rng.uniform(0.5, 2.0);
    Candidate local{0, 0, std::numeric_limits<double>::infinity()};
    for (std::size_t rw = 1; rw <= w; ++rw) {
      std::size_t rh = clamp_extent(aspect * static_cast<double>(rw), h);
      double error = std::abs(static_cast<double>(ring_area(rh, rw, bw)) / total - target_fraction);
      if (error < local.error) local = {rh, rw, error};
    }
    if (local.error < best.error) best = local;
    if (local.error <= kMaskFractionTolerance) break;
  }
  std::size_t top = rng.uniform_index(h - best.rh + 1);
  std::size_t left = rng.uniform_index(w - best.rw + 1);
  Rect rect{top, left, top + best.rh - 1, left + best.rw - 1};
  return generate_border_mask(height, width, rect, border_width);
}

Mask generate_mask(OcclusionStrategy strategy, int height, int width, double target_fraction, Rng& rng,
                   int border_width) {
  if (strategy == OcclusionStrategy::areal) return generate_areal_mask(height, width, target_fraction, rng);
  return generate_border_mask_for_level(height, width, target_fraction, border_width, rng);
}

DenseArray apply_mask(const DenseArray& image, const Mask& mask) {
  const Shape& s = image.shape();
  if (s.size() < 2 || s.size() > 3 || s[0] != mask.height() || s[1] != mask.width()) {
    throw std::invalid_argument("apply_mask: image " + shape_string(s) + " does not match mask [" +
                                std::to_string(mask.height()) + "x" + std::to_string(mask.width()) + "]");
  }
  return elementwise_mul(image, mask.as_array());
}

double occlusion_level(const Mask& mask) {
  return static_cast<double>(mask.zero_count()) / static_cast<double>(mask.height() * mask.width());
}

Histogram occlusion_histogram(std::span<const double> levels, std::size_t bins) {
  if (bins == 0) throw std::invalid_argument("occlusion_histogram: need at least one bin");
  if (levels.empty()) throw std::invalid_argument("occlusion_histogram: empty level list has no distribution");
  std::vector<double> edges = Histogram::unit_edges(bins);
  std::vector<std::size_t> counts(bins, 0);
  for (double level : levels) {
    if (!(level >= 0.0 && level <= 1.0)) throw std::invalid_argument("occlusion_histogram: level outside [0, 1]");
    auto idx = static_cast<std::size_t>(level * static_cast<double>(bins));
    idx = std::min(idx, bins - 1);
    // settle floating-point rounding against the exact edge values
    while (idx + 1 < bins && level >= edges[idx + 1]) ++idx;
    while (idx > 0 && level < edges[idx]) --idx;
    ++counts[idx];
  }
  std::vector<double> masses(bins);
  const double n = static_cast<double>(levels.size());
  for (std::size_t i = 0; i < bins; ++i) masses[i] = static_cast<double>(counts[i]) / n;
  return Histogram(std::move(masses), std::move(edges));
}

}  // namespace occur
