#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "occur/histogram.hpp"
#include "occur/tensor.hpp"

namespace occur {

/// Binary visibility grid: 1 keeps a pixel, 0 occludes it.
class Mask {
 public:
  Mask(std::size_t height, std::size_t width, std::vector<std::uint8_t> bits);

  static Mask ones(std::size_t height, std::size_t width);
  static Mask zeros(std::size_t height, std::size_t width);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::span<const std::uint8_t> bits() const noexcept { return bits_; }
  bool visible(std::size_t row, std::size_t col) const { return bits_[row * width_ + col] != 0; }
  std::size_t zero_count() const noexcept;

  DenseArray as_array() const;

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  std::size_t height_;
  std::size_t width_;
  std::vector<std::uint8_t> bits_;
};

/// Inclusive pixel rectangle.
struct Rect {
  std::size_t top = 0;
  std::size_t left = 0;
  std::size_t bottom = 0;
  std::size_t right = 0;
};

enum class OcclusionStrategy { areal, border };

OcclusionStrategy parse_occlusion_strategy(std::string_view name);
std::string_view to_string(OcclusionStrategy strategy);

/// Achieved fractions within this distance of the target are accepted.
inline constexpr double kMaskFractionTolerance = 0.02;
inline constexpr int kMaskAttempts = 100;

/// Filled rectangle whose area approximates `target_fraction` of the image.
///
/// Aspect ratio is drawn from [0.5, 2] and the position uniformly among
/// placements that keep the rectangle inside the image. Attempts outside the
/// tolerance are redrawn up to kMaskAttempts times; the closest one wins.
Mask generate_areal_mask(int height, int width, double target_fraction, Rng& rng);

/// Zeroes a ring of `border_width` pixels lying on and inside `rect`.
/// Rings at least half as wide as the rectangle degrade to a filled block.
Mask generate_border_mask(int height, int width, Rect rect, int border_width);

/// Hollow rectangle of the given border width sized so that the ring covers
/// roughly `target_fraction` of the image. Targets larger than the ring that
/// spans the whole frame saturate at that ring.
Mask generate_border_mask_for_level(int height, int width, double target_fraction, int border_width,
                                    Rng& rng);

Mask generate_mask(OcclusionStrategy strategy, int height, int width, double target_fraction, Rng& rng,
                   int border_width = 3);

/// x' = x ⊙ m, broadcasting the mask over a trailing channel axis.
DenseArray apply_mask(const DenseArray& image, const Mask& mask);

/// Fraction of occluded pixels.
double occlusion_level(const Mask& mask);

/// Uniform bins over [0, 1], right-open except the last which holds 1.0.
Histogram occlusion_histogram(std::span<const double> levels, std::size_t bins);

}  // namespace occur
