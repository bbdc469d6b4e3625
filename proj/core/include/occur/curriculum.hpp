#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "occur/occlusion.hpp"
#include "occur/tensor.hpp"

namespace occur {

/// One (possibly occluded) training image.
struct Sample {
  DenseArray image;
  std::size_t label = 0;
  /// Occlusion fraction of the mask that produced `image`; 0 for originals.
  double level = 0.0;
  /// Index of the clean source image in its dataset.
  std::size_t origin_index = 0;
  /// Occlusion tier j in [0, δ]; 0 is the unoccluded copy.
  std::size_t level_index = 0;
};

/// Difficulty score: the sample's occlusion level.
double difficulty(const Sample& sample);

/// Stable ascending sort by difficulty, ties broken by (origin_index, level_index).
std::vector<Sample> order_dataset(std::vector<Sample> samples);

/// Maps tier j to a target occlusion fraction.
using LevelFunction = std::function<double(std::size_t)>;

/// level(j) = j * max_level / δ (all zero when δ = 0).
LevelFunction linear_levels(std::size_t delta, double max_level);

/// Builds X* = X(0) ∪ ... ∪ X(δ): tier 0 copies the base samples, tier j
/// occludes every base image at level_of(j). Output is grouped by tier.
std::vector<Sample> expand_levels(std::span<const Sample> base, std::size_t delta, const LevelFunction& level_of,
                                  OcclusionStrategy strategy, Rng& rng, int border_width = 3);

/// n_t = ceil(t * n / T).
std::size_t stage_size(std::size_t n, std::size_t stages, std::size_t t);

/// Difficulty-ordered samples partitioned into nested prefix stages.
class CurriculumSchedule {
 public:
  CurriculumSchedule(std::vector<Sample> ordered, std::vector<std::size_t> stage_sizes);

  std::span<const Sample> ordered() const noexcept { return ordered_; }
  std::span<const std::size_t> stage_sizes() const noexcept { return stage_sizes_; }
  std::size_t stages() const noexcept { return stage_sizes_.size(); }
  std::size_t size() const noexcept { return ordered_.size(); }

 private:
  std::vector<Sample> ordered_;
  std::vector<std::size_t> stage_sizes_;
};

/// Orders `samples` and splits them into T stages with n_t = ceil(t * n / T).
CurriculumSchedule make_schedule(std::vector<Sample> samples, std::size_t stages);

/// S_t: the first n_t ordered samples (1-based t).
std::span<const Sample> stage_subset(const CurriculumSchedule& schedule, std::size_t t);

/// Levels of the samples in a stage, in schedule order.
std::vector<double> stage_levels(const CurriculumSchedule& schedule, std::size_t t);

using StageDistance = std::function<double(std::span<const Sample>, std::span<const Sample>)>;

/// Inserts intermediate stages wherever distance(S_t, S_{t+1}) exceeds
/// `max_distance`, halving the offending transition. Stops once every
/// transition passes, a transition cannot be split further, or after
/// `max_rounds` passes.
CurriculumSchedule subdivide_transitions(const CurriculumSchedule& schedule, double max_distance,
                                         const StageDistance& distance, std::size_t max_rounds = 8);

}  // namespace occur
