#include "occur/curriculum.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <tuple>

namespace occur {

double difficulty(const Sample& sample) { return sample.level; }

std::vector<Sample> order_dataset(std::vector<Sample> samples) {
  std::stable_sort(samples.begin(), samples.end(), [](const Sample& a, const Sample& b) {
    return std::tuple(difficulty(a), a.origin_index, a.level_index) <
           std::tuple(difficulty(b), b.origin_index, b.level_index);
  });
  return samples;
}

LevelFunction linear_levels(std::size_t delta, double max_level) {
  if (!(max_level >= 0.0 && max_level <= 1.0)) throw std::invalid_argument("max_level must lie in [0, 1]");
  return [delta, max_level](std::size_t j) {
    if (delta == 0) return 0.0;
    return static_cast<double>(j) * max_level / static_cast<double>(delta);
  };
}

std::vector<Sample> expand_levels(std::span<const Sample> base, std::size_t delta, const LevelFunction& level_of,
                                  OcclusionStrategy strategy, Rng& rng, int border_width) {
  std::vector<double> targets(delta + 1);
  for (std::size_t j = 0; j <= delta; ++j) {
    targets[j] = level_of(j);
    if (!(targets[j] >= 0.0 && targets[j] <= 1.0)) {
      throw std::invalid_argument("expand_levels: level_of(" + std::to_string(j) + ") outside [0, 1]");
    }
    if (j > 0 && targets[j] < targets[j - 1]) {
      throw std::invalid_argument("expand_levels: level_of must be non-decreasing in j");
    }
  }
  if (targets[0] != 0.0) throw std::invalid_argument("expand_levels: level_of(0) must be 0");

  std::vector<Sample> out;
  out.reserve(base.size() * (delta + 1));
  for (const Sample& s : base) {
    Sample copy = s;
    copy.level_index = 0;
    out.push_back(std::move(copy));
  }
  for (std::size_t j = 1; j <= delta; ++j) {
    for (const Sample& s : base) {
      const Shape& shape = s.image.shape();
      if (shape.size() < 2) throw std::invalid_argument("expand_levels: images must be at least 2-D");
      Mask mask = generate_mask(strategy, static_cast<int>(shape[0]), static_cast<int>(shape[1]), targets[j], rng,
                                border_width);
      out.push_back(Sample{apply_mask(s.image, mask), s.label, occlusion_level(mask), s.origin_index, j});
    }
  }
  return out;
}

std::size_t stage_size(std::size_t n, std::size_t stages, std::size_t t) {
  if (stages == 0) throw std::invalid_argument("stage count must be positive");
  if (t < 1 || t > stages) {
    throw std::out_of_range("stage index " + std::to_string(t) + " outside [1, " + std::to_string(stages) + "]");
  }
  return (t * n + stages - 1) / stages;
}

CurriculumSchedule::CurriculumSchedule(std::vector<Sample> ordered, std::vector<std::size_t> stage_sizes)
    : ordered_(std::move(ordered)), stage_sizes_(std::move(stage_sizes)) {
  if (ordered_.empty()) throw std::invalid_argument("CurriculumSchedule: no samples");
  if (stage_sizes_.empty()) throw std::invalid_argument("CurriculumSchedule: need at least one stage");
  if (stage_sizes_.back() != ordered_.size()) {
    throw std::invalid_argument("CurriculumSchedule: final stage must contain every sample");
  }
  for (std::size_t i = 0; i < stage_sizes_.size(); ++i) {
    if (i > 0 && stage_sizes_[i] < stage_sizes_[i - 1]) {
      throw std::invalid_argument("CurriculumSchedule: stage sizes must be non-decreasing");
    }
  }
}

CurriculumSchedule make_schedule(std::vector<Sample> samples, std::size_t stages) {
  if (samples.empty()) throw std::invalid_argument("make_schedule: no samples");
  std::vector<Sample> ordered = order_dataset(std::move(samples));
  std::vector<std::size_t> sizes(stages);
  for (std::size_t t = 1; t <= stages; ++t) sizes[t - 1] = stage_size(ordered.size(), stages, t);
  return CurriculumSchedule(std::move(ordered), std::move(sizes));
}

std::span<const Sample> stage_subset(const CurriculumSchedule& schedule, std::size_t t) {
  if (t < 1 || t > schedule.stages()) {
    throw std::out_of_range("stage index " + std::to_string(t) + " outside [1, " +
                            std::to_string(schedule.stages()) + "]");
  }
  return schedule.ordered().first(schedule.stage_sizes()[t - 1]);
}

std::vector<double> stage_levels(const CurriculumSchedule& schedule, std::size_t t) {
  std::vector<double> levels;
  for (const Sample& s : stage_subset(schedule, t)) levels.push_back(s.level);
  return levels;
}

CurriculumSchedule subdivide_transitions(const CurriculumSchedule& schedule, double max_distance,
                                         const StageDistance& distance, std::size_t max_rounds) {
  std::vector<std::size_t> sizes(schedule.stage_sizes().begin(), schedule.stage_sizes().end());
  auto prefix = [&](std::size_t n) { return schedule.ordered().first(n); };
  for (std::size_t round = 0; round < max_rounds; ++round) {
    std::vector<std::size_t> refined{sizes.front()};
    bool changed = false;
    for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
      std::size_t lo = sizes[i];
      std::size_t hi = sizes[i + 1];
      if (hi - lo >= 2 && lo > 0 && distance(prefix(lo), prefix(hi)) > max_distance) {
        refined.push_back(lo + (hi - lo) / 2);
        changed = true;
      }
      refined.push_back(hi);
    }
    sizes = std::move(refined);
    if (!changed) break;
  }
  return CurriculumSchedule(std::vector<Sample>(schedule.ordered().begin(), schedule.ordered().end()),
                            std::move(sizes));
}

}  // namespace occur
