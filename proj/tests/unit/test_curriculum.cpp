#include <algorithm>
#include <stdexcept>
#include <string>

#include "doctest.h"
#include "occur/curriculum.hpp"

using namespace occur;

namespace {

Sample make_sample(double level, std::size_t origin, std::size_t level_index = 0) {
  Sample s;
  s.image = DenseArray({2, 2}, {1, 1, 1, 1});
  s.level = level;
  s.origin_index = origin;
  s.level_index = level_index;
  return s;
}

std::vector<Sample> base_set(std::size_t n, std::size_t side = 8) {
  std::vector<Sample> out;
  for (std::size_t i = 0; i < n; ++i) {
    Sample s;
    s.image = DenseArray::filled({side, side}, 0.5);
    s.label = i % 2;
    s.origin_index = i;
    out.push_back(s);
  }
  return out;
}

std::vector<std::size_t> origins(std::span<const Sample> samples) {
  std::vector<std::size_t> out;
  for (const Sample& s : samples) out.push_back(s.origin_index);
  return out;
}

}  // namespace

TEST_CASE("difficulty is the occlusion level") {
  CHECK(difficulty(make_sample(0.0, 0)) == 0.0);
  CHECK(difficulty(make_sample(1.0, 0)) == 1.0);
  std::vector<std::uint8_t> bits(16, 1);
  bits[1] = bits[2] = bits[3] = bits[4] = 0;
  CHECK(difficulty(make_sample(occlusion_level(Mask(4, 4, bits)), 0)) == 0.25);
}

TEST_CASE("order_dataset examples") {
  auto ordered = order_dataset({make_sample(0.3, 0), make_sample(0.0, 1), make_sample(0.3, 2)});
  CHECK(origins(ordered) == std::vector<std::size_t>{1, 0, 2});

  auto sorted = order_dataset({make_sample(0.0, 0), make_sample(0.1, 1), make_sample(0.2, 2)});
  CHECK(origins(sorted) == std::vector<std::size_t>{0, 1, 2});

  auto equal = order_dataset({make_sample(0.5, 0), make_sample(0.5, 1), make_sample(0.5, 2)});
  CHECK(origins(equal) == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("expand_levels examples") {
  Rng rng(3);
  auto base = base_set(5);
  auto same = expand_levels(base, 0, linear_levels(0, 0.5), OcclusionStrategy::areal, rng);
  REQUIRE(same.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(same[i].image == base[i].image);

  auto three = expand_levels(base, 2, linear_levels(2, 0.5), OcclusionStrategy::areal, rng);
  CHECK(three.size() == 15);
  for (std::size_t j = 0; j < 3; ++j)
    CHECK(std::count_if(three.begin(), three.end(), [&](const Sample& s) { return s.level_index == j; }) == 5);

  auto ramp = [](std::size_t j) { return static_cast<double>(j) / 4.0; };
  auto five = expand_levels(base_set(3, 16), 4, ramp, OcclusionStrategy::areal, rng);
  for (double target : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    bool present = std::any_of(five.begin(), five.end(), [&](const Sample& s) {
      return std::abs(s.level - target) <= kMaskFractionTolerance;
    });
    CHECK(present);
  }
}

TEST_CASE("expand_levels rejects a non-monotone level function") {
  Rng rng(1);
  auto base = base_set(2);
  auto bad = [](std::size_t j) { return j == 1 ? 0.5 : 0.2 * static_cast<double>(j); };
  CHECK_THROWS_AS(expand_levels(base, 3, bad, OcclusionStrategy::areal, rng), std::invalid_argument);
}

TEST_CASE("expand_levels border strategy produces rings") {
  Rng rng(2);
  auto out = expand_levels(base_set(4, 32), 2, linear_levels(2, 0.3), OcclusionStrategy::border, rng);
  for (const Sample& s : out) {
    if (s.level_index == 0) continue;
    CHECK(s.level > 0.0);
    std::size_t top = 99, bottom = 0, left = 99, right = 0;
    for (std::size_t r = 0; r < 32; ++r)
      for (std::size_t c = 0; c < 32; ++c)
        if (s.image.at(r, c) == 0.0) {
          top = std::min(top, r);
          bottom = std::max(bottom, r);
          left = std::min(left, c);
          right = std::max(right, c);
        }
    REQUIRE(bottom - top >= 6);
    REQUIRE(right - left >= 6);
    CHECK(s.image.at((top + bottom) / 2, (left + right) / 2) == 0.5);
  }
}

TEST_CASE("clean copies come before any occluded copy after ordering") {
  Rng rng(4);
  auto ordered = order_dataset(expand_levels(base_set(10), 3, linear_levels(3, 0.5), OcclusionStrategy::areal, rng));
  bool seen_occluded = false;
  for (const Sample& s : ordered) {
    if (s.level_index > 0 && s.level > 0.0) seen_occluded = true;
    if (s.level_index == 0) CHECK_FALSE(seen_occluded);
  }
}

TEST_CASE("stage_subset examples") {
  std::vector<Sample> ten;
  for (std::size_t i = 0; i < 10; ++i) ten.push_back(make_sample(0.1 * static_cast<double>(i), i));
  auto schedule = make_schedule(ten, 4);
  CHECK(stage_subset(schedule, 1).size() == 3);
  CHECK(stage_subset(schedule, 4).size() == 10);
  CHECK_THROWS_AS(stage_subset(schedule, 0), std::out_of_range);
  CHECK_THROWS_AS(stage_subset(schedule, 5), std::out_of_range);

  std::vector<Sample> seven(ten.begin(), ten.begin() + 7);
  CHECK(stage_subset(make_schedule(seven, 3), 2).size() == 5);
}

TEST_CASE("stage structure over a grid of (n, T)") {
  for (std::size_t n = 1; n <= 1000; n += (n < 40 ? 1 : 37)) {
    for (std::size_t T = 1; T <= 20; ++T) {
      for (std::size_t t = 1; t <= T; ++t) {
        std::size_t expected = (t * n + T - 1) / T;
        REQUIRE(stage_size(n, T, t) == expected);
      }
      REQUIRE(stage_size(n, T, T) == n);
    }
  }
}

TEST_CASE("stages are nested prefixes with monotone difficulty") {
  Rng rng(9);
  std::vector<Sample> samples;
  for (std::size_t i = 0; i < 57; ++i) samples.push_back(make_sample(rng.uniform01(), i));
  auto schedule = make_schedule(samples, 6);
  double prev_max = -1.0;
  for (std::size_t t = 1; t <= schedule.stages(); ++t) {
    auto s = stage_subset(schedule, t);
    CHECK(s.data() == schedule.ordered().data());
    auto levels = stage_levels(schedule, t);
    double mx = *std::max_element(levels.begin(), levels.end());
    CHECK(mx >= prev_max);
    prev_max = mx;
  }
  CHECK(stage_subset(schedule, schedule.stages()).size() == schedule.size());
}

TEST_CASE("subdivide_transitions splits wide gaps") {
  std::vector<Sample> samples;
  for (std::size_t i = 0; i < 40; ++i) samples.push_back(make_sample(i < 20 ? 0.0 : 0.5, i));
  auto schedule = make_schedule(samples, 2);
  StageDistance by_size = [](std::span<const Sample> a, std::span<const Sample> b) {
    return static_cast<double>(b.size() - a.size());
  };
  auto finer = subdivide_transitions(schedule, 5.0, by_size);
  CHECK(finer.stages() > schedule.stages());
  auto sizes = finer.stage_sizes();
  CHECK(sizes.back() == 40);
  for (std::size_t t = 1; t < sizes.size(); ++t) {
    CHECK(sizes[t] > sizes[t - 1]);
    CHECK(static_cast<double>(sizes[t] - sizes[t - 1]) <= 5.0);
  }
  auto untouched = subdivide_transitions(schedule, 100.0, by_size);
  CHECK(untouched.stages() == 2);
}
