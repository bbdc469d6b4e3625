#include <cmath>
#include <stdexcept>
#include <string>

#include "doctest.h"
#include "occur/infotheory.hpp"

using namespace occur;

namespace {

JointCounts random_joint(Rng& rng, std::size_t rows, std::size_t cols) {
  std::vector<std::uint64_t> counts(rows * cols);
  for (auto& c : counts) c = rng.uniform_index(4) == 0 ? 0 : rng.uniform_index(50);
  counts[0] += 1;
  return JointCounts(rows, cols, counts);
}

std::vector<Sample> probe_set(std::size_t per_class, std::size_t classes) {
  std::vector<Sample> out;
  for (std::size_t i = 0; i < per_class * classes; ++i) {
    Sample s;
    s.label = i % classes;
    std::vector<double> px(16, 0.0);
    px[s.label] = 1.0;
    s.image = DenseArray({4, 4}, px);
    s.origin_index = i;
    out.push_back(s);
  }
  return out;
}

// zeroes a fraction of pixels counted from the start, so the label pixel
// disappears once the level is high enough for its position
DenseArray prefix_occluder(const DenseArray& image, double level, Rng&) {
  std::vector<double> px(image.values().begin(), image.values().end());
  auto cut = static_cast<std::size_t>(std::llround(level * static_cast<double>(px.size())));
  for (std::size_t i = 0; i < cut; ++i) px[i] = 0.0;
  return DenseArray(image.shape(), px);
}

std::size_t read_label(const DenseArray& image) {
  for (std::size_t i = 0; i < 4; ++i)
    if (image[i] > 0.5) return i;
  return 0;
}

}  // namespace

TEST_CASE("entropy examples") {
  std::vector<double> uniform(8, 0.125);
  CHECK(entropy(uniform) == 3.0);
  std::vector<double> point{0, 1, 0};
  CHECK(entropy(point) == 0.0);
  std::vector<double> mixed{0.5, 0.25, 0.25};
  CHECK(entropy(mixed) == doctest::Approx(1.5).epsilon(1e-15));
  std::vector<double> negative{1.5, -0.5};
  CHECK_THROWS_AS(entropy(negative), std::invalid_argument);
}

TEST_CASE("mutual information examples") {
  JointCounts product(2, 3, {2, 4, 6, 1, 2, 3});
  CHECK(std::abs(mutual_information(product)) <= 1e-12);
  CHECK(conditional_entropy(product) == doctest::Approx(row_entropy(product)).epsilon(1e-12));

  JointCounts diag(4, 4);
  for (std::size_t i = 0; i < 4; ++i) diag.add(i, i, 5);
  CHECK(mutual_information(diag) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(conditional_entropy(diag) == 0.0);
}

TEST_CASE("information identities on random joints") {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t r = 2 + rng.uniform_index(4), c = 2 + rng.uniform_index(4);
    JointCounts j = random_joint(rng, r, c);
    double mi = mutual_information(j);
    REQUIRE(mi >= -1e-12);
    REQUIRE(mi == mutual_information(j.transposed()));
    REQUIRE(std::abs(mi - (row_entropy(j) - conditional_entropy(j))) <= 1e-12);
  }
  for (int trial = 0; trial < 200; ++trial) {
    JointCounts j = random_joint(rng, 3, 3);
    REQUIRE(mutual_information(j.merge_columns(0, 1)) <= mutual_information(j) + 1e-12);
  }
}

TEST_CASE("from_labels tallies pairs") {
  std::vector<std::size_t> truth{0, 1, 1, 2}, pred{0, 1, 2, 2};
  auto j = JointCounts::from_labels(truth, pred, 3);
  CHECK(j(1, 2) == 1);
  CHECK(j(2, 2) == 1);
  CHECK(j.total() == 4);
  std::vector<std::size_t> bad{0, 5, 1, 2};
  CHECK_THROWS(JointCounts::from_labels(bad, pred, 3));
}

TEST_CASE("select_occlusion_level examples") {
  auto probe = probe_set(5, 4);
  Rng rng(3);
  IalConfig cfg;

  Classifier constant = [](const DenseArray&) { return std::size_t{0}; };
  auto flat = select_occlusion_level(constant, probe, cfg, prefix_occluder, rng, 4);
  for (const auto& e : flat.evaluations) CHECK(std::abs(e.mi) <= 1e-12);
  CHECK(flat.level == 0.4);

  IalConfig clean_only;
  clean_only.candidate_levels = {0.0};
  auto perfect = select_occlusion_level(read_label, probe, clean_only, prefix_occluder, rng, 4);
  CHECK(perfect.level == 0.0);
  CHECK(perfect.mi == doctest::Approx(2.0).epsilon(1e-12));

  IalConfig empty;
  empty.candidate_levels = {};
  CHECK_THROWS_AS(select_occlusion_level(read_label, probe, empty, prefix_occluder, rng, 4), std::invalid_argument);
}

TEST_CASE("select_occlusion_level agrees with a brute-force reimplementation") {
  auto probe = probe_set(6, 4);
  IalConfig cfg;
  cfg.alpha = 0.4;
  cfg.candidate_levels = {0.0, 0.2, 0.4};
  // 0.2 hides 3 of 16 pixels (labels 0..2 lost), 0.4 hides 6
  Rng rng(5);
  auto picked = select_occlusion_level(read_label, probe, cfg, prefix_occluder, rng, 4);

  double best_mi = -1.0, best_level = -1.0;
  for (double level : cfg.candidate_levels) {
    JointCounts j(4, 4);
    Rng unused(0);
    for (const Sample& s : probe) j.add(s.label, read_label(prefix_occluder(s.image, level, unused)));
    double mi = mutual_information(j);
    if (mi > best_mi + 1e-12 || std::abs(mi - best_mi) <= 1e-12) {
      best_mi = mi;
      best_level = level;
    }
  }
  CHECK(picked.level == best_level);
  CHECK(picked.mi == doctest::Approx(best_mi).epsilon(1e-12));
  CHECK(picked.level <= cfg.alpha);
}

TEST_CASE("select_occlusion_level never exceeds alpha") {
  auto probe = probe_set(3, 4);
  Rng rng(6);
  IalConfig cfg;
  cfg.alpha = 0.25;
  cfg.candidate_levels = {0.0, 0.1, 0.2, 0.3, 0.5};
  Classifier constant = [](const DenseArray&) { return std::size_t{1}; };
  CHECK_THROWS_AS(select_occlusion_level(constant, probe, cfg, prefix_occluder, rng, 4), std::invalid_argument);

  cfg.candidate_levels = {0.0, 0.1, 0.2, 0.25};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng r(seed);
    CHECK(select_occlusion_level(constant, probe, cfg, prefix_occluder, r, 4).level <= 0.25);
    CHECK(select_occlusion_level(read_label, probe, cfg, prefix_occluder, r, 4).level <= 0.25);
  }
}
