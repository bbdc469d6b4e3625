#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>

#include "doctest.h"
#include "occur/datasets.hpp"

using namespace occur;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_image(const fs::path& p, double value) {
  fs::create_directories(p.parent_path());
  write_pgm(p, DenseArray::filled({8, 8}, value));
}

}  // namespace

TEST_CASE("generate_synthetic examples") {
  TaskSpec spec;
  Rng rng(1);
  auto ds = generate_synthetic(spec, rng);
  CHECK(ds.samples.size() == 400);
  CHECK(ds.classes() == 4);
  for (std::size_t c : ds.class_counts()) CHECK(c == 100);
  CHECK(ds.samples[0].image.shape() == Shape{32, 32});

  TaskSpec odd = spec;
  odd.samples = 402;
  Rng r2(1);
  for (std::size_t c : generate_synthetic(odd, r2).class_counts()) CHECK((c == 100 || c == 101));

  TaskSpec clean = spec;
  clean.noise_sigma = 0.0;
  Rng r3(2);
  auto flat = generate_synthetic(clean, r3);
  for (const Sample& s : flat.samples) {
    // corners are always background
    CHECK(s.image.at(0, 0) == clean.background);
    CHECK(s.image.at(31, 31) == clean.background);
    for (double v : s.image.values()) REQUIRE((v == clean.background || v == clean.foreground));
  }

  Rng a(5), b(5);
  auto da = generate_synthetic(spec, a), db = generate_synthetic(spec, b);
  for (std::size_t i = 0; i < da.samples.size(); ++i) REQUIRE(da.samples[i].image == db.samples[i].image);
}

TEST_CASE("generate_synthetic rejects bad specs") {
  Rng rng(1);
  TaskSpec tiny;
  tiny.height = 6;
  CHECK_THROWS_AS(generate_synthetic(tiny, rng), std::invalid_argument);
  TaskSpec few;
  few.samples = 3;
  CHECK_THROWS_AS(generate_synthetic(few, rng), std::invalid_argument);
  TaskSpec rgb;
  rgb.channels = 3;
  rgb.samples = 8;
  CHECK(generate_synthetic(rgb, rng).samples[0].image.shape() == Shape{32, 32, 3});
}

TEST_CASE("glyphs differ between classes") {
  TaskSpec spec;
  spec.noise_sigma = 0.0;
  spec.classes = 10;
  spec.samples = 10;
  Rng rng(3);
  auto ds = generate_synthetic(spec, rng);
  std::set<std::vector<double>> distinct;
  for (const Sample& s : ds.samples) distinct.emplace(s.image.values().begin(), s.image.values().end());
  CHECK(distinct.size() == 10);
}

TEST_CASE("pgm round trip") {
  TempDir dir("occur_pgm_test");
  std::vector<double> px(12);
  for (std::size_t i = 0; i < 12; ++i) px[i] = static_cast<double>(i * 20) / 255.0;
  DenseArray img({3, 4}, px);
  write_pgm(dir.path / "a.pgm", img);
  DenseArray back = read_pgm(dir.path / "a.pgm");
  CHECK(back.shape() == Shape{3, 4});
  for (std::size_t i = 0; i < 12; ++i) CHECK(back[i] == doctest::Approx(px[i]).epsilon(1e-12));
}

TEST_CASE("load_directory examples") {
  TempDir dir("occur_load_test");
  write_image(dir.path / "yes" / "1.pgm", 0.9);
  write_image(dir.path / "no" / "1.pgm", 0.1);
  write_image(dir.path / "no" / "2.pgm", 0.2);
  auto ds = load_directory(dir.path, 8, 8);
  CHECK(ds.classes() == 2);
  CHECK(ds.class_names == std::vector<std::string>{"no", "yes"});
  CHECK(ds.samples.size() == 3);
  CHECK(ds.samples.back().label == 1);
  CHECK(ds.samples.front().label == 0);

  TempDir four("occur_load_four");
  for (const char* c : {"a", "b", "c", "d"}) write_image(four.path / c / "x.pgm", 0.5);
  CHECK(load_directory(four.path, 4, 4).classes() == 4);

  TempDir resized("occur_load_resize");
  write_image(resized.path / "a" / "x.pgm", 0.5);
  write_image(resized.path / "b" / "x.pgm", 0.5);
  CHECK(load_directory(resized.path, 16, 12).samples[0].image.shape() == Shape{16, 12});
}

TEST_CASE("load_directory errors") {
  TempDir dir("occur_load_err");
  write_image(dir.path / "a" / "1.pgm", 0.5);
  fs::create_directories(dir.path / "b");
  CHECK_THROWS(load_directory(dir.path, 8, 8));

  {
    std::ofstream bad(dir.path / "b" / "broken.pgm", std::ios::binary);
    bad << "P2\n8 8\n255\n";
  }
  try {
    load_directory(dir.path, 8, 8);
    FAIL("expected error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("broken.pgm") != std::string::npos);
  }
}

TEST_CASE("split is stratified, reproducible and lossless") {
  TaskSpec spec;
  Rng rng(4);
  auto ds = generate_synthetic(spec, rng);
  Rng s1(9), s2(9);
  auto parts = split(ds, {0.8, 0.1, 0.1}, s1);
  CHECK(parts.train.samples.size() == 320);
  CHECK(parts.val.samples.size() == 40);
  CHECK(parts.test.samples.size() == 40);
  for (std::size_t c : parts.train.class_counts()) CHECK(c == 80);
  for (std::size_t c : parts.val.class_counts()) CHECK(c == 10);
  for (std::size_t c : parts.test.class_counts()) CHECK(c == 10);

  auto again = split(ds, {0.8, 0.1, 0.1}, s2);
  auto ids = [](const LabeledDataset& d) {
    std::vector<std::size_t> out;
    for (const Sample& s : d.samples) out.push_back(s.origin_index);
    return out;
  };
  CHECK(ids(parts.test) == ids(again.test));

  std::multiset<std::pair<std::size_t, std::size_t>> original, merged;
  for (const Sample& s : ds.samples) original.emplace(s.origin_index, s.label);
  for (const auto* part : {&parts.train, &parts.val, &parts.test})
    for (const Sample& s : part->samples) merged.emplace(s.origin_index, s.label);
  CHECK(original == merged);

  TaskSpec small = spec;
  small.samples = 8;
  Rng r(1);
  auto tiny = generate_synthetic(small, r);
  CHECK_THROWS_AS(split(tiny, {0.8, 0.1, 0.1}, r), std::invalid_argument);
}

TEST_CASE("normalize examples") {
  TaskSpec spec;
  spec.samples = 8;
  Rng rng(6);
  auto ds = generate_synthetic(spec, rng);
  auto same = normalize(ds);
  CHECK_FALSE(same.degenerate);
  for (std::size_t i = 0; i < ds.samples.size(); ++i)
    for (std::size_t p = 0; p < ds.samples[i].image.size(); ++p)
      REQUIRE(std::abs(same.data.samples[i].image[p] - ds.samples[i].image[p]) <= 1e-12);

  LabeledDataset bytes;
  bytes.class_names = {"a"};
  Sample s;
  s.image = DenseArray({2, 2}, {0, 51, 102, 255});
  bytes.samples.push_back(s);
  auto scaled = normalize(bytes);
  CHECK(scaled.data.samples[0].image == DenseArray({2, 2}, {0, 0.2, 0.4, 1.0}));

  LabeledDataset constant;
  constant.class_names = {"a"};
  s.image = DenseArray::filled({2, 2}, 7.0);
  constant.samples.push_back(s);
  auto flat = normalize(constant);
  CHECK(flat.degenerate);
  CHECK(flat.data.samples[0].image == DenseArray::filled({2, 2}, 0.0));
}

TEST_CASE("test data is normalized with train parameters") {
  LabeledDataset train, test;
  train.class_names = test.class_names = {"a"};
  Sample s;
  s.image = DenseArray({2}, {0, 200});
  train.samples.push_back(s);
  s.image = DenseArray({2}, {100, 300});
  test.samples.push_back(s);
  auto fitted = normalize(train);
  auto applied = apply_normalization(test, fitted.params);
  CHECK(applied.samples[0].image == DenseArray({2}, {0.5, 1.5}));
  // refitting on test would give different values, so no leakage happened
  CHECK_FALSE(normalize(test).data.samples[0].image == applied.samples[0].image);
}
