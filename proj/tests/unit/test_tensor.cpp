#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "doctest.h"
#include "occur/tensor.hpp"

using namespace occur;

TEST_CASE("elementwise_mul examples") {
  DenseArray a({3}, {1, 2, 3});
  CHECK(elementwise_mul(a, DenseArray({3}, {1, 1, 1})) == a);
  CHECK(elementwise_mul(a, DenseArray({3}, {0, 0, 0})) == DenseArray({3}, {0, 0, 0}));
  CHECK(elementwise_mul(DenseArray({2}, {2, 4}), DenseArray({2}, {0, 1})) == DenseArray({2}, {0, 4}));
}

TEST_CASE("elementwise_mul broadcasts a mask over the channel axis") {
  DenseArray rgb({1, 2, 3}, {1, 2, 3, 4, 5, 6});
  DenseArray mask({1, 2}, {0, 1});
  CHECK(elementwise_mul(rgb, mask) == DenseArray({1, 2, 3}, {0, 0, 0, 4, 5, 6}));
}

TEST_CASE("elementwise_mul shape mismatch names both shapes") {
  try {
    elementwise_mul(DenseArray({2, 2}), DenseArray({3}));
    FAIL("expected throw");
  } catch (const std::invalid_argument& e) {
    std::string msg = e.what();
    CHECK(msg.find("[2x2]") != std::string::npos);
    CHECK(msg.find("[3]") != std::string::npos);
  }
}

TEST_CASE("DenseArray rejects non-finite values and bad shapes") {
  CHECK_THROWS_AS(DenseArray({2}, {1.0, std::numeric_limits<double>::quiet_NaN()}), std::domain_error);
  CHECK_THROWS_AS(DenseArray({2}, {1.0, INFINITY}), std::domain_error);
  CHECK_THROWS_AS(DenseArray({2, 2}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("indexing is row-major") {
  DenseArray a({2, 3}, {0, 1, 2, 3, 4, 5});
  CHECK(a.at(1, 2) == 5);
  DenseArray b({2, 2, 2}, {0, 1, 2, 3, 4, 5, 6, 7});
  CHECK(b.at(1, 0, 1) == 5);
}

TEST_CASE("rng_uniform range and determinism") {
  Rng rng(7);
  double a = rng_uniform(rng, 0.0, 1.0);
  double b = rng_uniform(rng, 0.0, 1.0);
  CHECK(a != b);
  CHECK((a >= 0.0 && a < 1.0));
  CHECK((b >= 0.0 && b < 1.0));

  Rng x(42), y(42);
  for (int i = 0; i < 1000; ++i) REQUIRE(x.uniform(-3.0, 5.0) == y.uniform(-3.0, 5.0));

  CHECK_THROWS_AS(rng_uniform(rng, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(rng_uniform(rng, 2.0, 1.0), std::invalid_argument);
}

TEST_CASE("rng_uniform sample mean over 1e5 draws") {
  Rng rng(2024);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += rng_uniform(rng, 0.0, 1.0);
  CHECK(std::abs(sum / n - 0.5) <= 0.01);
}

TEST_CASE("rng state round-trips and forks are reproducible") {
  Rng rng(99);
  for (int i = 0; i < 17; ++i) rng.next_u64();
  Rng restored = Rng::from_state(rng.seed(), rng.state());
  for (int i = 0; i < 100; ++i) REQUIRE(rng.next_u64() == restored.next_u64());

  Rng p1(5), p2(5);
  Rng c1 = p1.fork(), c2 = p2.fork();
  CHECK(c1 == c2);
  CHECK(c1.next_u64() != p1.next_u64());
}

TEST_CASE("uniform_index and normal are well behaved") {
  Rng rng(3);
  std::vector<int> hits(5, 0);
  for (int i = 0; i < 5000; ++i) ++hits[rng.uniform_index(5)];
  for (int h : hits) CHECK(h > 800);

  double sum = 0.0, sq = 0.0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  CHECK(std::abs(sum / n) < 0.02);
  CHECK(std::abs(sq / n - 1.0) < 0.03);
}

TEST_CASE("shuffle is a permutation") {
  Rng rng(11);
  std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  rng.shuffle(std::span<int>(v));
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
}
