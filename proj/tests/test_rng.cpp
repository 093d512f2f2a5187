#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "hlora/rng.hpp"

using hlora::SeededRng;
using hlora::stream_id;

TEST(SeededRng, SameKeySameSequence) {
  SeededRng a(42, stream_id("data"));
  SeededRng b(42, stream_id("data"));
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(a.next_u64(), b.next_u64());
  }
}

TEST(SeededRng, StreamsDiffer) {
  SeededRng a(42, stream_id("train", 1, 2));
  SeededRng b(42, stream_id("train", 1, 3));
  SeededRng c(43, stream_id("train", 1, 2));
  const auto x = a.next_u64();
  EXPECT_NE(x, b.next_u64());
  EXPECT_NE(x, c.next_u64());
  EXPECT_NE(stream_id("sample", 1), stream_id("train", 1));
}

TEST(SeededRng, UniformMoments) {
  SeededRng rng(1, 0);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.5, 0.005);
}

TEST(SeededRng, NormalMoments) {
  SeededRng rng(2, 0);
  double sum = 0.0;
  double sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.02);
}

TEST(SeededRng, UniformIntCoversRangeEvenly) {
  SeededRng rng(3, 0);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const auto v = rng.uniform_int(2, 8);
    ASSERT_GE(v, 2);
    ASSERT_LE(v, 8);
    ++counts[static_cast<std::size_t>(v - 2)];
  }
  for (const int c : counts) {
    EXPECT_NEAR(c, 10000, 500);
  }
  EXPECT_EQ(rng.uniform_int(5, 5), 5);
}

TEST(SeededRng, GammaMean) {
  for (const double shape : {0.1, 0.3, 1.0, 4.5}) {
    SeededRng rng(4, 0);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      sum += rng.gamma(shape);
    }
    EXPECT_NEAR(sum / n, shape, 0.03 * std::max(shape, 1.0)) << "shape " << shape;
  }
}

TEST(SeededRng, DirichletOnSimplex) {
  SeededRng rng(5, 0);
  for (const double alpha : {0.05, 1.0, 1000.0}) {
    const auto p = rng.dirichlet(alpha, 10);
    double total = 0.0;
    for (const double v : p) {
      EXPECT_GE(v, 0.0);
      total += v;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(SeededRng, ShuffleIsPermutation) {
  SeededRng rng(6, 0);
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) {
    v[static_cast<std::size_t>(i)] = i;
  }
  rng.shuffle(std::span<int>(v));
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) {
    EXPECT_EQ(sorted[static_cast<std::size_t>(i)], i);
  }
}
