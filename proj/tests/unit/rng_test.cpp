#include <gtest/gtest.h>

#include <numeric>

#include "hetlink/rng.hpp"

namespace hetlink {
namespace {

TEST(Rng, SameSeedSameSequence) {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    EXPECT_NE(x, c.next_u64());
  }
}

TEST(Rng, StreamsAreIndependentAndStable) {
  EXPECT_EQ(Rng::stream(7, "dropout", 3).next_u64(), Rng::stream(7, "dropout", 3).next_u64());
  EXPECT_NE(Rng::stream(7, "dropout", 3).next_u64(), Rng::stream(7, "dropout", 4).next_u64());
  EXPECT_NE(Rng::stream(7, "dropout", 3).next_u64(), Rng::stream(7, "shuffle", 3).next_u64());
  EXPECT_NE(Rng::stream(7, "dropout").next_u64(), Rng::stream(8, "dropout").next_u64());
}

TEST(Rng, BelowIsInRangeAndRoughlyUniform) {
  Rng r(1);
  std::array<int, 7> counts{};
  for (int i = 0; i < 70000; ++i) ++counts[r.below(7)];
  for (int c : counts) EXPECT_NEAR(c, 10000, 500);
}

TEST(Rng, UniformAndNormalMoments) {
  Rng r(2);
  double su = 0, sn = 0, sn2 = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    const double z = r.normal();
    sn += z;
    sn2 += z * z;
  }
  EXPECT_NEAR(su / n, 0.5, 0.01);
  EXPECT_NEAR(sn / n, 0.0, 0.02);
  EXPECT_NEAR(sn2 / n, 1.0, 0.02);
}

TEST(Rng, ShuffleIsAPermutation) {
  Rng r(3);
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  auto w = v;
  r.shuffle(std::span(w));
  EXPECT_NE(w, v);
  std::sort(w.begin(), w.end());
  EXPECT_EQ(w, v);
}

}  // namespace
}  // namespace hetlink
