#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "rmx/random.hpp"

using rmx::RandomStream;

TEST(RandomStream, SameSeedAndSubstreamRepeat) {
  RandomStream a(42, 3), b(42, 3);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(RandomStream, BlockIsPositional) {
  RandomStream a(9, 1);
  const auto b5 = a.block(5);
  for (int i = 0; i < 5; ++i) a.next_u64();
  EXPECT_EQ(a.next_u64(), b5.lo);
}

TEST(RandomStream, SubstreamsAndSplitsDiffer) {
  std::set<std::uint64_t> seen;
  const RandomStream root(1, 0);
  for (std::uint64_t s = 0; s < 64; ++s) {
    seen.insert(RandomStream(1, s).block(0).lo);
    seen.insert(root.split(s).block(0).lo);
  }
  EXPECT_EQ(seen.size(), 128u);
  EXPECT_EQ(root.split(3).substream_index(), RandomStream(1, 0).split(3).substream_index());
}

TEST(RandomStream, UniformAndNormalMoments) {
  RandomStream s(123, 0);
  const int n = 200000;
  double su = 0, su2 = 0, sz = 0, sz2 = 0, sz4 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    su2 += u * u;
    const double z = s.normal();
    sz += z;
    sz2 += z * z;
    sz4 += z * z * z * z;
  }
  EXPECT_NEAR(su / n, 0.5, 0.003);
  EXPECT_NEAR(su2 / n - 0.25, 1.0 / 12.0, 0.002);
  EXPECT_NEAR(sz / n, 0.0, 0.01);
  EXPECT_NEAR(sz2 / n, 1.0, 0.01);
  EXPECT_NEAR(sz4 / n, 3.0, 0.06);
}

TEST(RandomStream, FillNormalOddLength) {
  RandomStream a(5, 5), b(5, 5);
  std::vector<double> v(7);
  a.fill_normal(v);
  const auto p = b.normal_pair();
  EXPECT_EQ(v[0], p[0]);
  EXPECT_EQ(v[1], p[1]);
  for (double x : v) EXPECT_TRUE(std::isfinite(x));
}
