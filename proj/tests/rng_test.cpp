#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <vector>

#include "adsim/rng.hpp"

namespace adsim {
namespace {

TEST(SplitMix64, MatchesReferenceOutputsForSeedZero) {
  // First outputs of the reference splitmix64.c with x = 0.
  std::uint64_t state = 0;
  EXPECT_EQ(splitmix64(state), 0xE220A8397B1DCDAFULL);
  EXPECT_EQ(splitmix64(state), 0x6E789E6AA1B965F4ULL);
  EXPECT_EQ(splitmix64(state), 0x06C45D188009454FULL);
}

TEST(DeriveSeed, IsDeterministicAndSeparatesStreams) {
  EXPECT_EQ(derive_seed(42, 3), derive_seed(42, 3));
  EXPECT_NE(derive_seed(42, 3), derive_seed(42, 4));
  EXPECT_NE(derive_seed(42, 3), derive_seed(43, 3));
}

TEST(Rng, Mt19937_64StreamIsTheStandardOne) {
  // The 10000th output of a default-seeded mt19937_64 is fixed by the
  // standard; seeding with 5489 reproduces it.
  std::mt19937_64 ref(5489u);
  ref.discard(9999);
  Rng rng(5489u);
  double u = 0.0;
  for (int k = 0; k < 10000; ++k) u = rng.uniform01();
  EXPECT_EQ(u, static_cast<double>(9981545732273789042ULL >> 11) * 0x1.0p-53);
  EXPECT_EQ(ref(), 9981545732273789042ULL);
}

TEST(Rng, Uniform01StaysInHalfOpenUnitInterval) {
  Rng rng(7);
  double sum = 0.0;
  const int n = 200000;
  for (int k = 0; k < n; ++k) {
    const double u = rng.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.5, 0.005);
}

TEST(Rng, CategoricalFrequenciesPassChiSquare) {
  const std::array<double, 4> p = {0.1, 0.2, 0.3, 0.4};
  Rng rng(11);
  std::array<double, 4> counts{};
  const int n = 100000;
  for (int k = 0; k < n; ++k) counts[rng.categorical(p)] += 1.0;
  double chi2 = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double e = p[k] * n;
    chi2 += (counts[k] - e) * (counts[k] - e) / e;
  }
  // 3 degrees of freedom, p = 0.001 critical value.
  EXPECT_LT(chi2, 16.27);
}

TEST(Rng, CategoricalNeverPicksZeroMassEntries) {
  const std::array<double, 3> p = {0.0, 1.0, 0.0};
  Rng rng(3);
  for (int k = 0; k < 1000; ++k) EXPECT_EQ(rng.categorical(p), 1u);
}

TEST(Rng, BelowCoversRangeUniformly) {
  Rng rng(5);
  std::vector<int> counts(3, 0);
  for (int k = 0; k < 30000; ++k) {
    const auto x = rng.below(3);
    ASSERT_LT(x, 3u);
    ++counts[x];
  }
  for (int c : counts) EXPECT_NEAR(c, 10000, 400);
}

TEST(Rng, SameSeedSameStream) {
  Rng a(99), b(99);
  for (int k = 0; k < 100; ++k) EXPECT_EQ(a.uniform01(), b.uniform01());
}

}  // namespace
}  // namespace adsim
