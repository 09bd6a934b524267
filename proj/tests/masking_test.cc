#include "ahsecagg/masking.h"

#include <gtest/gtest.h>

#include "ahsecagg/metrics.h"
#include "ahsecagg/rng.h"

namespace ahsecagg {
namespace {

TEST(MaskChain, HandWorkedValues) {
  // r = 2, s = 3 over Z_101: (2*3, 4*3, 8*3) = (6, 12, 24).
  Field f(101);
  EXPECT_EQ(mask_chain(f, 3, {2, 3}), (std::vector<uint64_t>{6, 12, 24}));
}

TEST(MaskChain, ZeroSecretGivesZeroChain) {
  Field f(101);
  EXPECT_EQ(mask_chain(f, 0, {2, 4}), (std::vector<uint64_t>(4, 0)));
}

TEST(MaskChain, DegenerateBaseRejected) {
  Field f(101);
  EXPECT_THROW(mask_chain(f, 3, {0, 2}), ConfigError);
  EXPECT_THROW(mask_chain(f, 3, {1, 2}), ConfigError);
  EXPECT_THROW(mask_chain(f, 3, {101, 2}), ConfigError);
}

TEST(MaskChain, LinearInTheSecret) {
  Field f(kDefaultPrime);
  Rng rng(31);
  MaskParams params{rng.uniform_range(2, f.p() - 1), 64};
  for (int i = 0; i < 50; ++i) {
    uint64_t s1 = rng.field_element(f), s2 = rng.field_element(f);
    auto c1 = mask_chain(f, s1, params);
    auto c2 = mask_chain(f, s2, params);
    auto c12 = mask_chain(f, f.add(s1, s2), params);
    for (size_t k = 0; k < params.m; ++k) EXPECT_EQ(f.add(c1[k], c2[k]), c12[k]);
  }
}

TEST(Mask, HandWorkedValues) {
  Field f(101);
  EXPECT_EQ(mask(f, {1, 1, 1}, 3, {2, 3}), (std::vector<uint64_t>{7, 13, 25}));
}

TEST(Mask, ZeroSecretIsIdentity) {
  Field f(101);
  std::vector<uint64_t> x{10, 20, 30};
  EXPECT_EQ(mask(f, x, 0, {2, 3}), x);
}

TEST(Mask, LengthMismatchRejected) {
  Field f(101);
  EXPECT_THROW(mask(f, {1, 2}, 3, {2, 3}), ConfigError);
}

TEST(Unmask, SingleUserInverse) {
  Field f(kDefaultPrime);
  Rng rng(32);
  MaskParams params{5, 32};
  std::vector<uint64_t> x;
  for (size_t k = 0; k < params.m; ++k) x.push_back(rng.uniform_below(1ull << 32));
  uint64_t s = rng.field_element(f);
  EXPECT_EQ(unmask_sum(f, mask(f, x, s, params), s, params), x);
}

TEST(Unmask, FiveUsersMatchPlainSum) {
  Field f(kDefaultPrime);
  Rng rng(33);
  MaskParams params{rng.uniform_range(2, f.p() - 1), 16};
  std::vector<uint64_t> sum_y(params.m, 0), oracle(params.m, 0);
  uint64_t s_sum = 0;
  for (int u = 0; u < 5; ++u) {
    std::vector<uint64_t> x;
    for (size_t k = 0; k < params.m; ++k) x.push_back(rng.field_element(f));
    uint64_t s = rng.field_element(f);
    s_sum = f.add(s_sum, s);
    auto y = mask(f, x, s, params);
    for (size_t k = 0; k < params.m; ++k) {
      sum_y[k] = f.add(sum_y[k], y[k]);
      oracle[k] = f.add(oracle[k], x[k]);
    }
  }
  EXPECT_EQ(unmask_sum(f, sum_y, s_sum, params), oracle);
}

TEST(Unmask, WrongKeySumDisturbsEveryComponent) {
  Field f(kDefaultPrime);
  Rng rng(34);
  MaskParams params{7, 8};
  std::vector<uint64_t> x(params.m, 1);
  uint64_t s = rng.field_element(f);
  auto y = mask(f, x, s, params);
  auto wrong = unmask_sum(f, y, f.add(s, 1), params);
  for (size_t k = 0; k < params.m; ++k) EXPECT_NE(wrong[k], x[k]);
}

TEST(Unmask, ExactSumInvariantAtScale) {
  Field f(kDefaultPrime);
  Rng rng(35);
  const size_t n = 50, m = 512;
  MaskParams params{rng.uniform_range(2, f.p() - 1), m};
  std::vector<uint64_t> sum_y(m, 0), oracle(m, 0);
  uint64_t s_sum = 0;
  for (size_t u = 0; u < n; ++u) {
    std::vector<uint64_t> x;
    for (size_t k = 0; k < m; ++k) x.push_back(rng.uniform_below(1ull << 32));
    uint64_t s = rng.field_element(f);
    s_sum = f.add(s_sum, s);
    auto y = mask(f, x, s, params);
    for (size_t k = 0; k < m; ++k) {
      sum_y[k] = f.add(sum_y[k], y[k]);
      oracle[k] = f.add(oracle[k], x[k]);
    }
  }
  EXPECT_EQ(unmask_sum(f, sum_y, s_sum, params), oracle);
}

TEST(Unmask, CountsFieldOps) {
  Field f(kDefaultPrime);
  MaskParams params{3, 100};
  Counters c;
  {
    CounterScope scope(&c);
    unmask_sum(f, std::vector<uint64_t>(100, 5), 9, params);
  }
  EXPECT_EQ(c.unmask_field_ops, 200u);
}

TEST(ShareSum, BasicAndMissing) {
  Field f(7);
  std::map<uint32_t, uint64_t> shares{{1, 3}, {2, 5}, {4, 6}};
  EXPECT_EQ(share_sum_for_unmask(f, shares, {1}), 3u);
  EXPECT_EQ(share_sum_for_unmask(f, shares, {1, 2, 4}), 0u);  // 14 mod 7
  EXPECT_EQ(share_sum_for_unmask(f, shares, {}), 0u);
  EXPECT_THROW(share_sum_for_unmask(f, shares, {1, 3}), MissingShare);
}

TEST(MaskedUniformity, ExhaustedOverTinyField) {
  // For every component k, s -> x + r^k s is a bijection of Z_p, so a
  // uniformly random s makes each masked component exactly uniform.
  Field f(kTinyPrime);
  MaskParams params{2, 3};
  std::vector<uint64_t> x{7, 11, 23};
  for (size_t k = 0; k < params.m; ++k) {
    std::vector<int> hits(f.p(), 0);
    for (uint64_t s = 0; s < f.p(); ++s) ++hits[mask(f, x, s, params)[k]];
    for (uint64_t v = 0; v < f.p(); ++v) EXPECT_EQ(hits[v], 1) << "k=" << k << " v=" << v;
  }
}

TEST(RankZp, SmallHandCases) {
  Field f(7);
  EXPECT_EQ(rank_zp(f, {{1, 2}, {2, 4}}), 1u);         // second row is a multiple
  EXPECT_EQ(rank_zp(f, {{1, 0}, {0, 1}}), 2u);
  EXPECT_EQ(rank_zp(f, {{0, 0}, {0, 0}}), 0u);
  EXPECT_EQ(rank_zp(f, {{3, 1, 6}}), 1u);
}

TEST(RankAnalysis, ChainedLayoutIsUnderdetermined) {
  Field f(kDefaultPrime);
  Rng rng(36);
  for (size_t m = 1; m <= 8; ++m) {
    MaskParams params{rng.uniform_range(2, f.p() - 1), m};
    std::vector<uint64_t> x;
    for (size_t k = 0; k < m; ++k) x.push_back(rng.field_element(f));
    auto y = mask(f, x, rng.field_element(f), params);
    MaskEquations eq = build_mask_equations_chained(f, y, params);
    EXPECT_EQ(eq.unknowns, m + 1);
    EXPECT_EQ(rank_zp(f, eq.coeff), m);
    EXPECT_EQ(rank_zp(f, eq.augmented), m);  // consistent, never contradictory
  }
}

TEST(RankAnalysis, PerComponentLayoutHasTwiceTheUnknowns) {
  Field f(kDefaultPrime);
  Rng rng(37);
  for (size_t m = 1; m <= 8; ++m) {
    std::vector<uint64_t> y;
    for (size_t k = 0; k < m; ++k) y.push_back(rng.field_element(f));
    MaskEquations eq = build_mask_equations_per_component(f, y);
    EXPECT_EQ(eq.unknowns, 2 * m);
    EXPECT_EQ(rank_zp(f, eq.coeff), m);
    EXPECT_EQ(rank_zp(f, eq.augmented), m);
  }
}

TEST(RankAnalysis, SingleComponentCase) {
  Field f(101);
  MaskParams params{2, 1};
  auto eq = build_mask_equations_chained(f, {55}, params);
  EXPECT_EQ(eq.unknowns, 2u);   // one equation, two unknowns
  EXPECT_EQ(rank_zp(f, eq.coeff), 1u);
}

}  // namespace
}  // namespace ahsecagg
