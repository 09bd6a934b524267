#include "ahsecagg/tskg.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "ahsecagg/crypto.h"

namespace ahsecagg {
namespace {

const Group& G() { return Group::desk_mask(); }

TEST(TempKey, ZeroSecretGivesIdentity) {
  EXPECT_EQ(tskg_temp_key(G(), 0, {1, 2, 3}), G().identity());
}

TEST(TempKey, Deterministic) {
  Bytes nonce{9, 9, 9};
  EXPECT_EQ(tskg_temp_key(G(), 77, nonce), tskg_temp_key(G(), 77, nonce));
}

TEST(TempKey, FreshNoncesGiveFreshKeys) {
  Rng rng(41);
  Field f(kDefaultPrime);
  uint64_t s = rng.field_element(f);
  std::set<Bytes> seen;
  for (int i = 0; i < 10000; ++i) {
    seen.insert(G().encode(tskg_temp_key(G(), s, rng.bytes(32))));
  }
  EXPECT_EQ(seen.size(), 10000u);
}

TEST(SubSig, MatchesTempKeyOnShareValue) {
  Bytes nonce{5, 4, 3};
  EXPECT_EQ(tskg_sub_sig(G(), 0, nonce), G().identity());
  EXPECT_EQ(tskg_sub_sig(G(), 1234, nonce), tskg_temp_key(G(), 1234, nonce));
}

TEST(Reconstruct, EveryTSubsetEqualsDirectTempKey) {
  Field f(kDefaultPrime);
  Rng rng(42);
  const uint32_t n = 5, t = 3;
  auto X = sss_init(f, n, rng);
  uint64_t s = rng.field_element(f);
  Bytes nonce = rng.bytes(32);
  ShareSet set = sss_share(f, s, t, X, rng);
  GroupElement expected = tskg_temp_key(G(), s, nonce);

  std::vector<std::pair<ShareIndex, GroupElement>> subs;
  for (const auto& [x, v] : set.shares) subs.push_back({x, tskg_sub_sig(G(), v, nonce)});

  std::vector<bool> pick(n, false);
  std::fill(pick.begin(), pick.begin() + t, true);
  do {
    std::vector<std::pair<ShareIndex, GroupElement>> chosen;
    for (uint32_t i = 0; i < n; ++i) {
      if (pick[i]) chosen.push_back(subs[i]);
    }
    EXPECT_EQ(tskg_reconstruct(G(), f, t, chosen), expected);
  } while (std::prev_permutation(pick.begin(), pick.end()));
}

TEST(Reconstruct, RandomInstancesExact) {
  Field f(kDefaultPrime);
  Rng rng(43);
  for (int trial = 0; trial < 100; ++trial) {
    uint32_t n = static_cast<uint32_t>(rng.uniform_range(3, 9));
    uint32_t t = static_cast<uint32_t>(rng.uniform_range(2, n));
    auto X = sss_init(f, n, rng);
    uint64_t s = rng.field_element(f);
    Bytes nonce = rng.bytes(32);
    ShareSet set = sss_share(f, s, t, X, rng);
    std::vector<std::pair<ShareIndex, GroupElement>> subs;
    for (const auto& [x, v] : set.shares) subs.push_back({x, tskg_sub_sig(G(), v, nonce)});
    // A random subset of size >= t.
    std::shuffle(subs.begin(), subs.end(),
                 std::mt19937_64(static_cast<uint64_t>(trial)));
    subs.resize(rng.uniform_range(t, n));
    EXPECT_EQ(tskg_reconstruct(G(), f, t, subs), tskg_temp_key(G(), s, nonce));
  }
}

TEST(Reconstruct, BelowThresholdThrows) {
  Field f(kDefaultPrime);
  Rng rng(44);
  auto X = sss_init(f, 4, rng);
  ShareSet set = sss_share(f, 5, 3, X, rng);
  Bytes nonce = rng.bytes(32);
  std::vector<std::pair<ShareIndex, GroupElement>> subs;
  for (const auto& [x, v] : set.shares) {
    subs.push_back({x, tskg_sub_sig(G(), v, nonce)});
    if (subs.size() == 2) break;
  }
  EXPECT_THROW(tskg_reconstruct(G(), f, 3, subs), InsufficientShares);
}

TEST(Reconstruct, GroupOrderMismatchRejected) {
  Field f(kDefaultPrime);
  EXPECT_THROW(tskg_reconstruct(Group::desk_dh(), f, 2, {}), ConfigError);
}

TEST(Reconstruct, CounterSemantics) {
  Field f(kDefaultPrime);
  Rng rng(45);
  auto X = sss_init(f, 5, rng);
  ShareSet set = sss_share(f, 5, 3, X, rng);
  Bytes nonce = rng.bytes(32);
  std::vector<std::pair<ShareIndex, GroupElement>> subs;
  for (const auto& [x, v] : set.shares) subs.push_back({x, tskg_sub_sig(G(), v, nonce)});
  Counters c;
  {
    CounterScope scope(&c);
    tskg_reconstruct(G(), f, 3, subs);
  }
  EXPECT_EQ(c.shamir_reconstructions, 1u);
  EXPECT_EQ(c.lagrange_terms, 3u);
  EXPECT_EQ(c.modexp_other, 3u);
}

TEST(Trans, DeterministicAndCollisionFree) {
  Field f(kDefaultPrime);
  Rng rng(46);
  GroupElement el = G().exp(G().generator(), uint64_t{99});
  EXPECT_EQ(ts_trans(f, G(), el), ts_trans(f, G(), el));
  std::set<uint64_t> seen;
  for (int i = 0; i < 10000; ++i) {
    seen.insert(ts_trans(f, G(), G().exp(G().generator(), rng.uniform_below(G().order_u64()))));
  }
  EXPECT_GE(seen.size(), 9999u);  // no collisions expected at this sample size
}

TEST(Trans, ServerAndUserSidesAgree) {
  Field f(kDefaultPrime);
  Rng rng(47);
  const uint32_t n = 6, t = 4;
  auto X = sss_init(f, n, rng);
  uint64_t s = rng.field_element(f);
  Bytes nonce = rng.bytes(32);
  ShareSet set = sss_share(f, s, t, X, rng);
  std::vector<std::pair<ShareIndex, GroupElement>> subs;
  for (const auto& [x, v] : set.shares) subs.push_back({x, tskg_sub_sig(G(), v, nonce)});
  uint64_t server_view = ts_trans(f, G(), tskg_reconstruct(G(), f, t, subs));
  uint64_t user_view = ts_trans(f, G(), tskg_temp_key(G(), s, nonce));
  EXPECT_EQ(server_view, user_view);
}

}  // namespace
}  // namespace ahsecagg
