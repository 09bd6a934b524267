#include "ahsecagg/rng.h"

#include <gtest/gtest.h>

#include <set>

namespace ahsecagg {
namespace {

TEST(Rng, DeterministicUnderSeed) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  Rng c(43);
  bool differs = false;
  Rng a2(42);
  for (int i = 0; i < 100; ++i) differs |= (a2.next_u64() != c.next_u64());
  EXPECT_TRUE(differs);
}

TEST(Rng, UniformBelowStaysInRange) {
  Rng rng(1);
  for (uint64_t bound : {uint64_t{1}, uint64_t{2}, uint64_t{7}, uint64_t{1000}, kDefaultPrime}) {
    for (int i = 0; i < 200; ++i) EXPECT_LT(rng.uniform_below(bound), bound);
  }
  EXPECT_THROW(rng.uniform_below(0), DegenerateInput);
}

TEST(Rng, UniformBelowCoversSmallRange) {
  Rng rng(5);
  std::set<uint64_t> seen;
  for (int i = 0; i < 200; ++i) seen.insert(rng.uniform_below(5));
  EXPECT_EQ(seen.size(), 5u);
}

TEST(Rng, FieldElementSampling) {
  Field f(31);
  Rng rng(9);
  for (int i = 0; i < 100; ++i) {
    EXPECT_LT(rng.field_element(f), 31u);
    uint64_t nz = rng.nonzero_field_element(f);
    EXPECT_GE(nz, 1u);
    EXPECT_LT(nz, 31u);
  }
}

TEST(Rng, BytesLengthAndDeterminism) {
  Rng a(8), b(8);
  EXPECT_EQ(a.bytes(33), b.bytes(33));
  EXPECT_EQ(a.bytes(0).size(), 0u);
}

TEST(Rng, ChildStreamsIndependentOfDrawOrder) {
  Rng parent(77);
  parent.next_u64();  // advancing the parent must not change children
  Rng c1 = parent.child(1);
  Rng c2 = Rng(77).child(1);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(c1.next_u64(), c2.next_u64());
  Rng other = parent.child(2);
  EXPECT_NE(parent.child(1).next_u64(), other.next_u64());
}

}  // namespace
}  // namespace ahsecagg
