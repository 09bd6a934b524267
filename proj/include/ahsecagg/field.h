#pragma once

#include <cstdint>

#include "ahsecagg/errors.h"

namespace ahsecagg {

// Default prime modulus for shares, masks and inputs: 2^61 - 1 (Mersenne).
// Large enough that n * (2^32 - 1) never wraps for any realistic user count.
inline constexpr uint64_t kDefaultPrime = 2305843009213693951ULL;

// A prime used by the exhaustive small-field tests.
inline constexpr uint64_t kTinyPrime = 31;

struct FieldParams {
  uint64_t p = kDefaultPrime;
};

// Deterministic Miller-Rabin for 64-bit integers (exact, not probabilistic).
bool is_prime_u64(uint64_t n);

// Arithmetic in Z_p for a word-sized prime p. Values are plain uint64_t,
// always kept reduced. Immutable after construction; operations are pure.
class Field {
 public:
  explicit Field(uint64_t p);

  uint64_t p() const { return p_; }
  uint64_t reduce(uint64_t a) const { return a % p_; }

  uint64_t add(uint64_t a, uint64_t b) const {
    uint64_t s = a + b;  // p < 2^63 so no overflow
    return s >= p_ ? s - p_ : s;
  }
  uint64_t sub(uint64_t a, uint64_t b) const { return a >= b ? a - b : a + p_ - b; }
  uint64_t neg(uint64_t a) const { return a == 0 ? 0 : p_ - a; }
  uint64_t mul(uint64_t a, uint64_t b) const {
    return static_cast<uint64_t>(static_cast<unsigned __int128>(a) * b % p_);
  }
  uint64_t pow(uint64_t a, uint64_t e) const;
  // Multiplicative inverse; inv(0) throws DegenerateInput.
  uint64_t inv(uint64_t a) const;

 private:
  uint64_t p_;
};

}  // namespace ahsecagg
