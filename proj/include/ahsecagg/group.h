#pragma once

#include <gmpxx.h>

#include <cstdint>

#include "ahsecagg/encoding.h"
#include "ahsecagg/errors.h"
#include "ahsecagg/metrics.h"
#include "ahsecagg/rng.h"

namespace ahsecagg {

// Which counter a group exponentiation is charged to. Key agreements and key
// generation are tracked separately so per-user agreement counts can be
// compared across schemes without the setup cost.
enum class ExpKind { kAgreement, kSetup, kOther };

class Group;

// Opaque element of a prime-order multiplicative subgroup of Z_P*.
class GroupElement {
 public:
  GroupElement() : v_(0) {}
  explicit GroupElement(mpz_class v) : v_(std::move(v)) {}

  const mpz_class& value() const { return v_; }
  bool operator==(const GroupElement& o) const { return v_ == o.v_; }
  bool operator!=(const GroupElement& o) const { return v_ != o.v_; }

 private:
  mpz_class v_;
};

// Prime-order cyclic subgroup of Z_P* with a fixed generator. Two deployment
// profiles exist for each role: a 64-bit "desk" profile for tests and a
// 2048-bit production profile. The key-agreement groups are quadratic-residue
// subgroups of safe primes; the mask groups have order equal to the share
// field's prime p so that Lagrange interpolation in the exponent is exact.
class Group {
 public:
  Group(mpz_class modulus, mpz_class order, mpz_class generator);

  // 64-bit safe prime P = 2q + 1; subgroup of order q, generator 4.
  static const Group& desk_dh();
  // 67-bit modulus P = 52 * (2^61 - 1) + 1; subgroup of order 2^61 - 1.
  static const Group& desk_mask();
  // RFC 3526 2048-bit MODP safe prime; subgroup of order (P-1)/2, generator 4.
  static const Group& production_dh();
  // 2048-bit modulus P = c * (2^61 - 1) + 1 with c = 2^1987 + 3352;
  // subgroup of order 2^61 - 1, generator 2^c mod P.
  static const Group& production_mask();

  const mpz_class& modulus() const { return p_; }
  const mpz_class& order() const { return q_; }
  // Order as a word; throws ConfigError if it does not fit.
  uint64_t order_u64() const;
  GroupElement generator() const { return GroupElement(g_); }
  GroupElement identity() const { return GroupElement(1); }

  bool is_element(const GroupElement& a) const;
  GroupElement mul(const GroupElement& a, const GroupElement& b) const;
  // Bumps the group_inversions counter.
  GroupElement inverse(const GroupElement& a) const;
  // base^e with e taken mod the group order; bumps the counter named by kind.
  GroupElement exp(const GroupElement& base, const mpz_class& e, ExpKind kind = ExpKind::kOther) const;
  GroupElement exp(const GroupElement& base, uint64_t e, ExpKind kind = ExpKind::kOther) const;

  // Deterministic hash onto the group: generator^(H(msg) mod order).
  GroupElement hash_to_group(const Bytes& msg) const;

  // Canonical encoding: 2-byte big-endian length + minimal big-endian bytes.
  Bytes encode(const GroupElement& a) const;
  // Decodes and verifies group membership; throws DecodeError otherwise.
  GroupElement decode(const Bytes& b) const;

  // Uniform element of [0, order) for use as an exponent.
  mpz_class random_exponent(Rng& rng) const;

 private:
  mpz_class pow_uncounted(const mpz_class& base, const mpz_class& e) const;
  mpz_class p_, q_, g_;
};

// Uniform integer in [0, bound) drawn from the given stream by rejection.
mpz_class mpz_uniform_below(Rng& rng, const mpz_class& bound);

// Minimal big-endian magnitude bytes of a non-negative integer.
Bytes mpz_to_bytes(const mpz_class& v);
mpz_class mpz_from_bytes(const Bytes& b);

}  // namespace ahsecagg
