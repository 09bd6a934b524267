#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <mutex>

#include "ahsecagg/encoding.h"
#include "ahsecagg/errors.h"
#include "ahsecagg/field.h"
#include "ahsecagg/group.h"
#include "ahsecagg/rng.h"

namespace ahsecagg {

std::array<uint8_t, 32> sha256(const Bytes& data);

// ---- Diffie-Hellman key agreement -----------------------------------------

struct DhKeyPair {
  mpz_class sk;    // exponent in [1, q)
  GroupElement pk; // g^sk
};

// Samples sk and computes the public key (one setup exponentiation).
DhKeyPair dh_gen(const Group& g, Rng& rng);

// 128-bit symmetric key, derived from a DH shared secret.
struct AeadKey {
  std::array<uint8_t, 16> key{};
  bool operator==(const AeadKey&) const = default;
};

// their_pk^sk followed by key derivation (one agreement exponentiation).
// Symmetric in the two parties. Identity public key throws DegenerateInput.
AeadKey dh_agree(const Group& g, const mpz_class& sk, const GroupElement& their_pk);

// ---- Authenticated encryption (AES-GCM-128) --------------------------------

inline constexpr size_t kAeadNonceLen = 12;
inline constexpr size_t kAeadTagLen = 16;

// Deterministic nonce for the single encryption an ordered (sender, receiver)
// pair performs in a given round: round byte, then both ids big-endian.
std::array<uint8_t, kAeadNonceLen> derive_nonce(uint8_t round, uint32_t sender, uint32_t receiver);

// Returns nonce || ciphertext || tag.
Bytes ae_enc(const AeadKey& key, const Bytes& plaintext, const std::array<uint8_t, kAeadNonceLen>& nonce);
// Throws AuthFailure on tamper or wrong key.
Bytes ae_dec(const AeadKey& key, const Bytes& ciphertext);

// ---- Digital signatures (Ed25519) ------------------------------------------

inline constexpr size_t kSigLen = 64;

struct SigKeyPair {
  Bytes sk;  // 32-byte seed
  Bytes pk;  // 32-byte public key
};

SigKeyPair ds_gen(Rng& rng);
Bytes ds_sign(const Bytes& sk, const Bytes& msg);
// False (never a throw) on bad signature, wrong key, or malformed input.
bool ds_verify(const Bytes& sig, const Bytes& pk, const Bytes& msg);

// ---- Pseudorandom generator (AES-128-CTR keystream mod p) ------------------

// Expands a 16-byte seed into field elements, 8 keystream bytes per element.
// Each expanded element bumps prg_element_expansions. Successive calls
// continue the keystream.
class Prg {
 public:
  explicit Prg(const std::array<uint8_t, 16>& seed);
  static Prg from_key(const AeadKey& key) { return Prg(key.key); }
  // Seed derived by hashing the canonical encoding of a field element.
  static Prg from_field_seed(uint64_t seed);

  std::vector<uint64_t> expand(const Field& f, size_t count);

 private:
  std::array<uint8_t, 16> key_;
  uint64_t counter_ = 0;
};

// ---- PKI bulletin board -----------------------------------------------------

// Append-only identity -> signature-public-key registry. Each identity may
// register exactly once; later attempts are Rejected and never overwrite.
class BulletinBoard {
 public:
  void register_key(uint32_t id, const Bytes& sig_pk);
  Bytes lookup(uint32_t id) const;

 private:
  mutable std::mutex mu_;
  std::map<uint32_t, Bytes> keys_;
};

}  // namespace ahsecagg
