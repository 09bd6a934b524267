#include "ahsecagg/crypto.h"

#include <openssl/evp.h>

#include <cstring>
#include <memory>

#include "ahsecagg/metrics.h"

namespace ahsecagg {

namespace {

struct CtxFree {
  void operator()(EVP_CIPHER_CTX* p) const { EVP_CIPHER_CTX_free(p); }
  void operator()(EVP_MD_CTX* p) const { EVP_MD_CTX_free(p); }
  void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CtxFree>;
using MdCtx = std::unique_ptr<EVP_MD_CTX, CtxFree>;
using Pkey = std::unique_ptr<EVP_PKEY, CtxFree>;

Bytes domain_hash(const char* label, const Bytes& data) {
  Bytes in(label, label + std::strlen(label));
  in.insert(in.end(), data.begin(), data.end());
  auto d = sha256(in);
  return Bytes(d.begin(), d.end());
}

}  // namespace

std::array<uint8_t, 32> sha256(const Bytes& data) {
  std::array<uint8_t, 32> out{};
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr);
  return out;
}

DhKeyPair dh_gen(const Group& g, Rng& rng) {
  mpz_class sk = 1 + mpz_uniform_below(rng, g.order() - 1);
  GroupElement pk = g.exp(g.generator(), sk, ExpKind::kSetup);
  return {std::move(sk), std::move(pk)};
}

AeadKey dh_agree(const Group& g, const mpz_class& sk, const GroupElement& their_pk) {
  if (their_pk == g.identity()) throw DegenerateInput("dh_agree: identity public key");
  GroupElement shared = g.exp(their_pk, sk, ExpKind::kAgreement);
  Bytes digest = domain_hash("aead-key", g.encode(shared));
  AeadKey key;
  std::copy_n(digest.begin(), key.key.size(), key.key.begin());
  return key;
}

std::array<uint8_t, kAeadNonceLen> derive_nonce(uint8_t round, uint32_t sender, uint32_t receiver) {
  std::array<uint8_t, kAeadNonceLen> nonce{};
  nonce[0] = round;
  for (int i = 0; i < 4; ++i) {
    nonce[1 + i] = static_cast<uint8_t>(sender >> (8 * (3 - i)));
    nonce[5 + i] = static_cast<uint8_t>(receiver >> (8 * (3 - i)));
  }
  return nonce;
}

Bytes ae_enc(const AeadKey& key, const Bytes& plaintext, const std::array<uint8_t, kAeadNonceLen>& nonce) {
  CipherCtx ctx(EVP_CIPHER_CTX_new());
  if (EVP_EncryptInit_ex(ctx.get(), EVP_aes_128_gcm(), nullptr, key.key.data(), nonce.data()) != 1) {
    throw std::runtime_error("ae_enc: init failed");
  }
  Bytes out(nonce.begin(), nonce.end());
  out.resize(kAeadNonceLen + plaintext.size() + kAeadTagLen);
  int len = 0;
  if (EVP_EncryptUpdate(ctx.get(), out.data() + kAeadNonceLen, &len, plaintext.data(),
                        static_cast<int>(plaintext.size())) != 1) {
    throw std::runtime_error("ae_enc: update failed");
  }
  int fin = 0;
  EVP_EncryptFinal_ex(ctx.get(), out.data() + kAeadNonceLen + len, &fin);
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kAeadTagLen,
                          out.data() + kAeadNonceLen + plaintext.size()) != 1) {
    throw std::runtime_error("ae_enc: tag failed");
  }
  return out;
}

Bytes ae_dec(const AeadKey& key, const Bytes& ciphertext) {
  if (ciphertext.size() < kAeadNonceLen + kAeadTagLen) throw AuthFailure("ae_dec: too short");
  size_t ct_len = ciphertext.size() - kAeadNonceLen - kAeadTagLen;
  CipherCtx ctx(EVP_CIPHER_CTX_new());
  if (EVP_DecryptInit_ex(ctx.get(), EVP_aes_128_gcm(), nullptr, key.key.data(), ciphertext.data()) != 1) {
    throw std::runtime_error("ae_dec: init failed");
  }
  Bytes out(ct_len);
  int len = 0;
  if (EVP_DecryptUpdate(ctx.get(), out.data(), &len, ciphertext.data() + kAeadNonceLen,
                        static_cast<int>(ct_len)) != 1) {
    throw AuthFailure("ae_dec: update failed");
  }
  Bytes tag(ciphertext.end() - kAeadTagLen, ciphertext.end());
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kAeadTagLen, tag.data()) != 1) {
    throw std::runtime_error("ae_dec: set tag failed");
  }
  int fin = 0;
  if (EVP_DecryptFinal_ex(ctx.get(), out.data() + len, &fin) != 1) {
    throw AuthFailure("ae_dec: authentication failed");
  }
  return out;
}

SigKeyPair ds_gen(Rng& rng) {
  Bytes seed = rng.bytes(32);
  Pkey pkey(EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, seed.data(), seed.size()));
  if (!pkey) throw std::runtime_error("ds_gen: key creation failed");
  Bytes pk(32);
  size_t pk_len = pk.size();
  if (EVP_PKEY_get_raw_public_key(pkey.get(), pk.data(), &pk_len) != 1) {
    throw std::runtime_error("ds_gen: public key extraction failed");
  }
  return {std::move(seed), std::move(pk)};
}

Bytes ds_sign(const Bytes& sk, const Bytes& msg) {
  Pkey pkey(EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, sk.data(), sk.size()));
  if (!pkey) throw std::runtime_error("ds_sign: bad key");
  MdCtx ctx(EVP_MD_CTX_new());
  if (EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, pkey.get()) != 1) {
    throw std::runtime_error("ds_sign: init failed");
  }
  Bytes sig(kSigLen);
  size_t sig_len = sig.size();
  if (EVP_DigestSign(ctx.get(), sig.data(), &sig_len, msg.data(), msg.size()) != 1) {
    throw std::runtime_error("ds_sign: sign failed");
  }
  sig.resize(sig_len);
  return sig;
}

bool ds_verify(const Bytes& sig, const Bytes& pk, const Bytes& msg) {
  if (sig.size() != kSigLen || pk.size() != 32) return false;
  Pkey pkey(EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, pk.data(), pk.size()));
  if (!pkey) return false;
  MdCtx ctx(EVP_MD_CTX_new());
  if (EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr, pkey.get()) != 1) return false;
  return EVP_DigestVerify(ctx.get(), sig.data(), sig.size(), msg.data(), msg.size()) == 1;
}

Prg::Prg(const std::array<uint8_t, 16>& seed) : key_(seed) {}

Prg Prg::from_field_seed(uint64_t seed) {
  Bytes digest = domain_hash("prg-seed", encode_scalar(seed));
  std::array<uint8_t, 16> key{};
  std::copy_n(digest.begin(), key.size(), key.begin());
  return Prg(key);
}

std::vector<uint64_t> Prg::expand(const Field& f, size_t count) {
  CounterScope::bump(&Counters::prg_element_expansions, count);
  CipherCtx ctx(EVP_CIPHER_CTX_new());
  // Resume the keystream at the 16-byte block this instance has reached.
  std::array<uint8_t, 16> iv{};
  uint64_t block = counter_ / 2;  // two 8-byte elements per AES block
  for (int i = 0; i < 8; ++i) iv[8 + i] = static_cast<uint8_t>(block >> (8 * (7 - i)));
  if (EVP_EncryptInit_ex(ctx.get(), EVP_aes_128_ctr(), nullptr, key_.data(), iv.data()) != 1) {
    throw std::runtime_error("prg: init failed");
  }
  bool skip_half = (counter_ % 2) == 1;
  size_t stream_len = (skip_half ? 8 : 0) + count * 8;
  Bytes zeros(stream_len, 0), stream(stream_len);
  int len = 0;
  if (EVP_EncryptUpdate(ctx.get(), stream.data(), &len, zeros.data(), static_cast<int>(stream_len)) != 1) {
    throw std::runtime_error("prg: update failed");
  }
  std::vector<uint64_t> out(count);
  size_t off = skip_half ? 8 : 0;
  for (size_t i = 0; i < count; ++i) {
    uint64_t v = 0;
    for (int k = 0; k < 8; ++k) v = (v << 8) | stream[off + i * 8 + k];
    out[i] = v % f.p();
  }
  counter_ += count;
  return out;
}

void BulletinBoard::register_key(uint32_t id, const Bytes& sig_pk) {
  std::lock_guard<std::mutex> lock(mu_);
  auto [it, inserted] = keys_.emplace(id, sig_pk);
  if (!inserted) throw Rejected("bulletin board: identity already registered");
}

Bytes BulletinBoard::lookup(uint32_t id) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = keys_.find(id);
  if (it == keys_.end()) throw NotFound("bulletin board: unknown identity");
  return it->second;
}

}  // namespace ahsecagg
