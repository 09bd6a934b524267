#include "ahsecagg/group.h"

#include "ahsecagg/crypto.h"
#include "ahsecagg/field.h"

namespace ahsecagg {

namespace {

// RFC 3526, 2048-bit MODP group modulus.
const char* kRfc3526Modulus2048 =
    "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD129024E088A67CC74"
    "020BBEA63B139B22514A08798E3404DDEF9519B3CD3A431B302B0A6DF25F1437"
    "4FE1356D6D51C245E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7ED"
    "EE386BFB5A899FA5AE9F24117C4B1FE649286651ECE45B3DC2007CB8A163BF05"
    "98DA48361C55D39A69163FA8FD24CF5F83655D23DCA3AD961C62F356208552BB"
    "9ED529077096966D670C354E4ABC9804F1746C08CA18217C32905E462E36CE3B"
    "E39E772C180E86039B2783A2EC07A28FB5C55DF06F4C52C9DE2BCBF695581718"
    "3995497CEA956AE515D2261898FA051015728E5A8AACAA68FFFFFFFFFFFFFFFF";

}  // namespace

Group::Group(mpz_class modulus, mpz_class order, mpz_class generator)
    : p_(std::move(modulus)), q_(std::move(order)), g_(std::move(generator)) {
  if (p_ < 5 || q_ < 2 || g_ <= 1 || g_ >= p_) throw ConfigError("Group: bad parameters");
  if (pow_uncounted(g_, q_) != 1) throw ConfigError("Group: generator order mismatch");
}

const Group& Group::desk_dh() {
  static const Group g(mpz_class("18446744073709550147"), mpz_class("9223372036854775073"),
                       mpz_class(4));
  return g;
}

const Group& Group::desk_mask() {
  static const Group g(mpz_class(52) * mpz_class(kDefaultPrime) + 1, mpz_class(kDefaultPrime),
                       mpz_class(1) << 52);
  return g;
}

const Group& Group::production_dh() {
  static const Group g = [] {
    mpz_class p(kRfc3526Modulus2048, 16);
    return Group(p, (p - 1) / 2, mpz_class(4));
  }();
  return g;
}

const Group& Group::production_mask() {
  static const Group g = [] {
    mpz_class c = (mpz_class(1) << 1987) + 3352;
    mpz_class p = c * mpz_class(kDefaultPrime) + 1;
    mpz_class gen;
    mpz_powm(gen.get_mpz_t(), mpz_class(2).get_mpz_t(), c.get_mpz_t(), p.get_mpz_t());
    return Group(p, mpz_class(kDefaultPrime), gen);
  }();
  return g;
}

uint64_t Group::order_u64() const {
  if (!q_.fits_ulong_p()) throw ConfigError("Group: order exceeds 64 bits");
  return mpz_get_ui(q_.get_mpz_t());
}

mpz_class Group::pow_uncounted(const mpz_class& base, const mpz_class& e) const {
  mpz_class r;
  mpz_powm(r.get_mpz_t(), base.get_mpz_t(), e.get_mpz_t(), p_.get_mpz_t());
  return r;
}

bool Group::is_element(const GroupElement& a) const {
  if (a.value() < 1 || a.value() >= p_) return false;
  return pow_uncounted(a.value(), q_) == 1;
}

GroupElement Group::mul(const GroupElement& a, const GroupElement& b) const {
  return GroupElement(a.value() * b.value() % p_);
}

GroupElement Group::inverse(const GroupElement& a) const {
  CounterScope::bump(&Counters::group_inversions);
  mpz_class r;
  if (mpz_invert(r.get_mpz_t(), a.value().get_mpz_t(), p_.get_mpz_t()) == 0) {
    throw DegenerateInput("Group: element not invertible");
  }
  return GroupElement(r);
}

GroupElement Group::exp(const GroupElement& base, const mpz_class& e, ExpKind kind) const {
  switch (kind) {
    case ExpKind::kAgreement: CounterScope::bump(&Counters::modexp_agreement); break;
    case ExpKind::kSetup: CounterScope::bump(&Counters::modexp_setup); break;
    case ExpKind::kOther: CounterScope::bump(&Counters::modexp_other); break;
  }
  mpz_class r = e % q_;
  if (r < 0) r += q_;
  return GroupElement(pow_uncounted(base.value(), r));
}

GroupElement Group::exp(const GroupElement& base, uint64_t e, ExpKind kind) const {
  return exp(base, mpz_class(static_cast<unsigned long>(e)), kind);
}

GroupElement Group::hash_to_group(const Bytes& msg) const {
  auto digest = sha256(msg);
  mpz_class h;
  mpz_import(h.get_mpz_t(), digest.size(), 1, 1, 1, 0, digest.data());
  return exp(GroupElement(g_), h % q_, ExpKind::kOther);
}

Bytes Group::encode(const GroupElement& a) const {
  ByteWriter w;
  w.magnitude(mpz_to_bytes(a.value()));
  return w.take();
}

GroupElement Group::decode(const Bytes& b) const {
  ByteReader r(b);
  GroupElement el(mpz_from_bytes(r.magnitude()));
  r.expect_done();
  if (!is_element(el)) throw DecodeError("Group: not a group element");
  return el;
}

mpz_class Group::random_exponent(Rng& rng) const { return mpz_uniform_below(rng, q_); }

mpz_class mpz_uniform_below(Rng& rng, const mpz_class& bound) {
  if (bound <= 0) throw DegenerateInput("mpz_uniform_below: bound must be positive");
  size_t bits = mpz_sizeinbase(bound.get_mpz_t(), 2);
  size_t words = (bits + 63) / 64;
  // Top-word mask keeps the rejection rate below 1/2 per draw.
  int top_bits = static_cast<int>(bits - 64 * (words - 1));
  uint64_t mask = top_bits >= 64 ? ~uint64_t{0} : ((uint64_t{1} << top_bits) - 1);
  for (;;) {
    mpz_class v = 0;
    for (size_t i = 0; i < words; ++i) {
      uint64_t w = rng.next_u64();
      if (i == 0) w &= mask;
      v <<= 64;
      v += mpz_class(static_cast<unsigned long>(w));
    }
    if (v < bound) return v;
  }
}

Bytes mpz_to_bytes(const mpz_class& v) {
  if (v < 0) throw DegenerateInput("mpz_to_bytes: negative");
  if (v == 0) return {};
  size_t count = 0;
  Bytes out((mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8);
  mpz_export(out.data(), &count, 1, 1, 1, 0, v.get_mpz_t());
  out.resize(count);
  return out;
}

mpz_class mpz_from_bytes(const Bytes& b) {
  mpz_class v;
  mpz_import(v.get_mpz_t(), b.size(), 1, 1, 1, 0, b.data());
  return v;
}

}  // namespace ahsecagg
