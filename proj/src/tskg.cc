#include "ahsecagg/tskg.h"

#include <algorithm>

#include "ahsecagg/crypto.h"

namespace ahsecagg {

GroupElement tskg_temp_key(const Group& g, uint64_t s, const Bytes& nonce) {
  return g.exp(g.hash_to_group(nonce), s);
}

GroupElement tskg_sub_sig(const Group& g, uint64_t share, const Bytes& nonce) {
  return tskg_temp_key(g, share, nonce);
}

GroupElement tskg_reconstruct(const Group& g, const Field& f, uint32_t t,
                              std::vector<std::pair<ShareIndex, GroupElement>> sub_sigs) {
  if (g.order() != mpz_class(f.p())) {
    throw ConfigError("tskg_reconstruct: group order must equal the exponent field prime");
  }
  if (sub_sigs.size() < t) throw InsufficientShares("tskg_reconstruct: fewer than t sub-signatures");
  std::sort(sub_sigs.begin(), sub_sigs.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  sub_sigs.resize(t);
  CounterScope::bump(&Counters::shamir_reconstructions);
  CounterScope::bump(&Counters::lagrange_terms, t);
  std::vector<ShareIndex> subset;
  subset.reserve(t);
  for (const auto& [x, el] : sub_sigs) subset.push_back(x);
  auto coeffs = lagrange_coeffs(f, subset);
  GroupElement acc = g.identity();
  for (const auto& [x, el] : sub_sigs) acc = g.mul(acc, g.exp(el, coeffs.at(x)));
  return acc;
}

uint64_t ts_trans(const Field& f, const Group& g, const GroupElement& a) {
  Bytes label{'t', 's', '-', 't', 'r', 'a', 'n', 's'};
  Bytes enc = g.encode(a);
  label.insert(label.end(), enc.begin(), enc.end());
  auto digest = sha256(label);
  // Fold the first 16 digest bytes mod p; the bias is below 2^-60 for the
  // default 61-bit prime.
  unsigned __int128 v = 0;
  for (int i = 0; i < 16; ++i) v = (v << 8) | digest[i];
  return static_cast<uint64_t>(v % f.p());
}

}  // namespace ahsecagg
