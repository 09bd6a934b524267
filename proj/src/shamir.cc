#include "ahsecagg/shamir.h"

#include <algorithm>
#include <mutex>

namespace ahsecagg {

std::vector<ShareIndex> sss_init(const Field& f, uint32_t n, Rng& rng) {
  if (n >= f.p()) throw DegenerateInput("sss_init: more holders than nonzero field elements");
  std::vector<ShareIndex> X;
  X.reserve(n);
  std::map<ShareIndex, bool> used;
  while (X.size() < n) {
    ShareIndex x = rng.nonzero_field_element(f);
    if (!used[x]) {
      used[x] = true;
      X.push_back(x);
    }
  }
  return X;
}

ShareSet sss_share(const Field& f, uint64_t secret, uint32_t t, const std::vector<ShareIndex>& X,
                   Rng& rng) {
  if (t < 2 || t > X.size()) throw ConfigError("sss_share: threshold out of range");
  CounterScope::bump(&Counters::shamir_sharings);
  std::vector<uint64_t> coeffs(t);
  coeffs[0] = f.reduce(secret);
  for (uint32_t i = 1; i < t; ++i) coeffs[i] = rng.field_element(f);
  ShareSet out;
  out.t = t;
  for (ShareIndex x : X) {
    // Horner evaluation of the sharing polynomial at x.
    uint64_t acc = 0;
    for (uint32_t i = t; i-- > 0;) acc = f.add(f.mul(acc, x), coeffs[i]);
    out.shares[x] = acc;
  }
  return out;
}

std::map<ShareIndex, uint64_t> lagrange_coeffs(const Field& f, std::vector<ShareIndex> subset) {
  std::sort(subset.begin(), subset.end());
  if (std::adjacent_find(subset.begin(), subset.end()) != subset.end()) {
    throw DegenerateInput("lagrange_coeffs: duplicate evaluation points");
  }

  struct Key {
    uint64_t p;
    std::vector<ShareIndex> xs;
    bool operator<(const Key& o) const { return p != o.p ? p < o.p : xs < o.xs; }
  };
  static std::mutex mu;
  static std::map<Key, std::map<ShareIndex, uint64_t>> cache;
  Key key{f.p(), subset};
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }

  std::map<ShareIndex, uint64_t> out;
  for (ShareIndex xj : subset) {
    uint64_t num = 1, den = 1;
    for (ShareIndex xo : subset) {
      if (xo == xj) continue;
      num = f.mul(num, f.neg(xo));
      den = f.mul(den, f.sub(xj, xo));
    }
    out[xj] = f.mul(num, f.inv(den));
  }
  {
    std::lock_guard<std::mutex> lock(mu);
    cache.emplace(std::move(key), out);
  }
  return out;
}

uint64_t sss_reconstruct(const Field& f, uint32_t t, std::vector<Share> shares) {
  if (shares.size() < t) throw InsufficientShares("sss_reconstruct: fewer than t shares");
  std::sort(shares.begin(), shares.end(),
            [](const Share& a, const Share& b) { return a.holder < b.holder; });
  shares.resize(t);
  CounterScope::bump(&Counters::shamir_reconstructions);
  CounterScope::bump(&Counters::lagrange_terms, t);
  std::vector<ShareIndex> subset;
  subset.reserve(t);
  for (const Share& s : shares) subset.push_back(s.holder);
  auto coeffs = lagrange_coeffs(f, subset);
  uint64_t acc = 0;
  for (const Share& s : shares) acc = f.add(acc, f.mul(coeffs.at(s.holder), s.value));
  return acc;
}

ShareSet sss_add(const Field& f, const ShareSet& a, const ShareSet& b) {
  if (a.t != b.t || a.shares.size() != b.shares.size()) {
    throw ConfigError("sss_add: incompatible sharings");
  }
  ShareSet out;
  out.t = a.t;
  for (const auto& [x, va] : a.shares) {
    auto it = b.shares.find(x);
    if (it == b.shares.end()) throw ConfigError("sss_add: holder sets differ");
    out.shares[x] = f.add(va, it->second);
  }
  return out;
}

}  // namespace ahsecagg
