#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "ahsecagg/errors.h"
#include "ahsecagg/field.h"
#include "ahsecagg/metrics.h"
#include "ahsecagg/rng.h"

namespace ahsecagg {

// Nonzero evaluation point identifying a share holder.
using ShareIndex = uint64_t;

struct Share {
  ShareIndex holder = 0;
  uint64_t value = 0;
};

struct ShareSet {
  uint32_t t = 0;
  std::map<ShareIndex, uint64_t> shares;
};

// n distinct nonzero evaluation points sampled from the seeded stream.
// Throws DegenerateInput when n >= p (pigeonhole).
std::vector<ShareIndex> sss_init(const Field& f, uint32_t n, Rng& rng);

// Splits secret with a uniformly random polynomial of degree t-1 whose
// constant term is the secret; share i is the evaluation at X[i].
// Requires 1 < t <= |X| (ConfigError otherwise). Bumps shamir_sharings.
ShareSet sss_share(const Field& f, uint64_t secret, uint32_t t, const std::vector<ShareIndex>& X,
                   Rng& rng);

// Lagrange interpolation weights at zero for a subset of distinct evaluation
// points: l_j = prod_{o != j} (-x_o) / (x_j - x_o). Results are cached per
// (p, sorted subset) since the same survivor sets recur across runs.
std::map<ShareIndex, uint64_t> lagrange_coeffs(const Field& f, std::vector<ShareIndex> subset);

// Interpolates the secret from at least t shares; with more than t offered,
// the t smallest holder indices are used so the cost and the transcript are
// deterministic. Bumps shamir_reconstructions once and lagrange_terms by t.
// Throws InsufficientShares below t.
uint64_t sss_reconstruct(const Field& f, uint32_t t, std::vector<Share> shares);

// Pointwise sum of two sharings over the same holder set; reconstructing the
// result yields the sum of the secrets.
ShareSet sss_add(const Field& f, const ShareSet& a, const ShareSet& b);

}  // namespace ahsecagg
