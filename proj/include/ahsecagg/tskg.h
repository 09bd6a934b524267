#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ahsecagg/group.h"
#include "ahsecagg/shamir.h"

namespace ahsecagg {

// Threshold key generation over a group whose order equals the share field's
// prime. One initial Shamir sharing of a user's long-term key is distributed
// once; afterwards each aggregation derives a fresh temporary key from a
// server nonce, and dropouts are recovered by combining sub-signatures with
// Lagrange weights in the exponent — the raw shares never travel again.

// h(nonce)^s, the temporary key for this aggregation.
GroupElement tskg_temp_key(const Group& g, uint64_t s, const Bytes& nonce);

// h(nonce)^share, what a holder submits instead of the share itself.
GroupElement tskg_sub_sig(const Group& g, uint64_t share, const Bytes& nonce);

// prod_j sub_sig_j^{l_j} over the t smallest holders, with l_j the
// Lagrange-at-zero weights; equals h(nonce)^secret exactly. Requires the
// group order to equal f.p() (ConfigError) and at least t sub-signatures
// (InsufficientShares). Counts one reconstruction, t lagrange terms and t
// exponentiations.
GroupElement tskg_reconstruct(const Group& g, const Field& f, uint32_t t,
                              std::vector<std::pair<ShareIndex, GroupElement>> sub_sigs);

// Deterministic conversion of a group element to a field element (hash of
// the canonical encoding reduced mod p).
uint64_t ts_trans(const Field& f, const Group& g, const GroupElement& a);

}  // namespace ahsecagg
