#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "ahsecagg/crypto.h"
#include "ahsecagg/field.h"
#include "ahsecagg/group.h"
#include "ahsecagg/sim.h"

namespace ahsecagg {

// ---- Pairwise/self masking --------------------------------------------------

// y = x + PRG(b) + sum_{j > self} PRG(k_ij) - sum_{j < self} PRG(k_ij), with
// the pairwise streams keyed by the agreed symmetric keys. self_id is skipped
// if listed; every other peer must have a key (ConfigError). Expands one
// self-mask vector plus one per other peer, each of |x| elements.
std::vector<uint64_t> secagg_mask(const Field& f, const std::vector<uint64_t>& x, uint64_t b,
                                  uint32_t self_id, const std::vector<uint32_t>& peers,
                                  const std::map<uint32_t, AeadKey>& pairwise);

// Removes the survivors' self-masks and the dropped users' residual pairwise
// masks from the summed upload; equals the plain sum over the survivors.
// dropped_pairwise maps dropped id -> (survivor id -> recovered shared key).
// Missing entries throw MissingShare. Expands (d(n-d) + (n-d)) vectors.
std::vector<uint64_t> secagg_unmask(
    const Field& f, std::vector<uint64_t> sum_y, const std::vector<uint32_t>& survivors,
    const std::map<uint32_t, uint64_t>& b_of_survivors,
    const std::map<uint32_t, std::map<uint32_t, AeadKey>>& dropped_pairwise);

// Element-expansion count of a SecAgg unmasking with n sharers, d dropouts
// and vector length m: (d(n-d) + (n-d)) * m.
uint64_t secagg_prg_closed_form(uint64_t n, uint64_t d, uint64_t m);

// ---- Homomorphic PRG and EffiAgg --------------------------------------------

// HPRG(s)[k] = hash_to_group(k)^s. Seed-homomorphic by construction:
// HPRG(s1)[k] * HPRG(s2)[k] = HPRG(s1+s2 mod p)[k].
GroupElement hprg_element(const Group& g, uint64_t s, uint64_t k);

// y[k] = g^{x[k]} * HPRG(s)[k].
std::vector<GroupElement> effiagg_mask(const Group& g, const std::vector<uint64_t>& x, uint64_t s);

// Baby-step giant-step table for discrete logs base the group generator over
// exponents in [0, bound]. Table construction and each giant step bump
// bsgs_steps; lookups beyond the bound throw RangeExceeded.
class BsgsTable {
 public:
  BsgsTable(const Group& g, uint64_t bound);

  uint64_t dlog(const GroupElement& target) const;
  uint64_t table_size() const { return step_; }

 private:
  const Group& g_;
  uint64_t bound_;
  uint64_t step_;  // ceil(sqrt(bound + 1))
  GroupElement giant_factor_;  // g^{-step}
  std::map<Bytes, uint64_t> baby_;
};

uint64_t bsgs_dlog(const Group& g, const GroupElement& target, uint64_t bound);

// Divides the reconstructed aggregate HPRG mask out of the componentwise
// product of masked vectors, then recovers each exponent sum (all at most
// max_sum) by BSGS with one shared table.
std::vector<uint64_t> effiagg_unmask(const Group& g, const std::vector<GroupElement>& product,
                                     uint64_t s_sum, uint64_t max_sum);

// ---- Scheme drivers -----------------------------------------------------------

// Plain SecAgg baseline over the shared round harness: double key
// advertisement, two sharings per user, pairwise+self masking, per-user key
// reconstruction on dropout. Semi-honest only; rounds 0..3.
SimOutcome run_secagg(const SimConfig& cfg);

// EffiAgg baseline: one sharing per user, exponent masking with the
// homomorphic PRG, one reconstruction and BSGS recovery on the server.
// input_bound doubles as the per-component bound B. Semi-honest only.
SimOutcome run_effiagg(const SimConfig& cfg);

// Rejects any nonce seen before within one deployment.
class NonceRegistry {
 public:
  void check(const Bytes& nonce);

 private:
  std::set<Bytes> seen_;
};

struct TskgDeploymentOutcome {
  SimOutcome preparation;
  std::vector<SimOutcome> aggregations;
};

// SecAgg with reusable shares: one Preparation distributing shares of the
// long-term (s_i, b_i), then `aggregations` rounds each keyed by a fresh
// server nonce. Per aggregation the share-keys round disappears: users
// re-advertise only the temporary public key g^{sz_i}, and unmasking sends
// sub-signatures h(nonce)^{share} instead of raw shares. The per-user
// temporary keys of each aggregation are recorded in user_temp_keys.
TskgDeploymentOutcome run_secagg_tskg(const SimConfig& cfg, size_t aggregations);

}  // namespace ahsecagg
