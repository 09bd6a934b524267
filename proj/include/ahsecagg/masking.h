#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "ahsecagg/errors.h"
#include "ahsecagg/field.h"

namespace ahsecagg {

// Public masking parameters: the chain base r (never 0 or 1, sampled once per
// deployment and published in the run config) and the vector length m.
struct MaskParams {
  uint64_t r = 0;
  size_t m = 0;
};

// (r*s, r^2*s, ..., r^m*s) computed by iterated multiplication. No modular
// exponentiation is involved: masking stays pure field arithmetic.
std::vector<uint64_t> mask_chain(const Field& f, uint64_t s, const MaskParams& params);

// y = x + mask_chain(s) componentwise. |x| must equal params.m (ConfigError).
std::vector<uint64_t> mask(const Field& f, const std::vector<uint64_t>& x, uint64_t s,
                           const MaskParams& params);

// sum_y - mask_chain(s_sum) componentwise, where s_sum is the reconstructed
// sum of the survivors' secrets. Equals the plain sum of the survivors'
// inputs exactly. Bumps unmask_field_ops by 2m (m chain multiplications plus
// m subtractions).
std::vector<uint64_t> unmask_sum(const Field& f, const std::vector<uint64_t>& sum_y,
                                 uint64_t s_sum, const MaskParams& params);

// Sum over u3 of the shares this party holds, one field element regardless of
// |u3|. Throws MissingShare when a listed peer's share is absent.
uint64_t share_sum_for_unmask(const Field& f, const std::map<uint32_t, uint64_t>& my_shares,
                              const std::vector<uint32_t>& u3);

// ---- Mask-equation rank analysis -------------------------------------------

// The linear system a curious server could write down from one masked vector.
// Unknown ordering for the chained layout: (s, x(1), ..., x(m)) -> m x (m+1);
// for the per-component layout: (s(1), ..., s(m), x(1), ..., x(m)) -> m x 2m.
// The augmented matrix appends the observed y column.
struct MaskEquations {
  size_t unknowns = 0;
  std::vector<std::vector<uint64_t>> coeff;
  std::vector<std::vector<uint64_t>> augmented;
};

MaskEquations build_mask_equations_chained(const Field& f, const std::vector<uint64_t>& y,
                                           const MaskParams& params);
MaskEquations build_mask_equations_per_component(const Field& f, const std::vector<uint64_t>& y);

// Rank over Z_p by Gaussian elimination.
size_t rank_zp(const Field& f, std::vector<std::vector<uint64_t>> rows);

}  // namespace ahsecagg
