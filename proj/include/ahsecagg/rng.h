#pragma once

#include <cstdint>
#include <random>

#include "ahsecagg/encoding.h"
#include "ahsecagg/errors.h"
#include "ahsecagg/field.h"

namespace ahsecagg {

// Deterministic randomness for simulation, OS entropy for production.
// Sampling uses explicit rejection so streams are reproducible across
// platforms and library versions.
class Rng {
 public:
  explicit Rng(uint64_t seed);
  static Rng from_os_entropy();

  uint64_t next_u64() { return gen_(); }
  // Uniform in [0, bound); bound = 0 throws DegenerateInput.
  uint64_t uniform_below(uint64_t bound);
  // Uniform in [lo, hi] inclusive.
  uint64_t uniform_range(uint64_t lo, uint64_t hi);
  uint64_t field_element(const Field& f) { return uniform_below(f.p()); }
  // Uniform nonzero element of Z_p.
  uint64_t nonzero_field_element(const Field& f) { return 1 + uniform_below(f.p() - 1); }
  Bytes bytes(size_t n);

  // Independent child stream derived from this stream's seed and a label;
  // children with distinct labels are order-independent.
  Rng child(uint64_t label) const;

 private:
  uint64_t seed_;
  std::mt19937_64 gen_;
};

}  // namespace ahsecagg
