#include "ahsecagg/rng.h"

namespace ahsecagg {

namespace {

// splitmix64 finalizer; used only to derive seeds, never as the stream.
uint64_t mix(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Rng::Rng(uint64_t seed) : seed_(seed), gen_(mix(seed)) {}

Rng Rng::from_os_entropy() {
  std::random_device rd;
  uint64_t seed = (static_cast<uint64_t>(rd()) << 32) | rd();
  return Rng(seed);
}

uint64_t Rng::uniform_below(uint64_t bound) {
  if (bound == 0) throw DegenerateInput("uniform_below: zero bound");
  // Accept draws in [rem, 2^64) whose size is an exact multiple of bound.
  uint64_t rem = (0 - bound) % bound;
  uint64_t r = next_u64();
  while (r < rem) r = next_u64();
  return (r - rem) % bound;
}

uint64_t Rng::uniform_range(uint64_t lo, uint64_t hi) {
  if (lo > hi) throw DegenerateInput("uniform_range: empty range");
  return lo + uniform_below(hi - lo + 1);
}

Bytes Rng::bytes(size_t n) {
  Bytes out(n);
  size_t i = 0;
  while (i < n) {
    uint64_t v = next_u64();
    for (int k = 0; k < 8 && i < n; ++k, ++i) out[i] = static_cast<uint8_t>(v >> (8 * k));
  }
  return out;
}

Rng Rng::child(uint64_t label) const { return Rng(mix(seed_ ^ mix(label))); }

}  // namespace ahsecagg
