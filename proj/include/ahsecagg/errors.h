#pragma once

#include <stdexcept>
#include <string>

namespace ahsecagg {

// Error taxonomy shared across the library. Each type maps to one failure
// class so tests can assert on the precise cause.

// A mathematically meaningless argument (zero inverse, zero bound, identity
// public key, n >= p, ...).
struct DegenerateInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// An invalid run configuration (threshold out of range, length mismatch,
// scheme/group mismatch).
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Fewer than t shares (or sub-signatures) offered to a reconstruction.
struct InsufficientShares : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A share-sum was requested over a set containing a peer we hold no share of.
struct MissingShare : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Authenticated decryption failed (tamper or wrong key).
struct AuthFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed canonical encoding (truncated, non-minimal, trailing bytes).
struct DecodeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bulletin-board: identity already registered.
struct Rejected : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bulletin-board: identity unknown.
struct NotFound : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A discrete logarithm fell outside the searchable range.
struct RangeExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ahsecagg
