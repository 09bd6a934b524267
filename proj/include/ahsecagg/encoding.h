#pragma once

#include <cstdint>
#include <vector>

#include "ahsecagg/errors.h"

namespace ahsecagg {

using Bytes = std::vector<uint8_t>;

// Canonical byte encodings used protocol-wide for signing, encryption and
// hashing. Scalars are a 2-byte big-endian length followed by the minimal
// big-endian magnitude (zero encodes as length 0). Lists carry a 4-byte
// big-endian count. Bit-exact round-trips are required so signatures verify
// across components.

class ByteWriter {
 public:
  void u8(uint8_t v) { buf_.push_back(v); }
  void u16(uint16_t v);
  void u32(uint32_t v);
  // 2-byte length + minimal big-endian magnitude.
  void scalar(uint64_t v);
  // 2-byte length + caller-supplied big-endian magnitude (must be minimal).
  void magnitude(const Bytes& mag);
  // 4-byte length + raw bytes.
  void blob(const Bytes& b);
  // Raw append, no framing.
  void raw(const Bytes& b) { buf_.insert(buf_.end(), b.begin(), b.end()); }
  void raw(const uint8_t* p, size_t n) { buf_.insert(buf_.end(), p, p + n); }

  const Bytes& data() const { return buf_; }
  Bytes take() { return std::move(buf_); }

 private:
  Bytes buf_;
};

class ByteReader {
 public:
  explicit ByteReader(const Bytes& b) : buf_(b) {}

  uint8_t u8();
  uint16_t u16();
  uint32_t u32();
  uint64_t scalar();
  Bytes magnitude();
  Bytes blob();
  Bytes rest();

  bool done() const { return pos_ == buf_.size(); }
  // Throws DecodeError unless all bytes were consumed.
  void expect_done() const;

 private:
  void need(size_t n) const;
  const Bytes& buf_;
  size_t pos_ = 0;
};

// Convenience wrappers for the two most common standalone encodings.
Bytes encode_scalar(uint64_t v);
uint64_t decode_scalar(const Bytes& b);
Bytes encode_scalar_vector(const std::vector<uint64_t>& v);
std::vector<uint64_t> decode_scalar_vector(const Bytes& b);
Bytes encode_id_list(const std::vector<uint32_t>& ids);
std::vector<uint32_t> decode_id_list(const Bytes& b);

}  // namespace ahsecagg
