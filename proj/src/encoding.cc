#include "ahsecagg/encoding.h"

namespace ahsecagg {

void ByteWriter::u16(uint16_t v) {
  buf_.push_back(static_cast<uint8_t>(v >> 8));
  buf_.push_back(static_cast<uint8_t>(v));
}

void ByteWriter::u32(uint32_t v) {
  for (int i = 3; i >= 0; --i) buf_.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void ByteWriter::scalar(uint64_t v) {
  uint8_t tmp[8];
  int n = 0;
  while (v) {
    tmp[n++] = static_cast<uint8_t>(v & 0xff);
    v >>= 8;
  }
  u16(static_cast<uint16_t>(n));
  for (int i = n - 1; i >= 0; --i) buf_.push_back(tmp[i]);
}

void ByteWriter::magnitude(const Bytes& mag) {
  if (!mag.empty() && mag[0] == 0) throw DecodeError("magnitude: leading zero");
  if (mag.size() > 0xffff) throw DecodeError("magnitude: too long");
  u16(static_cast<uint16_t>(mag.size()));
  raw(mag);
}

void ByteWriter::blob(const Bytes& b) {
  u32(static_cast<uint32_t>(b.size()));
  raw(b);
}

void ByteReader::need(size_t n) const {
  if (pos_ + n > buf_.size()) throw DecodeError("truncated encoding");
}

uint8_t ByteReader::u8() {
  need(1);
  return buf_[pos_++];
}

uint16_t ByteReader::u16() {
  need(2);
  uint16_t v = (static_cast<uint16_t>(buf_[pos_]) << 8) | buf_[pos_ + 1];
  pos_ += 2;
  return v;
}

uint32_t ByteReader::u32() {
  need(4);
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v = (v << 8) | buf_[pos_ + i];
  pos_ += 4;
  return v;
}

uint64_t ByteReader::scalar() {
  uint16_t n = u16();
  if (n > 8) throw DecodeError("scalar: too wide for 64 bits");
  need(n);
  if (n > 0 && buf_[pos_] == 0) throw DecodeError("scalar: non-minimal encoding");
  uint64_t v = 0;
  for (uint16_t i = 0; i < n; ++i) v = (v << 8) | buf_[pos_ + i];
  pos_ += n;
  return v;
}

Bytes ByteReader::magnitude() {
  uint16_t n = u16();
  need(n);
  if (n > 0 && buf_[pos_] == 0) throw DecodeError("magnitude: non-minimal encoding");
  Bytes out(buf_.begin() + pos_, buf_.begin() + pos_ + n);
  pos_ += n;
  return out;
}

Bytes ByteReader::blob() {
  uint32_t n = u32();
  need(n);
  Bytes out(buf_.begin() + pos_, buf_.begin() + pos_ + n);
  pos_ += n;
  return out;
}

Bytes ByteReader::rest() {
  Bytes out(buf_.begin() + pos_, buf_.end());
  pos_ = buf_.size();
  return out;
}

void ByteReader::expect_done() const {
  if (!done()) throw DecodeError("trailing bytes");
}

Bytes encode_scalar(uint64_t v) {
  ByteWriter w;
  w.scalar(v);
  return w.take();
}

uint64_t decode_scalar(const Bytes& b) {
  ByteReader r(b);
  uint64_t v = r.scalar();
  r.expect_done();
  return v;
}

Bytes encode_scalar_vector(const std::vector<uint64_t>& v) {
  ByteWriter w;
  w.u32(static_cast<uint32_t>(v.size()));
  for (uint64_t x : v) w.scalar(x);
  return w.take();
}

std::vector<uint64_t> decode_scalar_vector(const Bytes& b) {
  ByteReader r(b);
  uint32_t n = r.u32();
  std::vector<uint64_t> v;
  v.reserve(n);
  for (uint32_t i = 0; i < n; ++i) v.push_back(r.scalar());
  r.expect_done();
  return v;
}

Bytes encode_id_list(const std::vector<uint32_t>& ids) {
  ByteWriter w;
  w.u32(static_cast<uint32_t>(ids.size()));
  for (uint32_t id : ids) w.u32(id);
  return w.take();
}

std::vector<uint32_t> decode_id_list(const Bytes& b) {
  ByteReader r(b);
  uint32_t n = r.u32();
  std::vector<uint32_t> ids;
  ids.reserve(n);
  for (uint32_t i = 0; i < n; ++i) ids.push_back(r.u32());
  r.expect_done();
  return ids;
}

}  // namespace ahsecagg
