#ifndef DHIN_CODEC_HPP
#define DHIN_CODEC_HPP

#include <cstring>
#include <stdexcept>

#include "dhin/common.hpp"

// Canonical byte encoding used for everything that gets signed or hashed:
// fields concatenated in declaration order, integers big-endian fixed-width,
// variable-length byte strings prefixed with a u32 length.

namespace dhin {

class Encoder {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u16(std::uint16_t v) { put_be(v, 2); }
  void u32(std::uint32_t v) { put_be(v, 4); }
  void u64(std::uint64_t v) { put_be(v, 8); }

  void f64(double v) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(v));
    std::memcpy(&bits, &v, 8);
    u64(bits);
  }

  // Fixed-width payloads (keys, digests, signatures): no length prefix.
  void raw(ByteSpan b) { buf_.insert(buf_.end(), b.begin(), b.end()); }

  // Variable-length payloads: u32 length prefix.
  void bytes(ByteSpan b) {
    u32(static_cast<std::uint32_t>(b.size()));
    raw(b);
  }
  void str(std::string_view s) { bytes(as_span(s)); }

  const Bytes& data() const { return buf_; }
  Bytes take() { return std::move(buf_); }

 private:
  void put_be(std::uint64_t v, int width) {
    for (int i = width - 1; i >= 0; --i)
      buf_.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
  }
  Bytes buf_;
};

struct CodecError : std::runtime_error {
  CodecError() : std::runtime_error("malformed canonical encoding") {}
};

class Decoder {
 public:
  explicit Decoder(ByteSpan data) : data_(data) {}

  std::uint8_t u8() { return take(1)[0]; }
  std::uint16_t u16() { return static_cast<std::uint16_t>(get_be(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get_be(4)); }
  std::uint64_t u64() { return get_be(8); }

  double f64() {
    std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }

  ByteSpan raw(std::size_t n) { return take(n); }

  Bytes bytes() {
    std::uint32_t n = u32();
    ByteSpan s = take(n);
    return Bytes(s.begin(), s.end());
  }
  std::string str() {
    Bytes b = bytes();
    return std::string(b.begin(), b.end());
  }

  template <std::size_t N>
  std::array<std::uint8_t, N> fixed() {
    ByteSpan s = take(N);
    std::array<std::uint8_t, N> out;
    std::memcpy(out.data(), s.data(), N);
    return out;
  }

  std::size_t remaining() const { return data_.size() - pos_; }
  bool done() const { return remaining() == 0; }

 private:
  ByteSpan take(std::size_t n) {
    if (remaining() < n) throw CodecError();
    ByteSpan s = data_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint64_t get_be(int width) {
    ByteSpan s = take(width);
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v = (v << 8) | s[i];
    return v;
  }

  ByteSpan data_;
  std::size_t pos_ = 0;
};

}  // namespace dhin

#endif
