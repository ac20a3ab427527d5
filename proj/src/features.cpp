#include "dhin/features.hpp"

#include <cstring>

namespace dhin::fl {

namespace {
void put_f64_le(Bytes& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  for (int i = 0; i < 8; ++i)
    out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}
void put_u32_le(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i)
    out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
double get_f64_le(ByteSpan s) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(s[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}
}  // namespace

Bytes FeatureMatrix::encode() const {
  Bytes out;
  out.reserve(8 + rows.size() * (dim * 8 + 1));
  put_u32_le(out, dim);
  put_u32_le(out, static_cast<std::uint32_t>(rows.size()));
  for (const FeatureRow& row : rows) {
    for (double v : row.x) put_f64_le(out, v);
    out.push_back(row.label);
  }
  return out;
}

std::optional<FeatureMatrix> FeatureMatrix::decode(ByteSpan bytes) {
  if (bytes.size() < 8) return std::nullopt;
  FeatureMatrix m;
  std::uint32_t n = 0;
  for (int i = 0; i < 4; ++i)
    m.dim |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
  for (int i = 0; i < 4; ++i)
    n |= static_cast<std::uint32_t>(bytes[4 + i]) << (8 * i);
  std::size_t row_len = static_cast<std::size_t>(m.dim) * 8 + 1;
  if (bytes.size() != 8 + static_cast<std::size_t>(n) * row_len)
    return std::nullopt;
  std::size_t pos = 8;
  m.rows.reserve(n);
  for (std::uint32_t r = 0; r < n; ++r) {
    FeatureRow row;
    row.x.reserve(m.dim);
    for (std::uint32_t j = 0; j < m.dim; ++j) {
      row.x.push_back(get_f64_le(bytes.subspan(pos, 8)));
      pos += 8;
    }
    row.label = bytes[pos++];
    m.rows.push_back(std::move(row));
  }
  return m;
}

Bytes encode_feature_record(const std::vector<double>& x, std::uint8_t label) {
  Encoder enc;
  enc.u32(static_cast<std::uint32_t>(x.size()));
  for (double v : x) enc.f64(v);
  enc.u8(label);
  return enc.take();
}

std::optional<FeatureRow> decode_feature_record(ByteSpan payload) {
  try {
    Decoder dec(payload);
    FeatureRow row;
    std::uint32_t dim = dec.u32();
    row.x.reserve(dim);
    for (std::uint32_t i = 0; i < dim; ++i) row.x.push_back(dec.f64());
    row.label = dec.u8();
    if (!dec.done()) return std::nullopt;
    return row;
  } catch (const CodecError&) {
    return std::nullopt;
  }
}

}  // namespace dhin::fl
