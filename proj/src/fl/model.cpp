#include "dhin/fl/model.hpp"

#include <cmath>
#include <cstring>

namespace dhin::fl {

namespace {
void put_u32_le(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i)
    out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_u64_le(Bytes& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i)
    out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
std::uint32_t get_u32_le(ByteSpan s) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(s[i]) << (8 * i);
  return v;
}
std::uint64_t get_u64_le(ByteSpan s) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(s[i]) << (8 * i);
  return v;
}
}  // namespace

Bytes ModelParams::encode() const {
  Bytes out;
  put_u32_le(out, dim);
  for (double x : w) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, 8);
    put_u64_le(out, bits);
  }
  return out;
}

std::optional<ModelParams> ModelParams::decode(ByteSpan bytes) {
  if (bytes.size() < 4) return std::nullopt;
  ModelParams p;
  p.dim = get_u32_le(bytes);
  if (bytes.size() != 4 + static_cast<std::size_t>(p.dim) * 8)
    return std::nullopt;
  p.w.reserve(p.dim);
  for (std::uint32_t i = 0; i < p.dim; ++i) {
    std::uint64_t bits = get_u64_le(bytes.subspan(4 + i * 8, 8));
    double x;
    std::memcpy(&x, &bits, 8);
    p.w.push_back(x);
  }
  return p;
}

void FixedVec::add(const FixedVec& o) {
  for (std::uint32_t i = 0; i < dim; ++i) v[i] += o.v[i];
}

void FixedVec::sub(const FixedVec& o) {
  for (std::uint32_t i = 0; i < dim; ++i) v[i] -= o.v[i];
}

Bytes FixedVec::encode() const {
  Bytes out;
  out.reserve(4 + v.size() * 8);
  put_u32_le(out, dim);
  for (std::uint64_t word : v) put_u64_le(out, word);
  return out;
}

std::optional<FixedVec> FixedVec::decode(ByteSpan bytes) {
  if (bytes.size() < 4) return std::nullopt;
  FixedVec q;
  q.dim = get_u32_le(bytes);
  if (bytes.size() != 4 + static_cast<std::size_t>(q.dim) * 8)
    return std::nullopt;
  q.v.reserve(q.dim);
  for (std::uint32_t i = 0; i < q.dim; ++i)
    q.v.push_back(get_u64_le(bytes.subspan(4 + i * 8, 8)));
  return q;
}

std::uint64_t quantize_scalar(double x) {
  return static_cast<std::uint64_t>(
      static_cast<std::int64_t>(std::llround(x * kFixedScale)));
}

double dequantize_scalar(std::uint64_t q) {
  return static_cast<double>(static_cast<std::int64_t>(q)) / kFixedScale;
}

FixedVec quantize(const std::vector<double>& x) {
  FixedVec q;
  q.dim = static_cast<std::uint32_t>(x.size());
  q.v.reserve(x.size());
  for (double e : x) q.v.push_back(quantize_scalar(e));
  return q;
}

std::vector<double> dequantize(const FixedVec& q) {
  std::vector<double> x;
  x.reserve(q.dim);
  for (std::uint64_t w : q.v) x.push_back(dequantize_scalar(w));
  return x;
}

Bytes MaskedUpdate::encode() const {
  Bytes out;
  out.insert(out.end(), patient.id.begin(), patient.id.end());
  put_u32_le(out, round);
  put_u32_le(out, n_samples);
  Bytes vec = masked.encode();
  out.insert(out.end(), vec.begin(), vec.end());
  return out;
}

std::optional<MaskedUpdate> MaskedUpdate::decode(ByteSpan bytes) {
  if (bytes.size() < 40) return std::nullopt;
  MaskedUpdate u;
  std::memcpy(u.patient.id.data(), bytes.data(), 32);
  u.round = get_u32_le(bytes.subspan(32, 4));
  u.n_samples = get_u32_le(bytes.subspan(36, 4));
  auto vec = FixedVec::decode(bytes.subspan(40));
  if (!vec) return std::nullopt;
  u.masked = std::move(*vec);
  return u;
}

Bytes StudyConfig::encode() const {
  Encoder enc;
  enc.str(study_id);
  enc.u8(static_cast<std::uint8_t>(schema.kind));
  enc.u32(schema.feature_dim);
  enc.u8(local_epochs);
  enc.u16(batch_size);
  enc.f64(lr_local);
  enc.f64(lr_global);
  enc.u16(rounds);
  enc.u64(reward_budget_per_round);
  enc.u64(evaluator_fee_per_round);
  enc.raw(as_span(validation_cid.digest));
  enc.raw(as_span(init_seed));
  return enc.take();
}

std::optional<StudyConfig> StudyConfig::decode(ByteSpan bytes) {
  try {
    Decoder dec(bytes);
    StudyConfig c;
    c.study_id = dec.str();
    c.schema.kind = static_cast<phr::RecordKind>(dec.u8());
    c.schema.feature_dim = dec.u32();
    c.local_epochs = dec.u8();
    c.batch_size = dec.u16();
    c.lr_local = dec.f64();
    c.lr_global = dec.f64();
    c.rounds = dec.u16();
    c.reward_budget_per_round = dec.u64();
    c.evaluator_fee_per_round = dec.u64();
    c.validation_cid.digest = dec.fixed<32>();
    c.init_seed = dec.fixed<32>();
    if (!dec.done()) return std::nullopt;
    return c;
  } catch (const CodecError&) {
    return std::nullopt;
  }
}

}  // namespace dhin::fl
