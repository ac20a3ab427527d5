#ifndef DHIN_FL_MODEL_HPP
#define DHIN_FL_MODEL_HPP

#include "dhin/features.hpp"
#include "dhin/identity.hpp"
#include "dhin/storage.hpp"

// Fixed-point model vectors for exact masked summation. Reals are scaled by
// 2^16 and embedded two's-complement into the mod-2^64 ring, so sums of masked
// updates cancel bit-exactly.

namespace dhin::fl {

inline constexpr int kFracBits = 16;
inline constexpr double kFixedScale = 65536.0;

// Binary logistic regression weights; bias is the last element, dim == d+1.
struct ModelParams {
  std::uint32_t dim = 0;
  std::vector<double> w;

  static ModelParams zeros(std::uint32_t dim) {
    return ModelParams{dim, std::vector<double>(dim, 0.0)};
  }
  Bytes encode() const;
  static std::optional<ModelParams> decode(ByteSpan bytes);
};

struct FixedVec {
  std::uint32_t dim = 0;
  std::vector<std::uint64_t> v;

  static FixedVec zeros(std::uint32_t dim) {
    return FixedVec{dim, std::vector<std::uint64_t>(dim, 0)};
  }
  bool operator==(const FixedVec&) const = default;

  void add(const FixedVec& o);  // elementwise mod 2^64
  void sub(const FixedVec& o);

  // Bit-exact wire format (Cids depend on it): u32 dim little-endian, then dim
  // u64 words little-endian.
  Bytes encode() const;
  static std::optional<FixedVec> decode(ByteSpan bytes);
};

std::uint64_t quantize_scalar(double x);
double dequantize_scalar(std::uint64_t q);
FixedVec quantize(const std::vector<double>& x);
std::vector<double> dequantize(const FixedVec& q);

struct LocalUpdate {
  identity::Did patient;
  std::uint32_t round = 0;
  FixedVec delta;  // quantize(n_i * (w_local - w_global))
  std::uint32_t n_samples = 0;
};

struct MaskedUpdate {
  identity::Did patient;
  std::uint32_t round = 0;
  FixedVec masked;
  std::uint32_t n_samples = 0;

  Bytes encode() const;
  static std::optional<MaskedUpdate> decode(ByteSpan bytes);
};

struct StudyConfig {
  std::string study_id;
  StudySchema schema;
  std::uint8_t local_epochs = 1;
  std::uint16_t batch_size = 16;
  double lr_local = 0.1;
  double lr_global = 1.0;
  std::uint16_t rounds = 1;
  Tokens reward_budget_per_round = 0;
  Tokens evaluator_fee_per_round = 0;
  storage::Cid validation_cid;
  Bytes32 init_seed{};

  bool valid() const {
    return schema.feature_dim > 0 && local_epochs > 0 && batch_size > 0 &&
           lr_local > 0 && lr_global > 0 && rounds >= 1;
  }
  Bytes encode() const;
  static std::optional<StudyConfig> decode(ByteSpan bytes);
};

}  // namespace dhin::fl

#endif
