#ifndef DHIN_FEATURES_HPP
#define DHIN_FEATURES_HPP

#include "dhin/codec.hpp"
#include "dhin/common.hpp"
#include "dhin/records.hpp"

// Training-data shapes shared by the PHR export path and the FL core.

namespace dhin::fl {

// Maps a record kind onto feature rows: payloads of `kind` must carry exactly
// `feature_dim` doubles plus a 0/1 label.
struct StudySchema {
  phr::RecordKind kind = phr::RecordKind::Observation;
  std::uint32_t feature_dim = 0;
};

struct FeatureRow {
  std::vector<double> x;
  std::uint8_t label = 0;
};

struct FeatureMatrix {
  std::uint32_t dim = 0;
  std::vector<FeatureRow> rows;

  std::size_t size() const { return rows.size(); }
  bool operator==(const FeatureMatrix&) const = default;

  // Blob format: u32 dim, u32 row count, then per row dim little-endian IEEE754
  // doubles followed by one label byte.
  Bytes encode() const;
  static std::optional<FeatureMatrix> decode(ByteSpan bytes);
};

// Record payload helpers for schema-typed kinds (canonical big-endian codec,
// same as all other signed material): u32 dim, dim f64 features, u8 label.
Bytes encode_feature_record(const std::vector<double>& x, std::uint8_t label);
std::optional<FeatureRow> decode_feature_record(ByteSpan payload);

}  // namespace dhin::fl

#endif
