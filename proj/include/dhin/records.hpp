#ifndef DHIN_RECORDS_HPP
#define DHIN_RECORDS_HPP

#include <cstdint>

namespace dhin::phr {

enum class RecordKind : std::uint8_t {
  Prescription = 0,
  Dispense = 1,
  LabResult = 2,
  Observation = 3,
  Referral = 4,
  AiOutput = 5,
  ConsentReceipt = 6,
  InsuranceClaimNote = 7,
};

inline constexpr std::uint8_t kRecordKindCount = 8;

const char* record_kind_name(RecordKind k);

}  // namespace dhin::phr

#endif
