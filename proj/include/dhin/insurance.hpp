#ifndef DHIN_INSURANCE_HPP
#define DHIN_INSURANCE_HPP

#include "dhin/ledger.hpp"
#include "dhin/phr.hpp"

// Reward-funded decentralized insurance pool. Premiums flow wallet -> pool
// reserves; claims reference PHR records and are verified as deterministic
// contract logic over evidence supplied with the claim (record bytes plus the
// author's credential), then settled first-come-first-served with a haircut
// at reserve exhaustion so reserves never go negative.

namespace dhin::insurance {

inline constexpr ledger::ContractId kInsurancePoolId = 2;

struct Policy {
  identity::Did holder;
  Tokens premium_per_epoch = 0;
  Tokens coverage_cap = 0;
  Tick active_from = 0;
  Tick paid_through = 0;
  Tokens cap_used = 0;

  bool active_at(Tick t) const { return active_from <= t && t <= paid_through; }
  Tokens cap_remaining() const {
    return coverage_cap > cap_used ? coverage_cap - cap_used : 0;
  }
};

enum class ClaimStatus : std::uint8_t {
  Submitted = 0,
  Verified = 1,
  Paid = 2,
  Rejected = 3,
};

const char* claim_status_name(ClaimStatus s);

struct Claim {
  std::uint64_t claim_id = 0;
  identity::Did holder;
  std::vector<std::pair<identity::Did, std::uint64_t>> record_refs;
  Tokens amount = 0;
  ClaimStatus status = ClaimStatus::Submitted;
  Tokens paid_amount = 0;
  bool haircut = false;  // paid below amount because reserves ran out
  std::string reject_reason;
  Bytes evidence;
};

// One evidence entry per record reference: the full record fields plus the
// author's credential bytes.
struct RecordEvidence {
  std::uint64_t record_id = 0;
  phr::RecordKind kind = phr::RecordKind::InsuranceClaimNote;
  identity::Did author;
  identity::Did subject;
  Bytes payload;
  Tick created_at = 0;
  Sig64 author_signature{};
  Bytes credential;
};

Bytes encode_evidence(const std::vector<RecordEvidence>& evidence);
RecordEvidence evidence_from_record(const phr::HealthRecord& record,
                                    const identity::Credential& credential);

// Contract methods:
//   buy_policy(premium u64, cap u64, epochs u32)   payment = premium * epochs
//   submit_claim(count u32, [did, record_id u64]*, amount u64, evidence bytes)
//   verify_claim(claim_id u64)
//   settle_claim(claim_id u64)
class InsurancePoolContract : public ledger::Contract {
 public:
  explicit InsurancePoolContract(std::uint32_t ticks_per_epoch)
      : ticks_per_epoch_(ticks_per_epoch) {}

  std::string name() const override { return "insurance_pool"; }
  void call(ledger::CallContext& ctx, const std::string& method,
            Decoder& args) override;
  void encode_state(Encoder& enc) const override;
  std::unique_ptr<ledger::Contract> clone() const override;

  Tokens reserves() const { return reserves_; }
  const Policy* policy(const identity::Did& holder) const;
  const Claim* claim(std::uint64_t claim_id) const;
  const std::vector<Claim>& claims() const { return claims_; }
  Tokens total_premiums() const { return total_premiums_; }
  Tokens total_payouts() const { return total_payouts_; }

 private:
  void do_verify(ledger::CallContext& ctx, Claim& claim);

  std::uint32_t ticks_per_epoch_;
  Tokens reserves_ = 0;
  Tokens total_premiums_ = 0;
  Tokens total_payouts_ = 0;
  std::map<identity::Did, Policy> policies_;
  std::vector<Claim> claims_;
};

Bytes args_buy_policy(Tokens premium_per_epoch, Tokens coverage_cap,
                      std::uint32_t epochs);
Bytes args_submit_claim(
    const std::vector<std::pair<identity::Did, std::uint64_t>>& refs,
    Tokens amount, const Bytes& evidence);
Bytes args_claim_id(std::uint64_t claim_id);

}  // namespace dhin::insurance

#endif
