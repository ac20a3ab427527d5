#ifndef DHIN_CONTRACTS_HPP
#define DHIN_CONTRACTS_HPP

#include "dhin/fl/secagg.hpp"
#include "dhin/ledger.hpp"
#include "dhin/storage.hpp"

// On-ledger coordination: study lifecycle with opt-in consent, round
// commitments, evaluator scoring under an NFT proof-of-stake with Harberger
// taxation, and trustless reward distribution. One contract holds studies,
// NFTs, and the tax treasury so reward payouts and evaluator fees settle
// atomically in a single call.

namespace dhin::contracts {

inline constexpr ledger::ContractId kCoordinatorId = 1;

enum class StudyStatus : std::uint8_t {
  Enrolling = 0,
  RoundOpen = 1,
  Scoring = 2,
  Finalized = 3,
};

const char* study_status_name(StudyStatus s);

struct Commitment {
  storage::Cid masked_cid;
  std::uint32_t n_samples = 0;
  // Raw update sealed per evaluator, cid by evaluator did.
  std::map<identity::Did, storage::Cid> sealed_for;
};

struct RoundSummary {
  std::uint32_t round = 0;
  std::vector<identity::Did> roster;
  std::vector<double> consensus;
  std::vector<Tokens> payouts;       // by roster position
  std::vector<identity::Did> paid_evaluators;
  Tokens budget = 0;
};

struct StudyState {
  identity::Did owner;
  storage::Cid config_cid;
  storage::Cid global_cid;
  StudyStatus status = StudyStatus::Enrolling;
  std::uint16_t rounds = 0;
  Tokens budget_per_round = 0;
  Tokens evaluator_fee = 0;
  Tokens deposit = 0;
  Tokens escrow = 0;  // deposit minus paid rewards
  std::uint32_t round = 0;
  Tokens round_budget = 0;  // current budget incl. zero-consensus rollover
  std::set<identity::Did> participants;
  std::vector<identity::Did> roster;  // frozen, sorted by did bytes
  std::map<identity::Did, Commitment> commitments;
  std::map<identity::Did, std::vector<double>> scores;  // by evaluator
  std::map<identity::Did, Tokens> payouts_total;
  std::vector<RoundSummary> history;
};

struct EvaluatorNft {
  std::uint64_t nft_id = 0;
  identity::Did owner;
  Tokens self_price = 0;  // doubles as the posted stake
  Tick minted_at = 0;
  Tokens tax_paid = 0;
  std::uint64_t epochs_charged = 0;
  bool active = false;
};

// Contract methods (canonical args; all integers big-endian):
//   create_study(study_id, config_cid, rounds u16, budget u64, fee u64)
//       payment = deposit, >= rounds * budget
//   opt_in(study_id) / opt_out(study_id)
//   open_round(study_id)                      owner only
//   submit_commitment(study_id, round u32, masked_cid, n_samples u32,
//                     count u32, [evaluator did, sealed cid]*)
//   submit_scores(study_id, round u32, count u32, [f64]*)
//   finalize_round(study_id, round u32)
//   set_global(study_id, cid)                 owner only
//   mint_nft(self_price u64)                  payment = self_price
//   set_price(nft_id u64, new_price u64)      payment tops up the stake
//   pay_tax(nft_id u64, epoch u64)            keeper-callable
//   buyout(nft_id u64, new_price u64)         payment = old + max(0,new-old)
class CoordinatorContract : public ledger::Contract {
 public:
  CoordinatorContract(std::uint32_t quorum, double kappa,
                      std::uint32_t tax_basis_points);

  std::string name() const override { return "coordinator"; }
  void call(ledger::CallContext& ctx, const std::string& method,
            Decoder& args) override;
  void encode_state(Encoder& enc) const override;
  std::unique_ptr<ledger::Contract> clone() const override;

  // Read-only views.
  const StudyState* study(const std::string& study_id) const;
  const EvaluatorNft* nft(std::uint64_t nft_id) const;
  const std::map<std::uint64_t, EvaluatorNft>& nfts() const { return nfts_; }
  Tokens treasury() const { return treasury_; }
  Tokens total_study_escrow() const;
  Tokens total_stakes() const;
  std::uint32_t quorum() const { return quorum_; }
  bool is_active_evaluator(const identity::Did& did) const;

 private:
  StudyState& need_study(const std::string& study_id);
  EvaluatorNft& need_nft(std::uint64_t nft_id);
  void freeze_roster(StudyState& s);
  void do_finalize(ledger::CallContext& ctx, StudyState& s,
                   const std::string& study_id);

  std::uint32_t quorum_;
  double kappa_;
  std::uint32_t tax_bp_;
  std::map<std::string, StudyState> studies_;
  std::map<std::uint64_t, EvaluatorNft> nfts_;
  std::uint64_t next_nft_id_ = 1;
  Tokens treasury_ = 0;
};

// Argument builders for the methods above.
Bytes args_create_study(const std::string& study_id,
                        const storage::Cid& config_cid, std::uint16_t rounds,
                        Tokens budget_per_round, Tokens evaluator_fee);
Bytes args_study(const std::string& study_id);
Bytes args_submit_commitment(const std::string& study_id, std::uint32_t round,
                             const storage::Cid& masked_cid,
                             std::uint32_t n_samples,
                             const std::map<identity::Did, storage::Cid>& sealed);
Bytes args_submit_scores(const std::string& study_id, std::uint32_t round,
                         const std::vector<double>& scores);
Bytes args_finalize_round(const std::string& study_id, std::uint32_t round);
Bytes args_set_global(const std::string& study_id, const storage::Cid& cid);
Bytes args_mint_nft(Tokens self_price);
Bytes args_nft_price(std::uint64_t nft_id, Tokens price);
Bytes args_pay_tax(std::uint64_t nft_id, std::uint64_t epoch);

inline constexpr ledger::ContractId kPolicyAnchorId = 3;

// Carries the digest of each patient's PHR policy list when the store runs in
// OnChain anchor mode. Method: anchor(digest32); keyed by sender did.
class PolicyAnchorContract : public ledger::Contract {
 public:
  std::string name() const override { return "policy_anchor"; }
  void call(ledger::CallContext& ctx, const std::string& method,
            Decoder& args) override;
  void encode_state(Encoder& enc) const override;
  std::unique_ptr<ledger::Contract> clone() const override;

  const Bytes32* anchored(const identity::Did& did) const;

 private:
  std::map<identity::Did, Bytes32> anchors_;
};

Bytes args_anchor(const Bytes32& digest);

// Off-chain evaluator duty: score each roster member's raw update by the
// validation-loss improvement of applying it alone,
//   s_i = max(0, L(g) - L(g + lr * dequantize(delta_i) / max(n_i, 1))).
// The parallel variant fans out over roster members; bit-identical to serial.
std::vector<double> score_contribution_serial(
    const fl::ModelParams& global, std::span<const fl::LocalUpdate> updates,
    const fl::FeatureMatrix& validation, double lr_global);
std::vector<double> score_contribution_parallel(
    const fl::ModelParams& global, std::span<const fl::LocalUpdate> updates,
    const fl::FeatureMatrix& validation, double lr_global);

}  // namespace dhin::contracts

#endif
