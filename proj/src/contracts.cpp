#include "dhin/contracts.hpp"

#include <algorithm>
#include <cmath>

namespace dhin::contracts {

using ledger::ContractRevert;

const char* study_status_name(StudyStatus s) {
  switch (s) {
    case StudyStatus::Enrolling: return "Enrolling";
    case StudyStatus::RoundOpen: return "RoundOpen";
    case StudyStatus::Scoring: return "Scoring";
    case StudyStatus::Finalized: return "Finalized";
  }
  return "?";
}

CoordinatorContract::CoordinatorContract(std::uint32_t quorum, double kappa,
                                         std::uint32_t tax_basis_points)
    : quorum_(quorum), kappa_(kappa), tax_bp_(tax_basis_points) {}

std::unique_ptr<ledger::Contract> CoordinatorContract::clone() const {
  return std::make_unique<CoordinatorContract>(*this);
}

StudyState& CoordinatorContract::need_study(const std::string& study_id) {
  auto it = studies_.find(study_id);
  if (it == studies_.end()) throw ContractRevert{"NoSuchStudy"};
  return it->second;
}

EvaluatorNft& CoordinatorContract::need_nft(std::uint64_t nft_id) {
  auto it = nfts_.find(nft_id);
  if (it == nfts_.end()) throw ContractRevert{"NoSuchNft"};
  return it->second;
}

const StudyState* CoordinatorContract::study(const std::string& study_id) const {
  auto it = studies_.find(study_id);
  return it == studies_.end() ? nullptr : &it->second;
}

const EvaluatorNft* CoordinatorContract::nft(std::uint64_t nft_id) const {
  auto it = nfts_.find(nft_id);
  return it == nfts_.end() ? nullptr : &it->second;
}

Tokens CoordinatorContract::total_study_escrow() const {
  Tokens sum = 0;
  for (const auto& [id, s] : studies_) sum += s.escrow;
  return sum;
}

Tokens CoordinatorContract::total_stakes() const {
  Tokens sum = 0;
  for (const auto& [id, nft] : nfts_) sum += nft.self_price;
  return sum;
}

bool CoordinatorContract::is_active_evaluator(const identity::Did& did) const {
  for (const auto& [id, nft] : nfts_)
    if (nft.owner == did && nft.active) return true;
  return false;
}

void CoordinatorContract::freeze_roster(StudyState& s) {
  s.roster.assign(s.participants.begin(), s.participants.end());
  // std::set iterates in Did byte order already; keep the sort explicit.
  std::sort(s.roster.begin(), s.roster.end());
  s.commitments.clear();
  s.scores.clear();
}

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  if (n == 0) return 0.0;
  if (n % 2 == 1) return v[n / 2];
  return (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

}  // namespace

void CoordinatorContract::do_finalize(ledger::CallContext& ctx, StudyState& s,
                                      const std::string& study_id) {
  if (s.scores.size() < quorum_) throw ContractRevert{"QuorumNotMet"};

  const std::size_t roster_size = s.roster.size();
  std::vector<double> consensus(roster_size, 0.0);
  for (std::size_t i = 0; i < roster_size; ++i) {
    std::vector<double> column;
    column.reserve(s.scores.size());
    for (const auto& [evaluator, vec] : s.scores) column.push_back(vec[i]);
    consensus[i] = median(std::move(column));
  }
  double total = 0.0;
  for (double c : consensus) total += c;

  std::vector<Tokens> payouts(roster_size, 0);
  Tokens paid = 0;
  if (total > 0.0) {
    for (std::size_t i = 0; i < roster_size; ++i) {
      long double share = static_cast<long double>(s.round_budget) *
                          static_cast<long double>(consensus[i]) /
                          static_cast<long double>(total);
      payouts[i] = static_cast<Tokens>(std::floor(share));
      paid += payouts[i];
    }
    // Floating error cannot push the floored sum above the budget by more
    // than a unit; clamp deterministically off the largest payout.
    while (paid > s.round_budget) {
      std::size_t top = 0;
      for (std::size_t i = 1; i < roster_size; ++i)
        if (payouts[i] > payouts[top]) top = i;
      --payouts[top];
      --paid;
    }
    if (s.escrow < paid) throw ContractRevert{"EscrowUnderfunded"};
    for (std::size_t i = 0; i < roster_size; ++i) {
      if (payouts[i] == 0) continue;
      ctx.pay_out(s.roster[i], payouts[i]);
      s.payouts_total[s.roster[i]] += payouts[i];
    }
    s.escrow -= paid;
  }

  // Honesty gate: an evaluator is paid its fee when it lands within
  // kappa * MAD of the consensus on at least half the roster. Fees come from
  // the tax treasury, never from the reward budget.
  std::vector<identity::Did> paid_evaluators;
  if (roster_size > 0) {
    std::vector<double> mad(roster_size, 0.0);
    for (std::size_t i = 0; i < roster_size; ++i) {
      std::vector<double> dev;
      dev.reserve(s.scores.size());
      for (const auto& [evaluator, vec] : s.scores)
        dev.push_back(std::fabs(vec[i] - consensus[i]));
      mad[i] = std::max(median(std::move(dev)), 1e-6);
    }
    for (const auto& [evaluator, vec] : s.scores) {
      std::size_t within = 0;
      for (std::size_t i = 0; i < roster_size; ++i)
        if (std::fabs(vec[i] - consensus[i]) <= kappa_ * mad[i]) ++within;
      if (2 * within < roster_size) continue;
      if (treasury_ < s.evaluator_fee) continue;
      treasury_ -= s.evaluator_fee;
      if (s.evaluator_fee > 0) ctx.pay_out(evaluator, s.evaluator_fee);
      paid_evaluators.push_back(evaluator);
    }
  }

  RoundSummary summary;
  summary.round = s.round;
  summary.roster = s.roster;
  summary.consensus = consensus;
  summary.payouts = payouts;
  summary.paid_evaluators = paid_evaluators;
  summary.budget = s.round_budget;
  s.history.push_back(std::move(summary));

  Encoder ev;
  ev.str(study_id);
  ev.u32(s.round);
  ev.u32(static_cast<std::uint32_t>(roster_size));
  for (std::size_t i = 0; i < roster_size; ++i) {
    ev.raw(as_span(s.roster[i].id));
    ev.u64(payouts[i]);
  }
  ctx.emit("RoundFinalized", ev.take());

  // Zero consensus rolls the whole budget forward; floor remainders stay in
  // escrow.
  Tokens next_budget = s.budget_per_round + (total > 0.0 ? 0 : s.round_budget);
  if (s.round >= s.rounds) {
    s.status = StudyStatus::Finalized;
    s.roster.clear();
    s.commitments.clear();
    s.scores.clear();
  } else {
    s.round += 1;
    s.round_budget = next_budget;
    freeze_roster(s);
    s.status = StudyStatus::RoundOpen;
    Encoder opened;
    opened.str(study_id);
    opened.u32(s.round);
    ctx.emit("RoundOpened", opened.take());
  }
}

void CoordinatorContract::call(ledger::CallContext& ctx,
                               const std::string& method, Decoder& args) {
  if (method == "create_study") {
    std::string study_id = args.str();
    storage::Cid config_cid{args.fixed<32>()};
    std::uint16_t rounds = args.u16();
    Tokens budget = args.u64();
    Tokens fee = args.u64();
    if (studies_.count(study_id)) throw ContractRevert{"StudyExists"};
    if (rounds < 1 || budget == 0) throw ContractRevert{"BadConfig"};
    Tokens required = static_cast<Tokens>(rounds) * budget;
    if (ctx.payment() < required) throw ContractRevert{"InsufficientDeposit"};
    StudyState s;
    s.owner = ctx.sender();
    s.config_cid = config_cid;
    s.rounds = rounds;
    s.budget_per_round = budget;
    s.evaluator_fee = fee;
    s.deposit = ctx.payment();
    s.escrow = ctx.payment();
    s.round_budget = budget;
    studies_.emplace(study_id, std::move(s));
    Encoder ev;
    ev.str(study_id);
    ctx.emit("StudyCreated", ev.take());
    return;
  }

  if (method == "opt_in") {
    std::string study_id = args.str();
    StudyState& s = need_study(study_id);
    if (s.status != StudyStatus::Enrolling) throw ContractRevert{"WrongPhase"};
    if (!s.participants.insert(ctx.sender()).second)
      throw ContractRevert{"AlreadyOptedIn"};
    Encoder ev;
    ev.str(study_id);
    ev.raw(as_span(ctx.sender().id));
    ctx.emit("OptIn", ev.take());
    return;
  }

  if (method == "opt_out") {
    std::string study_id = args.str();
    StudyState& s = need_study(study_id);
    bool pre_round = s.status == StudyStatus::Enrolling ||
                     (s.status == StudyStatus::RoundOpen &&
                      s.commitments.empty());
    if (!pre_round) throw ContractRevert{"WrongPhase"};
    if (s.participants.erase(ctx.sender()) == 0)
      throw ContractRevert{"NotParticipant"};
    if (s.status == StudyStatus::RoundOpen) freeze_roster(s);
    Encoder ev;
    ev.str(study_id);
    ev.raw(as_span(ctx.sender().id));
    ctx.emit("OptOut", ev.take());
    return;
  }

  if (method == "open_round") {
    std::string study_id = args.str();
    StudyState& s = need_study(study_id);
    if (ctx.sender() != s.owner) throw ContractRevert{"NotOwner"};
    bool can_open = s.status == StudyStatus::Enrolling ||
                    (s.status == StudyStatus::RoundOpen &&
                     s.commitments.empty());
    if (!can_open) throw ContractRevert{"WrongPhase"};
    if (s.participants.empty()) throw ContractRevert{"NoParticipants"};
    if (s.status == StudyStatus::Enrolling) s.round = 1;
    freeze_roster(s);
    s.status = StudyStatus::RoundOpen;
    Encoder ev;
    ev.str(study_id);
    ev.u32(s.round);
    ctx.emit("RoundOpened", ev.take());
    return;
  }

  if (method == "submit_commitment") {
    std::string study_id = args.str();
    std::uint32_t round = args.u32();
    Commitment c;
    c.masked_cid.digest = args.fixed<32>();
    c.n_samples = args.u32();
    std::uint32_t sealed_count = args.u32();
    for (std::uint32_t i = 0; i < sealed_count; ++i) {
      identity::Did evaluator{args.fixed<32>()};
      c.sealed_for[evaluator] = storage::Cid{args.fixed<32>()};
    }
    StudyState& s = need_study(study_id);
    if (s.status != StudyStatus::RoundOpen) throw ContractRevert{"WrongPhase"};
    if (round != s.round) throw ContractRevert{"WrongRound"};
    if (std::find(s.roster.begin(), s.roster.end(), ctx.sender()) ==
        s.roster.end())
      throw ContractRevert{"NotInRoster"};
    if (s.commitments.count(ctx.sender()))
      throw ContractRevert{"DuplicateCommitment"};
    s.commitments.emplace(ctx.sender(), std::move(c));
    Encoder ev;
    ev.str(study_id);
    ev.u32(round);
    ev.raw(as_span(ctx.sender().id));
    ctx.emit("Committed", ev.take());
    if (s.commitments.size() == s.roster.size())
      s.status = StudyStatus::Scoring;
    return;
  }

  if (method == "submit_scores") {
    std::string study_id = args.str();
    std::uint32_t round = args.u32();
    std::uint32_t count = args.u32();
    std::vector<double> scores;
    scores.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) scores.push_back(args.f64());
    StudyState& s = need_study(study_id);
    if (!is_active_evaluator(ctx.sender())) throw ContractRevert{"NotStaked"};
    if (s.status != StudyStatus::Scoring) throw ContractRevert{"WrongPhase"};
    if (round != s.round) throw ContractRevert{"WrongRound"};
    if (scores.size() != s.roster.size()) throw ContractRevert{"BadLength"};
    for (double v : scores)
      if (!(std::isfinite(v) && v >= 0.0)) throw ContractRevert{"BadScore"};
    if (s.scores.count(ctx.sender())) throw ContractRevert{"Duplicate"};
    s.scores.emplace(ctx.sender(), std::move(scores));
    Encoder ev;
    ev.str(study_id);
    ev.u32(round);
    ev.raw(as_span(ctx.sender().id));
    ctx.emit("Scored", ev.take());
    return;
  }

  if (method == "finalize_round") {
    std::string study_id = args.str();
    std::uint32_t round = args.u32();
    StudyState& s = need_study(study_id);
    if (s.status != StudyStatus::Scoring) throw ContractRevert{"WrongPhase"};
    if (round != s.round) throw ContractRevert{"WrongRound"};
    do_finalize(ctx, s, study_id);
    return;
  }

  if (method == "set_global") {
    std::string study_id = args.str();
    storage::Cid cid{args.fixed<32>()};
    StudyState& s = need_study(study_id);
    if (ctx.sender() != s.owner) throw ContractRevert{"NotOwner"};
    s.global_cid = cid;
    return;
  }

  if (method == "mint_nft") {
    Tokens self_price = args.u64();
    if (self_price == 0) throw ContractRevert{"BadPrice"};
    if (ctx.payment() != self_price) throw ContractRevert{"StakeMismatch"};
    EvaluatorNft nft;
    nft.nft_id = next_nft_id_++;
    nft.owner = ctx.sender();
    nft.self_price = self_price;
    nft.minted_at = ctx.height();
    nft.active = true;
    Encoder ev;
    ev.u64(nft.nft_id);
    ev.raw(as_span(ctx.sender().id));
    ev.u64(self_price);
    ctx.emit("NftMinted", ev.take());
    nfts_.emplace(nft.nft_id, std::move(nft));
    return;
  }

  if (method == "set_price") {
    std::uint64_t nft_id = args.u64();
    Tokens new_price = args.u64();
    EvaluatorNft& nft = need_nft(nft_id);
    if (nft.owner != ctx.sender()) throw ContractRevert{"NotOwner"};
    if (new_price == 0) throw ContractRevert{"BadPrice"};
    Tokens top_up = new_price > nft.self_price ? new_price - nft.self_price : 0;
    Tokens refund = nft.self_price > new_price ? nft.self_price - new_price : 0;
    if (ctx.payment() != top_up) throw ContractRevert{"StakeMismatch"};
    if (refund > 0) ctx.pay_out(ctx.sender(), refund);
    nft.self_price = new_price;
    return;
  }

  if (method == "pay_tax") {
    std::uint64_t nft_id = args.u64();
    std::uint64_t epoch = args.u64();
    EvaluatorNft& nft = need_nft(nft_id);
    if (!nft.active) throw ContractRevert{"Inactive"};
    if (epoch != nft.epochs_charged + 1) throw ContractRevert{"WrongEpoch"};
    Tokens tax = nft.self_price * tax_bp_ / 10000;
    nft.epochs_charged = epoch;
    if (ctx.pull_from_wallet(nft.owner, tax)) {
      treasury_ += tax;
      nft.tax_paid += tax;
      Encoder ev;
      ev.u64(nft_id);
      ev.u64(tax);
      ctx.emit("TaxPaid", ev.take());
    } else {
      // Missed tax deactivates the stake; the default must land on-chain.
      nft.active = false;
      Encoder ev;
      ev.u64(nft_id);
      ctx.emit("TaxDefaulted", ev.take());
    }
    return;
  }

  if (method == "buyout") {
    std::uint64_t nft_id = args.u64();
    Tokens new_price = args.u64();
    EvaluatorNft& nft = need_nft(nft_id);
    if (new_price == 0) throw ContractRevert{"BadPrice"};
    if (nft.owner == ctx.sender()) throw ContractRevert{"OwnBuyout"};
    Tokens old_price = nft.self_price;
    Tokens top_up = new_price > old_price ? new_price - old_price : 0;
    Tokens refund = old_price > new_price ? old_price - new_price : 0;
    if (ctx.payment() != old_price + top_up)
      throw ContractRevert{"PaymentMismatch"};
    identity::Did previous = nft.owner;
    // The forced sale: previous owner is made whole at their declared price;
    // the stake slot now backs the buyer at the new price.
    ctx.pay_out(previous, old_price);
    if (refund > 0) ctx.pay_out(ctx.sender(), refund);
    nft.owner = ctx.sender();
    nft.self_price = new_price;
    nft.active = true;
    Encoder ev;
    ev.u64(nft_id);
    ev.raw(as_span(previous.id));
    ev.raw(as_span(ctx.sender().id));
    ev.u64(old_price);
    ev.u64(new_price);
    ctx.emit("Buyout", ev.take());
    return;
  }

  throw ContractRevert{"unknown method: " + method};
}

void CoordinatorContract::encode_state(Encoder& enc) const {
  enc.u32(quorum_);
  enc.f64(kappa_);
  enc.u32(tax_bp_);
  enc.u64(treasury_);
  enc.u64(next_nft_id_);

  enc.u32(static_cast<std::uint32_t>(studies_.size()));
  for (const auto& [id, s] : studies_) {
    enc.str(id);
    enc.raw(as_span(s.owner.id));
    enc.raw(as_span(s.config_cid.digest));
    enc.raw(as_span(s.global_cid.digest));
    enc.u8(static_cast<std::uint8_t>(s.status));
    enc.u16(s.rounds);
    enc.u64(s.budget_per_round);
    enc.u64(s.evaluator_fee);
    enc.u64(s.deposit);
    enc.u64(s.escrow);
    enc.u32(s.round);
    enc.u64(s.round_budget);
    enc.u32(static_cast<std::uint32_t>(s.participants.size()));
    for (const identity::Did& d : s.participants) enc.raw(as_span(d.id));
    enc.u32(static_cast<std::uint32_t>(s.roster.size()));
    for (const identity::Did& d : s.roster) enc.raw(as_span(d.id));
    enc.u32(static_cast<std::uint32_t>(s.commitments.size()));
    for (const auto& [did, c] : s.commitments) {
      enc.raw(as_span(did.id));
      enc.raw(as_span(c.masked_cid.digest));
      enc.u32(c.n_samples);
      enc.u32(static_cast<std::uint32_t>(c.sealed_for.size()));
      for (const auto& [evaluator, cid] : c.sealed_for) {
        enc.raw(as_span(evaluator.id));
        enc.raw(as_span(cid.digest));
      }
    }
    enc.u32(static_cast<std::uint32_t>(s.scores.size()));
    for (const auto& [did, vec] : s.scores) {
      enc.raw(as_span(did.id));
      enc.u32(static_cast<std::uint32_t>(vec.size()));
      for (double v : vec) enc.f64(v);
    }
    enc.u32(static_cast<std::uint32_t>(s.payouts_total.size()));
    for (const auto& [did, amount] : s.payouts_total) {
      enc.raw(as_span(did.id));
      enc.u64(amount);
    }
    enc.u32(static_cast<std::uint32_t>(s.history.size()));
    for (const RoundSummary& h : s.history) {
      enc.u32(h.round);
      enc.u64(h.budget);
      enc.u32(static_cast<std::uint32_t>(h.roster.size()));
      for (std::size_t i = 0; i < h.roster.size(); ++i) {
        enc.raw(as_span(h.roster[i].id));
        enc.f64(h.consensus[i]);
        enc.u64(h.payouts[i]);
      }
      enc.u32(static_cast<std::uint32_t>(h.paid_evaluators.size()));
      for (const identity::Did& d : h.paid_evaluators) enc.raw(as_span(d.id));
    }
  }

  enc.u32(static_cast<std::uint32_t>(nfts_.size()));
  for (const auto& [id, nft] : nfts_) {
    enc.u64(nft.nft_id);
    enc.raw(as_span(nft.owner.id));
    enc.u64(nft.self_price);
    enc.u64(nft.minted_at);
    enc.u64(nft.tax_paid);
    enc.u64(nft.epochs_charged);
    enc.u8(nft.active ? 1 : 0);
  }
}

Bytes args_create_study(const std::string& study_id,
                        const storage::Cid& config_cid, std::uint16_t rounds,
                        Tokens budget_per_round, Tokens evaluator_fee) {
  Encoder enc;
  enc.str(study_id);
  enc.raw(as_span(config_cid.digest));
  enc.u16(rounds);
  enc.u64(budget_per_round);
  enc.u64(evaluator_fee);
  return enc.take();
}

Bytes args_study(const std::string& study_id) {
  Encoder enc;
  enc.str(study_id);
  return enc.take();
}

Bytes args_submit_commitment(const std::string& study_id, std::uint32_t round,
                             const storage::Cid& masked_cid,
                             std::uint32_t n_samples,
                             const std::map<identity::Did, storage::Cid>& sealed) {
  Encoder enc;
  enc.str(study_id);
  enc.u32(round);
  enc.raw(as_span(masked_cid.digest));
  enc.u32(n_samples);
  enc.u32(static_cast<std::uint32_t>(sealed.size()));
  for (const auto& [evaluator, cid] : sealed) {
    enc.raw(as_span(evaluator.id));
    enc.raw(as_span(cid.digest));
  }
  return enc.take();
}

Bytes args_submit_scores(const std::string& study_id, std::uint32_t round,
                         const std::vector<double>& scores) {
  Encoder enc;
  enc.str(study_id);
  enc.u32(round);
  enc.u32(static_cast<std::uint32_t>(scores.size()));
  for (double v : scores) enc.f64(v);
  return enc.take();
}

Bytes args_finalize_round(const std::string& study_id, std::uint32_t round) {
  Encoder enc;
  enc.str(study_id);
  enc.u32(round);
  return enc.take();
}

Bytes args_set_global(const std::string& study_id, const storage::Cid& cid) {
  Encoder enc;
  enc.str(study_id);
  enc.raw(as_span(cid.digest));
  return enc.take();
}

Bytes args_mint_nft(Tokens self_price) {
  Encoder enc;
  enc.u64(self_price);
  return enc.take();
}

Bytes args_nft_price(std::uint64_t nft_id, Tokens price) {
  Encoder enc;
  enc.u64(nft_id);
  enc.u64(price);
  return enc.take();
}

Bytes args_pay_tax(std::uint64_t nft_id, std::uint64_t epoch) {
  Encoder enc;
  enc.u64(nft_id);
  enc.u64(epoch);
  return enc.take();
}

void PolicyAnchorContract::call(ledger::CallContext& ctx,
                                const std::string& method, Decoder& args) {
  if (method == "anchor") {
    anchors_[ctx.sender()] = args.fixed<32>();
    return;
  }
  throw ContractRevert{"unknown method: " + method};
}

void PolicyAnchorContract::encode_state(Encoder& enc) const {
  enc.u32(static_cast<std::uint32_t>(anchors_.size()));
  for (const auto& [did, digest] : anchors_) {
    enc.raw(as_span(did.id));
    enc.raw(as_span(digest));
  }
}

std::unique_ptr<ledger::Contract> PolicyAnchorContract::clone() const {
  return std::make_unique<PolicyAnchorContract>(*this);
}

const Bytes32* PolicyAnchorContract::anchored(const identity::Did& did) const {
  auto it = anchors_.find(did);
  return it == anchors_.end() ? nullptr : &it->second;
}

Bytes args_anchor(const Bytes32& digest) {
  Encoder enc;
  enc.raw(as_span(digest));
  return enc.take();
}

namespace {

double candidate_loss(const fl::ModelParams& global, const fl::LocalUpdate& u,
                      const fl::FeatureMatrix& validation, double lr_global) {
  fl::ModelParams candidate = global;
  double n = static_cast<double>(std::max<std::uint32_t>(u.n_samples, 1));
  for (std::uint32_t j = 0; j < global.dim; ++j)
    candidate.w[j] += lr_global * fl::dequantize_scalar(u.delta.v[j]) / n;
  return fl::eval_model_serial(candidate, validation).loss;
}

}  // namespace

std::vector<double> score_contribution_serial(
    const fl::ModelParams& global, std::span<const fl::LocalUpdate> updates,
    const fl::FeatureMatrix& validation, double lr_global) {
  double base = fl::eval_model_serial(global, validation).loss;
  std::vector<double> scores(updates.size(), 0.0);
  for (std::size_t i = 0; i < updates.size(); ++i)
    scores[i] =
        std::max(0.0, base - candidate_loss(global, updates[i], validation,
                                            lr_global));
  return scores;
}

std::vector<double> score_contribution_parallel(
    const fl::ModelParams& global, std::span<const fl::LocalUpdate> updates,
    const fl::FeatureMatrix& validation, double lr_global) {
  double base = fl::eval_model_serial(global, validation).loss;
  std::vector<double> scores(updates.size(), 0.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(updates.size()); ++i)
    scores[i] =
        std::max(0.0, base - candidate_loss(global, updates[i], validation,
                                            lr_global));
  return scores;
}

}  // namespace dhin::contracts
