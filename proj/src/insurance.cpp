#include "dhin/insurance.hpp"

namespace dhin::insurance {

using ledger::ContractRevert;

const char* claim_status_name(ClaimStatus s) {
  switch (s) {
    case ClaimStatus::Submitted: return "Submitted";
    case ClaimStatus::Verified: return "Verified";
    case ClaimStatus::Paid: return "Paid";
    case ClaimStatus::Rejected: return "Rejected";
  }
  return "?";
}

Bytes encode_evidence(const std::vector<RecordEvidence>& evidence) {
  Encoder enc;
  enc.u32(static_cast<std::uint32_t>(evidence.size()));
  for (const RecordEvidence& e : evidence) {
    enc.u64(e.record_id);
    enc.u8(static_cast<std::uint8_t>(e.kind));
    enc.raw(as_span(e.author.id));
    enc.raw(as_span(e.subject.id));
    enc.bytes(as_span(e.payload));
    enc.u64(e.created_at);
    enc.raw(as_span(e.author_signature));
    enc.bytes(as_span(e.credential));
  }
  return enc.take();
}

RecordEvidence evidence_from_record(const phr::HealthRecord& record,
                                    const identity::Credential& credential) {
  RecordEvidence e;
  e.record_id = record.record_id;
  e.kind = record.kind;
  e.author = record.author;
  e.subject = record.subject;
  e.payload = record.payload;
  e.created_at = record.created_at;
  e.author_signature = record.author_signature;
  e.credential = credential.encode();
  return e;
}

namespace {

std::vector<RecordEvidence> decode_evidence(ByteSpan bytes) {
  Decoder dec(bytes);
  std::vector<RecordEvidence> out;
  std::uint32_t n = dec.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    RecordEvidence e;
    e.record_id = dec.u64();
    e.kind = static_cast<phr::RecordKind>(dec.u8());
    e.author.id = dec.fixed<32>();
    e.subject.id = dec.fixed<32>();
    e.payload = dec.bytes();
    e.created_at = dec.u64();
    e.author_signature = dec.fixed<64>();
    e.credential = dec.bytes();
    out.push_back(std::move(e));
  }
  if (!dec.done()) throw CodecError();
  return out;
}

bool claimable_kind(phr::RecordKind kind) {
  return kind == phr::RecordKind::InsuranceClaimNote ||
         kind == phr::RecordKind::Prescription ||
         kind == phr::RecordKind::Dispense;
}

identity::Claim author_claim_for(phr::RecordKind kind) {
  return kind == phr::RecordKind::Dispense ? identity::Claim::PharmacyLicense
                                           : identity::Claim::PhysicianLicense;
}

}  // namespace

std::unique_ptr<ledger::Contract> InsurancePoolContract::clone() const {
  return std::make_unique<InsurancePoolContract>(*this);
}

const Policy* InsurancePoolContract::policy(const identity::Did& holder) const {
  auto it = policies_.find(holder);
  return it == policies_.end() ? nullptr : &it->second;
}

const Claim* InsurancePoolContract::claim(std::uint64_t claim_id) const {
  if (claim_id == 0 || claim_id > claims_.size()) return nullptr;
  return &claims_[claim_id - 1];
}

void InsurancePoolContract::do_verify(ledger::CallContext& ctx, Claim& claim) {
  std::vector<RecordEvidence> evidence;
  try {
    evidence = decode_evidence(as_span(claim.evidence));
  } catch (const CodecError&) {
    claim.status = ClaimStatus::Rejected;
    claim.reject_reason = "MalformedEvidence";
    return;
  }
  if (evidence.size() != claim.record_refs.size()) {
    claim.status = ClaimStatus::Rejected;
    claim.reject_reason = "EvidenceMismatch";
    return;
  }

  for (std::size_t i = 0; i < evidence.size(); ++i) {
    const RecordEvidence& e = evidence[i];
    const auto& [ref_store, ref_id] = claim.record_refs[i];
    if (e.record_id != ref_id) {
      claim.status = ClaimStatus::Rejected;
      claim.reject_reason = "EvidenceMismatch";
      return;
    }
    // (a) record must live in the holder's own store
    if (ref_store != claim.holder || e.subject != claim.holder) {
      claim.status = ClaimStatus::Rejected;
      claim.reject_reason = "NotHolderRecord";
      return;
    }
    // (b) claimable kind
    if (!claimable_kind(e.kind)) {
      claim.status = ClaimStatus::Rejected;
      claim.reject_reason = "WrongKind";
      return;
    }
    // (c) author signature over the canonical record fields
    phr::HealthRecord rec;
    rec.record_id = e.record_id;
    rec.kind = e.kind;
    rec.author = e.author;
    rec.subject = e.subject;
    rec.payload = e.payload;
    rec.created_at = e.created_at;
    if (identity::verify(ctx.resolver(), e.author, as_span(rec.signing_bytes()),
                         e.author_signature) != identity::VerifyResult::Ok) {
      claim.status = ClaimStatus::Rejected;
      claim.reject_reason = "BadAuthorSignature";
      return;
    }
    // ... by an author credentialed at the record's creation tick
    auto cred = identity::Credential::decode(as_span(e.credential));
    if (!cred || cred->subject != e.author ||
        cred->claim != author_claim_for(e.kind) ||
        identity::verify_credential(*cred, ctx.issuers(), ctx.resolver(),
                                    e.created_at)
            .has_value()) {
      claim.status = ClaimStatus::Rejected;
      claim.reject_reason = "UntrustedAuthor";
      return;
    }
  }
  claim.status = ClaimStatus::Verified;
}

void InsurancePoolContract::call(ledger::CallContext& ctx,
                                 const std::string& method, Decoder& args) {
  if (method == "buy_policy") {
    Tokens premium = args.u64();
    Tokens cap = args.u64();
    std::uint32_t epochs = args.u32();
    if (premium == 0 || epochs == 0) throw ContractRevert{"BadPolicy"};
    Tokens due = premium * static_cast<Tokens>(epochs);
    if (ctx.payment() != due) throw ContractRevert{"PaymentMismatch"};
    Tick now = ctx.height();
    Tick extension = static_cast<Tick>(epochs) * ticks_per_epoch_;
    auto it = policies_.find(ctx.sender());
    if (it == policies_.end()) {
      Policy p;
      p.holder = ctx.sender();
      p.premium_per_epoch = premium;
      p.coverage_cap = cap;
      p.active_from = now;
      p.paid_through = now + extension - 1;
      policies_.emplace(ctx.sender(), p);
    } else {
      Policy& p = it->second;
      if (p.premium_per_epoch != premium)
        throw ContractRevert{"PremiumMismatch"};
      // Renewal extends, never overlaps.
      Tick base = std::max(p.paid_through + 1, now);
      p.paid_through = base + extension - 1;
    }
    reserves_ += due;
    total_premiums_ += due;
    Encoder ev;
    ev.raw(as_span(ctx.sender().id));
    ev.u64(due);
    ctx.emit("PolicyBought", ev.take());
    return;
  }

  if (method == "submit_claim") {
    std::uint32_t n = args.u32();
    std::vector<std::pair<identity::Did, std::uint64_t>> refs;
    for (std::uint32_t i = 0; i < n; ++i) {
      identity::Did store{args.fixed<32>()};
      std::uint64_t record_id = args.u64();
      refs.emplace_back(store, record_id);
    }
    Tokens amount = args.u64();
    Bytes evidence = args.bytes();
    auto it = policies_.find(ctx.sender());
    if (it == policies_.end() || !it->second.active_at(ctx.height()))
      throw ContractRevert{"NoActivePolicy"};
    Claim c;
    c.claim_id = claims_.size() + 1;
    c.holder = ctx.sender();
    c.record_refs = std::move(refs);
    c.amount = amount;
    c.evidence = std::move(evidence);
    Encoder ev;
    ev.u64(c.claim_id);
    ev.raw(as_span(ctx.sender().id));
    ev.u64(amount);
    ctx.emit("ClaimSubmitted", ev.take());
    claims_.push_back(std::move(c));
    return;
  }

  if (method == "verify_claim") {
    std::uint64_t claim_id = args.u64();
    if (claim_id == 0 || claim_id > claims_.size())
      throw ContractRevert{"NoSuchClaim"};
    Claim& c = claims_[claim_id - 1];
    if (c.status != ClaimStatus::Submitted) throw ContractRevert{"WrongStatus"};
    do_verify(ctx, c);
    Encoder ev;
    ev.u64(claim_id);
    ev.u8(static_cast<std::uint8_t>(c.status));
    ctx.emit(c.status == ClaimStatus::Verified ? "ClaimVerified"
                                               : "ClaimRejected",
             ev.take());
    return;
  }

  if (method == "settle_claim") {
    std::uint64_t claim_id = args.u64();
    if (claim_id == 0 || claim_id > claims_.size())
      throw ContractRevert{"NoSuchClaim"};
    Claim& c = claims_[claim_id - 1];
    if (c.status != ClaimStatus::Verified) throw ContractRevert{"WrongStatus"};
    Policy& p = policies_.at(c.holder);
    Tokens payable = std::min(c.amount, p.cap_remaining());
    Tokens paid = std::min(payable, reserves_);
    c.haircut = paid < payable;  // reserves, not the cap, limited the payout
    c.paid_amount = paid;
    c.status = ClaimStatus::Paid;
    p.cap_used += paid;
    reserves_ -= paid;
    total_payouts_ += paid;
    if (paid > 0) ctx.pay_out(c.holder, paid);
    Encoder ev;
    ev.u64(claim_id);
    ev.u64(paid);
    ev.u8(c.haircut ? 1 : 0);
    ctx.emit("ClaimPaid", ev.take());
    return;
  }

  throw ContractRevert{"unknown method: " + method};
}

void InsurancePoolContract::encode_state(Encoder& enc) const {
  enc.u32(ticks_per_epoch_);
  enc.u64(reserves_);
  enc.u64(total_premiums_);
  enc.u64(total_payouts_);
  enc.u32(static_cast<std::uint32_t>(policies_.size()));
  for (const auto& [did, p] : policies_) {
    enc.raw(as_span(did.id));
    enc.u64(p.premium_per_epoch);
    enc.u64(p.coverage_cap);
    enc.u64(p.active_from);
    enc.u64(p.paid_through);
    enc.u64(p.cap_used);
  }
  enc.u32(static_cast<std::uint32_t>(claims_.size()));
  for (const Claim& c : claims_) {
    enc.u64(c.claim_id);
    enc.raw(as_span(c.holder.id));
    enc.u32(static_cast<std::uint32_t>(c.record_refs.size()));
    for (const auto& [store, id] : c.record_refs) {
      enc.raw(as_span(store.id));
      enc.u64(id);
    }
    enc.u64(c.amount);
    enc.u8(static_cast<std::uint8_t>(c.status));
    enc.u64(c.paid_amount);
    enc.u8(c.haircut ? 1 : 0);
    enc.str(c.reject_reason);
    enc.bytes(as_span(c.evidence));
  }
}

Bytes args_buy_policy(Tokens premium_per_epoch, Tokens coverage_cap,
                      std::uint32_t epochs) {
  Encoder enc;
  enc.u64(premium_per_epoch);
  enc.u64(coverage_cap);
  enc.u32(epochs);
  return enc.take();
}

Bytes args_submit_claim(
    const std::vector<std::pair<identity::Did, std::uint64_t>>& refs,
    Tokens amount, const Bytes& evidence) {
  Encoder enc;
  enc.u32(static_cast<std::uint32_t>(refs.size()));
  for (const auto& [store, id] : refs) {
    enc.raw(as_span(store.id));
    enc.u64(id);
  }
  enc.u64(amount);
  enc.bytes(as_span(evidence));
  return enc.take();
}

Bytes args_claim_id(std::uint64_t claim_id) {
  Encoder enc;
  enc.u64(claim_id);
  return enc.take();
}

}  // namespace dhin::insurance
