#include "dhin/phr.hpp"

#include <algorithm>
#include <sstream>

namespace dhin::phr {

const char* record_kind_name(RecordKind k) {
  switch (k) {
    case RecordKind::Prescription: return "Prescription";
    case RecordKind::Dispense: return "Dispense";
    case RecordKind::LabResult: return "LabResult";
    case RecordKind::Observation: return "Observation";
    case RecordKind::Referral: return "Referral";
    case RecordKind::AiOutput: return "AiOutput";
    case RecordKind::ConsentReceipt: return "ConsentReceipt";
    case RecordKind::InsuranceClaimNote: return "InsuranceClaimNote";
  }
  return "?";
}

const char* audit_action_name(AuditAction a) {
  switch (a) {
    case AuditAction::Read: return "Read";
    case AuditAction::Write: return "Write";
    case AuditAction::Grant: return "Grant";
    case AuditAction::Revoke: return "Revoke";
    case AuditAction::ExportForTraining: return "ExportForTraining";
  }
  return "?";
}

const char* denied_reason_name(DeniedReason r) {
  switch (r) {
    case DeniedReason::None: return "None";
    case DeniedReason::NotOwner: return "NotOwner";
    case DeniedReason::NoPolicy: return "NoPolicy";
    case DeniedReason::Expired: return "Expired";
    case DeniedReason::Revoked: return "Revoked";
    case DeniedReason::WrongKind: return "WrongKind";
    case DeniedReason::BadSignature: return "BadSignature";
    case DeniedReason::NoSuchPolicy: return "NoSuchPolicy";
    case DeniedReason::SchemaMismatch: return "SchemaMismatch";
  }
  return "?";
}

Bytes HealthRecord::signing_bytes() const {
  Encoder enc;
  enc.u64(record_id);
  enc.u8(static_cast<std::uint8_t>(kind));
  enc.raw(as_span(subject.id));
  enc.bytes(as_span(payload));
  enc.u64(created_at);
  return enc.take();
}

bool AccessPolicy::effective_at(Tick t) const {
  Tick end = expires_at;
  if (revoked_at && *revoked_at < end) end = *revoked_at;
  return granted_at <= t && t < end;
}

void AccessPolicy::encode(Encoder& enc) const {
  enc.raw(as_span(grantee.id));
  enc.u32(static_cast<std::uint32_t>(kinds.size()));
  for (RecordKind k : kinds) enc.u8(static_cast<std::uint8_t>(k));
  enc.u32(static_cast<std::uint32_t>(rights.size()));
  for (Right r : rights) enc.u8(static_cast<std::uint8_t>(r));
  enc.u64(granted_at);
  enc.u64(expires_at);
  enc.u8(revoked_at ? 1 : 0);
  enc.u64(revoked_at.value_or(0));
}

PhrStore::PhrStore(identity::Did owner, const identity::Resolver& resolver,
                   AnchorMode mode)
    : owner_(std::move(owner)), resolver_(resolver), mode_(mode) {}

void PhrStore::set_anchor_hook(std::function<void(const Bytes32&)> hook) {
  anchor_hook_ = std::move(hook);
}

bool PhrStore::is_owner(const crypto::KeyPair& key) const {
  return identity::did_of(key.public_key) == owner_;
}

void PhrStore::log(const identity::Did& actor, AuditAction action,
                   std::vector<std::uint64_t> ids, Tick at,
                   DeniedReason reason) {
  audit_.push_back(AuditEntry{actor, action, std::move(ids), at,
                              reason == DeniedReason::None, reason});
}

void PhrStore::anchor() {
  if (mode_ == AnchorMode::OnChain && anchor_hook_) anchor_hook_(policy_digest());
}

Bytes32 PhrStore::policy_digest() const {
  Encoder enc;
  enc.u32(static_cast<std::uint32_t>(policies_.size()));
  for (const AccessPolicy& p : policies_) p.encode(enc);
  return crypto::sha256(as_span(enc.data()));
}

std::set<RecordKind> PhrStore::effective_kinds(const identity::Did& who,
                                               Right right, Tick t) const {
  std::set<RecordKind> out;
  if (who == owner_) {
    for (std::uint8_t k = 0; k < kRecordKindCount; ++k)
      out.insert(static_cast<RecordKind>(k));
    return out;
  }
  for (const AccessPolicy& p : policies_)
    if (p.grantee == who && p.rights.count(right) && p.effective_at(t))
      out.insert(p.kinds.begin(), p.kinds.end());
  return out;
}

DeniedReason PhrStore::gate(const identity::Did& who, Right right,
                            RecordKind kind, Tick now) const {
  if (who == owner_) return DeniedReason::None;
  bool any_for_grantee = false;
  bool kind_match = false;
  bool saw_revoked = false;
  bool saw_expired = false;
  for (const AccessPolicy& p : policies_) {
    if (p.grantee != who) continue;
    any_for_grantee = true;
    if (!p.rights.count(right) || !p.kinds.count(kind)) continue;
    kind_match = true;
    if (p.effective_at(now)) return DeniedReason::None;
    if (p.revoked_at && *p.revoked_at <= now)
      saw_revoked = true;
    else if (p.expires_at <= now)
      saw_expired = true;
  }
  if (!any_for_grantee) return DeniedReason::NoPolicy;
  if (!kind_match) return DeniedReason::WrongKind;
  if (saw_revoked) return DeniedReason::Revoked;
  if (saw_expired) return DeniedReason::Expired;
  return DeniedReason::NoPolicy;  // granted only in the future
}

Status<DeniedReason> PhrStore::grant_access(const crypto::KeyPair& caller,
                                            AccessPolicy policy, Tick now) {
  identity::Did actor = identity::did_of(caller.public_key);
  if (!is_owner(caller)) {
    log(actor, AuditAction::Grant, {}, now, DeniedReason::NotOwner);
    return DeniedReason::NotOwner;
  }
  policies_.push_back(std::move(policy));
  log(actor, AuditAction::Grant, {}, now, DeniedReason::None);
  anchor();
  return Unit{};
}

Status<DeniedReason> PhrStore::revoke_access(const crypto::KeyPair& caller,
                                             const identity::Did& grantee,
                                             const std::set<RecordKind>& kinds,
                                             Tick now) {
  identity::Did actor = identity::did_of(caller.public_key);
  if (!is_owner(caller)) {
    log(actor, AuditAction::Revoke, {}, now, DeniedReason::NotOwner);
    return DeniedReason::NotOwner;
  }
  bool any = false;
  for (AccessPolicy& p : policies_) {
    if (p.grantee != grantee || !p.effective_at(now)) continue;
    bool overlap = false;
    for (RecordKind k : kinds)
      if (p.kinds.count(k)) overlap = true;
    if (!overlap) continue;
    p.revoked_at = now;
    any = true;
  }
  if (!any) {
    log(actor, AuditAction::Revoke, {}, now, DeniedReason::NoSuchPolicy);
    return DeniedReason::NoSuchPolicy;
  }
  log(actor, AuditAction::Revoke, {}, now, DeniedReason::None);
  anchor();
  return Unit{};
}

Outcome<std::uint64_t, DeniedReason> PhrStore::write_record(
    const crypto::KeyPair& author_key, RecordKind kind, Bytes payload, Tick now,
    std::optional<std::uint64_t> amends) {
  identity::Did author = identity::did_of(author_key.public_key);
  if (!resolver_.lookup(author)) {
    log(author, AuditAction::Write, {}, now, DeniedReason::BadSignature);
    return DeniedReason::BadSignature;
  }
  DeniedReason verdict = gate(author, Right::Write, kind, now);
  if (verdict != DeniedReason::None) {
    log(author, AuditAction::Write, {}, now, verdict);
    return verdict;
  }
  HealthRecord rec;
  rec.record_id = records_.size() + 1;
  rec.kind = kind;
  rec.author = author;
  rec.subject = owner_;
  rec.payload = std::move(payload);
  rec.created_at = now;
  rec.amends = amends;
  rec.author_signature = crypto::sign(author_key, as_span(rec.signing_bytes()));
  records_.push_back(std::move(rec));
  std::uint64_t id = records_.back().record_id;
  log(author, AuditAction::Write, {id}, now, DeniedReason::None);
  return id;
}

Outcome<std::vector<HealthRecord>, DeniedReason> PhrStore::read_records(
    const crypto::KeyPair& reader_key, const RecordQuery& query, Tick now) {
  identity::Did reader = identity::did_of(reader_key.public_key);
  std::set<RecordKind> scope = effective_kinds(reader, Right::Read, now);
  if (scope.empty()) {
    // Reuse the single-kind gate for the precise reason; probe with any
    // queried kind (they all fail identically when no scope exists).
    RecordKind probe = query.kinds.empty() ? RecordKind::Observation
                                           : *query.kinds.begin();
    DeniedReason verdict = gate(reader, Right::Read, probe, now);
    if (verdict == DeniedReason::None) verdict = DeniedReason::NoPolicy;
    log(reader, AuditAction::Read, {}, now, verdict);
    return verdict;
  }
  std::vector<HealthRecord> out;
  std::vector<std::uint64_t> ids;
  for (const HealthRecord& rec : records_) {
    if (!scope.count(rec.kind)) continue;
    if (!query.kinds.empty() && !query.kinds.count(rec.kind)) continue;
    if (rec.created_at < query.from || rec.created_at > query.to) continue;
    out.push_back(rec);
    ids.push_back(rec.record_id);
  }
  log(reader, AuditAction::Read, std::move(ids), now, DeniedReason::None);
  return out;
}

Outcome<fl::FeatureMatrix, DeniedReason> PhrStore::export_training_set(
    const crypto::KeyPair& caller, const fl::StudySchema& schema, Tick now) {
  identity::Did actor = identity::did_of(caller.public_key);
  if (!is_owner(caller)) {
    log(actor, AuditAction::ExportForTraining, {}, now, DeniedReason::NotOwner);
    return DeniedReason::NotOwner;
  }
  fl::FeatureMatrix matrix;
  matrix.dim = schema.feature_dim;
  std::vector<std::uint64_t> ids;
  for (const HealthRecord& rec : records_) {
    if (rec.kind != schema.kind) continue;
    auto row = fl::decode_feature_record(as_span(rec.payload));
    if (!row || row->x.size() != schema.feature_dim) {
      log(actor, AuditAction::ExportForTraining, {}, now,
          DeniedReason::SchemaMismatch);
      return DeniedReason::SchemaMismatch;
    }
    matrix.rows.push_back(std::move(*row));
    ids.push_back(rec.record_id);
  }
  log(actor, AuditAction::ExportForTraining, std::move(ids), now,
      DeniedReason::None);
  return matrix;
}

Outcome<std::vector<AuditEntry>, DeniedReason> PhrStore::audit_log(
    const crypto::KeyPair& caller) const {
  if (!is_owner(caller)) return DeniedReason::NotOwner;
  return audit_;
}

const HealthRecord* PhrStore::find_record(std::uint64_t record_id) const {
  if (record_id == 0 || record_id > records_.size()) return nullptr;
  return &records_[record_id - 1];
}

std::string audit_entry_json(const AuditEntry& e) {
  std::ostringstream os;
  os << "{\"actor\":\"" << e.actor.str() << "\",\"action\":\""
     << audit_action_name(e.action) << "\",\"record_ids\":[";
  for (std::size_t i = 0; i < e.record_ids.size(); ++i) {
    if (i) os << ',';
    os << e.record_ids[i];
  }
  os << "],\"at\":" << e.at << ",\"outcome\":\""
     << (e.allowed ? "Allowed" : "Denied") << "\"";
  if (!e.allowed) os << ",\"reason\":\"" << denied_reason_name(e.reason) << "\"";
  os << "}";
  return os.str();
}

}  // namespace dhin::phr
