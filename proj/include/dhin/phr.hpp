#ifndef DHIN_PHR_HPP
#define DHIN_PHR_HPP

#include <functional>
#include <set>

#include "dhin/features.hpp"
#include "dhin/identity.hpp"
#include "dhin/records.hpp"

// Patient-owned Personal Health Record: append-only records, owner-set access
// policies, policy-gated reads/writes, and a complete DID-stamped audit trail
// covering denials as well as grants.

namespace dhin::phr {

struct HealthRecord {
  std::uint64_t record_id = 0;
  RecordKind kind = RecordKind::Observation;
  identity::Did author;
  identity::Did subject;  // the patient
  Bytes payload;
  Tick created_at = 0;
  Sig64 author_signature{};
  std::optional<std::uint64_t> amends;

  Bytes signing_bytes() const;
};

enum class Right : std::uint8_t { Read = 0, Write = 1 };

struct AccessPolicy {
  identity::Did grantee;
  std::set<RecordKind> kinds;
  std::set<Right> rights;
  Tick granted_at = 0;
  Tick expires_at = kTickInfinity;
  std::optional<Tick> revoked_at;

  // Effective at t iff granted_at <= t < min(expires_at, revoked_at).
  bool effective_at(Tick t) const;
  void encode(Encoder& enc) const;
};

enum class AuditAction : std::uint8_t {
  Read = 0,
  Write = 1,
  Grant = 2,
  Revoke = 3,
  ExportForTraining = 4,
};

const char* audit_action_name(AuditAction a);

enum class DeniedReason : std::uint8_t {
  None = 0,
  NotOwner = 1,
  NoPolicy = 2,
  Expired = 3,
  Revoked = 4,
  WrongKind = 5,
  BadSignature = 6,
  NoSuchPolicy = 7,
  SchemaMismatch = 8,
};

const char* denied_reason_name(DeniedReason r);

struct AuditEntry {
  identity::Did actor;
  AuditAction action = AuditAction::Read;
  std::vector<std::uint64_t> record_ids;
  Tick at = 0;
  bool allowed = false;
  DeniedReason reason = DeniedReason::None;
};

enum class AnchorMode : std::uint8_t { OffChain = 0, OnChain = 1 };

struct RecordQuery {
  std::set<RecordKind> kinds;  // empty = all kinds
  Tick from = 0;
  Tick to = kTickInfinity;  // inclusive range on created_at
};

class PhrStore {
 public:
  PhrStore(identity::Did owner, const identity::Resolver& resolver,
           AnchorMode mode = AnchorMode::OffChain);

  // OnChain mode: invoked with the canonical policy-list digest after every
  // policy change; the hook anchors it via a ledger transaction.
  void set_anchor_hook(std::function<void(const Bytes32&)> hook);

  Status<DeniedReason> grant_access(const crypto::KeyPair& caller,
                                    AccessPolicy policy, Tick now);
  Status<DeniedReason> revoke_access(const crypto::KeyPair& caller,
                                     const identity::Did& grantee,
                                     const std::set<RecordKind>& kinds,
                                     Tick now);
  Outcome<std::uint64_t, DeniedReason> write_record(
      const crypto::KeyPair& author_key, RecordKind kind, Bytes payload,
      Tick now, std::optional<std::uint64_t> amends = std::nullopt);
  Outcome<std::vector<HealthRecord>, DeniedReason> read_records(
      const crypto::KeyPair& reader_key, const RecordQuery& query, Tick now);
  Outcome<fl::FeatureMatrix, DeniedReason> export_training_set(
      const crypto::KeyPair& caller, const fl::StudySchema& schema, Tick now);
  Outcome<std::vector<AuditEntry>, DeniedReason> audit_log(
      const crypto::KeyPair& caller) const;

  // Kinds the grantee can touch with `right` at tick t (owner: everything).
  std::set<RecordKind> effective_kinds(const identity::Did& who, Right right,
                                       Tick t) const;

  const identity::Did& owner() const { return owner_; }
  AnchorMode anchor_mode() const { return mode_; }
  Bytes32 policy_digest() const;

  // Unaudited integrity access for in-process workflows (dispense checks,
  // verification sweeps, tests). The store itself is the trust boundary.
  const std::vector<HealthRecord>& records() const { return records_; }
  const std::vector<AccessPolicy>& policies() const { return policies_; }
  const std::vector<AuditEntry>& audit() const { return audit_; }
  const HealthRecord* find_record(std::uint64_t record_id) const;

 private:
  bool is_owner(const crypto::KeyPair& key) const;
  DeniedReason gate(const identity::Did& who, Right right, RecordKind kind,
                    Tick now) const;
  void log(const identity::Did& actor, AuditAction action,
           std::vector<std::uint64_t> ids, Tick at, DeniedReason reason);
  void anchor();

  identity::Did owner_;
  const identity::Resolver& resolver_;
  AnchorMode mode_;
  std::function<void(const Bytes32&)> anchor_hook_;
  std::vector<HealthRecord> records_;
  std::vector<AccessPolicy> policies_;
  std::vector<AuditEntry> audit_;
};

std::string audit_entry_json(const AuditEntry& e);

}  // namespace dhin::phr

#endif
