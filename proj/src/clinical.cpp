#include "dhin/clinical.hpp"

#include <algorithm>
#include <sstream>

#include "dhin/fl/kernels.hpp"

namespace dhin::clinical {

Bytes PrescriptionPayload::encode() const {
  Encoder enc;
  enc.str(drug);
  enc.str(dose);
  enc.u8(refills);
  enc.raw(ByteSpan(rx_nonce.data(), rx_nonce.size()));
  return enc.take();
}

std::optional<PrescriptionPayload> PrescriptionPayload::decode(ByteSpan bytes) {
  try {
    Decoder dec(bytes);
    PrescriptionPayload p;
    p.drug = dec.str();
    p.dose = dec.str();
    p.refills = dec.u8();
    p.rx_nonce = dec.fixed<16>();
    if (!dec.done()) return std::nullopt;
    return p;
  } catch (const CodecError&) {
    return std::nullopt;
  }
}

Bytes ReferralPayload::encode() const {
  Encoder enc;
  enc.str(specialty);
  enc.str(reason);
  return enc.take();
}

Bytes DispensePayload::encode() const {
  Encoder enc;
  enc.u64(rx_record_id);
  return enc.take();
}

std::optional<DispensePayload> DispensePayload::decode(ByteSpan bytes) {
  try {
    Decoder dec(bytes);
    DispensePayload p;
    p.rx_record_id = dec.u64();
    if (!dec.done()) return std::nullopt;
    return p;
  } catch (const CodecError&) {
    return std::nullopt;
  }
}

std::string DispenseReceipt::to_json() const {
  std::ostringstream os;
  os << "{\"rx_record_id\":" << rx_record_id << ",\"pharmacy\":\""
     << pharmacy.str() << "\",\"at\":" << at << ",\"verification\":{"
     << "\"patient_ok\":" << (verification.patient_ok ? "true" : "false")
     << ",\"physician_sig_ok\":"
     << (verification.physician_sig_ok ? "true" : "false")
     << ",\"physician_cred_ok\":"
     << (verification.physician_cred_ok ? "true" : "false") << "}}";
  return os.str();
}

Bytes DeviceOutputPayload::encode() const {
  Encoder enc;
  enc.str(device_model);
  enc.u32(static_cast<std::uint32_t>(input_record_ids.size()));
  for (std::uint64_t id : input_record_ids) enc.u64(id);
  enc.bytes(as_span(result));
  enc.f64(confidence);
  return enc.take();
}

std::optional<DeviceOutputPayload> DeviceOutputPayload::decode(ByteSpan bytes) {
  try {
    Decoder dec(bytes);
    DeviceOutputPayload p;
    p.device_model = dec.str();
    std::uint32_t n = dec.u32();
    for (std::uint32_t i = 0; i < n; ++i) p.input_record_ids.push_back(dec.u64());
    p.result = dec.bytes();
    p.confidence = dec.f64();
    if (!dec.done()) return std::nullopt;
    return p;
  } catch (const CodecError&) {
    return std::nullopt;
  }
}

std::string ClinicalError::str() const {
  switch (kind) {
    case Kind::Credential:
      return std::string("CredentialError(") +
             identity::credential_error_name(cred) + ")";
    case Kind::Denied:
      return std::string("Denied(") + phr::denied_reason_name(denied) + ")";
    case Kind::PatientProofFailed: return "PatientProofFailed";
    case Kind::BadPhysicianSignature: return "BadPhysicianSignature";
    case Kind::UntrustedPhysician: return "UntrustedPhysician";
    case Kind::AlreadyDispensed: return "AlreadyDispensed";
    case Kind::NotFound: return "NotFound";
    case Kind::InputNotReadable: return "InputNotReadable";
    case Kind::SchemaMismatch: return "SchemaMismatch";
    case Kind::DuplicateRx: return "DuplicateRx";
  }
  return "?";
}

namespace {

using Kind = ClinicalError::Kind;

std::optional<ClinicalError> check_credential(
    const identity::Credential& cred, identity::Claim expected_claim,
    const identity::Did& expected_subject,
    const identity::IssuerRegistry& registry,
    const identity::Resolver& resolver, Tick now) {
  if (cred.claim != expected_claim || cred.subject != expected_subject)
    return ClinicalError{Kind::Credential,
                         identity::CredentialError::UntrustedIssuer,
                         phr::DeniedReason::None};
  if (auto err = identity::verify_credential(cred, registry, resolver, now))
    return ClinicalError{Kind::Credential, *err, phr::DeniedReason::None};
  return std::nullopt;
}

ClinicalError denied(phr::DeniedReason reason) {
  return ClinicalError{Kind::Denied, identity::CredentialError::UntrustedIssuer,
                       reason};
}

}  // namespace

ClinResult<std::uint64_t> prescribe(const crypto::KeyPair& physician_key,
                                    const identity::Credential& physician_cred,
                                    phr::PhrStore& store,
                                    const PrescriptionPayload& payload,
                                    const identity::IssuerRegistry& registry,
                                    const identity::Resolver& resolver,
                                    Tick now) {
  identity::Did physician = identity::did_of(physician_key.public_key);
  if (auto err = check_credential(physician_cred,
                                  identity::Claim::PhysicianLicense, physician,
                                  registry, resolver, now))
    return *err;

  // Replay resistance: the rx_nonce must be new to this store.
  for (const phr::HealthRecord& rec : store.records()) {
    if (rec.kind != phr::RecordKind::Prescription) continue;
    auto existing = PrescriptionPayload::decode(as_span(rec.payload));
    if (existing && existing->rx_nonce == payload.rx_nonce)
      return ClinicalError{Kind::DuplicateRx,
                           identity::CredentialError::UntrustedIssuer,
                           phr::DeniedReason::None};
  }

  auto written = store.write_record(physician_key,
                                    phr::RecordKind::Prescription,
                                    payload.encode(), now);
  if (!written.ok()) return denied(written.error());
  return written.value();
}

ClinResult<std::uint64_t> refer(const crypto::KeyPair& physician_key,
                                const identity::Credential& physician_cred,
                                phr::PhrStore& store,
                                const ReferralPayload& payload,
                                const identity::IssuerRegistry& registry,
                                const identity::Resolver& resolver, Tick now) {
  identity::Did physician = identity::did_of(physician_key.public_key);
  if (auto err = check_credential(physician_cred,
                                  identity::Claim::PhysicianLicense, physician,
                                  registry, resolver, now))
    return *err;
  auto written = store.write_record(physician_key, phr::RecordKind::Referral,
                                    payload.encode(), now);
  if (!written.ok()) return denied(written.error());
  return written.value();
}

ClinResult<DispenseReceipt> fill_prescription(
    const crypto::KeyPair& pharmacy_key,
    const identity::Credential& pharmacy_cred, phr::PhrStore& store,
    const crypto::KeyPair& patient_key, std::uint64_t rx_record_id,
    const identity::IssuerRegistry& registry,
    const identity::Resolver& resolver,
    const identity::CredentialStore& credentials, crypto::Rng& challenge_rng,
    Tick now) {
  identity::Did pharmacy = identity::did_of(pharmacy_key.public_key);
  if (auto err = check_credential(pharmacy_cred,
                                  identity::Claim::PharmacyLicense, pharmacy,
                                  registry, resolver, now))
    return *err;

  DispenseVerification verification;

  // Patient proves control of the store owner Did over a fresh challenge.
  Bytes32 challenge = challenge_rng.fill32();
  Sig64 proof = identity::sign(patient_key, as_span(challenge));
  if (identity::verify(resolver, store.owner(), as_span(challenge), proof) !=
      identity::VerifyResult::Ok)
    return ClinicalError{Kind::PatientProofFailed,
                         identity::CredentialError::UntrustedIssuer,
                         phr::DeniedReason::None};
  verification.patient_ok = true;

  const phr::HealthRecord* rx = store.find_record(rx_record_id);
  if (!rx || rx->kind != phr::RecordKind::Prescription)
    return ClinicalError{Kind::NotFound,
                         identity::CredentialError::UntrustedIssuer,
                         phr::DeniedReason::None};
  auto payload = PrescriptionPayload::decode(as_span(rx->payload));
  if (!payload)
    return ClinicalError{Kind::NotFound,
                         identity::CredentialError::UntrustedIssuer,
                         phr::DeniedReason::None};

  // refills=R allows 1+R dispenses in total.
  std::uint64_t fills = 0;
  for (const phr::HealthRecord& rec : store.records()) {
    if (rec.kind != phr::RecordKind::Dispense) continue;
    auto d = DispensePayload::decode(as_span(rec.payload));
    if (d && d->rx_record_id == rx_record_id) ++fills;
  }
  if (fills >= 1ull + payload->refills)
    return ClinicalError{Kind::AlreadyDispensed,
                         identity::CredentialError::UntrustedIssuer,
                         phr::DeniedReason::None};

  if (identity::verify(resolver, rx->author, as_span(rx->signing_bytes()),
                       rx->author_signature) != identity::VerifyResult::Ok)
    return ClinicalError{Kind::BadPhysicianSignature,
                         identity::CredentialError::UntrustedIssuer,
                         phr::DeniedReason::None};
  verification.physician_sig_ok = true;

  // License is checked at the original issue tick, not the dispense tick.
  if (!credentials.has_valid(rx->author, identity::Claim::PhysicianLicense,
                             registry, resolver, rx->created_at))
    return ClinicalError{Kind::UntrustedPhysician,
                         identity::CredentialError::UntrustedIssuer,
                         phr::DeniedReason::None};
  verification.physician_cred_ok = true;

  auto written = store.write_record(pharmacy_key, phr::RecordKind::Dispense,
                                    DispensePayload{rx_record_id}.encode(), now);
  if (!written.ok()) return denied(written.error());

  return DispenseReceipt{rx_record_id, pharmacy, now, verification};
}

ClinResult<std::uint64_t> device_write(const crypto::KeyPair& device_key,
                                       const identity::Credential& device_cred,
                                       phr::PhrStore& store,
                                       const DeviceOutputPayload& output,
                                       const identity::IssuerRegistry& registry,
                                       const identity::Resolver& resolver,
                                       Tick now) {
  identity::Did device = identity::did_of(device_key.public_key);
  if (auto err = check_credential(device_cred, identity::Claim::DeviceApproval,
                                  device, registry, resolver, now))
    return *err;

  std::set<phr::RecordKind> readable =
      store.effective_kinds(device, phr::Right::Read, now);
  for (std::uint64_t id : output.input_record_ids) {
    const phr::HealthRecord* rec = store.find_record(id);
    if (!rec || !readable.count(rec->kind))
      return ClinicalError{Kind::InputNotReadable,
                           identity::CredentialError::UntrustedIssuer,
                           phr::DeniedReason::None};
  }

  auto written = store.write_record(device_key, phr::RecordKind::AiOutput,
                                    output.encode(), now);
  if (!written.ok()) return denied(written.error());
  return written.value();
}

ClinResult<DeviceOutputPayload> device_infer(const crypto::KeyPair& device_key,
                                             phr::PhrStore& store,
                                             const fl::ModelParams& model,
                                             const fl::StudySchema& schema,
                                             const std::string& device_model,
                                             Tick now) {
  if (model.dim != schema.feature_dim + 1)
    return ClinicalError{Kind::SchemaMismatch,
                         identity::CredentialError::UntrustedIssuer,
                         phr::DeniedReason::None};
  phr::RecordQuery query;
  query.kinds = {schema.kind};
  auto read = store.read_records(device_key, query, now);
  if (!read.ok()) return denied(read.error());

  // Score the most recent schema-conforming record.
  const phr::HealthRecord* latest = nullptr;
  fl::FeatureRow latest_row;
  for (const phr::HealthRecord& rec : read.value()) {
    auto row = fl::decode_feature_record(as_span(rec.payload));
    if (!row || row->x.size() != schema.feature_dim) continue;
    if (!latest || rec.record_id > latest->record_id) {
      latest = &rec;
      latest_row = std::move(*row);
    }
  }
  if (!latest)
    return ClinicalError{Kind::SchemaMismatch,
                         identity::CredentialError::UntrustedIssuer,
                         phr::DeniedReason::None};

  double z = fl::decision_value(model, latest_row.x);
  DeviceOutputPayload out;
  out.device_model = device_model;
  out.input_record_ids = {latest->record_id};
  out.confidence = fl::sigmoid(z);
  out.result = Bytes{static_cast<std::uint8_t>(z >= 0.0 ? 1 : 0)};
  return out;
}

namespace {

std::optional<identity::Claim> claim_for_kind(phr::RecordKind kind) {
  switch (kind) {
    case phr::RecordKind::Prescription:
    case phr::RecordKind::Referral:
    case phr::RecordKind::LabResult:
    case phr::RecordKind::InsuranceClaimNote:
      return identity::Claim::PhysicianLicense;
    case phr::RecordKind::Dispense:
      return identity::Claim::PharmacyLicense;
    case phr::RecordKind::AiOutput:
      return identity::Claim::DeviceApproval;
    default:
      return std::nullopt;  // owner-authored kinds
  }
}

}  // namespace

bool verify_store_records(const phr::PhrStore& store,
                          const identity::IssuerRegistry& registry,
                          const identity::Resolver& resolver,
                          const identity::CredentialStore& credentials) {
  for (const phr::HealthRecord& rec : store.records()) {
    if (identity::verify(resolver, rec.author, as_span(rec.signing_bytes()),
                         rec.author_signature) != identity::VerifyResult::Ok)
      return false;
    if (rec.author == store.owner()) continue;
    auto claim = claim_for_kind(rec.kind);
    if (!claim) return false;  // owner-only kind written by a third party
    if (!credentials.has_valid(rec.author, *claim, registry, resolver,
                               rec.created_at))
      return false;
  }
  return true;
}

}  // namespace dhin::clinical
