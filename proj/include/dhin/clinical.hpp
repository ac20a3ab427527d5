#ifndef DHIN_CLINICAL_HPP
#define DHIN_CLINICAL_HPP

#include "dhin/fl/model.hpp"
#include "dhin/phr.hpp"

// Real-world-layer workflows over the PHR: credential-checked prescribing,
// pharmacy dispensing with dual verification, referrals, and Medical AI
// Device read/write.

namespace dhin::clinical {

struct PrescriptionPayload {
  std::string drug;
  std::string dose;
  std::uint8_t refills = 0;
  std::array<std::uint8_t, 16> rx_nonce{};  // unique per prescription

  Bytes encode() const;
  static std::optional<PrescriptionPayload> decode(ByteSpan bytes);
};

struct ReferralPayload {
  std::string specialty;
  std::string reason;

  Bytes encode() const;
};

struct DispensePayload {
  std::uint64_t rx_record_id = 0;

  Bytes encode() const;
  static std::optional<DispensePayload> decode(ByteSpan bytes);
};

struct DispenseVerification {
  bool patient_ok = false;
  bool physician_sig_ok = false;
  bool physician_cred_ok = false;
};

struct DispenseReceipt {
  std::uint64_t rx_record_id = 0;
  identity::Did pharmacy;
  Tick at = 0;
  DispenseVerification verification;

  std::string to_json() const;
};

struct DeviceOutputPayload {
  std::string device_model;
  std::vector<std::uint64_t> input_record_ids;
  Bytes result;
  double confidence = 0.0;  // in [0, 1]

  Bytes encode() const;
  static std::optional<DeviceOutputPayload> decode(ByteSpan bytes);
};

struct ClinicalError {
  enum class Kind : std::uint8_t {
    Credential,        // detail in `cred`
    Denied,            // detail in `denied`
    PatientProofFailed,
    BadPhysicianSignature,
    UntrustedPhysician,
    AlreadyDispensed,
    NotFound,
    InputNotReadable,
    SchemaMismatch,
    DuplicateRx,
  };
  Kind kind;
  identity::CredentialError cred = identity::CredentialError::UntrustedIssuer;
  phr::DeniedReason denied = phr::DeniedReason::None;

  std::string str() const;
};

template <typename T>
using ClinResult = Outcome<T, ClinicalError>;

// Verifies the physician credential (PhysicianLicense) at `now`, then writes
// an author-signed Prescription under the physician's Write grant. Replaying
// the same rx_nonce into the same store is rejected.
ClinResult<std::uint64_t> prescribe(const crypto::KeyPair& physician_key,
                                    const identity::Credential& physician_cred,
                                    phr::PhrStore& store,
                                    const PrescriptionPayload& payload,
                                    const identity::IssuerRegistry& registry,
                                    const identity::Resolver& resolver,
                                    Tick now);

// Same pattern with kind Referral.
ClinResult<std::uint64_t> refer(const crypto::KeyPair& physician_key,
                                const identity::Credential& physician_cred,
                                phr::PhrStore& store,
                                const ReferralPayload& payload,
                                const identity::IssuerRegistry& registry,
                                const identity::Resolver& resolver, Tick now);

// Pharmacy dispensing, dual verification: the patient proves control of the
// store owner Did by signing a fresh challenge, and the prescription's author
// signature plus the author's license (at the original issue tick) are
// checked against the registry. Appends a Dispense record on success.
ClinResult<DispenseReceipt> fill_prescription(
    const crypto::KeyPair& pharmacy_key,
    const identity::Credential& pharmacy_cred, phr::PhrStore& store,
    const crypto::KeyPair& patient_key, std::uint64_t rx_record_id,
    const identity::IssuerRegistry& registry,
    const identity::Resolver& resolver,
    const identity::CredentialStore& credentials, crypto::Rng& challenge_rng,
    Tick now);

// Device write-back: requires a DeviceApproval credential, Write{AiOutput},
// and read access to every referenced input record.
ClinResult<std::uint64_t> device_write(const crypto::KeyPair& device_key,
                                       const identity::Credential& device_cred,
                                       phr::PhrStore& store,
                                       const DeviceOutputPayload& output,
                                       const identity::IssuerRegistry& registry,
                                       const identity::Resolver& resolver,
                                       Tick now);

// Runs the study's global model over the device's readable schema records;
// scores the most recent matching record. confidence = sigma(w.x), result is
// one class byte.
ClinResult<DeviceOutputPayload> device_infer(const crypto::KeyPair& device_key,
                                             phr::PhrStore& store,
                                             const fl::ModelParams& model,
                                             const fl::StudySchema& schema,
                                             const std::string& device_model,
                                             Tick now);

// Integrity sweep used by tests: every record has a verifiable author
// signature and, for non-owner authors, a credential valid at created_at.
bool verify_store_records(const phr::PhrStore& store,
                          const identity::IssuerRegistry& registry,
                          const identity::Resolver& resolver,
                          const identity::CredentialStore& credentials);

}  // namespace dhin::clinical

#endif
