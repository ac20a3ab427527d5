#ifndef DHIN_IDENTITY_HPP
#define DHIN_IDENTITY_HPP

#include <compare>
#include <map>
#include <set>

#include "dhin/codec.hpp"
#include "dhin/common.hpp"
#include "dhin/crypto.hpp"

// Root layer: decentralized identifiers, signatures, and verifiable
// credentials with a trusted-issuer registry. Resolution is an in-memory
// registry; writes happen during scenario setup only.

namespace dhin::identity {

struct Did {
  Bytes32 id{};  // SHA-256 of the public key

  auto operator<=>(const Did&) const = default;

  // Renders as "did:dhin:<64 hex chars>".
  std::string str() const;
  static std::optional<Did> parse(std::string_view s);
};

Did did_of(const Bytes32& public_key);

struct DidDocument {
  Did did;
  Bytes32 public_key{};
  Tick created_at = 0;
};

enum class Claim : std::uint8_t {
  PhysicianLicense = 0,
  PharmacyLicense = 1,
  DeviceApproval = 2,
  EvaluatorAccreditation = 3,
};

const char* claim_name(Claim c);

struct Credential {
  Did issuer;
  Did subject;
  Claim claim = Claim::PhysicianLicense;
  Tick issued_at = 0;
  Tick expires_at = 0;
  Sig64 signature{};

  // Canonical bytes of everything the issuer signs (all fields but the
  // signature).
  Bytes signing_bytes() const;
  Bytes encode() const;
  static std::optional<Credential> decode(ByteSpan bytes);
  std::string to_json() const;
};

class IssuerRegistry {
 public:
  void add_trusted(Claim claim, const Did& issuer);
  bool is_trusted(Claim claim, const Did& issuer) const;

  void encode(Encoder& enc) const;
  static IssuerRegistry decode(Decoder& dec);

 private:
  std::map<Claim, std::set<Did>> trusted_;
};

class Resolver {
 public:
  // Rejects documents whose did does not match the key digest.
  bool register_document(const DidDocument& doc);
  const DidDocument* lookup(const Did& did) const;
  std::size_t size() const { return docs_.size(); }
  const std::map<Did, DidDocument>& documents() const { return docs_; }

 private:
  std::map<Did, DidDocument> docs_;
};

struct Identity {
  Did did;
  crypto::KeyPair key;
  DidDocument document;
};

// Deterministic: the same seed always yields the same identity. Registers the
// document with the resolver.
Identity generate_identity(const Bytes32& seed, Resolver& resolver,
                           Tick now = 0);

Sig64 sign(const crypto::KeyPair& key, ByteSpan message);

enum class VerifyResult : std::uint8_t { Ok, BadSignature, UnknownDid };
VerifyResult verify(const Resolver& resolver, const Did& signer,
                    ByteSpan message, const Sig64& sig);

enum class CredentialError : std::uint8_t {
  UntrustedIssuer,
  BadSignature,
  Expired,
  NotYetValid,
  InvalidWindow,
  UnknownDid,
};

const char* credential_error_name(CredentialError e);

Outcome<Credential, CredentialError> issue_credential(
    const Resolver& resolver, const crypto::KeyPair& issuer_key,
    const Did& subject, Claim claim, Tick issued_at, Tick expires_at);

// Ok (nullopt) iff the issuer is registry-trusted for the claim kind, the
// signature verifies, and issued_at <= now < expires_at.
std::optional<CredentialError> verify_credential(const Credential& cred,
                                                 const IssuerRegistry& registry,
                                                 const Resolver& resolver,
                                                 Tick now);

// X25519 agreement keyed to the pair; symmetric: agree(a, did_b) ==
// agree(b, did_a).
Outcome<Bytes32, VerifyResult> key_agreement(const Resolver& resolver,
                                             const crypto::KeyPair& self,
                                             const Did& peer);

// Directory of issued credentials, used by workflows that must check an
// author's standing at a past tick (dispensing, claim verification).
class CredentialStore {
 public:
  void add(const Credential& cred);
  std::vector<const Credential*> find(const Did& subject, Claim claim) const;
  // True iff some stored credential for (subject, claim) verifies at `at`.
  bool has_valid(const Did& subject, Claim claim,
                 const IssuerRegistry& registry, const Resolver& resolver,
                 Tick at) const;
  const std::vector<Credential>& all() const { return creds_; }

 private:
  std::vector<Credential> creds_;
};

}  // namespace dhin::identity

#endif
