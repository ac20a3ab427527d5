#include "dhin/identity.hpp"

#include <sstream>

namespace dhin::identity {

std::string Did::str() const { return "did:dhin:" + to_hex(as_span(id)); }

std::optional<Did> Did::parse(std::string_view s) {
  constexpr std::string_view prefix = "did:dhin:";
  if (s.size() != prefix.size() + 64 || s.substr(0, prefix.size()) != prefix)
    return std::nullopt;
  auto bytes = from_hex(s.substr(prefix.size()));
  if (!bytes || bytes->size() != 32) return std::nullopt;
  Did did;
  std::copy(bytes->begin(), bytes->end(), did.id.begin());
  return did;
}

Did did_of(const Bytes32& public_key) {
  return Did{crypto::sha256(as_span(public_key))};
}

const char* claim_name(Claim c) {
  switch (c) {
    case Claim::PhysicianLicense: return "PhysicianLicense";
    case Claim::PharmacyLicense: return "PharmacyLicense";
    case Claim::DeviceApproval: return "DeviceApproval";
    case Claim::EvaluatorAccreditation: return "EvaluatorAccreditation";
  }
  return "?";
}

const char* credential_error_name(CredentialError e) {
  switch (e) {
    case CredentialError::UntrustedIssuer: return "UntrustedIssuer";
    case CredentialError::BadSignature: return "BadSignature";
    case CredentialError::Expired: return "Expired";
    case CredentialError::NotYetValid: return "NotYetValid";
    case CredentialError::InvalidWindow: return "InvalidWindow";
    case CredentialError::UnknownDid: return "UnknownDid";
  }
  return "?";
}

Bytes Credential::signing_bytes() const {
  Encoder enc;
  enc.raw(as_span(issuer.id));
  enc.raw(as_span(subject.id));
  enc.u8(static_cast<std::uint8_t>(claim));
  enc.u64(issued_at);
  enc.u64(expires_at);
  return enc.take();
}

Bytes Credential::encode() const {
  Encoder enc;
  enc.raw(as_span(signing_bytes()));
  enc.raw(as_span(signature));
  return enc.take();
}

std::optional<Credential> Credential::decode(ByteSpan bytes) {
  try {
    Decoder dec(bytes);
    Credential c;
    c.issuer.id = dec.fixed<32>();
    c.subject.id = dec.fixed<32>();
    std::uint8_t claim = dec.u8();
    if (claim > static_cast<std::uint8_t>(Claim::EvaluatorAccreditation))
      return std::nullopt;
    c.claim = static_cast<Claim>(claim);
    c.issued_at = dec.u64();
    c.expires_at = dec.u64();
    c.signature = dec.fixed<64>();
    if (!dec.done()) return std::nullopt;
    return c;
  } catch (const CodecError&) {
    return std::nullopt;
  }
}

std::string Credential::to_json() const {
  std::ostringstream os;
  os << "{\"issuer\":\"" << issuer.str() << "\",\"subject\":\"" << subject.str()
     << "\",\"claim\":\"" << claim_name(claim) << "\",\"issued_at\":" << issued_at
     << ",\"expires_at\":" << expires_at << ",\"signature\":\""
     << to_hex(as_span(signature)) << "\"}";
  return os.str();
}

void IssuerRegistry::add_trusted(Claim claim, const Did& issuer) {
  trusted_[claim].insert(issuer);
}

bool IssuerRegistry::is_trusted(Claim claim, const Did& issuer) const {
  auto it = trusted_.find(claim);
  return it != trusted_.end() && it->second.count(issuer) > 0;
}

void IssuerRegistry::encode(Encoder& enc) const {
  enc.u32(static_cast<std::uint32_t>(trusted_.size()));
  for (const auto& [claim, dids] : trusted_) {
    enc.u8(static_cast<std::uint8_t>(claim));
    enc.u32(static_cast<std::uint32_t>(dids.size()));
    for (const Did& d : dids) enc.raw(as_span(d.id));
  }
}

IssuerRegistry IssuerRegistry::decode(Decoder& dec) {
  IssuerRegistry reg;
  std::uint32_t n = dec.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    Claim claim = static_cast<Claim>(dec.u8());
    std::uint32_t m = dec.u32();
    for (std::uint32_t j = 0; j < m; ++j)
      reg.add_trusted(claim, Did{dec.fixed<32>()});
  }
  return reg;
}

bool Resolver::register_document(const DidDocument& doc) {
  if (did_of(doc.public_key) != doc.did) return false;
  docs_.emplace(doc.did, doc);
  return true;
}

const DidDocument* Resolver::lookup(const Did& did) const {
  auto it = docs_.find(did);
  return it == docs_.end() ? nullptr : &it->second;
}

Identity generate_identity(const Bytes32& seed, Resolver& resolver, Tick now) {
  Identity ident;
  ident.key = crypto::keypair_from_seed(seed);
  ident.did = did_of(ident.key.public_key);
  ident.document = DidDocument{ident.did, ident.key.public_key, now};
  resolver.register_document(ident.document);
  return ident;
}

Sig64 sign(const crypto::KeyPair& key, ByteSpan message) {
  return crypto::sign(key, message);
}

VerifyResult verify(const Resolver& resolver, const Did& signer,
                    ByteSpan message, const Sig64& sig) {
  const DidDocument* doc = resolver.lookup(signer);
  if (!doc) return VerifyResult::UnknownDid;
  return crypto::verify(doc->public_key, message, sig) ? VerifyResult::Ok
                                                       : VerifyResult::BadSignature;
}

Outcome<Credential, CredentialError> issue_credential(
    const Resolver& resolver, const crypto::KeyPair& issuer_key,
    const Did& subject, Claim claim, Tick issued_at, Tick expires_at) {
  if (expires_at <= issued_at) return CredentialError::InvalidWindow;
  Credential cred;
  cred.issuer = did_of(issuer_key.public_key);
  if (!resolver.lookup(cred.issuer)) return CredentialError::UnknownDid;
  cred.subject = subject;
  cred.claim = claim;
  cred.issued_at = issued_at;
  cred.expires_at = expires_at;
  cred.signature = crypto::sign(issuer_key, as_span(cred.signing_bytes()));
  return cred;
}

std::optional<CredentialError> verify_credential(const Credential& cred,
                                                 const IssuerRegistry& registry,
                                                 const Resolver& resolver,
                                                 Tick now) {
  if (!registry.is_trusted(cred.claim, cred.issuer))
    return CredentialError::UntrustedIssuer;
  const DidDocument* doc = resolver.lookup(cred.issuer);
  if (!doc) return CredentialError::UnknownDid;
  if (!crypto::verify(doc->public_key, as_span(cred.signing_bytes()),
                      cred.signature))
    return CredentialError::BadSignature;
  if (now < cred.issued_at) return CredentialError::NotYetValid;
  if (now >= cred.expires_at) return CredentialError::Expired;
  return std::nullopt;
}

Outcome<Bytes32, VerifyResult> key_agreement(const Resolver& resolver,
                                             const crypto::KeyPair& self,
                                             const Did& peer) {
  const DidDocument* doc = resolver.lookup(peer);
  if (!doc) return VerifyResult::UnknownDid;
  return crypto::agree(self, doc->public_key);
}

void CredentialStore::add(const Credential& cred) { creds_.push_back(cred); }

std::vector<const Credential*> CredentialStore::find(const Did& subject,
                                                     Claim claim) const {
  std::vector<const Credential*> out;
  for (const Credential& c : creds_)
    if (c.subject == subject && c.claim == claim) out.push_back(&c);
  return out;
}

bool CredentialStore::has_valid(const Did& subject, Claim claim,
                                const IssuerRegistry& registry,
                                const Resolver& resolver, Tick at) const {
  for (const Credential* c : find(subject, claim))
    if (!verify_credential(*c, registry, resolver, at)) return true;
  return false;
}

}  // namespace dhin::identity
