#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "dhin/identity.hpp"

using namespace dhin;
using namespace dhin::identity;

namespace {

Bytes32 seed_of(std::uint8_t fill, std::uint8_t last = 0) {
  Bytes32 s{};
  s.fill(fill);
  s[31] = last ? last : fill;
  return s;
}

}  // namespace

TEST_CASE("identity generation is deterministic and injective") {
  Resolver r1, r2;
  Identity a1 = generate_identity(seed_of(0x00), r1);
  Identity a2 = generate_identity(seed_of(0x00), r2);
  CHECK(a1.did == a2.did);
  CHECK(a1.key.public_key == a2.key.public_key);

  Bytes32 s{};
  s[31] = 1;
  Identity b = generate_identity(s, r1);
  CHECK(a1.did != b.did);
}

TEST_CASE("1000 random seeds yield 1000 distinct dids") {
  crypto::Rng rng(std::uint64_t{7});
  Resolver resolver;
  std::set<Did> dids;
  for (int i = 0; i < 1000; ++i) {
    Identity ident = generate_identity(rng.fill32(), resolver);
    dids.insert(ident.did);
  }
  CHECK(dids.size() == 1000);
}

TEST_CASE("did renders and parses round trip") {
  Resolver resolver;
  Identity ident = generate_identity(seed_of(0x42), resolver);
  std::string s = ident.did.str();
  CHECK(s.substr(0, 9) == "did:dhin:");
  CHECK(s.size() == 9 + 64);
  auto parsed = Did::parse(s);
  REQUIRE(parsed.has_value());
  CHECK(*parsed == ident.did);
  CHECK(!Did::parse("did:dhin:zz").has_value());
  CHECK(!Did::parse("did:other:" + s.substr(9)).has_value());
}

TEST_CASE("sign/verify round trip, tamper, and key binding") {
  Resolver resolver;
  Identity alice = generate_identity(seed_of(0x01), resolver);
  Identity bob = generate_identity(seed_of(0x02), resolver);

  Bytes msg = {'h', 'e', 'l', 'l', 'o'};
  Sig64 sig = sign(alice.key, as_span(msg));
  CHECK(verify(resolver, alice.did, as_span(msg), sig) == VerifyResult::Ok);

  Bytes tampered = msg;
  tampered[2] ^= 0x01;
  CHECK(verify(resolver, alice.did, as_span(tampered), sig) ==
        VerifyResult::BadSignature);
  CHECK(verify(resolver, bob.did, as_span(msg), sig) ==
        VerifyResult::BadSignature);

  Did unknown;
  unknown.id.fill(0xee);
  CHECK(verify(resolver, unknown, as_span(msg), sig) ==
        VerifyResult::UnknownDid);

  // Deterministic signatures.
  CHECK(sign(alice.key, as_span(msg)) == sig);
}

TEST_CASE("tamper rejection fuzz over message and signature bytes") {
  Resolver resolver;
  Identity alice = generate_identity(seed_of(0x05), resolver);
  crypto::Rng rng(std::uint64_t{99});
  Bytes msg(64);
  rng.fill(msg.data(), msg.size());
  Sig64 sig = sign(alice.key, as_span(msg));

  int rejected = 0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    Bytes m = msg;
    Sig64 s = sig;
    std::size_t pos = rng.uniform(m.size() + s.size());
    std::uint8_t flip =
        static_cast<std::uint8_t>(1 + rng.uniform(255));
    if (pos < m.size())
      m[pos] ^= flip;
    else
      s[pos - m.size()] ^= flip;
    if (verify(resolver, alice.did, as_span(m), s) != VerifyResult::Ok)
      ++rejected;
  }
  CHECK(rejected == trials);
}

TEST_CASE("credential window and trust checks") {
  Resolver resolver;
  Identity society = generate_identity(seed_of(0x10), resolver);
  Identity doctor = generate_identity(seed_of(0x11), resolver);
  IssuerRegistry registry;
  registry.add_trusted(Claim::PhysicianLicense, society.did);

  auto cred = issue_credential(resolver, society.key, doctor.did,
                               Claim::PhysicianLicense, 0, 1000);
  REQUIRE(cred.ok());

  CHECK(!verify_credential(cred.value(), registry, resolver, 500).has_value());
  // Inclusive start, exclusive end.
  CHECK(!verify_credential(cred.value(), registry, resolver, 0).has_value());
  auto at_expiry = verify_credential(cred.value(), registry, resolver, 1000);
  REQUIRE(at_expiry.has_value());
  CHECK(*at_expiry == CredentialError::Expired);

  auto bad_window = issue_credential(resolver, society.key, doctor.did,
                                     Claim::PhysicianLicense, 10, 10);
  CHECK(!bad_window.ok());
  CHECK(bad_window.error() == CredentialError::InvalidWindow);

  // Issuer not trusted for this claim kind.
  auto pharm = issue_credential(resolver, society.key, doctor.did,
                                Claim::PharmacyLicense, 0, 1000);
  REQUIRE(pharm.ok());
  auto untrusted = verify_credential(pharm.value(), registry, resolver, 10);
  REQUIRE(untrusted.has_value());
  CHECK(*untrusted == CredentialError::UntrustedIssuer);

  // Tampered subject.
  Credential forged = cred.value();
  forged.subject.id[0] ^= 0xff;
  auto bad = verify_credential(forged, registry, resolver, 10);
  REQUIRE(bad.has_value());
  CHECK(*bad == CredentialError::BadSignature);
}

TEST_CASE("credential canonical-encoding mutations are always rejected") {
  Resolver resolver;
  Identity society = generate_identity(seed_of(0x20), resolver);
  Identity doctor = generate_identity(seed_of(0x21), resolver);
  IssuerRegistry registry;
  registry.add_trusted(Claim::PhysicianLicense, society.did);

  auto cred = issue_credential(resolver, society.key, doctor.did,
                               Claim::PhysicianLicense, 0, 1000);
  REQUIRE(cred.ok());
  Bytes canonical = cred.value().encode();

  crypto::Rng rng(std::uint64_t{123});
  int rejected = 0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    Bytes mutated = canonical;
    std::size_t pos = rng.uniform(mutated.size());
    mutated[pos] ^= static_cast<std::uint8_t>(1 + rng.uniform(255));
    auto decoded = Credential::decode(as_span(mutated));
    if (!decoded) {
      ++rejected;
      continue;
    }
    if (verify_credential(*decoded, registry, resolver, 500).has_value())
      ++rejected;
  }
  CHECK(rejected == trials);
}

TEST_CASE("key agreement is symmetric and pairwise distinct") {
  Resolver resolver;
  crypto::Rng rng(std::uint64_t{5});
  std::vector<Identity> mesh;
  for (int i = 0; i < 10; ++i)
    mesh.push_back(generate_identity(rng.fill32(), resolver));

  for (std::size_t i = 0; i < mesh.size(); ++i) {
    for (std::size_t j = i + 1; j < mesh.size(); ++j) {
      auto a = key_agreement(resolver, mesh[i].key, mesh[j].did);
      auto b = key_agreement(resolver, mesh[j].key, mesh[i].did);
      REQUIRE(a.ok());
      REQUIRE(b.ok());
      CHECK(a.value() == b.value());
      // Deterministic across calls.
      auto again = key_agreement(resolver, mesh[i].key, mesh[j].did);
      CHECK(again.value() == a.value());
    }
  }

  auto ab = key_agreement(resolver, mesh[0].key, mesh[1].did);
  auto ac = key_agreement(resolver, mesh[0].key, mesh[2].did);
  CHECK(ab.value() != ac.value());

  Did unknown;
  unknown.id.fill(0x77);
  auto missing = key_agreement(resolver, mesh[0].key, unknown);
  CHECK(!missing.ok());
}

TEST_CASE("credential store finds valid credentials at a tick") {
  Resolver resolver;
  Identity society = generate_identity(seed_of(0x30), resolver);
  Identity doctor = generate_identity(seed_of(0x31), resolver);
  IssuerRegistry registry;
  registry.add_trusted(Claim::PhysicianLicense, society.did);

  CredentialStore store;
  auto cred = issue_credential(resolver, society.key, doctor.did,
                               Claim::PhysicianLicense, 100, 200);
  store.add(cred.value());

  CHECK(store.has_valid(doctor.did, Claim::PhysicianLicense, registry, resolver,
                        150));
  CHECK(!store.has_valid(doctor.did, Claim::PhysicianLicense, registry,
                         resolver, 250));
  CHECK(!store.has_valid(doctor.did, Claim::PharmacyLicense, registry, resolver,
                         150));
}
