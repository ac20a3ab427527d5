#include "dhin/crypto.hpp"

#include <sodium.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace dhin::crypto {

namespace {
void ensure_sodium() {
  static const int rc = sodium_init();
  if (rc < 0) throw std::runtime_error("libsodium init failed");
}
}  // namespace

Bytes32 sha256(ByteSpan data) {
  ensure_sodium();
  Bytes32 out;
  crypto_hash_sha256(out.data(), data.data(), data.size());
  return out;
}

KeyPair keypair_from_seed(const Bytes32& seed) {
  ensure_sodium();
  KeyPair kp;
  kp.seed = seed;
  crypto_sign_seed_keypair(kp.public_key.data(), kp.signing_key.data(),
                           seed.data());
  return kp;
}

Sig64 sign(const KeyPair& key, ByteSpan message) {
  ensure_sodium();
  Sig64 sig;
  crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(),
                       key.signing_key.data());
  return sig;
}

bool verify(const Bytes32& public_key, ByteSpan message, const Sig64& sig) {
  ensure_sodium();
  return crypto_sign_verify_detached(sig.data(), message.data(), message.size(),
                                     public_key.data()) == 0;
}

Bytes32 agree(const KeyPair& self, const Bytes32& peer_public_key) {
  ensure_sodium();
  Bytes32 my_curve_sk, my_curve_pk, peer_curve_pk;
  if (crypto_sign_ed25519_sk_to_curve25519(my_curve_sk.data(),
                                           self.signing_key.data()) != 0 ||
      crypto_sign_ed25519_pk_to_curve25519(my_curve_pk.data(),
                                           self.public_key.data()) != 0 ||
      crypto_sign_ed25519_pk_to_curve25519(peer_curve_pk.data(),
                                           peer_public_key.data()) != 0) {
    throw std::runtime_error("key conversion failed");
  }
  Bytes32 q;
  if (crypto_scalarmult(q.data(), my_curve_sk.data(), peer_curve_pk.data()) != 0)
    throw std::runtime_error("scalarmult failed");

  // Hash in both identity keys, low/high ordered, so the secret is symmetric
  // and bound to the pair.
  const Bytes32& lo =
      std::lexicographical_compare(self.public_key.begin(),
                                   self.public_key.end(),
                                   peer_public_key.begin(),
                                   peer_public_key.end())
          ? self.public_key
          : peer_public_key;
  const Bytes32& hi = (&lo == &self.public_key) ? peer_public_key
                                                : self.public_key;
  crypto_generichash_state st;
  crypto_generichash_init(&st, nullptr, 0, 32);
  crypto_generichash_update(&st, q.data(), q.size());
  crypto_generichash_update(&st, lo.data(), lo.size());
  crypto_generichash_update(&st, hi.data(), hi.size());
  Bytes32 out;
  crypto_generichash_final(&st, out.data(), 32);
  return out;
}

Bytes32 kdf(const Bytes32& key, ByteSpan context) {
  ensure_sodium();
  Bytes32 out;
  crypto_generichash(out.data(), 32, context.data(), context.size(), key.data(),
                     key.size());
  return out;
}

Bytes prg_stream(const Bytes32& key, std::uint64_t nonce, std::size_t len) {
  ensure_sodium();
  Bytes out(len, 0);
  std::uint8_t n[8];
  for (int i = 0; i < 8; ++i) n[i] = static_cast<std::uint8_t>(nonce >> (8 * i));
  if (len > 0) crypto_stream_chacha20(out.data(), len, n, key.data());
  return out;
}

void stream_xor(const Bytes32& key, std::uint64_t nonce, std::uint8_t* data,
                std::size_t len) {
  ensure_sodium();
  std::uint8_t n[8];
  for (int i = 0; i < 8; ++i) n[i] = static_cast<std::uint8_t>(nonce >> (8 * i));
  crypto_stream_chacha20_xor(data, data, len, n, key.data());
}

Rng::Rng(const Bytes32& seed) : key_(seed), pos_(buf_.size()) {}

Rng::Rng(std::uint64_t seed) : pos_(buf_.size()) {
  Bytes32 material{};
  for (int i = 0; i < 8; ++i)
    material[i] = static_cast<std::uint8_t>(seed >> (8 * i));
  key_ = sha256(as_span(material));
}

void Rng::refill() {
  Bytes block = prg_stream(key_, counter_++, buf_.size());
  std::memcpy(buf_.data(), block.data(), buf_.size());
  pos_ = 0;
}

void Rng::fill(std::uint8_t* out, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) {
    if (pos_ == buf_.size()) refill();
    out[i] = buf_[pos_++];
  }
}

Bytes32 Rng::fill32() {
  Bytes32 out;
  fill(out.data(), out.size());
  return out;
}

std::uint64_t Rng::next_u64() {
  std::uint8_t b[8];
  fill(b, 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double Rng::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::uniform(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform(0)");
  std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  for (;;) {
    std::uint64_t v = next_u64();
    if (v < limit) return v % n;
  }
}

double Rng::normal() {
  if (have_spare_normal_) {
    have_spare_normal_ = false;
    return spare_normal_;
  }
  double u1, u2;
  do {
    u1 = next_unit();
  } while (u1 <= 0.0);
  u2 = next_unit();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * M_PI * u2;
  spare_normal_ = r * std::sin(theta);
  have_spare_normal_ = true;
  return r * std::cos(theta);
}

Rng Rng::fork(std::string_view label) {
  Bytes32 child = kdf(key_, as_span(label));
  // Mix in the parent's position so repeated forks with one label differ.
  std::uint8_t ctr[8];
  std::uint64_t v = next_u64();
  for (int i = 0; i < 8; ++i) ctr[i] = static_cast<std::uint8_t>(v >> (8 * i));
  return Rng(kdf(child, ByteSpan(ctr, 8)));
}

}  // namespace dhin::crypto
