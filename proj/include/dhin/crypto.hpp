#ifndef DHIN_CRYPTO_HPP
#define DHIN_CRYPTO_HPP

#include "dhin/common.hpp"

// Thin veneer over libsodium. Ed25519 for signatures (64 bytes), X25519 for
// key agreement (32-byte shared secrets), SHA-256 for digests, ChaCha20 as the
// deterministic expandable PRG. Everything is deterministic given its inputs.

namespace dhin::crypto {

Bytes32 sha256(ByteSpan data);

struct KeyPair {
  Bytes32 seed;        // the 32-byte private key
  Bytes32 public_key;  // Ed25519 verification key
  std::array<std::uint8_t, 64> signing_key;  // expanded form, derived from seed
};

KeyPair keypair_from_seed(const Bytes32& seed);

Sig64 sign(const KeyPair& key, ByteSpan message);
bool verify(const Bytes32& public_key, ByteSpan message, const Sig64& sig);

// X25519 agreement between two Ed25519 identities; symmetric in the pair.
// Result is hashed together with both public keys (sorted) so distinct peers
// yield distinct secrets.
Bytes32 agree(const KeyPair& self, const Bytes32& peer_public_key);

// Keyed derivation (BLAKE2b-256 with `key` as the MAC key).
Bytes32 kdf(const Bytes32& key, ByteSpan context);

// ChaCha20 keystream of `len` bytes under key/nonce.
Bytes prg_stream(const Bytes32& key, std::uint64_t nonce, std::size_t len);
// XOR `data` in place with the keystream (its own inverse).
void stream_xor(const Bytes32& key, std::uint64_t nonce, std::uint8_t* data,
                std::size_t len);

// Deterministic RNG for simulation and tests. ChaCha20-backed so output is
// identical across platforms and runs.
class Rng {
 public:
  explicit Rng(const Bytes32& seed);
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  // Uniform in [0, 1).
  double next_unit();
  // Uniform integer in [0, n), n > 0. Rejection-sampled, unbiased.
  std::uint64_t uniform(std::uint64_t n);
  // Standard normal via Box-Muller.
  double normal();
  void fill(std::uint8_t* out, std::size_t len);
  Bytes32 fill32();
  // Independent child generator; label keeps siblings distinct.
  Rng fork(std::string_view label);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = uniform(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  void refill();
  Bytes32 key_;
  std::uint64_t counter_ = 0;
  std::array<std::uint8_t, 1024> buf_;
  std::size_t pos_;
  bool have_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace dhin::crypto

#endif
