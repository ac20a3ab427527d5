#ifndef DHIN_FL_SECAGG_HPP
#define DHIN_FL_SECAGG_HPP

#include "dhin/fl/train.hpp"

// Pairwise-masking secure aggregation. Each ordered pair of roster members
// shares a per-round PRG seed derived from their key agreement; the lower
// member adds the expanded mask, the higher subtracts it, so the ring sum of
// masked updates equals the ring sum of raw deltas bit-exactly. Synchronous
// rounds, all-or-nothing: aggregation aborts if any roster member is missing.

namespace dhin::fl {

// seed_ij = KDF(shared_secret(i, j), round)
Bytes32 pair_mask_seed(const Bytes32& shared_secret, std::uint32_t round);

// ChaCha20 expansion of the seed into dim ring elements.
FixedVec expand_mask(const Bytes32& seed, std::uint32_t dim);

// `roster` must be sorted by Did bytes and contain the updater.
Outcome<MaskedUpdate, FlError> mask_update(const LocalUpdate& update,
                                           const crypto::KeyPair& self_key,
                                           const identity::Resolver& resolver,
                                           std::span<const identity::Did> roster,
                                           std::uint32_t round);

struct AggregateError {
  FlError code;
  std::vector<identity::Did> missing;
};

// Elementwise ring sum plus total declared sample count. Requires one update
// per roster member, all for the same round.
Outcome<std::pair<FixedVec, std::uint64_t>, AggregateError> aggregate(
    std::span<const MaskedUpdate> masked, std::span<const identity::Did> roster);

// Raw updates are additionally sealed to each staked evaluator so individual
// contributions can be scored while the aggregate path stays masked. ChaCha20
// under a per-(pair, round) key.
Bytes seal_update(const LocalUpdate& update, const crypto::KeyPair& self_key,
                  const identity::Resolver& resolver,
                  const identity::Did& evaluator, std::uint32_t round);
Outcome<LocalUpdate, FlError> open_sealed_update(
    ByteSpan sealed, const crypto::KeyPair& evaluator_key,
    const identity::Resolver& resolver, const identity::Did& patient,
    std::uint32_t round);

}  // namespace dhin::fl

#endif
