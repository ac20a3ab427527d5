#include "dhin/fl/secagg.hpp"

#include <algorithm>

namespace dhin::fl {

Bytes32 pair_mask_seed(const Bytes32& shared_secret, std::uint32_t round) {
  Encoder enc;
  enc.u32(round);
  return crypto::kdf(shared_secret, as_span(enc.data()));
}

FixedVec expand_mask(const Bytes32& seed, std::uint32_t dim) {
  Bytes stream = crypto::prg_stream(seed, 0, static_cast<std::size_t>(dim) * 8);
  FixedVec mask = FixedVec::zeros(dim);
  for (std::uint32_t i = 0; i < dim; ++i) {
    std::uint64_t word = 0;
    for (int b = 0; b < 8; ++b)
      word |= static_cast<std::uint64_t>(stream[i * 8 + b]) << (8 * b);
    mask.v[i] = word;
  }
  return mask;
}

Outcome<MaskedUpdate, FlError> mask_update(const LocalUpdate& update,
                                           const crypto::KeyPair& self_key,
                                           const identity::Resolver& resolver,
                                           std::span<const identity::Did> roster,
                                           std::uint32_t round) {
  identity::Did self = identity::did_of(self_key.public_key);
  if (std::find(roster.begin(), roster.end(), self) == roster.end())
    return FlError::SelfNotInRoster;

  MaskedUpdate out;
  out.patient = update.patient;
  out.round = round;
  out.n_samples = update.n_samples;
  out.masked = update.delta;

  for (const identity::Did& peer : roster) {
    if (peer == self) continue;
    auto secret = identity::key_agreement(resolver, self_key, peer);
    if (!secret.ok()) return FlError::SelfNotInRoster;  // unresolvable roster
    FixedVec mask = expand_mask(pair_mask_seed(secret.value(), round),
                                update.delta.dim);
    if (self < peer)
      out.masked.add(mask);
    else
      out.masked.sub(mask);
  }
  return out;
}

Outcome<std::pair<FixedVec, std::uint64_t>, AggregateError> aggregate(
    std::span<const MaskedUpdate> masked,
    std::span<const identity::Did> roster) {
  std::vector<identity::Did> missing;
  for (const identity::Did& member : roster) {
    bool found = false;
    for (const MaskedUpdate& u : masked)
      if (u.patient == member) found = true;
    if (!found) missing.push_back(member);
  }
  if (!missing.empty() || masked.empty())
    return AggregateError{FlError::IncompleteRoster, std::move(missing)};
  std::uint32_t round = masked.front().round;
  for (const MaskedUpdate& u : masked)
    if (u.round != round) return AggregateError{FlError::RoundMismatch, {}};

  FixedVec sum = FixedVec::zeros(masked.front().masked.dim);
  std::uint64_t total_n = 0;
  for (const MaskedUpdate& u : masked) {
    sum.add(u.masked);
    total_n += u.n_samples;
  }
  return std::pair<FixedVec, std::uint64_t>{std::move(sum), total_n};
}

namespace {
Bytes32 seal_key(const Bytes32& shared_secret, std::uint32_t round) {
  Encoder enc;
  enc.str("seal");
  enc.u32(round);
  return crypto::kdf(shared_secret, as_span(enc.data()));
}
}  // namespace

Bytes seal_update(const LocalUpdate& update, const crypto::KeyPair& self_key,
                  const identity::Resolver& resolver,
                  const identity::Did& evaluator, std::uint32_t round) {
  Encoder enc;
  enc.raw(as_span(update.patient.id));
  enc.u32(update.round);
  enc.u32(update.n_samples);
  enc.bytes(as_span(update.delta.encode()));
  Bytes sealed = enc.take();

  auto secret = identity::key_agreement(resolver, self_key, evaluator);
  if (!secret.ok()) return {};
  crypto::stream_xor(seal_key(secret.value(), round), 0, sealed.data(),
                     sealed.size());
  return sealed;
}

Outcome<LocalUpdate, FlError> open_sealed_update(
    ByteSpan sealed, const crypto::KeyPair& evaluator_key,
    const identity::Resolver& resolver, const identity::Did& patient,
    std::uint32_t round) {
  auto secret = identity::key_agreement(resolver, evaluator_key, patient);
  if (!secret.ok()) return FlError::SelfNotInRoster;
  Bytes plain(sealed.begin(), sealed.end());
  crypto::stream_xor(seal_key(secret.value(), round), 0, plain.data(),
                     plain.size());
  try {
    Decoder dec(as_span(plain));
    LocalUpdate update;
    update.patient.id = dec.fixed<32>();
    update.round = dec.u32();
    update.n_samples = dec.u32();
    auto delta = FixedVec::decode(as_span(dec.bytes()));
    if (!delta || !dec.done() || update.patient != patient ||
        update.round != round)
      return FlError::RoundMismatch;
    update.delta = std::move(*delta);
    return update;
  } catch (const CodecError&) {
    return FlError::RoundMismatch;
  }
}

}  // namespace dhin::fl
