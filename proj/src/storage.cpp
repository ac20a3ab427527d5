#include "dhin/storage.hpp"

#include <mutex>

namespace dhin::storage {

std::optional<Cid> Cid::parse(std::string_view hex) {
  auto bytes = from_hex(hex);
  if (!bytes || bytes->size() != 32) return std::nullopt;
  Cid cid;
  std::copy(bytes->begin(), bytes->end(), cid.digest.begin());
  return cid;
}

Cid cid_of(ByteSpan blob) { return Cid{crypto::sha256(blob)}; }

Cid Store::put(ByteSpan blob) {
  Cid cid = cid_of(blob);
  std::unique_lock lock(mu_);
  blobs_.emplace(cid, Bytes(blob.begin(), blob.end()));
  return cid;
}

Outcome<Bytes, StoreError> Store::get(const Cid& cid) const {
  std::shared_lock lock(mu_);
  auto it = blobs_.find(cid);
  if (it == blobs_.end()) return StoreError::NotFound;
  return it->second;
}

bool Store::contains(const Cid& cid) const {
  std::shared_lock lock(mu_);
  return blobs_.count(cid) > 0;
}

std::size_t Store::size() const {
  std::shared_lock lock(mu_);
  return blobs_.size();
}

std::map<Cid, Bytes> Store::snapshot() const {
  std::shared_lock lock(mu_);
  return blobs_;
}

}  // namespace dhin::storage
