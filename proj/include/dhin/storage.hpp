#ifndef DHIN_STORAGE_HPP
#define DHIN_STORAGE_HPP

#include <map>
#include <shared_mutex>

#include "dhin/common.hpp"
#include "dhin/crypto.hpp"

// Content-addressed off-chain blob store. Only digests (Cids) ever appear
// on-chain; blobs hold model parameters, masked updates, validation sets.

namespace dhin::storage {

struct Cid {
  Bytes32 digest{};

  auto operator<=>(const Cid&) const = default;
  std::string hex() const { return to_hex(as_span(digest)); }
  static std::optional<Cid> parse(std::string_view hex);
};

Cid cid_of(ByteSpan blob);

enum class StoreError : std::uint8_t { NotFound };

class Store {
 public:
  // Idempotent: putting identical content returns the same Cid.
  Cid put(ByteSpan blob);
  Outcome<Bytes, StoreError> get(const Cid& cid) const;
  bool contains(const Cid& cid) const;
  std::size_t size() const;
  std::map<Cid, Bytes> snapshot() const;

 private:
  mutable std::shared_mutex mu_;
  std::map<Cid, Bytes> blobs_;
};

}  // namespace dhin::storage

#endif
