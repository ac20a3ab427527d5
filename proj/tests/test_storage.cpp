#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dhin/storage.hpp"

using namespace dhin;
using namespace dhin::storage;

TEST_CASE("empty blob has a fixed digest, stable across runs") {
  Store store;
  Cid empty = store.put(ByteSpan{});
  // SHA-256 of the empty string.
  CHECK(empty.hex() ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("put is idempotent and round trips") {
  Store store;
  Bytes blob = {1, 2, 3, 4};
  Cid a = store.put(as_span(blob));
  Cid b = store.put(as_span(blob));
  CHECK(a == b);
  CHECK(store.size() == 1);
  auto got = store.get(a);
  REQUIRE(got.ok());
  CHECK(got.value() == blob);
}

TEST_CASE("unknown cid reports NotFound") {
  Store store;
  Cid missing;
  missing.digest.fill(0xab);
  auto got = store.get(missing);
  CHECK(!got.ok());
  CHECK(got.error() == StoreError::NotFound);
}

TEST_CASE("100 random blobs all retrievable bit-exact") {
  Store store;
  crypto::Rng rng(std::uint64_t{2024});
  std::vector<std::pair<Cid, Bytes>> put;
  for (int i = 0; i < 100; ++i) {
    Bytes blob(1 + rng.uniform(512));
    rng.fill(blob.data(), blob.size());
    put.emplace_back(store.put(as_span(blob)), blob);
  }
  for (const auto& [cid, blob] : put) {
    auto got = store.get(cid);
    REQUIRE(got.ok());
    CHECK(got.value() == blob);
  }
}

TEST_CASE("cid hex parses back") {
  Bytes blob = {9, 9, 9};
  Cid cid = cid_of(as_span(blob));
  auto parsed = Cid::parse(cid.hex());
  REQUIRE(parsed.has_value());
  CHECK(*parsed == cid);
}
