#ifndef DHIN_COMMON_HPP
#define DHIN_COMMON_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace dhin {

using Bytes = std::vector<std::uint8_t>;
using Bytes32 = std::array<std::uint8_t, 32>;
using Sig64 = std::array<std::uint8_t, 64>;
using ByteSpan = std::span<const std::uint8_t>;

// Simulation time. Integer ticks, one ledger block per tick.
using Tick = std::uint64_t;
inline constexpr Tick kTickInfinity = UINT64_MAX;

// Stablecoin units. Integer, smallest denomination, no decimals.
using Tokens = std::uint64_t;

std::string to_hex(ByteSpan bytes);
std::optional<Bytes> from_hex(std::string_view hex);

inline ByteSpan as_span(const Bytes& b) { return ByteSpan(b.data(), b.size()); }
inline ByteSpan as_span(const Bytes32& b) { return ByteSpan(b.data(), b.size()); }
inline ByteSpan as_span(const Sig64& s) { return ByteSpan(s.data(), s.size()); }
inline ByteSpan as_span(std::string_view s) {
  return ByteSpan(reinterpret_cast<const std::uint8_t*>(s.data()), s.size());
}

// Minimal expected-like result carrier used across modules.
template <typename T, typename E>
class Outcome {
 public:
  Outcome(T value) : v_(std::in_place_index<0>, std::move(value)) {}
  Outcome(E error) : v_(std::in_place_index<1>, std::move(error)) {}

  bool ok() const { return v_.index() == 0; }
  explicit operator bool() const { return ok(); }

  T& value() { return std::get<0>(v_); }
  const T& value() const { return std::get<0>(v_); }
  const E& error() const { return std::get<1>(v_); }

 private:
  std::variant<T, E> v_;
};

// For operations with no payload on success.
struct Unit {};
template <typename E>
using Status = Outcome<Unit, E>;

}  // namespace dhin

#endif
