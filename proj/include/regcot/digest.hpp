#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>

namespace regcot {

using Seed = std::uint64_t;

/// 64-bit FNV-1a. Stable across platforms and runs; used for context keys,
/// artifact checksums and seed derivation.
class Fnv1a {
 public:
  Fnv1a& update(std::string_view bytes) noexcept {
    for (unsigned char c : bytes) {
      state_ ^= c;
      state_ *= 0x100000001b3ULL;
    }
    return *this;
  }
  Fnv1a& update(std::uint64_t v) noexcept {
    for (int i = 0; i < 8; ++i) {
      state_ ^= static_cast<unsigned char>(v >> (8 * i));
      state_ *= 0x100000001b3ULL;
    }
    return *this;
  }
  /// Field separator so that ("ab","c") and ("a","bc") digest differently.
  Fnv1a& separator() noexcept { return update(std::string_view("\x1f", 1)); }
  std::uint64_t value() const noexcept { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

inline std::uint64_t fnv1a(std::string_view bytes) noexcept { return Fnv1a{}.update(bytes).value(); }

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Child seed for a named sub-stream: splitmix64(seed xor fnv1a(tag)).
inline Seed derive_seed(Seed seed, std::string_view tag) noexcept { return splitmix64(seed ^ fnv1a(tag)); }

template <typename... Tags>
Seed derive_seed(Seed seed, std::string_view first, std::string_view second, Tags&&... rest) noexcept {
  return derive_seed(derive_seed(seed, first), second, std::forward<Tags>(rest)...);
}

std::string to_hex(std::uint64_t v);

/// Uniform double in the open interval (0,1) from 64 random bits.
inline double open_unit(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace regcot
