#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace ratt {

// 64-bit FNV-1a; used to fingerprint prompts and responses in call logs.
// Not a cryptographic hash.
inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string to_hex(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xF];
    v >>= 4;
  }
  return out;
}

inline std::string digest_hex(std::string_view data) { return to_hex(fnv1a64(data)); }

}  // namespace ratt
