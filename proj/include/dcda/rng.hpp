#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <string_view>

namespace dcda::rng {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Order-sensitive hash of a key tuple. Used to derive counter-based draws that
// depend only on the key, never on call order.
inline constexpr std::uint64_t mix(std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (std::uint64_t k : keys) h = splitmix64(h ^ splitmix64(k));
  return h;
}

inline constexpr std::uint64_t label_hash(std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Sub-seed for one component, so toggling a component leaves the other streams untouched.
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view label) {
  return mix({master, label_hash(label)});
}

// 53-bit uniform in [0, 1).
inline constexpr double to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

inline double keyed_uniform(std::initializer_list<std::uint64_t> keys) { return to_unit(mix(keys)); }

// Box-Muller on two keyed uniforms.
inline double keyed_normal(std::initializer_list<std::uint64_t> keys) {
  const std::uint64_t h = mix(keys);
  const double u1 = 1.0 - to_unit(splitmix64(h));  // (0, 1]
  const double u2 = to_unit(splitmix64(h ^ 0x5851f42d4c957f2dULL));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace dcda::rng
