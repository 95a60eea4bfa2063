#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace permlrcs {

// SplitMix64 finalizer; used only to derive independent sub-seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derive a child seed from a parent seed and a path of integer tags.
// Distinct paths give statistically independent streams.
constexpr std::uint64_t derive_seed(std::uint64_t parent,
                                    std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t s = mix64(parent);
  for (auto tag : path) s = mix64(s ^ mix64(tag + 0x632be59bd9b4e019ULL));
  return s;
}

using Rng = std::mt19937_64;

// Stream tags for the objects of a synthetic instance.
namespace stream {
inline constexpr std::uint64_t kUstar = 1;
inline constexpr std::uint64_t kBstar = 2;
inline constexpr std::uint64_t kSensing = 3;
inline constexpr std::uint64_t kPermutation = 4;
}  // namespace stream

}  // namespace permlrcs
