#pragma once
#include <cstdint>
#include <initializer_list>

namespace tandem {

/// SplitMix64 finalizer. Bijective on 64-bit words.
std::uint64_t splitmix64(std::uint64_t x);

/// Deterministic sub-seed derivation.
///
/// The master seed is folded with each index in order:
///   h = splitmix64(master ^ 0x9e3779b97f4a7c15)
///   h = splitmix64(h + splitmix64(index_k + 1))   for each index_k
/// so (master, point, realization, stream) tuples map to decorrelated seeds
/// and results never depend on which thread handles which tuple.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> indices);

/// Stream identifiers used when splitting a realization seed.
enum class SeedStream : std::uint64_t {
  Field = 1,
  SpoolNoise = 2,
  Detector1 = 3,
  Detector2 = 4,
};

inline std::uint64_t derive_seed(std::uint64_t parent, SeedStream stream) {
  return derive_seed(parent, {static_cast<std::uint64_t>(stream)});
}

} // namespace tandem
