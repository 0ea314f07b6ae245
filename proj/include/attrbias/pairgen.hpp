#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "attrbias/ingest.hpp"

namespace attrbias {

// Sorted, duplicate-free indices into a Dataset.
using SampleGroup = std::vector<std::uint32_t>;

SampleGroup resolve_group(const Dataset& ds, std::span<const std::string> sample_ids);

// Order-independent 64-bit fingerprint of a group's sample ids.
std::uint64_t group_hash(const Dataset& ds, std::span<const std::uint32_t> group);

struct PairConfig {
  std::optional<std::size_t> max_genuine_per_subject;  // nullopt = unlimited
  std::optional<std::size_t> impostor_target;          // nullopt = 10 x |genuine|
  std::uint64_t seed = 0;

  friend bool operator==(const PairConfig&, const PairConfig&) = default;
};

struct Pair {
  std::uint32_t a = 0;  // a < b
  std::uint32_t b = 0;

  friend auto operator<=>(const Pair&, const Pair&) = default;
};

struct PairSet {
  std::vector<Pair> genuine;
  std::vector<Pair> impostor;
  PairConfig config;

  friend bool operator==(const PairSet&, const PairSet&) = default;
};

// Genuine pairs: every within-subject pair of the group, capped per subject by
// seeded uniform subsampling. Impostor pairs: impostor_target distinct
// cross-subject pairs drawn uniformly without replacement (all of them if
// fewer exist). Both lists are sorted. Randomness is keyed by
// (cfg.seed, group_hash), so the result is a pure function of the inputs.
PairSet pairs_for_group(const Dataset& ds, std::span<const std::uint32_t> group,
                        const PairConfig& cfg);

// One "idA,idB,genuine|impostor" line per pair.
void write_pair_list(const Dataset& ds, const PairSet& pairs, const std::filesystem::path& path);

}  // namespace attrbias
