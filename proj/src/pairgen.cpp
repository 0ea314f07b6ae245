#include "attrbias/pairgen.hpp"

#include <algorithm>
#include <fstream>

#include "attrbias/error.hpp"
#include "attrbias/rng.hpp"

namespace attrbias {

namespace {

constexpr std::uint64_t kGenuineStream = 1;
constexpr std::uint64_t kImpostorStream = 2;

std::uint64_t choose2(std::uint64_t m) { return m < 2 ? 0 : m * (m - 1) / 2; }

// Maps a rank in [0, C(m,2)) to the pair (i, j), i < j, in row-major order.
std::pair<std::uint32_t, std::uint32_t> unrank_within(std::uint64_t rank, std::uint32_t m) {
  std::uint32_t i = 0;
  std::uint64_t row = m - 1;
  while (rank >= row) {
    rank -= row;
    ++i;
    --row;
  }
  return {i, static_cast<std::uint32_t>(i + 1 + rank)};
}

Pair make_pair(std::uint32_t x, std::uint32_t y) { return x < y ? Pair{x, y} : Pair{y, x}; }

}  // namespace

SampleGroup resolve_group(const Dataset& ds, std::span<const std::string> sample_ids) {
  SampleGroup group;
  group.reserve(sample_ids.size());
  for (const auto& id : sample_ids) {
    auto idx = ds.find(id);
    if (!idx) throw Error(ErrorCode::UnknownSample, "sample '" + id + "' not in dataset");
    group.push_back(*idx);
  }
  std::sort(group.begin(), group.end());
  group.erase(std::unique(group.begin(), group.end()), group.end());
  return group;
}

std::uint64_t group_hash(const Dataset& ds, std::span<const std::uint32_t> group) {
  std::uint64_t h = fnv1a("group");
  for (auto idx : group) {
    h = fnv1a(ds.sample(idx).sample_id, h);
    h = fnv1a(std::string_view("\n", 1), h);
  }
  return h;
}

PairSet pairs_for_group(const Dataset& ds, std::span<const std::uint32_t> group,
                        const PairConfig& cfg) {
  if (cfg.impostor_target && *cfg.impostor_target == 0) {
    throw Error(ErrorCode::InvalidConfig, "impostor_target must be at least 1");
  }
  if (cfg.max_genuine_per_subject && *cfg.max_genuine_per_subject == 0) {
    throw Error(ErrorCode::InvalidConfig, "max_genuine_per_subject must be at least 1");
  }
  for (std::size_t i = 0; i < group.size(); ++i) {
    if (group[i] >= ds.size()) {
      throw Error(ErrorCode::UnknownSample, "group index " + std::to_string(group[i]) +
                                                " outside dataset of size " +
                                                std::to_string(ds.size()));
    }
    if (i > 0 && group[i] <= group[i - 1]) {
      throw Error(ErrorCode::InvalidConfig, "group must be sorted and duplicate-free");
    }
  }

  // Group members ordered by (subject, index): each subject is one contiguous block.
  std::vector<std::uint32_t> by_subject(group.begin(), group.end());
  std::stable_sort(by_subject.begin(), by_subject.end(), [&](std::uint32_t x, std::uint32_t y) {
    return ds.subject_of(x) < ds.subject_of(y);
  });
  std::vector<std::size_t> block_start;
  for (std::size_t p = 0; p < by_subject.size(); ++p) {
    if (p == 0 || ds.subject_of(by_subject[p]) != ds.subject_of(by_subject[p - 1])) {
      block_start.push_back(p);
    }
  }
  block_start.push_back(by_subject.size());
  const std::size_t n_subjects = block_start.size() - 1;

  if (n_subjects < 2) {
    throw Error(ErrorCode::NoImpostorPairs, "group spans fewer than two subjects");
  }

  const std::uint64_t key = derive_key(cfg.seed, {group_hash(ds, group)});

  PairSet out;
  out.config = cfg;
  for (std::size_t s = 0; s < n_subjects; ++s) {
    const std::size_t begin = block_start[s];
    const auto m = static_cast<std::uint32_t>(block_start[s + 1] - begin);
    const std::uint64_t total = choose2(m);
    if (total == 0) continue;
    const std::uint64_t keep =
        cfg.max_genuine_per_subject ? std::min<std::uint64_t>(*cfg.max_genuine_per_subject, total)
                                    : total;
    CounterRng rng(derive_key(key, {kGenuineStream, ds.subject_of(by_subject[begin])}));
    for (std::uint64_t rank : sample_without_replacement(rng, total, keep)) {
      auto [i, j] = unrank_within(rank, m);
      out.genuine.push_back(make_pair(by_subject[begin + i], by_subject[begin + j]));
    }
  }
  if (out.genuine.empty()) {
    throw Error(ErrorCode::NoGenuinePairs, "no subject has two or more samples in the group");
  }
  std::sort(out.genuine.begin(), out.genuine.end());

  // Cross-subject pairs are ranked by their first position p in by_subject;
  // position p pairs with every position at or after the end of its block.
  const std::size_t n = by_subject.size();
  std::vector<std::uint64_t> rank_start(n + 1, 0);
  std::vector<std::size_t> block_end(n);
  for (std::size_t s = 0; s < n_subjects; ++s) {
    for (std::size_t p = block_start[s]; p < block_start[s + 1]; ++p) block_end[p] = block_start[s + 1];
  }
  for (std::size_t p = 0; p < n; ++p) rank_start[p + 1] = rank_start[p] + (n - block_end[p]);
  const std::uint64_t total_cross = rank_start[n];

  const std::uint64_t target =
      cfg.impostor_target ? *cfg.impostor_target : 10 * static_cast<std::uint64_t>(out.genuine.size());
  CounterRng rng(derive_key(key, {kImpostorStream}));
  const auto ranks = sample_without_replacement(rng, total_cross, target);
  out.impostor.reserve(ranks.size());
  for (std::uint64_t rank : ranks) {
    const auto it = std::upper_bound(rank_start.begin(), rank_start.end(), rank);
    const auto p = static_cast<std::size_t>(it - rank_start.begin()) - 1;
    const std::size_t q = block_end[p] + (rank - rank_start[p]);
    out.impostor.push_back(make_pair(by_subject[p], by_subject[q]));
  }
  std::sort(out.impostor.begin(), out.impostor.end());
  return out;
}

void write_pair_list(const Dataset& ds, const PairSet& pairs, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  for (const auto& p : pairs.genuine) {
    os << ds.sample(p.a).sample_id << ',' << ds.sample(p.b).sample_id << ",genuine\n";
  }
  for (const auto& p : pairs.impostor) {
    os << ds.sample(p.a).sample_id << ',' << ds.sample(p.b).sample_id << ",impostor\n";
  }
  if (!os) throw Error(ErrorCode::IoFailure, "short write to " + path.string());
}

}  // namespace attrbias
