#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <vector>

#include "attrbias/core.hpp"
#include "attrbias/ingest.hpp"
#include "attrbias/pairgen.hpp"

namespace attrbias {

// Cosine similarities of one evaluation group, each list sorted ascending.
struct ScoreSet {
  std::vector<double> genuine;
  std::vector<double> impostor;

  friend bool operator==(const ScoreSet&, const ScoreSet&) = default;
};

// Dot products of the unit-normalized embeddings, clamped to [-1,1].
ScoreSet score_pairs(const Dataset& ds, const PairSet& pairs);

// Decision rule: accept iff score >= t.
//   FNMR(t) = #{genuine < t} / |genuine|
//   FMR(t)  = #{impostor >= t} / |impostor|
double fnmr_at_threshold(const ScoreSet& s, double threshold);
double fmr_at_threshold(const ScoreSet& s, double threshold);

struct EerResult {
  double rate = 0.0;
  // First candidate threshold (distinct score, or +inf) with FNMR >= FMR.
  double threshold = 0.0;
};

// Crossing of the FNMR and FMR step functions over the candidate thresholds,
// linearly interpolated between the two bracketing candidates.
EerResult eer_point(const ScoreSet& s);
inline double eer(const ScoreSet& s) { return eer_point(s).rate; }

struct FnmrAtFmrResult {
  double fnmr = 0.0;
  double threshold = 0.0;  // smallest candidate threshold with FMR <= target
  double achieved_fmr = 0.0;
  bool underpowered = false;  // |impostor| < 10 / target
};

FnmrAtFmrResult fnmr_at_fmr(const ScoreSet& s, double target_fmr);

// True when the impostor count can resolve the target FMR.
bool impostors_sufficient(std::size_t impostor_count, double target_fmr);

enum class ThresholdScope { PerGroup, Global };

// Thresholds fixed on a reference score distribution (usually the whole
// dataset) and then applied unchanged to every group.
struct GlobalThresholds {
  std::map<OperatingPoint, double> threshold;

  friend bool operator==(const GlobalThresholds&, const GlobalThresholds&) = default;
};

GlobalThresholds global_thresholds(const ScoreSet& reference,
                                   std::span<const OperatingPoint> ops);

// Per-group mode: each op is computed on the group's own distribution.
// Global mode: FNMR at the fixed threshold for FnmrAtFmr points, and the
// half total error (FMR + FNMR) / 2 at the fixed EER threshold for EER.
GroupMetrics metrics_from_scores(const ScoreSet& s, std::span<const OperatingPoint> ops,
                                 const GlobalThresholds* global = nullptr);

GroupMetrics group_metrics(const Dataset& ds, std::span<const std::uint32_t> group,
                           const PairConfig& cfg, std::span<const OperatingPoint> ops,
                           const GlobalThresholds* global = nullptr);

// "BPSC" | u64 genuine count | u64 impostor count | f32 genuine... | f32 impostor...
void write_score_dump(const ScoreSet& s, const std::filesystem::path& path);
ScoreSet read_score_dump(const std::filesystem::path& path);

}  // namespace attrbias
