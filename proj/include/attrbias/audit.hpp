#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "attrbias/core.hpp"
#include "attrbias/ingest.hpp"
#include "attrbias/pairgen.hpp"
#include "attrbias/scoring.hpp"

namespace attrbias {

// How control-group divergence is turned into a validity value.
enum class ValidityForm {
  Absolute,  // 1 - |1 - pos/neg|; 1 means identical controls
  Literal,   // 1 - pos/neg without the absolute value; for comparison runs
};

struct AuditConfig {
  PairConfig pairs;
  std::vector<OperatingPoint> ops = default_operating_points();
  int control_replicates = 6;
  double validity_threshold = 0.9;
  std::uint64_t seed = 0;
  ThresholdScope threshold_scope = ThresholdScope::PerGroup;
  ValidityForm validity_form = ValidityForm::Absolute;
  // Operating point that decides the attribute-level valid flag.
  OperatingPoint summary_op = OperatingPoint::fnmr_at(1e-3);
  int workers = 0;  // 0 = OpenMP default
  // A control draw with no genuine or impostor pair is redrawn at most this
  // many times before the attribute is skipped.
  int control_redraws = 32;
};

struct ControlResult {
  std::map<OperatingPoint, double> per_op_mean_error;
  int k = 0;
  Polarity polarity = Polarity::Positive;
  std::size_t group_size = 0;
  std::vector<GroupMetrics> replicates;
  int redraws = 0;  // draws discarded for lacking genuine or impostor pairs

  friend bool operator==(const ControlResult&, const ControlResult&) = default;
};

struct AttributeReport {
  std::string attribute;
  std::size_t positive_count = 0;
  std::size_t negative_count = 0;
  // Set when the attribute could not be evaluated (GroupTooSmall).
  std::optional<std::string> skip_reason;

  GroupMetrics real_pos;
  GroupMetrics real_neg;
  ControlResult control_pos;
  ControlResult control_neg;
  std::map<OperatingPoint, MaybeValue> rel_perf;
  std::map<OperatingPoint, MaybeValue> control_rel_perf;
  std::map<OperatingPoint, MaybeValue> validity;
  std::map<OperatingPoint, bool> valid;
  bool summary_valid = false;

  bool skipped() const { return skip_reason.has_value(); }

  friend bool operator==(const AttributeReport&, const AttributeReport&) = default;
};

// Positive / Negative partition for one attribute; Undefined samples are in neither.
std::pair<SampleGroup, SampleGroup> attribute_groups(const Dataset& ds, const std::string& attribute);

// Uniform draw of `size` distinct samples from the whole dataset.
SampleGroup draw_control_group(const Dataset& ds, std::size_t size, std::uint64_t seed);

// k independent draws; draw r uses draw_control_group(ds, size, mix(seed, r)).
std::vector<SampleGroup> build_control_groups(const Dataset& ds, std::size_t size, int k,
                                              std::uint64_t seed);

// 1 - err_pos / err_neg. With err_neg = 0: 0 if err_pos = 0, else undefined.
MaybeValue relative_performance(double err_pos, double err_neg);

// Same degenerate-denominator rule as relative_performance.
MaybeValue validity(double err_pos_control, double err_neg_control,
                    ValidityForm form = ValidityForm::Absolute);

// Validity from an already computed control relative performance.
double validity_from_relative(double control_rel_perf, ValidityForm form = ValidityForm::Absolute);

// Seed of control replicate r for one attribute and polarity.
std::uint64_t control_seed(std::uint64_t seed, const std::string& attribute, Polarity polarity,
                           int replicate, int attempt);

AttributeReport audit_attribute(const Dataset& ds, const std::string& attribute,
                                const AuditConfig& cfg,
                                const GlobalThresholds* global = nullptr);

// One report per attribute in annotation order. Attributes run concurrently;
// reports do not depend on the schedule or the worker count.
std::vector<AttributeReport> audit_all(const Dataset& ds, const AuditConfig& cfg);

// Threshold fixed on pairs over the full dataset, for ThresholdScope::Global.
GlobalThresholds dataset_thresholds(const Dataset& ds, const AuditConfig& cfg);

}  // namespace attrbias
