#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace attrbias {

// Trinary annotation state. The numeric values match the on-disk encoding.
enum class Label : std::int8_t { Negative = -1, Undefined = 0, Positive = 1 };

enum class Polarity { Positive, Negative };

struct SampleRef {
  std::string sample_id;
  std::string subject_id;

  friend bool operator==(const SampleRef&, const SampleRef&) = default;
};

enum class OpKind { Eer, FnmrAtFmr };

// A reporting condition: EER, or FNMR anchored at a fixed FMR target.
// target_fmr is 0 for EER so that equality and ordering stay structural.
struct OperatingPoint {
  OpKind kind = OpKind::Eer;
  double target_fmr = 0.0;

  static OperatingPoint eer() { return {OpKind::Eer, 0.0}; }
  static OperatingPoint fnmr_at(double target_fmr);

  // "EER" or "FNMR@FMR=1e-03"; used as the key in serialized outputs.
  std::string name() const;
  // Inverse of name(); also accepts the short forms "eer" and "fmr:1e-3".
  static OperatingPoint parse(const std::string& text);

  friend auto operator<=>(const OperatingPoint&, const OperatingPoint&) = default;
  friend bool operator==(const OperatingPoint&, const OperatingPoint&) = default;
};

// EER, FNMR@FMR=1e-3, FNMR@FMR=1e-4.
std::vector<OperatingPoint> default_operating_points();

// Errors are fractions in [0,1]; formatting as percent happens in report/.
struct GroupMetrics {
  std::map<OperatingPoint, double> errors;
  std::size_t genuine_count = 0;
  std::size_t impostor_count = 0;
  // Operating points whose impostor count is below 10 / target_fmr.
  std::vector<OperatingPoint> underpowered;

  friend bool operator==(const GroupMetrics&, const GroupMetrics&) = default;
};

// A ratio-derived value that may be undefined (zero denominator with a
// nonzero numerator). Serialized as null, never as an infinity.
using MaybeValue = std::optional<double>;

}  // namespace attrbias
