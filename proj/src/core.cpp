#include "attrbias/core.hpp"

#include <charconv>
#include <cmath>
#include <numbers>

#include "attrbias/error.hpp"
#include "attrbias/rng.hpp"

namespace attrbias {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DuplicateSample: return "DuplicateSample";
    case ErrorCode::UnknownValue: return "UnknownValue";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::EmptyJoin: return "EmptyJoin";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::NoGenuinePairs: return "NoGenuinePairs";
    case ErrorCode::NoImpostorPairs: return "NoImpostorPairs";
    case ErrorCode::UnknownSample: return "UnknownSample";
    case ErrorCode::EmptyScores: return "EmptyScores";
    case ErrorCode::UnknownAttribute: return "UnknownAttribute";
    case ErrorCode::SizeExceedsDataset: return "SizeExceedsDataset";
    case ErrorCode::GroupTooSmall: return "GroupTooSmall";
    case ErrorCode::InsufficientPairs: return "InsufficientPairs";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

OperatingPoint OperatingPoint::fnmr_at(double target_fmr) {
  if (!(target_fmr > 0.0 && target_fmr < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "target FMR must lie in (0,1)");
  }
  return {OpKind::FnmrAtFmr, target_fmr};
}

std::string OperatingPoint::name() const {
  if (kind == OpKind::Eer) return "EER";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, target_fmr, std::chars_format::scientific);
  return "FNMR@FMR=" + std::string(buf, res.ptr);
}

namespace {

double parse_target(std::string_view text, const std::string& whole) {
  double value = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw Error(ErrorCode::InvalidConfig, "cannot parse operating point '" + whole + "'");
  }
  return value;
}

}  // namespace

OperatingPoint OperatingPoint::parse(const std::string& text) {
  if (text == "EER" || text == "eer") return eer();
  for (std::string_view prefix : {"FNMR@FMR=", "fmr:"}) {
    if (text.rfind(prefix, 0) == 0) {
      return fnmr_at(parse_target(std::string_view(text).substr(prefix.size()), text));
    }
  }
  throw Error(ErrorCode::InvalidConfig, "unknown operating point '" + text + "'");
}

std::vector<OperatingPoint> default_operating_points() {
  return {OperatingPoint::eer(), OperatingPoint::fnmr_at(1e-3), OperatingPoint::fnmr_at(1e-4)};
}

double CounterRng::normal() noexcept {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  double u1 = uniform01();
  while (u1 <= 0.0) u1 = uniform01();
  const double u2 = uniform01();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_ = radius * std::sin(angle);
  has_cached_ = true;
  return radius * std::cos(angle);
}

}  // namespace attrbias
