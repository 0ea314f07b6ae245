#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "attrbias/audit.hpp"
#include "attrbias/core.hpp"
#include "attrbias/scoring.hpp"

namespace attrbias {

struct RunConfig {
  std::string embedding_path;
  std::string annotation_path;
  std::string output_dir = "out";
  std::vector<OperatingPoint> operating_points = default_operating_points();
  int control_replicates = 6;
  double validity_threshold = 0.9;
  std::optional<std::size_t> max_genuine_per_subject;
  std::optional<std::size_t> impostor_target;
  std::uint64_t seed = 0;
  ThresholdScope threshold_scope = ThresholdScope::PerGroup;
  int workers = 0;
  ValidityForm validity_form = ValidityForm::Absolute;
  OperatingPoint summary_op = OperatingPoint::fnmr_at(1e-3);
  int control_redraws = 32;
  std::size_t min_support = 2;
  std::size_t top_pairs = 15;
  bool dump_pairs = false;
  bool dump_scores = false;

  AuditConfig audit_config() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// Every recognised key, in echo order.
const std::vector<std::string>& config_keys();

// Sets one key from its text form; throws InvalidConfig on unknown keys or
// unparsable values.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

// "key = value" lines; blank lines and lines starting with '#' are ignored.
std::map<std::string, std::string> parse_config_text(const std::string& text);
RunConfig load_config_file(const std::filesystem::path& path, RunConfig base = {});

// Text form of one key, as accepted by apply_setting.
std::string setting_text(const RunConfig& cfg, const std::string& key);

// Keys that change results. workers and output_dir are left out so that runs
// differing only in parallelism or destination produce identical artifacts.
const std::vector<std::string>& echoed_keys();
std::map<std::string, std::string> config_echo(const RunConfig& cfg);
std::string config_echo_text(const RunConfig& cfg);

std::string to_string(ThresholdScope scope);
std::string to_string(ValidityForm form);

}  // namespace attrbias
