#include "attrbias/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "attrbias/error.hpp"

namespace attrbias {

namespace {

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw Error(ErrorCode::InvalidConfig, "invalid value '" + value + "' for " + key);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  auto res = std::from_chars(value.data(), value.data() + value.size(), out);
  if (res.ec != std::errc{} || res.ptr != value.data() + value.size()) bad_value(key, value);
  return out;
}

std::optional<std::size_t> parse_limit(const std::string& key, const std::string& value) {
  if (value == "none" || value.empty()) return std::nullopt;
  return parse_number<std::size_t>(key, value);
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_value(key, value);
}

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

std::string limit_text(const std::optional<std::size_t>& v) {
  return v ? std::to_string(*v) : "none";
}

}  // namespace

std::string to_string(ThresholdScope scope) {
  return scope == ThresholdScope::Global ? "global" : "per_group";
}

std::string to_string(ValidityForm form) {
  return form == ValidityForm::Literal ? "literal" : "absolute";
}

AuditConfig RunConfig::audit_config() const {
  AuditConfig a;
  a.pairs.max_genuine_per_subject = max_genuine_per_subject;
  a.pairs.impostor_target = impostor_target;
  a.pairs.seed = seed;
  a.ops = operating_points;
  a.control_replicates = control_replicates;
  a.validity_threshold = validity_threshold;
  a.seed = seed;
  a.threshold_scope = threshold_scope;
  a.validity_form = validity_form;
  a.summary_op = summary_op;
  a.workers = workers;
  a.control_redraws = control_redraws;
  return a;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "embedding_path",  "annotation_path",     "output_dir",        "operating_points",
      "control_replicates", "validity_threshold", "max_genuine_per_subject", "impostor_target",
      "seed",            "threshold_scope",     "workers",           "validity_form",
      "summary_op",      "control_redraws",     "min_support",       "top_pairs",
      "dump_pairs",      "dump_scores"};
  return keys;
}

const std::vector<std::string>& echoed_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& key : config_keys()) {
      if (key != "workers" && key != "output_dir") k.push_back(key);
    }
    return k;
  }();
  return keys;
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  if (key == "embedding_path") {
    cfg.embedding_path = value;
  } else if (key == "annotation_path") {
    cfg.annotation_path = value;
  } else if (key == "output_dir") {
    cfg.output_dir = value;
  } else if (key == "operating_points") {
    std::vector<OperatingPoint> ops;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (!item.empty()) ops.push_back(OperatingPoint::parse(item));
    }
    if (ops.empty()) bad_value(key, value);
    cfg.operating_points = std::move(ops);
  } else if (key == "control_replicates") {
    cfg.control_replicates = parse_number<int>(key, value);
    if (cfg.control_replicates <= 0) bad_value(key, value);
  } else if (key == "validity_threshold") {
    cfg.validity_threshold = parse_number<double>(key, value);
    if (!(cfg.validity_threshold >= 0.0 && cfg.validity_threshold <= 1.0)) bad_value(key, value);
  } else if (key == "max_genuine_per_subject") {
    cfg.max_genuine_per_subject = parse_limit(key, value);
  } else if (key == "impostor_target") {
    cfg.impostor_target = parse_limit(key, value);
  } else if (key == "seed") {
    cfg.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "threshold_scope") {
    if (value == "per_group") cfg.threshold_scope = ThresholdScope::PerGroup;
    else if (value == "global") cfg.threshold_scope = ThresholdScope::Global;
    else bad_value(key, value);
  } else if (key == "workers") {
    cfg.workers = parse_number<int>(key, value);
    if (cfg.workers < 0) bad_value(key, value);
  } else if (key == "validity_form") {
    if (value == "absolute") cfg.validity_form = ValidityForm::Absolute;
    else if (value == "literal") cfg.validity_form = ValidityForm::Literal;
    else bad_value(key, value);
  } else if (key == "summary_op") {
    cfg.summary_op = OperatingPoint::parse(value);
  } else if (key == "control_redraws") {
    cfg.control_redraws = parse_number<int>(key, value);
    if (cfg.control_redraws < 0) bad_value(key, value);
  } else if (key == "min_support") {
    cfg.min_support = parse_number<std::size_t>(key, value);
  } else if (key == "top_pairs") {
    cfg.top_pairs = parse_number<std::size_t>(key, value);
  } else if (key == "dump_pairs") {
    cfg.dump_pairs = parse_bool(key, value);
  } else if (key == "dump_scores") {
    cfg.dump_scores = parse_bool(key, value);
  } else {
    throw Error(ErrorCode::InvalidConfig, "unknown config key '" + key + "'");
  }
}

std::string setting_text(const RunConfig& cfg, const std::string& key) {
  if (key == "embedding_path") return cfg.embedding_path;
  if (key == "annotation_path") return cfg.annotation_path;
  if (key == "output_dir") return cfg.output_dir;
  if (key == "operating_points") {
    std::string out;
    for (const auto& op : cfg.operating_points) {
      if (!out.empty()) out += ',';
      out += op.name();
    }
    return out;
  }
  if (key == "control_replicates") return std::to_string(cfg.control_replicates);
  if (key == "validity_threshold") return format_double(cfg.validity_threshold);
  if (key == "max_genuine_per_subject") return limit_text(cfg.max_genuine_per_subject);
  if (key == "impostor_target") return limit_text(cfg.impostor_target);
  if (key == "seed") return std::to_string(cfg.seed);
  if (key == "threshold_scope") return to_string(cfg.threshold_scope);
  if (key == "workers") return std::to_string(cfg.workers);
  if (key == "validity_form") return to_string(cfg.validity_form);
  if (key == "summary_op") return cfg.summary_op.name();
  if (key == "control_redraws") return std::to_string(cfg.control_redraws);
  if (key == "min_support") return std::to_string(cfg.min_support);
  if (key == "top_pairs") return std::to_string(cfg.top_pairs);
  if (key == "dump_pairs") return cfg.dump_pairs ? "true" : "false";
  if (key == "dump_scores") return cfg.dump_scores ? "true" : "false";
  throw Error(ErrorCode::InvalidConfig, "unknown config key '" + key + "'");
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::InvalidConfig, "config line " + std::to_string(lineno) + " has no '='");
    }
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

RunConfig load_config_file(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  for (const auto& [k, v] : parse_config_text(ss.str())) apply_setting(base, k, v);
  return base;
}

std::map<std::string, std::string> config_echo(const RunConfig& cfg) {
  std::map<std::string, std::string> out;
  for (const auto& key : echoed_keys()) out[key] = setting_text(cfg, key);
  return out;
}

std::string config_echo_text(const RunConfig& cfg) {
  std::string out;
  for (const auto& key : echoed_keys()) out += key + " = " + setting_text(cfg, key) + "\n";
  return out;
}

}  // namespace attrbias
