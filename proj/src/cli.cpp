#include "attrbias/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>

#include "CLI11.hpp"

#include "attrbias/audit.hpp"
#include "attrbias/config.hpp"
#include "attrbias/correlation.hpp"
#include "attrbias/error.hpp"
#include "attrbias/ingest.hpp"
#include "attrbias/report.hpp"
#include "attrbias/serialize.hpp"
#include "attrbias/synth.hpp"

namespace attrbias {

namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flag-backed config settings. Only flags actually given are applied, on top
// of the config file and the environment.
struct SettingFlags {
  std::string config_path;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;

  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    options[key] = app->add_option(flag, values[key], help);
  }
  void add_switch(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    options[key] = app->add_flag(flag, help);
  }

  RunConfig resolve() const {
    RunConfig cfg;
    try {
      if (!config_path.empty()) cfg = load_config_file(config_path);
      if (const char* env = std::getenv("ATTRBIAS_OUTPUT_DIR"); env && *env) cfg.output_dir = env;
      for (const auto& [key, opt] : options) {
        if (opt->count() == 0) continue;
        auto it = values.find(key);
        apply_setting(cfg, key, it != values.end() && !it->second.empty() ? it->second : "true");
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::InvalidConfig) throw UsageError(e.what());
      throw;
    }
    return cfg;
  }
};

void print_error(std::ostream& err, const std::string& code, const std::string& message) {
  err << json{{"error", code}, {"message", message}}.dump() << '\n';
}

void require(const std::string& value, const std::string& what) {
  if (value.empty()) throw UsageError(what + " is required");
}

Dataset load_dataset(const RunConfig& cfg) {
  require(cfg.embedding_path, "--embeddings (or embedding_path)");
  require(cfg.annotation_path, "--annotations (or annotation_path)");
  for (const auto& p : {cfg.embedding_path, cfg.annotation_path}) {
    if (!fs::exists(p)) throw Error(ErrorCode::IoFailure, "no such file: " + p);
  }
  auto emb = load_embeddings(cfg.embedding_path);
  auto ann = load_annotations(cfg.annotation_path);
  return build_dataset(emb, ann);
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::trunc | std::ios::binary);
  if (!os) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  os << text;
}

void dump_groups(const Dataset& ds, const RunConfig& cfg, const fs::path& dir) {
  const auto acfg = cfg.audit_config();
  if (cfg.dump_pairs) make_dir(dir / "pairs");
  if (cfg.dump_scores) make_dir(dir / "scores");
  for (const auto& name : ds.attribute_names()) {
    auto [pos, neg] = attribute_groups(ds, name);
    for (auto [group, label] : {std::pair{&pos, "positive"}, std::pair{&neg, "negative"}}) {
      PairSet pairs;
      try {
        pairs = pairs_for_group(ds, *group, acfg.pairs);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::NoGenuinePairs || e.code() == ErrorCode::NoImpostorPairs) continue;
        throw;
      }
      const std::string stem = name + "_" + label;
      if (cfg.dump_pairs) write_pair_list(ds, pairs, dir / "pairs" / (stem + ".csv"));
      if (cfg.dump_scores) write_score_dump(score_pairs(ds, pairs), dir / "scores" / (stem + ".bpsc"));
    }
  }
}

void add_audit_flags(CLI::App* app, SettingFlags& f) {
  app->add_option("-c,--config", f.config_path, "key = value config file; flags override it");
  f.add(app, "-e,--embeddings", "embedding_path", "embedding file (BPRB)");
  f.add(app, "-a,--annotations", "annotation_path", "annotation CSV");
  f.add(app, "-o,--output-dir", "output_dir", "output directory (env ATTRBIAS_OUTPUT_DIR)");
  f.add(app, "--ops", "operating_points", "comma-separated operating points, e.g. EER,fmr:1e-3");
  f.add(app, "-k,--control-replicates", "control_replicates", "control groups per polarity");
  f.add(app, "--validity-threshold", "validity_threshold", "validity threshold");
  f.add(app, "--max-genuine-per-subject", "max_genuine_per_subject", "genuine pair cap per subject, or none");
  f.add(app, "--impostor-target", "impostor_target", "impostor pairs per group, or none for 10x genuine");
  f.add(app, "--seed", "seed", "random seed");
  f.add(app, "--threshold-scope", "threshold_scope", "per_group or global");
  f.add(app, "-j,--workers", "workers", "worker threads, 0 = default");
  f.add(app, "--validity-form", "validity_form", "absolute or literal");
  f.add(app, "--summary-op", "summary_op", "operating point for the valid flag and scatter");
  f.add(app, "--control-redraws", "control_redraws", "redraws allowed per control replicate");
  f.add(app, "--min-support", "min_support", "minimum support for correlation entries");
  f.add(app, "--top-pairs", "top_pairs", "number of top correlated pairs");
  f.add_switch(app, "--dump-pairs", "dump_pairs", "write pair lists of the real groups");
  f.add_switch(app, "--dump-scores", "dump_scores", "write score dumps of the real groups");
}

int cmd_audit(const SettingFlags& f, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = f.resolve();
  const Dataset ds = load_dataset(cfg);
  const auto reports = audit_all(ds, cfg.audit_config());
  const auto matrix = correlation_matrix(ds, cfg.min_support);

  const fs::path dir = cfg.output_dir;
  make_dir(dir);
  emit_attribute_table(reports, cfg.operating_points, dir / "attribute_table.csv");
  emit_summary_scatter(reports, cfg.summary_op, cfg.validity_threshold, dir / "summary_scatter");
  emit_json_report(reports, matrix, cfg, dir / "report.json");
  write_text(dir / "run_config.txt", config_echo_text(cfg));
  if (cfg.dump_pairs || cfg.dump_scores) dump_groups(ds, cfg, dir);

  for (const auto& w : power_warnings(reports)) err << "warning: " << w << '\n';
  std::size_t skipped = 0;
  std::size_t valid = 0;
  for (const auto& r : reports) {
    skipped += r.skipped() ? 1 : 0;
    valid += r.summary_valid ? 1 : 0;
  }
  out << json{{"status", "ok"},
              {"attributes", reports.size()},
              {"valid", valid},
              {"skipped", skipped},
              {"output_dir", dir.string()}}
             .dump()
      << '\n';
  return kExitOk;
}

int cmd_correlate(const SettingFlags& f, std::ostream& out) {
  const RunConfig cfg = f.resolve();
  require(cfg.annotation_path, "--annotations (or annotation_path)");
  if (!fs::exists(cfg.annotation_path)) throw Error(ErrorCode::IoFailure, "no such file: " + cfg.annotation_path);
  const auto ann = load_annotations(cfg.annotation_path);
  const auto matrix = correlation_matrix(ann, cfg.min_support);
  std::size_t defined = 0;
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    for (std::size_t j = i + 1; j < matrix.size(); ++j) defined += matrix.at(i, j) ? 1 : 0;
  }
  const fs::path dir = cfg.output_dir;
  make_dir(dir);
  write_matrix_csv(matrix, dir / "correlation_matrix.csv");
  emit_top_pairs(top_pairs(matrix, std::min(cfg.top_pairs, defined)), cfg, dir / "top_pairs.json");
  out << json{{"status", "ok"}, {"attributes", matrix.size()}, {"output_dir", dir.string()}}.dump() << '\n';
  return kExitOk;
}

struct SynthFlags {
  std::string output_dir = "fixture";
  std::string preset;
  std::vector<std::string> attributes;
  std::size_t subjects = 0;
  std::size_t samples = 0;
  std::uint32_t dim = 0;
  double base_noise = -1.0;
  std::uint64_t seed = 0;
  bool maad = false;
};

int cmd_synth(const SynthFlags& f, std::ostream& out) {
  synth::SynthConfig cfg;
  try {
    if (!f.preset.empty()) {
      cfg = synth::preset(f.preset, f.seed);
    } else {
      cfg.seed = f.seed;
      if (f.maad) cfg.attributes = synth::maad_like_attributes();
    }
    for (const auto& spec : f.attributes) cfg.attributes.push_back(synth::parse_attribute(spec));
    if (f.subjects) cfg.n_subjects = f.subjects;
    if (f.samples) cfg.samples_per_subject = f.samples;
    if (f.dim) cfg.dim = f.dim;
    if (f.base_noise >= 0.0) cfg.base_noise = f.base_noise;
    if (cfg.attributes.empty()) throw UsageError("no attributes: use --preset, --maad or --attribute");
    synth::validate(cfg);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidConfig) throw UsageError(e.what());
    throw;
  }
  std::string dir = f.output_dir;
  if (const char* env = std::getenv("ATTRBIAS_OUTPUT_DIR"); env && *env) dir = env;
  const auto gen = synth::generate(cfg);
  synth::write_fixture(gen, dir);
  out << json{{"status", "ok"},
              {"samples", gen.embeddings.count()},
              {"attributes", gen.annotations.attribute_names.size()},
              {"output_dir", dir}}
             .dump()
      << '\n';
  return kExitOk;
}

int cmd_inspect(const SettingFlags& f, std::ostream& out) {
  const RunConfig cfg = f.resolve();
  const Dataset ds = load_dataset(cfg);
  json attrs = json::array();
  for (std::size_t a = 0; a < ds.attribute_names().size(); ++a) {
    std::size_t pos = 0, neg = 0, undef = 0;
    for (auto l : ds.labels(a)) {
      pos += l == Label::Positive;
      neg += l == Label::Negative;
      undef += l == Label::Undefined;
    }
    attrs.push_back(json{{"attribute", ds.attribute_names()[a]}, {"positive", pos}, {"negative", neg}, {"undefined", undef}});
  }
  out << json{{"samples", ds.size()},
              {"subjects", ds.subject_count()},
              {"dim", ds.dim()},
              {"join", ds.stats()},
              {"attributes", attrs}}
             .dump(2)
      << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Attribute bias audit for face verification embeddings", "attrbias"};
  app.require_subcommand(1);

  SettingFlags audit_flags;
  auto* audit = app.add_subcommand("audit", "audit every annotated attribute and write the report artifacts");
  add_audit_flags(audit, audit_flags);

  SettingFlags corr_flags;
  auto* correlate = app.add_subcommand("correlate", "attribute correlation matrix and top pairs");
  correlate->add_option("-c,--config", corr_flags.config_path, "key = value config file");
  corr_flags.add(correlate, "-a,--annotations", "annotation_path", "annotation CSV");
  corr_flags.add(correlate, "-o,--output-dir", "output_dir", "output directory");
  corr_flags.add(correlate, "--min-support", "min_support", "minimum jointly defined samples");
  corr_flags.add(correlate, "--top-pairs", "top_pairs", "number of top correlated pairs");

  SynthFlags synth_flags;
  auto* synth = app.add_subcommand("synth", "write a synthetic fixture with planted attribute effects");
  synth->add_option("-o,--output-dir", synth_flags.output_dir, "fixture directory")->capture_default_str();
  synth->add_option("--preset", synth_flags.preset, "planted, null, imbalance or maad");
  synth->add_option("--attribute", synth_flags.attributes,
                    "name[:p=P][:corr=OTHER,RHO][:extra=S][:skew=F][:per_sample]");
  synth->add_flag("--maad", synth_flags.maad, "use the 47 MAAD-Face attribute names");
  synth->add_option("--subjects", synth_flags.subjects, "number of subjects");
  synth->add_option("--samples-per-subject", synth_flags.samples, "samples per subject");
  synth->add_option("--dim", synth_flags.dim, "embedding width");
  synth->add_option("--base-noise", synth_flags.base_noise, "per-coordinate noise sigma");
  synth->add_option("--seed", synth_flags.seed, "random seed");

  SettingFlags inspect_flags;
  auto* inspect = app.add_subcommand("inspect", "print dataset and join statistics");
  inspect->add_option("-c,--config", inspect_flags.config_path, "key = value config file");
  inspect_flags.add(inspect, "-e,--embeddings", "embedding_path", "embedding file (BPRB)");
  inspect_flags.add(inspect, "-a,--annotations", "annotation_path", "annotation CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    print_error(err, "Usage", e.what());
    return kExitUsage;
  }

  try {
    if (*audit) return cmd_audit(audit_flags, out, err);
    if (*correlate) return cmd_correlate(corr_flags, out);
    if (*synth) return cmd_synth(synth_flags, out);
    return cmd_inspect(inspect_flags, out);
  } catch (const UsageError& e) {
    print_error(err, "Usage", e.what());
    return kExitUsage;
  } catch (const Error& e) {
    print_error(err, std::string(to_string(e.code())), e.what());
    return kExitDataError;
  } catch (const std::exception& e) {
    print_error(err, "Internal", e.what());
    return kExitDataError;
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"attrbias"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace attrbias
