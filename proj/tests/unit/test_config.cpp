#include "doctest.h"

#include <algorithm>

#include "attrbias/config.hpp"
#include "attrbias/error.hpp"
#include "fixtures.hpp"

using namespace attrbias;

TEST_CASE("defaults") {
  const RunConfig cfg;
  CHECK(cfg.control_replicates == 6);
  CHECK(cfg.validity_threshold == 0.9);
  CHECK(cfg.summary_op == OperatingPoint::fnmr_at(1e-3));
  CHECK(cfg.operating_points == default_operating_points());
  const auto ac = cfg.audit_config();
  CHECK(ac.control_replicates == 6);
  CHECK(ac.ops == cfg.operating_points);
  CHECK(setting_text(cfg, "max_genuine_per_subject") == "none");
  CHECK(setting_text(cfg, "threshold_scope") == "per_group");
  CHECK(setting_text(cfg, "validity_form") == "absolute");
}

TEST_CASE("every key round trips through its text form") {
  RunConfig cfg;
  cfg.embedding_path = "e.bprb";
  cfg.annotation_path = "a.csv";
  cfg.output_dir = "somewhere";
  cfg.operating_points = {OperatingPoint::eer(), OperatingPoint::fnmr_at(1e-2)};
  cfg.control_replicates = 4;
  cfg.validity_threshold = 0.85;
  cfg.max_genuine_per_subject = 5;
  cfg.impostor_target = 1234;
  cfg.seed = 99;
  cfg.threshold_scope = ThresholdScope::Global;
  cfg.workers = 3;
  cfg.validity_form = ValidityForm::Literal;
  cfg.summary_op = OperatingPoint::eer();
  cfg.control_redraws = 7;
  cfg.min_support = 10;
  cfg.top_pairs = 4;
  cfg.dump_pairs = true;
  cfg.dump_scores = true;
  RunConfig back;
  for (const auto& key : config_keys()) apply_setting(back, key, setting_text(cfg, key));
  CHECK(back == cfg);
}

TEST_CASE("echo leaves out workers and output_dir") {
  const auto& keys = echoed_keys();
  CHECK(std::find(keys.begin(), keys.end(), "workers") == keys.end());
  CHECK(std::find(keys.begin(), keys.end(), "output_dir") == keys.end());
  CHECK(keys.size() == config_keys().size() - 2);
  RunConfig a, b;
  b.workers = 8;
  b.output_dir = "elsewhere";
  CHECK(config_echo_text(a) == config_echo_text(b));
  b.seed = 1;
  CHECK(config_echo_text(a) != config_echo_text(b));

  // The echo parses back into an equivalent config.
  RunConfig c;
  c.seed = 5;
  c.impostor_target = 77;
  RunConfig parsed;
  for (const auto& [k, v] : parse_config_text(config_echo_text(c))) apply_setting(parsed, k, v);
  CHECK(parsed == c);
}

TEST_CASE("config file parsing") {
  fixtures::TempDir dir;
  fixtures::write_file(dir / "c.txt",
                       "# comment\n\nseed = 42\n  operating_points = EER, FNMR@FMR=1e-2  \ncontrol_replicates=3\n");
  const auto cfg = load_config_file(dir / "c.txt");
  CHECK(cfg.seed == 42);
  CHECK(cfg.control_replicates == 3);
  CHECK(cfg.operating_points == std::vector<OperatingPoint>{OperatingPoint::eer(), OperatingPoint::fnmr_at(1e-2)});

  auto invalid = [&](const std::string& text) {
    fixtures::write_file(dir / "bad.txt", text);
    try {
      load_config_file(dir / "bad.txt");
      FAIL("expected InvalidConfig for: " << text);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidConfig);
    }
  };
  invalid("no equals sign\n");
  invalid("unknown_key = 1\n");
  invalid("seed = abc\n");
  invalid("control_replicates = 0\n");
  invalid("validity_threshold = 2\n");
  invalid("threshold_scope = sideways\n");
  invalid("operating_points = FNMR@FMR=0\n");
  CHECK_THROWS_AS(load_config_file(dir / "missing.txt"), Error);
}
