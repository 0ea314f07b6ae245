#include "doctest.h"

#include <algorithm>

#include "attrbias/audit.hpp"
#include "attrbias/config.hpp"
#include "attrbias/correlation.hpp"
#include "attrbias/report.hpp"
#include "attrbias/synth.hpp"
#include "fixtures.hpp"

using namespace attrbias;

namespace {

struct Audited {
  Dataset ds;
  std::vector<AttributeReport> reports;
  CorrelationMatrix matrix;
};

const Audited& maad_audit() {
  static const Audited a = [] {
    auto cfg = synth::preset("maad", 3);
    cfg.n_subjects = 40;
    cfg.samples_per_subject = 4;
    const auto out = synth::generate(cfg);
    Audited r{build_dataset(out.embeddings, out.annotations), {}, {}};
    AuditConfig ac;
    ac.seed = 3;
    r.reports = audit_all(r.ds, ac);
    r.matrix = correlation_matrix(out.annotations);
    return r;
  }();
  return a;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto end = text.find('\n', start);
    out.push_back(text.substr(start, end - start));
    start = end == std::string::npos ? text.size() : end + 1;
  }
  return out;
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = text.find(needle); p != std::string::npos; p = text.find(needle, p + 1)) ++n;
  return n;
}

const OperatingPoint kSummary = OperatingPoint::fnmr_at(1e-3);

}  // namespace

TEST_CASE("number formatting") {
  CHECK(format_percent(0.1563) == "15.63%");
  CHECK(format_percent(1 - 0.0664 / 0.0787) == "15.63%");
  CHECK(format_percent(0.0) == "0.00%");
  CHECK(format_percent(-0.00001) == "0.00%");
  CHECK(format_percent(-0.2394) == "-23.94%");
  CHECK(format_fixed2(0.125) == "0.12");
  CHECK(format_fixed2(0.375) == "0.38");
  CHECK(format_fixed2(-0.001) == "0.00");
}

TEST_CASE("empty table is header only") {
  fixtures::TempDir dir;
  const std::vector<OperatingPoint> ops = {OperatingPoint::eer()};
  emit_attribute_table({}, ops, dir / "t.csv");
  CHECK(fixtures::read_file(dir / "t.csv") == "attribute,row,EER Real,EER Control,valid\n");
}

TEST_CASE("attribute table layout") {
  const auto& a = maad_audit();
  fixtures::TempDir dir;
  const auto ops = default_operating_points();
  emit_attribute_table(a.reports, ops, dir / "t.csv");
  const auto rows = lines(fixtures::read_file(dir / "t.csv"));
  REQUIRE(rows.size() == 3 * 47 + 1);
  CHECK(count(rows[0], ",") == 2 + 2 * ops.size());
  for (std::size_t i = 0; i < a.reports.size(); ++i) {
    const auto& r = a.reports[i];
    const auto& pos = rows[1 + 3 * i];
    const auto& rel = rows[3 + 3 * i];
    CHECK(pos.rfind(r.attribute + ",Positive,", 0) == 0);
    CHECK(rows[2 + 3 * i].rfind(r.attribute + ",Negative,", 0) == 0);
    CHECK(rel.rfind(r.attribute + ",Rel. Perf.,", 0) == 0);
    const std::string flag = r.skipped() ? "skipped" : (r.summary_valid ? "valid" : "not_valid");
    CHECK(pos.substr(pos.rfind(',') + 1) == flag);
    if (!r.skipped()) {
      const auto op = ops[0];
      const std::string cell = format_percent(r.real_pos.errors.at(op)) + "," +
                               format_percent(r.control_pos.per_op_mean_error.at(op));
      CHECK(pos.find("," + cell + ",") != std::string::npos);
      if (r.rel_perf.at(op)) CHECK(rel.find("," + format_percent(*r.rel_perf.at(op)) + ",") != std::string::npos);
    }
  }
}

TEST_CASE("summary scatter keeps invalid attributes out of the plot") {
  auto reports = maad_audit().reports;
  std::vector<std::size_t> live;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    if (!reports[i].skipped()) live.push_back(i);
  }
  REQUIRE(live.size() >= 2);
  for (auto i : live) {
    reports[i].validity[kSummary] = 0.95;
    reports[i].rel_perf[kSummary] = 0.01 * static_cast<double>(i % 7);
  }
  auto& bad = reports[live[0]];
  bad.validity[kSummary] = 0.76;

  fixtures::TempDir dir;
  const auto drawn = emit_summary_scatter(reports, kSummary, 0.9, dir / "s");
  CHECK(drawn == live.size() - 1);
  const auto csv = fixtures::read_file(dir / "s.csv");
  const auto svg = fixtures::read_file(dir / "s.svg");
  CHECK(lines(csv).size() == reports.size() + 1);
  CHECK(csv.find(bad.attribute + ",0.76,") != std::string::npos);
  CHECK(svg.find("<title>" + bad.attribute + "</title>") == std::string::npos);
  CHECK(svg.find("<title>" + reports[live[1]].attribute + "</title>") != std::string::npos);
  CHECK(count(svg, "<circle") == drawn);
  CHECK(svg.find("id=\"validity-boundary\"") != std::string::npos);

  bad.validity[kSummary] = 0.95;
  CHECK(emit_summary_scatter(reports, kSummary, 0.9, dir / "all") == live.size());
  const auto pts = summary_points(reports, kSummary, 0.9);
  CHECK(std::count_if(pts.begin(), pts.end(), [](const SummaryPoint& p) { return p.valid; }) ==
        static_cast<long>(live.size()));
}

TEST_CASE("json report round trip") {
  const auto& a = maad_audit();
  fixtures::TempDir dir;
  RunConfig cfg;
  cfg.seed = 3;
  emit_json_report(a.reports, a.matrix, cfg, dir / "r.json");
  const auto doc = load_json_report(dir / "r.json");
  CHECK(doc.schema_version == kSchemaVersion);
  CHECK(doc.attributes == a.reports);
  CHECK(doc.config == config_echo(cfg));
  const auto want = build_report_document(a.reports, a.matrix, cfg);
  CHECK(doc.top_pairs.most_positive == want.top_pairs.most_positive);
  CHECK(doc.top_pairs.most_negative == want.top_pairs.most_negative);
  CHECK(doc.top_pairs.most_positive.size() == 15);
  CHECK(doc.warnings == want.warnings);
  REQUIRE(doc.footnotes.size() == 47);
}

TEST_CASE("footnotes name the planted partner first") {
  synth::SynthConfig cfg;
  cfg.n_subjects = 2000;
  cfg.samples_per_subject = 2;
  cfg.dim = 4;
  cfg.seed = 12;
  cfg.attributes = {{"Base", synth::PerSubjectProb{0.5}},
                    {"Partner", synth::CorrelatedWith{"Base", 0.8}},
                    {"Noise1", synth::PerSubjectProb{0.4}},
                    {"Noise2", synth::PerSubjectProb{0.6}}};
  const auto out = synth::generate(cfg);
  const auto m = correlation_matrix(out.annotations);
  AttributeReport r;
  r.attribute = "Partner";
  r.skip_reason = "GroupTooSmall";
  const auto doc = build_report_document({r}, m, RunConfig{});
  REQUIRE(doc.footnotes.size() == 1);
  REQUIRE(doc.footnotes[0].top_correlates.size() == 3);
  const auto& first = doc.footnotes[0].top_correlates[0];
  CHECK((first.first == "Base" || first.second == "Base"));
  CHECK(first.coefficient > 0.7);
}

TEST_CASE("power warnings mention underpowered operating points") {
  AttributeReport r;
  r.attribute = "X";
  r.real_pos.underpowered = {OperatingPoint::fnmr_at(1e-4)};
  const auto w = power_warnings({r});
  REQUIRE_FALSE(w.empty());
  CHECK(w[0].find("X") != std::string::npos);
}
