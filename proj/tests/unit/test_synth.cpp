#include "doctest.h"

#include <cmath>
#include <set>

#include "attrbias/error.hpp"
#include "attrbias/scoring.hpp"
#include "attrbias/synth.hpp"
#include "fixtures.hpp"
#include "json.hpp"

using namespace attrbias;
using namespace attrbias::synth;

namespace {

SynthConfig base(std::uint64_t seed) {
  SynthConfig cfg;
  cfg.n_subjects = 40;
  cfg.samples_per_subject = 4;
  cfg.dim = 16;
  cfg.seed = seed;
  cfg.attributes = {{"A", PerSubjectProb{0.5}, NoEffect{}, Granularity::PerSubject}};
  return cfg;
}

double norm(const std::vector<float>& v) {
  double s = 0;
  for (float x : v) s += static_cast<double>(x) * x;
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("generation is deterministic in the seed") {
  const auto a = generate(base(1));
  CHECK(generate(base(1)).embeddings == a.embeddings);
  CHECK(generate(base(1)).annotations == a.annotations);
  CHECK_FALSE(generate(base(2)).embeddings == a.embeddings);
  CHECK(a.embeddings.count() == 160);
  CHECK(a.embeddings.dim == 16);
  std::set<std::string> ids;
  for (const auto& r : a.embeddings.records) {
    ids.insert(r.sample_id);
    CHECK(norm(r.values) == doctest::Approx(1.0).epsilon(1e-6));
  }
  CHECK(ids.size() == 160);
}

TEST_CASE("zero noise puts every genuine score at one") {
  auto cfg = base(3);
  cfg.base_noise = 0.0;
  const auto out = generate(cfg);
  const auto ds = build_dataset(out.embeddings, out.annotations);
  SampleGroup all(ds.size());
  for (std::uint32_t i = 0; i < all.size(); ++i) all[i] = i;
  const auto s = score_pairs(ds, pairs_for_group(ds, all, {}));
  for (double g : s.genuine) CHECK(g == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("probability one labels everyone positive") {
  auto cfg = base(4);
  cfg.attributes[0].assignment = PerSubjectProb{1.0};
  const auto out = generate(cfg);
  for (const auto& [id, row] : out.annotations.rows) CHECK(row.labels[0] == Label::Positive);
  CHECK(out.truth.attributes[0].carrier_subjects == 40);
}

TEST_CASE("extra noise raises the carrier EER") {
  int raised = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SynthConfig cfg = base(seed);
    cfg.n_subjects = 100;
    cfg.base_noise = 0.1;
    cfg.attributes = {{"X", PerSubjectProb{0.5}, ExtraNoise{0.3}, Granularity::PerSubject}};
    const auto out = generate(cfg);
    const auto ds = build_dataset(out.embeddings, out.annotations);
    SampleGroup pos, neg;
    for (std::uint32_t i = 0; i < ds.size(); ++i) (ds.labels(0)[i] == Label::Positive ? pos : neg).push_back(i);
    const double e_pos = eer(score_pairs(ds, pairs_for_group(ds, pos, {})));
    const double e_neg = eer(score_pairs(ds, pairs_for_group(ds, neg, {})));
    raised += e_pos > e_neg;
  }
  CHECK(raised >= 9);
}

TEST_CASE("count skew keeps a fraction of carrier samples") {
  auto cfg = base(5);
  cfg.samples_per_subject = 10;
  cfg.attributes = {{"R", PerSubjectProb{0.5}, CountSkew{0.3}, Granularity::PerSubject}};
  const auto out = generate(cfg);
  const auto& truth = out.truth.attributes[0];
  std::size_t pos = 0, undef = 0;
  for (const auto& [id, row] : out.annotations.rows) {
    pos += row.labels[0] == Label::Positive;
    undef += row.labels[0] == Label::Undefined;
  }
  CHECK(pos == truth.positive_samples);
  CHECK(pos == truth.carrier_subjects * 3);
  CHECK(undef == truth.carrier_subjects * 7);
}

TEST_CASE("attribute spec parsing") {
  const auto a = parse_attribute("Hat:p=0.3:extra=0.2:per_sample");
  CHECK(a.name == "Hat");
  CHECK(a.assignment == Assignment{PerSubjectProb{0.3}});
  CHECK(a.effect == Effect{ExtraNoise{0.2}});
  CHECK(a.granularity == Granularity::PerSample);
  const auto b = parse_attribute("B:corr=A,-0.5:skew=0.4");
  CHECK(b.assignment == Assignment{CorrelatedWith{"A", -0.5}});
  CHECK(b.effect == Effect{CountSkew{0.4}});
  CHECK(parse_attribute("Plain") == SynthAttribute{"Plain"});
  for (const char* bad : {"", ":p=0.1", "X:p=abc", "X:corr=A", "X:what=1"}) {
    CHECK_THROWS_AS(parse_attribute(bad), Error);
  }
}

TEST_CASE("invalid configurations") {
  auto bad = [](auto mutate) {
    auto cfg = base(1);
    mutate(cfg);
    CHECK_THROWS_AS(validate(cfg), Error);
  };
  bad([](SynthConfig& c) { c.n_subjects = 0; });
  bad([](SynthConfig& c) { c.samples_per_subject = 0; });
  bad([](SynthConfig& c) { c.dim = 0; });
  bad([](SynthConfig& c) { c.base_noise = -1; });
  bad([](SynthConfig& c) { c.attributes[0].assignment = PerSubjectProb{1.5}; });
  bad([](SynthConfig& c) { c.attributes.push_back({"B", CorrelatedWith{"Z", 0.5}}); });
  bad([](SynthConfig& c) { c.attributes.push_back({"B", CorrelatedWith{"A", 1.5}}); });
  bad([](SynthConfig& c) { c.attributes.push_back({"A"}); });
  bad([](SynthConfig& c) { c.attributes[0].effect = CountSkew{1.5}; });
  CHECK_NOTHROW(validate(base(1)));
  CHECK_THROWS_AS(preset("nope", 1), Error);
  for (const auto& name : preset_names()) CHECK_NOTHROW(validate(preset(name, 1)));
  CHECK(maad_like_attributes().size() == 47);
}

TEST_CASE("fixture files") {
  fixtures::TempDir dir;
  auto cfg = base(6);
  cfg.attributes.push_back({"B", CorrelatedWith{"A", 0.7}, ExtraNoise{0.1}});
  const auto out = generate(cfg);
  write_fixture(out, dir.path());
  CHECK(load_embeddings(dir / "embeddings.bprb") == out.embeddings);
  CHECK(load_annotations(dir / "annotations.csv") == out.annotations);
  const auto truth = nlohmann::json::parse(fixtures::read_file(dir / "ground_truth.json"));
  REQUIRE(truth["attributes"].size() == 2);
  CHECK(truth["attributes"][1]["name"] == "B");
  CHECK(truth["attributes"][1]["correlated_with"] == "A");
  CHECK(truth["attributes"][1]["rho"] == 0.7);
  CHECK(truth["attributes"][1]["extra_noise"] == 0.1);
}
