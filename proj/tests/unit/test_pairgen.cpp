#include "doctest.h"

#include <map>
#include <set>

#include "attrbias/error.hpp"
#include "attrbias/pairgen.hpp"
#include "fixtures.hpp"

using namespace attrbias;

namespace {

// subjects x per_subject samples named "<subject>_<k>", dim 2.
Dataset grid(std::size_t subjects, std::size_t per_subject) {
  std::vector<fixtures::Sample> samples;
  for (std::size_t s = 0; s < subjects; ++s) {
    for (std::size_t k = 0; k < per_subject; ++k) {
      samples.push_back({"s" + std::to_string(1000 + s) + "_" + std::to_string(k), "subj" + std::to_string(1000 + s),
                         {1.0f, static_cast<float>(s + k)}, {Label::Positive}});
    }
  }
  return fixtures::make_dataset({"X"}, samples);
}

SampleGroup all_of(const Dataset& ds) {
  SampleGroup g(ds.size());
  for (std::uint32_t i = 0; i < g.size(); ++i) g[i] = i;
  return g;
}

}  // namespace

TEST_CASE("two subjects, exhaustive enumeration") {
  const auto ds = fixtures::make_dataset(
      {"X"}, {{"a1", "A", {1, 0}, {Label::Positive}}, {"a2", "A", {0, 1}, {Label::Positive}},
              {"b1", "B", {1, 1}, {Label::Positive}}});
  PairConfig cfg;
  cfg.impostor_target = 10;
  const auto ps = pairs_for_group(ds, all_of(ds), cfg);
  const auto a1 = *ds.find("a1"), a2 = *ds.find("a2"), b1 = *ds.find("b1");
  CHECK(ps.genuine == std::vector<Pair>{{a1, a2}});
  CHECK(ps.impostor == std::vector<Pair>{{a1, b1}, {a2, b1}});
  CHECK(ps.config == cfg);
}

TEST_CASE("single subject has no impostor pairs") {
  const auto ds = grid(1, 4);
  try {
    pairs_for_group(ds, all_of(ds), {});
    FAIL("expected NoImpostorPairs");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoImpostorPairs);
  }
}

TEST_CASE("one sample per subject has no genuine pairs") {
  const auto ds = grid(5, 1);
  try {
    pairs_for_group(ds, all_of(ds), {});
    FAIL("expected NoGenuinePairs");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoGenuinePairs);
  }
}

TEST_CASE("50 subjects x 4 samples with caps") {
  const auto ds = grid(50, 4);
  PairConfig cfg;
  cfg.max_genuine_per_subject = 3;
  cfg.impostor_target = 1000;
  cfg.seed = 7;
  const auto a = pairs_for_group(ds, all_of(ds), cfg);
  const auto b = pairs_for_group(ds, all_of(ds), cfg);
  CHECK(a.genuine.size() == 150);
  CHECK(a.impostor.size() == 1000);
  CHECK(a == b);

  std::map<std::uint32_t, int> per_subject;
  for (const auto& p : a.genuine) {
    CHECK(ds.subject_of(p.a) == ds.subject_of(p.b));
    CHECK(p.a < p.b);
    ++per_subject[ds.subject_of(p.a)];
  }
  for (const auto& [s, n] : per_subject) CHECK(n == 3);
  std::set<Pair> distinct(a.impostor.begin(), a.impostor.end());
  CHECK(distinct.size() == a.impostor.size());
  for (const auto& p : a.impostor) CHECK(ds.subject_of(p.a) != ds.subject_of(p.b));

  cfg.seed = 8;
  CHECK(pairs_for_group(ds, all_of(ds), cfg).impostor != a.impostor);
}

TEST_CASE("unlimited config enumerates everything when the target exceeds the pool") {
  const auto ds = grid(6, 3);
  PairConfig cfg;
  cfg.impostor_target = 100000;
  const auto ps = pairs_for_group(ds, all_of(ds), cfg);
  // Oracle: direct double loop.
  std::size_t genuine = 0, impostor = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t j = i + 1; j < ds.size(); ++j) {
      (ds.subject_of(i) == ds.subject_of(j) ? genuine : impostor)++;
    }
  }
  CHECK(ps.genuine.size() == genuine);
  CHECK(ps.impostor.size() == impostor);
}

TEST_CASE("default impostor target is ten times the genuine count") {
  const auto ds = grid(40, 5);
  const auto ps = pairs_for_group(ds, all_of(ds), {});
  CHECK(ps.genuine.size() == 40 * 10);
  CHECK(ps.impostor.size() == 4000);
}

TEST_CASE("impostor sampling is close to uniform over cross pairs") {
  const auto ds = grid(4, 2);  // 24 cross pairs
  PairConfig cfg;
  cfg.impostor_target = 6;
  std::map<Pair, int> hits;
  for (std::uint64_t seed = 0; seed < 2400; ++seed) {
    cfg.seed = seed;
    for (const auto& p : pairs_for_group(ds, all_of(ds), cfg).impostor) ++hits[p];
  }
  CHECK(hits.size() == 24);
  // Expected 600 per pair; sd ~ 21.
  for (const auto& [p, n] : hits) CHECK(std::abs(n - 600) < 100);
}

TEST_CASE("group validation and helpers") {
  const auto ds = grid(3, 2);
  CHECK_THROWS_AS(pairs_for_group(ds, SampleGroup{2, 1}, {}), Error);
  CHECK_THROWS_AS(pairs_for_group(ds, SampleGroup{0, 99}, {}), Error);
  PairConfig zero;
  zero.impostor_target = 0;
  CHECK_THROWS_AS(pairs_for_group(ds, all_of(ds), zero), Error);

  const std::vector<std::string> ids = {"s1001_1", "s1000_0", "s1001_1"};
  const auto g = resolve_group(ds, ids);
  CHECK(g == SampleGroup{*ds.find("s1000_0"), *ds.find("s1001_1")});
  CHECK_THROWS_AS(resolve_group(ds, std::vector<std::string>{"missing"}), Error);

  CHECK(group_hash(ds, g) == group_hash(ds, g));
  CHECK(group_hash(ds, g) != group_hash(ds, all_of(ds)));
}

TEST_CASE("pair list file") {
  fixtures::TempDir dir;
  const auto ds = grid(2, 2);
  const auto ps = pairs_for_group(ds, all_of(ds), {});
  write_pair_list(ds, ps, dir / "p.csv");
  const auto text = fixtures::read_file(dir / "p.csv");
  CHECK(text.find("s1000_0,s1000_1,genuine\n") != std::string::npos);
  CHECK(text.find("s1000_0,s1001_0,impostor\n") != std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(ps.genuine.size() + ps.impostor.size()));
}
