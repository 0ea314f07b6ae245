#include "doctest.h"

#include <cstring>
#include <functional>
#include <random>

#include "attrbias/error.hpp"
#include "attrbias/ingest.hpp"
#include "attrbias/synth.hpp"
#include "fixtures.hpp"

using namespace attrbias;
using fixtures::TempDir;

namespace {

// Hand-rolled little-endian encoder, independent of write_embeddings.
struct Bytes {
  std::string data;
  Bytes& raw(const std::string& s) {
    data += s;
    return *this;
  }
  template <class T>
  Bytes& le(T v) {
    for (std::size_t k = 0; k < sizeof(T); ++k) data.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * k)) & 0xFF));
    return *this;
  }
  Bytes& str(const std::string& s) {
    le<std::uint16_t>(static_cast<std::uint16_t>(s.size()));
    return raw(s);
  }
  Bytes& f32(float f) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    return le(bits);
  }
};

Bytes header(std::uint32_t dim, std::uint64_t count) {
  Bytes b;
  b.raw("BPRB").le<std::uint8_t>(1).le(dim).le(count);
  return b;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::IoFailure;
}

}  // namespace

TEST_CASE("embedding file: two records under dim 4") {
  TempDir dir;
  auto b = header(4, 2);
  b.str("img1").str("subjA").f32(1).f32(2).f32(3).f32(4);
  b.str("img2").str("subjB").f32(-1).f32(0).f32(0.5f).f32(0);
  fixtures::write_file(dir / "e.bprb", b.data);
  const auto f = load_embeddings(dir / "e.bprb");
  CHECK(f.dim == 4);
  CHECK(f.count() == 2);
  CHECK(f.records[0].sample_id == "img1");
  CHECK(f.records[1].subject_id == "subjB");
  CHECK(f.records[1].values == std::vector<float>{-1, 0, 0.5f, 0});
}

TEST_CASE("embedding file: malformed inputs") {
  TempDir dir;
  const auto p = dir / "bad.bprb";
  SUBCASE("short record") {
    auto b = header(4, 1);
    b.str("img1").str("s").f32(1).f32(2).f32(3);
    fixtures::write_file(p, b.data);
    CHECK(code_of([&] { load_embeddings(p); }) == ErrorCode::DimensionMismatch);
  }
  SUBCASE("trailing bytes") {
    auto b = header(2, 1);
    b.str("img1").str("s").f32(1).f32(2).f32(3);
    fixtures::write_file(p, b.data);
    CHECK(code_of([&] { load_embeddings(p); }) == ErrorCode::DimensionMismatch);
  }
  SUBCASE("bad magic") {
    Bytes b;
    b.raw("BPRX").le<std::uint8_t>(1).le<std::uint32_t>(2).le<std::uint64_t>(0);
    fixtures::write_file(p, b.data);
    CHECK(code_of([&] { load_embeddings(p); }) == ErrorCode::MalformedHeader);
  }
  SUBCASE("bad version") {
    Bytes b;
    b.raw("BPRB").le<std::uint8_t>(2).le<std::uint32_t>(2).le<std::uint64_t>(0);
    fixtures::write_file(p, b.data);
    CHECK(code_of([&] { load_embeddings(p); }) == ErrorCode::MalformedHeader);
  }
  SUBCASE("truncated header") {
    fixtures::write_file(p, std::string("BPRB\x01\x02", 6));
    CHECK(code_of([&] { load_embeddings(p); }) == ErrorCode::MalformedHeader);
  }
  SUBCASE("zero dim") {
    fixtures::write_file(p, header(0, 0).data);
    CHECK(code_of([&] { load_embeddings(p); }) == ErrorCode::MalformedHeader);
  }
  SUBCASE("duplicate sample") {
    auto b = header(1, 2);
    b.str("a").str("s").f32(1).str("a").str("t").f32(1);
    fixtures::write_file(p, b.data);
    CHECK(code_of([&] { load_embeddings(p); }) == ErrorCode::DuplicateSample);
  }
  SUBCASE("missing file") {
    CHECK(code_of([&] { load_embeddings(dir / "nope.bprb"); }) == ErrorCode::IoFailure);
  }
}

TEST_CASE("embedding file: synth round trip is bit exact") {
  TempDir dir;
  synth::SynthConfig cfg;
  cfg.n_subjects = 1000;
  cfg.samples_per_subject = 10;
  cfg.dim = 16;
  cfg.attributes = {{"A", synth::PerSubjectProb{0.5}, synth::NoEffect{}, synth::Granularity::PerSubject}};
  const auto gen = synth::generate(cfg);
  write_embeddings(gen.embeddings, dir / "e.bprb");
  const auto back = load_embeddings(dir / "e.bprb");
  REQUIRE(back.count() == 10000);
  bool identical = true;
  for (std::size_t i = 0; i < back.count(); ++i) {
    identical = identical && back.records[i].sample_id == gen.embeddings.records[i].sample_id &&
                std::memcmp(back.records[i].values.data(), gen.embeddings.records[i].values.data(), 16 * 4) == 0;
  }
  CHECK(identical);
  // On-disk size from the layout: 17 header bytes plus per-record ids and floats.
  std::size_t expected = 17;
  for (const auto& r : gen.embeddings.records) expected += 4 + r.sample_id.size() + r.subject_id.size() + 16 * 4;
  CHECK(std::filesystem::file_size(dir / "e.bprb") == expected);
}

TEST_CASE("annotations: label mapping and errors") {
  TempDir dir;
  const auto p = dir / "a.csv";
  fixtures::write_file(p, "Filename,Identity,A,B,C\nimg1,subjA,1,-1,0\n");
  const auto t = load_annotations(p);
  CHECK(t.attribute_names == std::vector<std::string>{"A", "B", "C"});
  REQUIRE(t.rows.count("img1"));
  CHECK(t.rows.at("img1").subject_id == "subjA");
  CHECK(t.rows.at("img1").labels == std::vector<Label>{Label::Positive, Label::Negative, Label::Undefined});
  CHECK(t.attribute_index("B") == 1);
  CHECK_FALSE(t.attribute_index("D").has_value());

  fixtures::write_file(p, "Filename,Identity,A\nimg1,s,2\n");
  CHECK(code_of([&] { load_annotations(p); }) == ErrorCode::UnknownValue);
  fixtures::write_file(p, "Filename,Identity,A,B\nimg1,s,1\n");
  CHECK(code_of([&] { load_annotations(p); }) == ErrorCode::MissingColumn);
  fixtures::write_file(p, "Name,Identity,A\n");
  CHECK(code_of([&] { load_annotations(p); }) == ErrorCode::MissingColumn);
  fixtures::write_file(p, "Filename,Identity,A,A\n");
  CHECK(code_of([&] { load_annotations(p); }) == ErrorCode::MalformedHeader);
  fixtures::write_file(p, "Filename,Identity,A\nimg1,s,1\nimg1,s,-1\n");
  CHECK(code_of([&] { load_annotations(p); }) == ErrorCode::DuplicateSample);
}

TEST_CASE("annotations: 100 rows x 47 attributes match a text scan") {
  TempDir dir;
  std::mt19937 rng(3);
  std::string text = "Filename,Identity";
  for (const auto& n : synth::maad_attribute_names()) text += "," + n;
  text += "\n";
  std::size_t positives_in_first = 0;
  for (int r = 0; r < 100; ++r) {
    text += "img" + std::to_string(r) + ".jpg,n" + std::to_string(r / 5);
    for (int c = 0; c < 47; ++c) {
      const int v = static_cast<int>(rng() % 3) - 1;
      if (c == 0 && v == 1) ++positives_in_first;
      text += "," + std::to_string(v);
    }
    text += "\n";
  }
  fixtures::write_file(dir / "a.csv", text);
  const auto t = load_annotations(dir / "a.csv");
  CHECK(t.attribute_names.size() == 47);
  CHECK(t.rows.size() == 100);
  std::size_t pos = 0;
  for (const auto& [id, row] : t.rows) pos += row.labels[0] == Label::Positive;
  CHECK(pos == positives_in_first);

  write_annotations(t, dir / "b.csv");
  CHECK(load_annotations(dir / "b.csv") == t);
}

TEST_CASE("build_dataset: join, normalization and errors") {
  EmbeddingFile emb;
  emb.dim = 2;
  emb.records = {{"c", "s2", {3, 4}}, {"a", "s1", {1, 0}}, {"b", "s1", {0, 2}}};
  AnnotationTable ann;
  ann.attribute_names = {"X"};
  ann.rows["a"] = {"s1", {Label::Positive}};
  ann.rows["c"] = {"other", {Label::Negative}};
  ann.rows["z"] = {"s9", {Label::Negative}};
  const auto ds = build_dataset(emb, ann);
  CHECK(ds.size() == 2);
  CHECK(ds.stats().matched == 2);
  CHECK(ds.stats().dropped_embeddings == 1);
  CHECK(ds.stats().dropped_annotations == 1);
  CHECK(ds.stats().identity_mismatches == 1);
  // Samples sorted by id; (3,4) normalized to (0.6,0.8).
  CHECK(ds.sample(0).sample_id == "a");
  REQUIRE(ds.sample(1).sample_id == "c");
  CHECK(ds.embedding(1)[0] == doctest::Approx(0.6).epsilon(1e-7));
  CHECK(ds.embedding(1)[1] == doctest::Approx(0.8).epsilon(1e-7));
  CHECK(ds.labels(0)[0] == Label::Positive);
  CHECK(ds.find("c") == 1u);
  CHECK_FALSE(ds.find("b").has_value());
  CHECK(ds.subject_count() == 2);

  AnnotationTable disjoint;
  disjoint.attribute_names = {"X"};
  disjoint.rows["q"] = {"s", {Label::Positive}};
  CHECK(code_of([&] { build_dataset(emb, disjoint); }) == ErrorCode::EmptyJoin);

  EmbeddingFile zeros;
  zeros.dim = 2;
  zeros.records = {{"a", "s1", {0, 0}}};
  CHECK(code_of([&] { build_dataset(zeros, ann); }) == ErrorCode::ZeroVector);

  zeros.records.push_back({"c", "s2", {1, 1}});
  const auto partial = build_dataset(zeros, ann);
  CHECK(partial.size() == 1);
  CHECK(partial.stats().zero_vectors == 1);
}

TEST_CASE("build_dataset is independent of record order") {
  EmbeddingFile e1;
  e1.dim = 2;
  e1.records = {{"a", "s", {1, 0}}, {"b", "t", {0, 1}}, {"c", "s", {1, 1}}};
  EmbeddingFile e2 = e1;
  std::reverse(e2.records.begin(), e2.records.end());
  AnnotationTable ann;
  ann.attribute_names = {"X"};
  for (auto id : {"a", "b", "c"}) ann.rows[id] = {"", {Label::Positive}};
  const auto d1 = build_dataset(e1, ann);
  const auto d2 = build_dataset(e2, ann);
  REQUIRE(d1.size() == d2.size());
  for (std::size_t i = 0; i < d1.size(); ++i) {
    CHECK(d1.sample(i) == d2.sample(i));
    CHECK(d1.subject_of(i) == d2.subject_of(i));
  }
  CHECK(std::equal(d1.embeddings().begin(), d1.embeddings().end(), d2.embeddings().begin()));
}
