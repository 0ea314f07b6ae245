#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "attrbias/core.hpp"

namespace attrbias {

struct EmbeddingRecord {
  std::string sample_id;
  std::string subject_id;
  std::vector<float> values;

  friend bool operator==(const EmbeddingRecord&, const EmbeddingRecord&) = default;
};

// Raw contents of a "BPRB" embedding file. Vectors are not normalized.
struct EmbeddingFile {
  std::uint32_t dim = 0;
  std::vector<EmbeddingRecord> records;

  std::size_t count() const { return records.size(); }

  friend bool operator==(const EmbeddingFile&, const EmbeddingFile&) = default;
};

// Binary layout (all integers little-endian):
//   "BPRB" 0x01 | u32 dim | u64 count |
//   count x ( u16 len, sample_id bytes, u16 len, subject_id bytes, dim x f32 )
EmbeddingFile load_embeddings(const std::filesystem::path& path);
void write_embeddings(const EmbeddingFile& file, const std::filesystem::path& path);

struct AnnotationRow {
  std::string subject_id;
  std::vector<Label> labels;

  friend bool operator==(const AnnotationRow&, const AnnotationRow&) = default;
};

struct AnnotationTable {
  std::vector<std::string> attribute_names;
  std::map<std::string, AnnotationRow> rows;  // keyed by sample_id

  std::optional<std::size_t> attribute_index(const std::string& name) const;

  friend bool operator==(const AnnotationTable&, const AnnotationTable&) = default;
};

enum class AnnotationFormat { MaadCsv };

// Comma-separated: "Filename,Identity,<attr>...", cells in {-1,0,1}.
AnnotationTable load_annotations(const std::filesystem::path& path,
                                 AnnotationFormat format = AnnotationFormat::MaadCsv);
void write_annotations(const AnnotationTable& table, const std::filesystem::path& path);

struct JoinStats {
  std::size_t matched = 0;
  std::size_t dropped_embeddings = 0;   // embeddings without an annotation row
  std::size_t dropped_annotations = 0;  // annotation rows without an embedding
  std::size_t zero_vectors = 0;
  std::size_t identity_mismatches = 0;  // embedding subject != annotation Identity

  friend bool operator==(const JoinStats&, const JoinStats&) = default;
};

// Joined, normalized, immutable sample store. Samples are sorted by sample_id,
// so sample indices are canonical and independent of input record order.
class Dataset {
 public:
  std::size_t size() const { return samples_.size(); }
  std::uint32_t dim() const { return dim_; }

  const SampleRef& sample(std::size_t i) const { return samples_[i]; }
  std::span<const float> embedding(std::size_t i) const {
    return {embeddings_.data() + i * dim_, dim_};
  }
  std::span<const float> embeddings() const { return embeddings_; }

  // Dense subject index (rank of subject_id in sorted order).
  std::uint32_t subject_of(std::size_t i) const { return subject_index_[i]; }
  std::size_t subject_count() const { return subject_count_; }

  const std::vector<std::string>& attribute_names() const { return attribute_names_; }
  std::optional<std::size_t> attribute_index(const std::string& name) const;
  std::span<const Label> labels(std::size_t attribute) const { return labels_[attribute]; }

  std::optional<std::uint32_t> find(const std::string& sample_id) const;

  const JoinStats& stats() const { return stats_; }

  friend Dataset build_dataset(const EmbeddingFile& emb, const AnnotationTable& ann);

 private:
  std::uint32_t dim_ = 0;
  std::vector<SampleRef> samples_;
  std::vector<float> embeddings_;
  std::vector<std::uint32_t> subject_index_;
  std::size_t subject_count_ = 0;
  std::vector<std::string> attribute_names_;
  std::vector<std::vector<Label>> labels_;  // [attribute][sample]
  JoinStats stats_;
};

// Inner join on sample_id; each embedding is divided by its L2 norm.
Dataset build_dataset(const EmbeddingFile& emb, const AnnotationTable& ann);

}  // namespace attrbias
