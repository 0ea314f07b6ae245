#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <unistd.h>

#include "attrbias/ingest.hpp"

namespace fixtures {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("attrbias_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  os << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Sample {
  std::string id;
  std::string subject;
  std::vector<float> values;
  std::vector<attrbias::Label> labels;
};

inline attrbias::Dataset make_dataset(const std::vector<std::string>& attributes,
                                      const std::vector<Sample>& samples) {
  attrbias::EmbeddingFile emb;
  emb.dim = samples.empty() ? 1 : static_cast<std::uint32_t>(samples[0].values.size());
  attrbias::AnnotationTable ann;
  ann.attribute_names = attributes;
  for (const auto& s : samples) {
    emb.records.push_back({s.id, s.subject, s.values});
    ann.rows[s.id] = {s.subject, s.labels};
  }
  return attrbias::build_dataset(emb, ann);
}

}  // namespace fixtures
