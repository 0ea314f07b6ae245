#include "attrbias/ingest.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include "attrbias/error.hpp"

namespace attrbias {

namespace {

constexpr char kMagic[4] = {'B', 'P', 'R', 'B'};
constexpr std::uint8_t kVersion = 0x01;

class ByteReader {
 public:
  ByteReader(std::istream& in, const std::filesystem::path& path) : in_(in), path_(path) {}

  template <typename UInt>
  UInt read_uint() {
    unsigned char buf[sizeof(UInt)];
    read_bytes(buf, sizeof buf);
    UInt value = 0;
    for (std::size_t i = 0; i < sizeof(UInt); ++i) value |= static_cast<UInt>(buf[i]) << (8 * i);
    return value;
  }

  std::string read_string() {
    const auto len = read_uint<std::uint16_t>();
    std::string s(len, '\0');
    if (len > 0) read_bytes(s.data(), len);
    return s;
  }

  void read_bytes(void* dst, std::size_t n) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw Error(ErrorCode::DimensionMismatch,
                  path_.string() + ": truncated record data");
    }
  }

 private:
  std::istream& in_;
  const std::filesystem::path& path_;
};

template <typename UInt>
void put_uint(std::string& out, UInt value) {
  for (std::size_t i = 0; i < sizeof(UInt); ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
  }
}

void put_string(std::string& out, const std::string& s, const std::filesystem::path& path) {
  if (s.size() > 0xFFFF) {
    throw Error(ErrorCode::IoFailure, path.string() + ": identifier longer than 65535 bytes");
  }
  put_uint<std::uint16_t>(out, static_cast<std::uint16_t>(s.size()));
  out += s;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  for (auto& c : cells) {
    while (!c.empty() && (c.back() == '\r' || c.back() == ' ')) c.pop_back();
    while (!c.empty() && c.front() == ' ') c.erase(c.begin());
  }
  return cells;
}

}  // namespace

EmbeddingFile load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open embedding file " + path.string());

  char magic[4] = {};
  in.read(magic, 4);
  const int version = in.get();
  if (in.gcount() != 1 || !std::equal(magic, magic + 4, kMagic) || version != kVersion) {
    throw Error(ErrorCode::MalformedHeader, path.string() + ": bad magic or version");
  }
  ByteReader reader(in, path);
  EmbeddingFile file;
  try {
    file.dim = reader.read_uint<std::uint32_t>();
  } catch (const Error&) {
    throw Error(ErrorCode::MalformedHeader, path.string() + ": truncated header");
  }
  std::uint64_t count = 0;
  try {
    count = reader.read_uint<std::uint64_t>();
  } catch (const Error&) {
    throw Error(ErrorCode::MalformedHeader, path.string() + ": truncated header");
  }
  if (file.dim == 0) throw Error(ErrorCode::MalformedHeader, path.string() + ": dim is zero");

  std::set<std::string> seen;
  // count comes from the file; do not trust it for reserve().
  for (std::uint64_t r = 0; r < count; ++r) {
    EmbeddingRecord rec;
    rec.sample_id = reader.read_string();
    rec.subject_id = reader.read_string();
    if (rec.subject_id.empty()) {
      throw Error(ErrorCode::MalformedHeader,
                  path.string() + ": record '" + rec.sample_id + "' has an empty subject_id");
    }
    rec.values.resize(file.dim);
    for (auto& v : rec.values) {
      unsigned char buf[4];
      try {
        reader.read_bytes(buf, 4);
      } catch (const Error&) {
        throw Error(ErrorCode::DimensionMismatch,
                    path.string() + ": record '" + rec.sample_id + "' has fewer than " +
                        std::to_string(file.dim) + " values");
      }
      const std::uint32_t bits = std::uint32_t{buf[0]} | (std::uint32_t{buf[1]} << 8) |
                                 (std::uint32_t{buf[2]} << 16) | (std::uint32_t{buf[3]} << 24);
      v = std::bit_cast<float>(bits);
    }
    if (!seen.insert(rec.sample_id).second) {
      throw Error(ErrorCode::DuplicateSample, path.string() + ": duplicate sample '" +
                                                  rec.sample_id + "'");
    }
    file.records.push_back(std::move(rec));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorCode::DimensionMismatch,
                path.string() + ": trailing bytes after " + std::to_string(count) + " records");
  }
  return file;
}

void write_embeddings(const EmbeddingFile& file, const std::filesystem::path& path) {
  std::string out(kMagic, 4);
  out.push_back(static_cast<char>(kVersion));
  put_uint<std::uint32_t>(out, file.dim);
  put_uint<std::uint64_t>(out, file.records.size());
  for (const auto& rec : file.records) {
    if (rec.values.size() != file.dim) {
      throw Error(ErrorCode::DimensionMismatch,
                  "record '" + rec.sample_id + "' does not match dim " + std::to_string(file.dim));
    }
    put_string(out, rec.sample_id, path);
    put_string(out, rec.subject_id, path);
    for (float v : rec.values) put_uint<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  os.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!os) throw Error(ErrorCode::IoFailure, "short write to " + path.string());
}

std::optional<std::size_t> AnnotationTable::attribute_index(const std::string& name) const {
  auto it = std::find(attribute_names.begin(), attribute_names.end(), name);
  if (it == attribute_names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - attribute_names.begin());
}

AnnotationTable load_annotations(const std::filesystem::path& path, AnnotationFormat) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open annotation file " + path.string());

  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::MissingColumn, path.string() + ": empty annotation file");
  }
  auto header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "Filename" || header[1] != "Identity") {
    throw Error(ErrorCode::MissingColumn,
                path.string() + ": header must start with Filename,Identity");
  }
  AnnotationTable table;
  table.attribute_names.assign(header.begin() + 2, header.end());
  {
    std::set<std::string> unique(table.attribute_names.begin(), table.attribute_names.end());
    if (unique.size() != table.attribute_names.size()) {
      throw Error(ErrorCode::MalformedHeader, path.string() + ": duplicate attribute name");
    }
  }

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::MissingColumn, path.string() + ":" + std::to_string(line_no) +
                                                ": expected " + std::to_string(header.size()) +
                                                " cells, found " + std::to_string(cells.size()));
    }
    AnnotationRow row;
    row.subject_id = cells[1];
    row.labels.reserve(table.attribute_names.size());
    for (std::size_t c = 2; c < cells.size(); ++c) {
      const auto& v = cells[c];
      if (v == "1") {
        row.labels.push_back(Label::Positive);
      } else if (v == "-1") {
        row.labels.push_back(Label::Negative);
      } else if (v == "0") {
        row.labels.push_back(Label::Undefined);
      } else {
        throw Error(ErrorCode::UnknownValue, path.string() + ":" + std::to_string(line_no) +
                                                 ": value '" + v + "' in column " + header[c]);
      }
    }
    if (!table.rows.emplace(cells[0], std::move(row)).second) {
      throw Error(ErrorCode::DuplicateSample, path.string() + ":" + std::to_string(line_no) +
                                                  ": duplicate sample '" + cells[0] + "'");
    }
  }
  return table;
}

void write_annotations(const AnnotationTable& table, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  os << "Filename,Identity";
  for (const auto& name : table.attribute_names) os << ',' << name;
  os << '\n';
  for (const auto& [sample_id, row] : table.rows) {
    os << sample_id << ',' << row.subject_id;
    for (Label l : row.labels) os << ',' << static_cast<int>(l);
    os << '\n';
  }
  if (!os) throw Error(ErrorCode::IoFailure, "short write to " + path.string());
}

std::optional<std::size_t> Dataset::attribute_index(const std::string& name) const {
  auto it = std::find(attribute_names_.begin(), attribute_names_.end(), name);
  if (it == attribute_names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - attribute_names_.begin());
}

std::optional<std::uint32_t> Dataset::find(const std::string& sample_id) const {
  auto it = std::lower_bound(samples_.begin(), samples_.end(), sample_id,
                             [](const SampleRef& s, const std::string& id) { return s.sample_id < id; });
  if (it == samples_.end() || it->sample_id != sample_id) return std::nullopt;
  return static_cast<std::uint32_t>(it - samples_.begin());
}

Dataset build_dataset(const EmbeddingFile& emb, const AnnotationTable& ann) {
  if (emb.records.empty()) throw Error(ErrorCode::EmptyJoin, "embedding file has no records");

  std::vector<std::size_t> order(emb.records.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return emb.records[a].sample_id < emb.records[b].sample_id;
  });

  Dataset ds;
  ds.dim_ = emb.dim;
  ds.attribute_names_ = ann.attribute_names;
  ds.labels_.assign(ann.attribute_names.size(), {});

  std::vector<const AnnotationRow*> matched_rows;
  for (std::size_t idx : order) {
    const auto& rec = emb.records[idx];
    auto it = ann.rows.find(rec.sample_id);
    if (it == ann.rows.end()) {
      ++ds.stats_.dropped_embeddings;
      continue;
    }
    ++ds.stats_.matched;
    if (it->second.labels.size() != ann.attribute_names.size()) {
      throw Error(ErrorCode::MissingColumn, "annotation row '" + rec.sample_id +
                                                "' does not cover every attribute");
    }
    double sq = 0.0;
    for (float v : rec.values) sq += static_cast<double>(v) * v;
    const double norm = std::sqrt(sq);
    if (!(norm >= 1e-12) || !std::isfinite(norm)) {
      ++ds.stats_.zero_vectors;
      continue;
    }
    if (it->second.subject_id != rec.subject_id) ++ds.stats_.identity_mismatches;
    ds.samples_.push_back({rec.sample_id, rec.subject_id});
    for (float v : rec.values) ds.embeddings_.push_back(static_cast<float>(v / norm));
    matched_rows.push_back(&it->second);
  }
  ds.stats_.dropped_annotations = ann.rows.size() - ds.stats_.matched;

  if (ds.stats_.matched == 0) {
    throw Error(ErrorCode::EmptyJoin, "no sample_id shared by embeddings and annotations");
  }
  if (ds.samples_.empty()) {
    throw Error(ErrorCode::ZeroVector, "every matched sample has a zero-norm embedding");
  }

  for (std::size_t a = 0; a < ds.labels_.size(); ++a) {
    auto& col = ds.labels_[a];
    col.reserve(matched_rows.size());
    for (const auto* row : matched_rows) col.push_back(row->labels[a]);
  }

  std::vector<std::string> subjects;
  subjects.reserve(ds.samples_.size());
  for (const auto& s : ds.samples_) subjects.push_back(s.subject_id);
  std::sort(subjects.begin(), subjects.end());
  subjects.erase(std::unique(subjects.begin(), subjects.end()), subjects.end());
  ds.subject_count_ = subjects.size();
  ds.subject_index_.reserve(ds.samples_.size());
  for (const auto& s : ds.samples_) {
    auto it = std::lower_bound(subjects.begin(), subjects.end(), s.subject_id);
    ds.subject_index_.push_back(static_cast<std::uint32_t>(it - subjects.begin()));
  }
  return ds;
}

}  // namespace attrbias
