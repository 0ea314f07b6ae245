#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "attrbias/core.hpp"
#include "attrbias/pairgen.hpp"

// Data-parallel inner loops. Each kernel has an OpenMP version used by the
// library and a serial reference used by tests and the benchmark. Both
// evaluate every element with the same fixed-order arithmetic, so their
// outputs are bitwise equal for any thread count.
namespace attrbias::kernels {

// Dot product accumulated in double, left to right.
inline double dot(const float* x, const float* y, std::size_t dim) noexcept {
  double acc = 0.0;
  for (std::size_t k = 0; k < dim; ++k) acc += static_cast<double>(x[k]) * y[k];
  return acc;
}

// out[i] = <emb[pairs[i].a], emb[pairs[i].b]>, emb row-major with width dim.
void score_pairs(std::span<const float> emb, std::size_t dim, std::span<const Pair> pairs,
                 std::span<double> out);
void score_pairs_serial(std::span<const float> emb, std::size_t dim, std::span<const Pair> pairs,
                        std::span<double> out);

// 2x2 table of two binary columns over samples where both are defined.
struct Contingency {
  std::uint64_t n11 = 0;  // both Positive
  std::uint64_t n10 = 0;  // first Positive, second Negative
  std::uint64_t n01 = 0;
  std::uint64_t n00 = 0;

  std::uint64_t support() const { return n11 + n10 + n01 + n00; }
  friend bool operator==(const Contingency&, const Contingency&) = default;
};

// Label columns packed as two bitsets per attribute (Positive, Negative).
class PackedLabels {
 public:
  PackedLabels(std::size_t attributes, std::size_t samples);

  void set(std::size_t attribute, std::size_t sample, Label label);

  std::size_t attributes() const { return attributes_; }
  std::size_t samples() const { return samples_; }
  std::size_t words() const { return words_; }
  const std::uint64_t* positive(std::size_t a) const { return pos_.data() + a * words_; }
  const std::uint64_t* negative(std::size_t a) const { return neg_.data() + a * words_; }

 private:
  std::size_t attributes_;
  std::size_t samples_;
  std::size_t words_;
  std::vector<std::uint64_t> pos_;
  std::vector<std::uint64_t> neg_;
};

// Row-major attributes x attributes tables (symmetric up to the n10/n01 swap).
std::vector<Contingency> contingency_tables(const PackedLabels& labels);

// Reference: straight loop over label columns, columns[a][sample].
std::vector<Contingency> contingency_tables_serial(
    std::span<const std::vector<Label>> columns);

}  // namespace attrbias::kernels
