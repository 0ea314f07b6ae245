#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "attrbias/core.hpp"
#include "attrbias/ingest.hpp"

namespace attrbias {

// Pearson coefficient of two aligned label columns with Positive -> 1 and
// Negative -> 0. Pairs with an Undefined side are dropped. Absent when fewer
// than min_support pairs remain or either side has zero variance.
std::optional<double> pearson(std::span<const Label> x, std::span<const Label> y,
                              std::size_t min_support = 2);

struct CorrelationMatrix {
  std::vector<std::string> attributes;
  std::vector<std::optional<double>> coefficients;  // row-major, n x n
  std::vector<std::size_t> support;                 // row-major, n x n

  std::size_t size() const { return attributes.size(); }
  const std::optional<double>& at(std::size_t i, std::size_t j) const {
    return coefficients[i * size() + j];
  }
  std::size_t support_at(std::size_t i, std::size_t j) const { return support[i * size() + j]; }
  std::optional<std::size_t> index_of(const std::string& attribute) const;

  friend bool operator==(const CorrelationMatrix&, const CorrelationMatrix&) = default;
};

// Pairwise deletion: each entry uses the samples where both labels are defined.
CorrelationMatrix correlation_matrix(const AnnotationTable& ann, std::size_t min_support = 2);
CorrelationMatrix correlation_matrix(const Dataset& ds, std::size_t min_support = 2);
CorrelationMatrix correlation_matrix(const std::vector<std::string>& attributes,
                                     std::span<const std::vector<Label>> columns,
                                     std::size_t min_support = 2);

struct AttributePair {
  std::string first;
  std::string second;
  double coefficient = 0.0;
  std::size_t support = 0;

  friend bool operator==(const AttributePair&, const AttributePair&) = default;
};

struct TopPairs {
  std::vector<AttributePair> most_positive;  // descending coefficient
  std::vector<AttributePair> most_negative;  // ascending coefficient
};

// k largest and k smallest defined off-diagonal entries, each unordered pair
// once; ties broken by the lexicographic order of the (first, second) names.
TopPairs top_pairs(const CorrelationMatrix& m, std::size_t k = 15);

// Strongest partners of one attribute by |coefficient|, then name.
std::vector<AttributePair> top_correlates(const CorrelationMatrix& m, std::size_t attribute,
                                          std::size_t n = 3);

// Square CSV with attribute names as header row and column; absent = empty cell.
void write_matrix_csv(const CorrelationMatrix& m, const std::filesystem::path& path);

}  // namespace attrbias
