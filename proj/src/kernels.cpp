#include "attrbias/kernels.hpp"

#include <bit>
#include <cstdint>

#include "attrbias/error.hpp"

namespace attrbias::kernels {

namespace {

void check_sizes(std::span<const Pair> pairs, std::span<double> out) {
  if (out.size() != pairs.size()) {
    throw Error(ErrorCode::InvalidConfig, "score buffer size does not match pair count");
  }
}

}  // namespace

void score_pairs(std::span<const float> emb, std::size_t dim, std::span<const Pair> pairs,
                 std::span<double> out) {
  check_sizes(pairs, out);
  const auto n = static_cast<std::int64_t>(pairs.size());
  const float* base = emb.data();
#pragma omp parallel for schedule(static, 4096) if (n > 16384)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto& p = pairs[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(i)] = dot(base + p.a * dim, base + p.b * dim, dim);
  }
}

void score_pairs_serial(std::span<const float> emb, std::size_t dim, std::span<const Pair> pairs,
                        std::span<double> out) {
  check_sizes(pairs, out);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    out[i] = dot(emb.data() + pairs[i].a * dim, emb.data() + pairs[i].b * dim, dim);
  }
}

PackedLabels::PackedLabels(std::size_t attributes, std::size_t samples)
    : attributes_(attributes),
      samples_(samples),
      words_((samples + 63) / 64),
      pos_(attributes * words_, 0),
      neg_(attributes * words_, 0) {}

void PackedLabels::set(std::size_t attribute, std::size_t sample, Label label) {
  const std::size_t w = attribute * words_ + sample / 64;
  const std::uint64_t bit = std::uint64_t{1} << (sample % 64);
  pos_[w] &= ~bit;
  neg_[w] &= ~bit;
  if (label == Label::Positive) pos_[w] |= bit;
  if (label == Label::Negative) neg_[w] |= bit;
}

std::vector<Contingency> contingency_tables(const PackedLabels& labels) {
  const std::size_t n = labels.attributes();
  const std::size_t words = labels.words();
  std::vector<Contingency> out(n * n);
  const auto n_signed = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t is = 0; is < n_signed; ++is) {
    const auto i = static_cast<std::size_t>(is);
    const std::uint64_t* pi = labels.positive(i);
    const std::uint64_t* ni = labels.negative(i);
    for (std::size_t j = i; j < n; ++j) {
      const std::uint64_t* pj = labels.positive(j);
      const std::uint64_t* nj = labels.negative(j);
      Contingency c;
      for (std::size_t w = 0; w < words; ++w) {
        c.n11 += static_cast<std::uint64_t>(std::popcount(pi[w] & pj[w]));
        c.n10 += static_cast<std::uint64_t>(std::popcount(pi[w] & nj[w]));
        c.n01 += static_cast<std::uint64_t>(std::popcount(ni[w] & pj[w]));
        c.n00 += static_cast<std::uint64_t>(std::popcount(ni[w] & nj[w]));
      }
      out[i * n + j] = c;
      out[j * n + i] = Contingency{c.n11, c.n01, c.n10, c.n00};
    }
  }
  return out;
}

std::vector<Contingency> contingency_tables_serial(std::span<const std::vector<Label>> columns) {
  const std::size_t n = columns.size();
  std::vector<Contingency> out(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      Contingency c;
      const auto& x = columns[i];
      const auto& y = columns[j];
      for (std::size_t s = 0; s < x.size(); ++s) {
        if (x[s] == Label::Undefined || y[s] == Label::Undefined) continue;
        const bool xp = x[s] == Label::Positive;
        const bool yp = y[s] == Label::Positive;
        if (xp && yp) ++c.n11;
        else if (xp) ++c.n10;
        else if (yp) ++c.n01;
        else ++c.n00;
      }
      out[i * n + j] = c;
    }
  }
  return out;
}

}  // namespace attrbias::kernels
