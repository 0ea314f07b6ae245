#include "attrbias/correlation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <tuple>

#include "attrbias/error.hpp"
#include "attrbias/kernels.hpp"

namespace attrbias {

namespace {

using kernels::Contingency;

// Pearson on {0,1} data reduces to the phi coefficient of the 2x2 table.
std::optional<double> phi(const Contingency& c, std::size_t min_support) {
  if (c.support() < min_support || c.support() < 2) return std::nullopt;
  const std::uint64_t x1 = c.n11 + c.n10;
  const std::uint64_t x0 = c.n01 + c.n00;
  const std::uint64_t y1 = c.n11 + c.n01;
  const std::uint64_t y0 = c.n10 + c.n00;
  if (x1 == 0 || x0 == 0 || y1 == 0 || y0 == 0) return std::nullopt;
  const auto num = static_cast<double>(static_cast<std::int64_t>(c.n11 * c.n00) -
                                       static_cast<std::int64_t>(c.n10 * c.n01));
  const double den = std::sqrt(static_cast<double>(x1 * x0) * static_cast<double>(y1 * y0));
  return std::clamp(num / den, -1.0, 1.0);
}

Contingency count_pair(std::span<const Label> x, std::span<const Label> y) {
  Contingency c;
  for (std::size_t s = 0; s < x.size(); ++s) {
    if (x[s] == Label::Undefined || y[s] == Label::Undefined) continue;
    const bool xp = x[s] == Label::Positive;
    const bool yp = y[s] == Label::Positive;
    if (xp && yp) ++c.n11;
    else if (xp) ++c.n10;
    else if (yp) ++c.n01;
    else ++c.n00;
  }
  return c;
}

std::string format_real(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

AttributePair make_pair(const CorrelationMatrix& m, std::size_t i, std::size_t j) {
  AttributePair p{m.attributes[i], m.attributes[j], *m.at(i, j), m.support_at(i, j)};
  if (p.second < p.first) std::swap(p.first, p.second);
  return p;
}

bool name_less(const AttributePair& a, const AttributePair& b) {
  return std::tie(a.first, a.second) < std::tie(b.first, b.second);
}

}  // namespace

std::optional<double> pearson(std::span<const Label> x, std::span<const Label> y,
                              std::size_t min_support) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::InvalidConfig, "label columns must have equal length");
  }
  return phi(count_pair(x, y), min_support);
}

std::optional<std::size_t> CorrelationMatrix::index_of(const std::string& attribute) const {
  auto it = std::find(attributes.begin(), attributes.end(), attribute);
  if (it == attributes.end()) return std::nullopt;
  return static_cast<std::size_t>(it - attributes.begin());
}

CorrelationMatrix correlation_matrix(const std::vector<std::string>& attributes,
                                     std::span<const std::vector<Label>> columns,
                                     std::size_t min_support) {
  if (columns.size() != attributes.size()) {
    throw Error(ErrorCode::InvalidConfig, "one label column per attribute is required");
  }
  const std::size_t n = attributes.size();
  const std::size_t samples = n == 0 ? 0 : columns[0].size();
  kernels::PackedLabels packed(n, samples);
  for (std::size_t a = 0; a < n; ++a) {
    if (columns[a].size() != samples) {
      throw Error(ErrorCode::InvalidConfig, "label columns must have equal length");
    }
    for (std::size_t s = 0; s < samples; ++s) packed.set(a, s, columns[a][s]);
  }
  const auto tables = kernels::contingency_tables(packed);

  CorrelationMatrix m;
  m.attributes = attributes;
  m.coefficients.resize(n * n);
  m.support.resize(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const auto& c = tables[i * n + j];
      auto r = phi(c, min_support);
      if (i == j && r) r = 1.0;
      m.coefficients[i * n + j] = m.coefficients[j * n + i] = r;
      m.support[i * n + j] = m.support[j * n + i] = static_cast<std::size_t>(c.support());
    }
  }
  return m;
}

CorrelationMatrix correlation_matrix(const AnnotationTable& ann, std::size_t min_support) {
  std::vector<std::vector<Label>> columns(ann.attribute_names.size());
  for (auto& col : columns) col.reserve(ann.rows.size());
  for (const auto& [id, row] : ann.rows) {
    if (row.labels.size() != columns.size()) {
      throw Error(ErrorCode::MissingColumn, "annotation row '" + id + "' does not cover every attribute");
    }
    for (std::size_t a = 0; a < columns.size(); ++a) columns[a].push_back(row.labels[a]);
  }
  return correlation_matrix(ann.attribute_names, columns, min_support);
}

CorrelationMatrix correlation_matrix(const Dataset& ds, std::size_t min_support) {
  std::vector<std::vector<Label>> columns;
  columns.reserve(ds.attribute_names().size());
  for (std::size_t a = 0; a < ds.attribute_names().size(); ++a) {
    auto span = ds.labels(a);
    columns.emplace_back(span.begin(), span.end());
  }
  return correlation_matrix(ds.attribute_names(), columns, min_support);
}

TopPairs top_pairs(const CorrelationMatrix& m, std::size_t k) {
  std::vector<AttributePair> pool;
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = i + 1; j < m.size(); ++j) {
      if (m.at(i, j)) pool.push_back(make_pair(m, i, j));
    }
  }
  if (pool.size() < k) {
    throw Error(ErrorCode::InsufficientPairs, "requested " + std::to_string(k) + " pairs but only " +
                                                  std::to_string(pool.size()) + " are defined");
  }
  TopPairs out;
  auto desc = pool;
  std::sort(desc.begin(), desc.end(), [](const AttributePair& a, const AttributePair& b) {
    if (a.coefficient != b.coefficient) return a.coefficient > b.coefficient;
    return name_less(a, b);
  });
  auto asc = std::move(pool);
  std::sort(asc.begin(), asc.end(), [](const AttributePair& a, const AttributePair& b) {
    if (a.coefficient != b.coefficient) return a.coefficient < b.coefficient;
    return name_less(a, b);
  });
  out.most_positive.assign(desc.begin(), desc.begin() + static_cast<std::ptrdiff_t>(k));
  out.most_negative.assign(asc.begin(), asc.begin() + static_cast<std::ptrdiff_t>(k));
  return out;
}

std::vector<AttributePair> top_correlates(const CorrelationMatrix& m, std::size_t attribute,
                                          std::size_t n) {
  std::vector<AttributePair> partners;
  for (std::size_t j = 0; j < m.size(); ++j) {
    if (j == attribute || !m.at(attribute, j)) continue;
    partners.push_back({m.attributes[attribute], m.attributes[j], *m.at(attribute, j),
                        m.support_at(attribute, j)});
  }
  std::sort(partners.begin(), partners.end(), [](const AttributePair& a, const AttributePair& b) {
    const double ma = std::abs(a.coefficient);
    const double mb = std::abs(b.coefficient);
    if (ma != mb) return ma > mb;
    return a.second < b.second;
  });
  if (partners.size() > n) partners.resize(n);
  return partners;
}

void write_matrix_csv(const CorrelationMatrix& m, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  os << "attribute";
  for (const auto& a : m.attributes) os << ',' << a;
  os << '\n';
  for (std::size_t i = 0; i < m.size(); ++i) {
    os << m.attributes[i];
    for (std::size_t j = 0; j < m.size(); ++j) {
      os << ',';
      if (const auto& r = m.at(i, j)) os << format_real(*r);
    }
    os << '\n';
  }
  if (!os) throw Error(ErrorCode::IoFailure, "short write to " + path.string());
}

}  // namespace attrbias
