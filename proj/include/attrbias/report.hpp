#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "attrbias/audit.hpp"
#include "attrbias/config.hpp"
#include "attrbias/correlation.hpp"

namespace attrbias {

inline constexpr const char* kSchemaVersion = "1.0";
// Correlation entries with fewer jointly defined samples are marked low-confidence.
inline constexpr std::size_t kLowConfidenceSupport = 100;

// value * 100 with two decimals (round half to even on the binary value) and a
// trailing '%'; "-0.00%" is written as "0.00%".
std::string format_percent(double fraction);
std::string format_fixed2(double value);

// Header: attribute,row,<op> Real,<op> Control,...,valid
// Three rows per attribute: Positive, Negative, Rel. Perf. The last column is
// valid, not_valid or skipped on all three rows.
void emit_attribute_table(const std::vector<AttributeReport>& reports,
                          const std::vector<OperatingPoint>& ops, const std::filesystem::path& path);

struct SummaryPoint {
  std::string attribute;
  MaybeValue rel_perf;
  MaybeValue validity;
  bool valid = false;
};

std::vector<SummaryPoint> summary_points(const std::vector<AttributeReport>& reports,
                                         const OperatingPoint& op, double threshold);

// Writes <stem>.csv (every attribute) and <stem>.svg (valid attributes only,
// with the validity boundary drawn at the threshold). Returns the number of
// drawn points.
std::size_t emit_summary_scatter(const std::vector<AttributeReport>& reports, const OperatingPoint& op,
                                 double threshold, const std::filesystem::path& stem);

std::vector<std::string> power_warnings(const std::vector<AttributeReport>& reports);

struct Footnote {
  std::string attribute;
  std::vector<AttributePair> top_correlates;
};

struct ReportDocument {
  std::string schema_version;
  std::map<std::string, std::string> config;
  std::vector<AttributeReport> attributes;
  TopPairs top_pairs;
  std::vector<Footnote> footnotes;
  std::vector<std::string> warnings;
};

ReportDocument build_report_document(const std::vector<AttributeReport>& reports,
                                     const CorrelationMatrix& matrix, const RunConfig& cfg);

void emit_json_report(const std::vector<AttributeReport>& reports, const CorrelationMatrix& matrix,
                      const RunConfig& cfg, const std::filesystem::path& path);
ReportDocument load_json_report(const std::filesystem::path& path);

// Top pairs document written by the correlate subcommand.
void emit_top_pairs(const TopPairs& pairs, const RunConfig& cfg, const std::filesystem::path& path);

}  // namespace attrbias
