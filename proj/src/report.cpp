#include "attrbias/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "attrbias/error.hpp"
#include "attrbias/serialize.hpp"

namespace attrbias {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc | std::ios::binary);
  if (!os) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  return os;
}

void finish(std::ofstream& os, const std::filesystem::path& path) {
  os.flush();
  if (!os) throw Error(ErrorCode::IoFailure, "short write to " + path.string());
}

std::string shortest(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

std::string maybe_percent(const MaybeValue& v) { return v ? format_percent(*v) : "undefined"; }

std::string flag_of(const AttributeReport& r) {
  if (r.skipped()) return "skipped";
  return r.summary_valid ? "valid" : "not_valid";
}

json pair_json(const AttributePair& p) {
  json j = p;
  j["low_confidence"] = p.support < kLowConfidenceSupport;
  return j;
}

json pairs_json(const std::vector<AttributePair>& pairs) {
  json out = json::array();
  for (const auto& p : pairs) out.push_back(pair_json(p));
  return out;
}

json top_pairs_json(const TopPairs& t) {
  return json{{"most_positive", pairs_json(t.most_positive)}, {"most_negative", pairs_json(t.most_negative)}};
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string format_fixed2(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, 2);
  std::string s(buf, res.ptr);
  if (s == "-0.00") s = "0.00";
  return s;
}

std::string format_percent(double fraction) { return format_fixed2(fraction * 100.0) + "%"; }

void emit_attribute_table(const std::vector<AttributeReport>& reports,
                          const std::vector<OperatingPoint>& ops, const std::filesystem::path& path) {
  auto os = open_out(path);
  os << "attribute,row";
  for (const auto& op : ops) os << ',' << op.name() << " Real," << op.name() << " Control";
  os << ",valid\n";
  for (const auto& r : reports) {
    const std::string flag = flag_of(r);
    for (const char* row : {"Positive", "Negative", "Rel. Perf."}) {
      os << r.attribute << ',' << row;
      const std::string_view rv(row);
      for (const auto& op : ops) {
        std::string real;
        std::string control;
        if (!r.skipped()) {
          if (rv == "Positive") {
            real = format_percent(r.real_pos.errors.at(op));
            control = format_percent(r.control_pos.per_op_mean_error.at(op));
          } else if (rv == "Negative") {
            real = format_percent(r.real_neg.errors.at(op));
            control = format_percent(r.control_neg.per_op_mean_error.at(op));
          } else {
            real = maybe_percent(r.rel_perf.at(op));
            control = maybe_percent(r.control_rel_perf.at(op));
          }
        }
        os << ',' << real << ',' << control;
      }
      os << ',' << flag << '\n';
    }
  }
  finish(os, path);
}

std::vector<SummaryPoint> summary_points(const std::vector<AttributeReport>& reports,
                                         const OperatingPoint& op, double threshold) {
  std::vector<SummaryPoint> points;
  for (const auto& r : reports) {
    SummaryPoint p{r.attribute, std::nullopt, std::nullopt, false};
    if (!r.skipped()) {
      if (auto it = r.rel_perf.find(op); it != r.rel_perf.end()) p.rel_perf = it->second;
      if (auto it = r.validity.find(op); it != r.validity.end()) p.validity = it->second;
      p.valid = p.validity.has_value() && *p.validity >= threshold;
    }
    points.push_back(std::move(p));
  }
  return points;
}

std::size_t emit_summary_scatter(const std::vector<AttributeReport>& reports, const OperatingPoint& op,
                                 double threshold, const std::filesystem::path& stem) {
  const auto points = summary_points(reports, op, threshold);
  auto csv_path = stem;
  csv_path += ".csv";
  auto svg_path = stem;
  svg_path += ".svg";

  {
    auto os = open_out(csv_path);
    os << "attribute,validity,rel_perf,valid\n";
    for (const auto& p : points) {
      os << p.attribute << ',' << (p.validity ? shortest(*p.validity) : "") << ','
         << (p.rel_perf ? shortest(*p.rel_perf) : "") << ',' << (p.valid ? "true" : "false") << '\n';
    }
    finish(os, csv_path);
  }

  std::vector<const SummaryPoint*> drawn;
  for (const auto& p : points) {
    if (p.valid && p.rel_perf) drawn.push_back(&p);
  }
  double x_max = 1.0;
  double y_abs = 0.05;
  for (const auto* p : drawn) {
    x_max = std::max(x_max, *p->validity);
    y_abs = std::max(y_abs, std::abs(*p->rel_perf));
  }
  y_abs *= 1.1;
  const double span = std::max(x_max - threshold, 0.01);
  const double x_min = threshold - 0.1 * span;
  x_max += 0.05 * span;

  const double width = 640, height = 480, left = 70, right = 20, top = 40, bottom = 60;
  const double pw = width - left - right;
  const double ph = height - top - bottom;
  auto px = [&](double v) { return left + (v - x_min) / (x_max - x_min) * pw; };
  auto py = [&](double v) { return top + (y_abs - v) / (2.0 * y_abs) * ph; };

  auto os = open_out(svg_path);
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" viewBox=\"0 0 640 480\">\n"
     << "<desc>relative performance over validity at " << xml_escape(op.name()) << "; threshold "
     << shortest(threshold) << "; " << drawn.size() << " of " << points.size() << " attributes drawn</desc>\n"
     << "<rect x=\"0\" y=\"0\" width=\"640\" height=\"480\" fill=\"white\"/>\n"
     << "<g id=\"axes\" stroke=\"black\" stroke-width=\"1\">\n"
     << "<line x1=\"" << format_fixed2(left) << "\" y1=\"" << format_fixed2(top + ph) << "\" x2=\""
     << format_fixed2(left + pw) << "\" y2=\"" << format_fixed2(top + ph) << "\"/>\n"
     << "<line x1=\"" << format_fixed2(left) << "\" y1=\"" << format_fixed2(top) << "\" x2=\""
     << format_fixed2(left) << "\" y2=\"" << format_fixed2(top + ph) << "\"/>\n"
     << "<line x1=\"" << format_fixed2(left) << "\" y1=\"" << format_fixed2(py(0.0)) << "\" x2=\""
     << format_fixed2(left + pw) << "\" y2=\"" << format_fixed2(py(0.0)) << "\" stroke=\"gray\"/>\n"
     << "</g>\n";
  os << "<g id=\"ticks\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int t = 0; t <= 4; ++t) {
    const double vx = x_min + (x_max - x_min) * t / 4.0;
    const double vy = -y_abs + 2.0 * y_abs * t / 4.0;
    os << "<text x=\"" << format_fixed2(px(vx)) << "\" y=\"" << format_fixed2(top + ph + 16)
       << "\" text-anchor=\"middle\">" << format_fixed2(vx) << "</text>\n";
    os << "<text x=\"" << format_fixed2(left - 6) << "\" y=\"" << format_fixed2(py(vy) + 4)
       << "\" text-anchor=\"end\">" << format_percent(vy) << "</text>\n";
  }
  os << "</g>\n";
  os << "<line id=\"validity-boundary\" x1=\"" << format_fixed2(px(threshold)) << "\" y1=\""
     << format_fixed2(top) << "\" x2=\"" << format_fixed2(px(threshold)) << "\" y2=\""
     << format_fixed2(top + ph) << "\" stroke=\"red\" stroke-dasharray=\"4 3\"/>\n";
  os << "<g id=\"points\" fill=\"steelblue\">\n";
  for (const auto* p : drawn) {
    os << "<circle cx=\"" << format_fixed2(px(*p->validity)) << "\" cy=\"" << format_fixed2(py(*p->rel_perf))
       << "\" r=\"3\"><title>" << xml_escape(p->attribute) << "</title></circle>\n";
  }
  os << "</g>\n";
  os << "<text x=\"" << format_fixed2(left + pw / 2) << "\" y=\"" << format_fixed2(height - 16)
     << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">validity</text>\n"
     << "<text x=\"16\" y=\"" << format_fixed2(top + ph / 2) << "\" font-family=\"sans-serif\" font-size=\"12\""
     << " text-anchor=\"middle\" transform=\"rotate(-90 16 " << format_fixed2(top + ph / 2)
     << ")\">relative performance</text>\n"
     << "<text x=\"" << format_fixed2(left) << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"13\">"
     << xml_escape(op.name()) << "</text>\n"
     << "</svg>\n";
  finish(os, svg_path);
  return drawn.size();
}

std::vector<std::string> power_warnings(const std::vector<AttributeReport>& reports) {
  std::vector<std::string> out;
  for (const auto& r : reports) {
    if (r.skipped()) continue;
    for (auto [m, label] : {std::pair{&r.real_pos, "positive"}, std::pair{&r.real_neg, "negative"}}) {
      for (const auto& op : m->underpowered) {
        out.push_back(r.attribute + ": " + label + " group has " + std::to_string(m->impostor_count) +
                      " impostor scores, fewer than 10/target at " + op.name());
      }
    }
  }
  return out;
}

ReportDocument build_report_document(const std::vector<AttributeReport>& reports,
                                     const CorrelationMatrix& matrix, const RunConfig& cfg) {
  ReportDocument doc;
  doc.schema_version = kSchemaVersion;
  doc.config = config_echo(cfg);
  doc.attributes = reports;
  std::size_t defined = 0;
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    for (std::size_t j = i + 1; j < matrix.size(); ++j) defined += matrix.at(i, j) ? 1 : 0;
  }
  doc.top_pairs = top_pairs(matrix, std::min(cfg.top_pairs, defined));
  for (const auto& r : reports) {
    if (auto idx = matrix.index_of(r.attribute)) {
      doc.footnotes.push_back({r.attribute, top_correlates(matrix, *idx, 3)});
    }
  }
  doc.warnings = power_warnings(reports);
  return doc;
}

void emit_json_report(const std::vector<AttributeReport>& reports, const CorrelationMatrix& matrix,
                      const RunConfig& cfg, const std::filesystem::path& path) {
  const auto doc = build_report_document(reports, matrix, cfg);
  json footnotes = json::array();
  for (const auto& f : doc.footnotes) {
    footnotes.push_back(json{{"attribute", f.attribute}, {"top_correlates", pairs_json(f.top_correlates)}});
  }
  json j{{"schema_version", doc.schema_version},
         {"config", doc.config},
         {"attributes", doc.attributes},
         {"correlation", top_pairs_json(doc.top_pairs)},
         {"footnotes", footnotes},
         {"warnings", doc.warnings}};
  auto os = open_out(path);
  os << j.dump(2) << '\n';
  finish(os, path);
}

ReportDocument load_json_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedHeader, path.string() + ": " + e.what());
  }
  ReportDocument doc;
  j.at("schema_version").get_to(doc.schema_version);
  j.at("config").get_to(doc.config);
  j.at("attributes").get_to(doc.attributes);
  j.at("correlation").at("most_positive").get_to(doc.top_pairs.most_positive);
  j.at("correlation").at("most_negative").get_to(doc.top_pairs.most_negative);
  for (const auto& f : j.at("footnotes")) {
    doc.footnotes.push_back({f.at("attribute").get<std::string>(),
                             f.at("top_correlates").get<std::vector<AttributePair>>()});
  }
  j.at("warnings").get_to(doc.warnings);
  return doc;
}

void emit_top_pairs(const TopPairs& pairs, const RunConfig& cfg, const std::filesystem::path& path) {
  json j{{"schema_version", kSchemaVersion}, {"config", config_echo(cfg)}, {"correlation", top_pairs_json(pairs)}};
  auto os = open_out(path);
  os << j.dump(2) << '\n';
  finish(os, path);
}

}  // namespace attrbias
