#include "attrbias/serialize.hpp"

#include "attrbias/error.hpp"

namespace attrbias {

namespace {

template <class V>
json op_map(const std::map<OperatingPoint, V>& m) {
  json j = json::object();
  for (const auto& [op, v] : m) j[op.name()] = v;
  return j;
}

json op_map(const std::map<OperatingPoint, MaybeValue>& m) {
  json j = json::object();
  for (const auto& [op, v] : m) j[op.name()] = v ? json(*v) : json(nullptr);
  return j;
}

template <class V>
std::map<OperatingPoint, V> read_op_map(const json& j) {
  std::map<OperatingPoint, V> m;
  for (const auto& [k, v] : j.items()) m[OperatingPoint::parse(k)] = v.template get<V>();
  return m;
}

std::map<OperatingPoint, MaybeValue> read_maybe_map(const json& j) {
  std::map<OperatingPoint, MaybeValue> m;
  for (const auto& [k, v] : j.items()) {
    m[OperatingPoint::parse(k)] = v.is_null() ? MaybeValue{} : MaybeValue(v.get<double>());
  }
  return m;
}

}  // namespace

void to_json(json& j, const OperatingPoint& op) { j = op.name(); }
void from_json(const json& j, OperatingPoint& op) { op = OperatingPoint::parse(j.get<std::string>()); }

void to_json(json& j, const GroupMetrics& m) {
  j = json{{"errors", op_map(m.errors)},
           {"genuine_count", m.genuine_count},
           {"impostor_count", m.impostor_count},
           {"underpowered", m.underpowered}};
}

void from_json(const json& j, GroupMetrics& m) {
  m.errors = read_op_map<double>(j.at("errors"));
  j.at("genuine_count").get_to(m.genuine_count);
  j.at("impostor_count").get_to(m.impostor_count);
  j.at("underpowered").get_to(m.underpowered);
}

void to_json(json& j, const ControlResult& c) {
  j = json{{"per_op_mean_error", op_map(c.per_op_mean_error)},
           {"k", c.k},
           {"polarity", c.polarity == Polarity::Positive ? "positive" : "negative"},
           {"group_size", c.group_size},
           {"replicates", c.replicates},
           {"redraws", c.redraws}};
}

void from_json(const json& j, ControlResult& c) {
  c.per_op_mean_error = read_op_map<double>(j.at("per_op_mean_error"));
  j.at("k").get_to(c.k);
  const auto pol = j.at("polarity").get<std::string>();
  if (pol != "positive" && pol != "negative") {
    throw Error(ErrorCode::UnknownValue, "unknown polarity '" + pol + "'");
  }
  c.polarity = pol == "positive" ? Polarity::Positive : Polarity::Negative;
  j.at("group_size").get_to(c.group_size);
  j.at("replicates").get_to(c.replicates);
  j.at("redraws").get_to(c.redraws);
}

void to_json(json& j, const AttributeReport& r) {
  j = json{{"attribute", r.attribute},
           {"positive_count", r.positive_count},
           {"negative_count", r.negative_count},
           {"skipped", r.skipped()},
           {"skip_reason", r.skip_reason ? json(*r.skip_reason) : json(nullptr)}};
  if (r.skipped()) return;
  j["real_positive"] = r.real_pos;
  j["real_negative"] = r.real_neg;
  j["control_positive"] = r.control_pos;
  j["control_negative"] = r.control_neg;
  j["rel_perf"] = op_map(r.rel_perf);
  j["control_rel_perf"] = op_map(r.control_rel_perf);
  j["validity"] = op_map(r.validity);
  j["valid"] = op_map(r.valid);
  j["summary_valid"] = r.summary_valid;
}

void from_json(const json& j, AttributeReport& r) {
  r = AttributeReport{};
  j.at("attribute").get_to(r.attribute);
  j.at("positive_count").get_to(r.positive_count);
  j.at("negative_count").get_to(r.negative_count);
  if (const auto& s = j.at("skip_reason"); !s.is_null()) r.skip_reason = s.get<std::string>();
  if (r.skipped()) return;
  j.at("real_positive").get_to(r.real_pos);
  j.at("real_negative").get_to(r.real_neg);
  j.at("control_positive").get_to(r.control_pos);
  j.at("control_negative").get_to(r.control_neg);
  r.rel_perf = read_maybe_map(j.at("rel_perf"));
  r.control_rel_perf = read_maybe_map(j.at("control_rel_perf"));
  r.validity = read_maybe_map(j.at("validity"));
  r.valid = read_op_map<bool>(j.at("valid"));
  j.at("summary_valid").get_to(r.summary_valid);
}

void to_json(json& j, const AttributePair& p) {
  j = json{{"first", p.first}, {"second", p.second}, {"coefficient", p.coefficient}, {"support", p.support}};
}

void from_json(const json& j, AttributePair& p) {
  j.at("first").get_to(p.first);
  j.at("second").get_to(p.second);
  j.at("coefficient").get_to(p.coefficient);
  j.at("support").get_to(p.support);
}

void to_json(json& j, const JoinStats& s) {
  j = json{{"matched", s.matched},
           {"dropped_embeddings", s.dropped_embeddings},
           {"dropped_annotations", s.dropped_annotations},
           {"zero_vectors", s.zero_vectors},
           {"identity_mismatches", s.identity_mismatches}};
}

void from_json(const json& j, JoinStats& s) {
  j.at("matched").get_to(s.matched);
  j.at("dropped_embeddings").get_to(s.dropped_embeddings);
  j.at("dropped_annotations").get_to(s.dropped_annotations);
  j.at("zero_vectors").get_to(s.zero_vectors);
  j.at("identity_mismatches").get_to(s.identity_mismatches);
}

void to_json(json& j, const CorrelationMatrix& m) {
  json coef = json::array();
  json sup = json::array();
  for (std::size_t i = 0; i < m.size(); ++i) {
    json crow = json::array();
    json srow = json::array();
    for (std::size_t k = 0; k < m.size(); ++k) {
      crow.push_back(m.at(i, k) ? json(*m.at(i, k)) : json(nullptr));
      srow.push_back(m.support_at(i, k));
    }
    coef.push_back(std::move(crow));
    sup.push_back(std::move(srow));
  }
  j = json{{"attributes", m.attributes}, {"coefficients", coef}, {"support", sup}};
}

void from_json(const json& j, CorrelationMatrix& m) {
  m = CorrelationMatrix{};
  j.at("attributes").get_to(m.attributes);
  const auto n = m.attributes.size();
  const auto& coef = j.at("coefficients");
  const auto& sup = j.at("support");
  if (coef.size() != n || sup.size() != n) {
    throw Error(ErrorCode::MalformedHeader, "correlation matrix is not square");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (coef[i].size() != n || sup[i].size() != n) {
      throw Error(ErrorCode::MalformedHeader, "correlation matrix is not square");
    }
    for (std::size_t k = 0; k < n; ++k) {
      const auto& c = coef[i][k];
      m.coefficients.push_back(c.is_null() ? std::optional<double>{} : std::optional<double>(c.get<double>()));
      m.support.push_back(sup[i][k].get<std::size_t>());
    }
  }
}

}  // namespace attrbias
