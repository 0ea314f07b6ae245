#pragma once

#include "json.hpp"

#include "attrbias/audit.hpp"
#include "attrbias/config.hpp"
#include "attrbias/core.hpp"
#include "attrbias/correlation.hpp"
#include "attrbias/ingest.hpp"

// JSON mapping of the result types. Maps keyed by OperatingPoint become
// objects keyed by OperatingPoint::name(); undefined values become null.
namespace attrbias {

using nlohmann::json;

void to_json(json& j, const OperatingPoint& op);
void from_json(const json& j, OperatingPoint& op);

void to_json(json& j, const GroupMetrics& m);
void from_json(const json& j, GroupMetrics& m);

void to_json(json& j, const ControlResult& c);
void from_json(const json& j, ControlResult& c);

void to_json(json& j, const AttributeReport& r);
void from_json(const json& j, AttributeReport& r);

void to_json(json& j, const AttributePair& p);
void from_json(const json& j, AttributePair& p);

void to_json(json& j, const JoinStats& s);
void from_json(const json& j, JoinStats& s);

// Matrix as {"attributes": [...], "coefficients": [[...]], "support": [[...]]}.
void to_json(json& j, const CorrelationMatrix& m);
void from_json(const json& j, CorrelationMatrix& m);

}  // namespace attrbias
