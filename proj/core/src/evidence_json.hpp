#pragma once

// Evidence <-> JSON, shared by journal persistence and the HTTP service.

#include <string>

#include "helm/network.hpp"
#include "json_util.hpp"

namespace helm::detail {

inline Json evidence_value(const Evidence& evidence) {
  if (const auto* hard = std::get_if<HardEvidence>(&evidence.form)) return hard->state;
  if (const auto* soft = std::get_if<VirtualEvidence>(&evidence.form)) return soft->likelihood;
  return std::get<GradedEvidence>(evidence.form).probability;
}

// Reads {"node","form","value"} from an object. "form" defaults to "hard".
inline Evidence evidence_from_json(const Json& item, const std::string& where) {
  if (!item.is_object()) schema_error(where, "must be an object");
  Evidence evidence;
  evidence.node = get<std::string>(field(item, "node", where), where + ".node");
  std::string form = "hard";
  if (const Json* f = optional_field(item, "form")) form = get<std::string>(*f, where + ".form");
  const Json& value = field(item, "value", where);
  if (form == "hard") {
    evidence.form = HardEvidence{get<std::string>(value, where + ".value")};
  } else if (form == "virtual") {
    evidence.form = VirtualEvidence{get<std::vector<double>>(value, where + ".value")};
  } else if (form == "graded") {
    evidence.form = GradedEvidence{get<double>(value, where + ".value")};
  } else {
    schema_error(where + ".form", "unknown evidence form '" + form + "'");
  }
  return evidence;
}

}  // namespace helm::detail
