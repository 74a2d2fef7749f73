#pragma once

// Field-level checks for the JSON documents the CLI emits. The table here
// and docs/output-schema.md describe the same schema version.

#include <string>
#include <vector>

#include <json.hpp>

#include "io.hpp"

namespace omramsey::schema {

using json = nlohmann::ordered_json;

enum class Type { number, integer, boolean, string, array, object, number_or_null };

struct Field {
  const char* name;
  Type type;
};

inline bool matches(const json& v, Type t) {
  switch (t) {
    case Type::number: return v.is_number();
    case Type::integer: return v.is_number_integer();
    case Type::boolean: return v.is_boolean();
    case Type::string: return v.is_string();
    case Type::array: return v.is_array();
    case Type::object: return v.is_object();
    case Type::number_or_null: return v.is_number() || v.is_null();
  }
  return false;
}

inline const std::vector<Field>* fields_for(const std::string& schema) {
  static const std::vector<Field> fringe = {
      {"schema", Type::string},        {"schema_version", Type::integer}, {"detuning_convention", Type::string},
      {"central_dip_hz", Type::number}, {"minima_hz", Type::array},        {"period_hz", Type::number_or_null},
      {"visibility", Type::number},     {"band_hz", Type::number},         {"has_fringes", Type::boolean}};
  static const std::vector<Field> fit = {{"schema", Type::string},     {"schema_version", Type::integer},
                                         {"params_hat", Type::object}, {"residual", Type::number},
                                         {"iterations", Type::integer}, {"evaluations", Type::integer},
                                         {"converged", Type::boolean}};
  static const std::vector<Field> trace = {{"schema", Type::string}, {"schema_version", Type::integer},
                                           {"y_hz", Type::number},   {"x_hz", Type::number},
                                           {"samples", Type::integer}, {"gated_intensity", Type::number}};
  static const std::vector<Field> scan = {{"schema", Type::string}, {"schema_version", Type::integer},
                                          {"axis", Type::string},   {"unit", Type::string},
                                          {"entries", Type::array}};
  static const std::vector<Field> manifest = {
      {"schema", Type::string},       {"schema_version", Type::integer}, {"tool", Type::string},
      {"tool_version", Type::string}, {"command", Type::string},         {"seed", Type::integer},
      {"physical", Type::object},     {"schedule", Type::object},        {"grid", Type::object},
      {"sample_dt_us", Type::number}, {"scenario_canonical", Type::string}, {"files", Type::array},
      {"runtime", Type::object}};
  if (schema == "omramsey.fringe_report") return &fringe;
  if (schema == "omramsey.fit_result") return &fit;
  if (schema == "omramsey.trace_report") return &trace;
  if (schema == "omramsey.scan_report") return &scan;
  if (schema == "omramsey.manifest") return &manifest;
  return nullptr;
}

/// Problems found in `doc`; empty when it conforms to the schema it names.
inline std::vector<std::string> validate(const json& doc) {
  std::vector<std::string> issues;
  if (!doc.is_object() || !doc.contains("schema") || !doc["schema"].is_string()) {
    return {"document has no string 'schema' field"};
  }
  const auto name = doc["schema"].get<std::string>();
  const auto* fields = fields_for(name);
  if (!fields) return {"unknown schema '" + name + "'"};
  if (!doc.contains("schema_version") || doc["schema_version"] != io::kSchemaVersion) {
    issues.push_back("schema_version must be " + std::to_string(io::kSchemaVersion));
  }
  for (const auto& f : *fields) {
    if (!doc.contains(f.name)) {
      issues.push_back(std::string("missing field '") + f.name + "'");
    } else if (!matches(doc[f.name], f.type)) {
      issues.push_back(std::string("field '") + f.name + "' has the wrong type");
    }
  }
  if (name == "omramsey.scan_report" && doc.contains("entries") && doc["entries"].is_array()) {
    for (const auto& e : doc["entries"]) {
      if (!e.contains("report")) {
        issues.emplace_back("scan entry without report");
        continue;
      }
      for (auto& i : validate(e["report"])) issues.push_back("entries[].report: " + i);
    }
  }
  if (name == "omramsey.fringe_report" && doc.contains("visibility") && doc["visibility"].is_number()) {
    const double v = doc["visibility"].get<double>();
    if (v < 0.0 || v > 1.0) issues.emplace_back("visibility outside [0, 1]");
  }
  return issues;
}

}  // namespace omramsey::schema
