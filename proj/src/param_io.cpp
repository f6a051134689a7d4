#include "servosys/param_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "servosys/errors.hpp"

namespace servosys {

namespace {

using nlohmann::json;

struct FieldSpec {
  const char* name;
  const char* unit;
  double ActuatorParams::*member;
};

constexpr FieldSpec kFields[] = {
    {"damping", "N*m*s/rad", &ActuatorParams::damping},
    {"armature", "kg*m^2", &ActuatorParams::armature},
    {"friction_loss", "N*m", &ActuatorParams::friction_loss},
    {"tau_max", "N*m", &ActuatorParams::tau_max},
    {"qdot_tau_max", "rad/s", &ActuatorParams::qdot_tau_max},
    {"qdot_max", "rad/s", &ActuatorParams::qdot_max},
    {"tau_at_qdot_max", "N*m", &ActuatorParams::tau_at_qdot_max},
    {"kd_min", "N*m*s/rad", &ActuatorParams::kd_min},
    {"tau_brake", "N*m", &ActuatorParams::tau_brake},
    {"passive_active_ratio", "1", &ActuatorParams::passive_active_ratio},
    {"kp_conversion", "1", &ActuatorParams::kp_conversion},
};

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spill(const std::string& text, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("malformed JSON: ") + e.what());
  }
}

void check_schema(const json& doc) {
  if (!doc.is_object() || !doc.contains("schema_version")) {
    throw ValidationError("missing field 'schema_version'");
  }
  const json& v = doc["schema_version"];
  if (!v.is_number_integer() || v.get<int>() != kParamSchemaVersion) {
    throw ValidationError("unknown schema_version " + v.dump());
  }
}

double number_at(const json& obj, const char* name) {
  if (!obj.contains(name)) {
    throw ValidationError(std::string("missing field '") + name + "'");
  }
  const json& entry = obj[name];
  const json& value = entry.is_object() ? entry.value("value", json()) : entry;
  if (!value.is_number()) {
    throw ValidationError(std::string("field '") + name + "' is not a number");
  }
  return value.get<double>();
}

}  // namespace

std::string params_to_string(const ParamFile& file) {
  json params = json::object();
  for (const auto& f : kFields) {
    params[f.name] = {{"value", file.params.*(f.member)}, {"unit", f.unit}};
  }
  json doc = {{"schema_version", kParamSchemaVersion},
              {"family", file.family},
              {"params", params}};
  return doc.dump(2) + "\n";
}

ParamFile params_from_string(const std::string& text) {
  const json doc = parse(text);
  check_schema(doc);
  ParamFile file;
  if (doc.contains("family") && doc["family"].is_string()) {
    file.family = doc["family"].get<std::string>();
  }
  if (!doc.contains("params") || !doc["params"].is_object()) {
    throw ValidationError("missing field 'params'");
  }
  const json& params = doc["params"];
  for (const auto& f : kFields) file.params.*(f.member) = number_at(params, f.name);
  if (auto problem = check_invariants(file.params)) {
    throw ValidationError("invariant violation: " + *problem);
  }
  return file;
}

ParamFile read_params(const std::filesystem::path& path) {
  return params_from_string(slurp(path));
}

void write_params(const ParamFile& file, const std::filesystem::path& path) {
  validate(file.params);
  spill(params_to_string(file), path);
}

ParamBounds read_bounds(const std::filesystem::path& path) {
  const json doc = parse(slurp(path));
  check_schema(doc);
  if (!doc.contains("bounds") || !doc["bounds"].is_object()) {
    throw ValidationError("missing field 'bounds'");
  }
  const json& b = doc["bounds"];
  ParamBounds bounds;
  for (std::size_t i = 0; i < kNumFitParams; ++i) {
    const auto p = static_cast<FitParam>(i);
    const std::string name(field_name(p));
    if (!b.contains(name)) throw ValidationError("missing field '" + name + "'");
    const json& pair = b[name];
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() ||
        !pair[1].is_number()) {
      throw ValidationError("field '" + name + "' must be [lower, upper]");
    }
    bounds[p] = {pair[0].get<double>(), pair[1].get<double>()};
  }
  validate(bounds);
  return bounds;
}

void write_bounds(const ParamBounds& bounds, const std::filesystem::path& path) {
  json b = json::object();
  for (std::size_t i = 0; i < kNumFitParams; ++i) {
    const auto p = static_cast<FitParam>(i);
    b[std::string(field_name(p))] = {bounds[p].lower, bounds[p].upper};
  }
  json doc = {{"schema_version", kParamSchemaVersion}, {"bounds", b}};
  spill(doc.dump(2) + "\n", path);
}

}  // namespace servosys
