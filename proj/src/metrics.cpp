#include "servosys/metrics.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "servosys/errors.hpp"

namespace servosys {

void validate(const TorqueInventory& inv) {
  if (!(inv.height > 0.0) || !std::isfinite(inv.height)) {
    throw ValidationError("inventory height must be > 0");
  }
  if (!(inv.mass > 0.0) || !std::isfinite(inv.mass)) {
    throw ValidationError("inventory mass must be > 0");
  }
  for (const auto& e : inv.entries) {
    if (!(e.tau_max >= 0.0) || !std::isfinite(e.tau_max)) {
      throw ValidationError("tau_max of joint '" + e.joint + "' must be >= 0");
    }
  }
}

double total_torque(const TorqueInventory& inv, bool include_end_effectors) {
  double sum = 0.0;
  for (const auto& e : inv.entries) {
    if (e.end_effector && !include_end_effectors) continue;
    sum += std::abs(e.tau_max);
  }
  return sum;
}

double power_factor(const TorqueInventory& inv, bool include_end_effectors) {
  validate(inv);
  return total_torque(inv, include_end_effectors) / (inv.height * inv.mass * kGravity);
}

TorqueInventory segment_of(const TorqueInventory& inv, BodySegment segment) {
  TorqueInventory out{{}, inv.height, inv.mass};
  for (const auto& e : inv.entries) {
    if (e.segment == segment) out.entries.push_back(e);
  }
  return out;
}

PowerFactorSplit power_factor_split(const TorqueInventory& inv,
                                    bool include_end_effectors) {
  PowerFactorSplit s;
  s.upper = power_factor(segment_of(inv, BodySegment::kUpper), include_end_effectors);
  s.lower = power_factor(segment_of(inv, BodySegment::kLower), include_end_effectors);
  validate(inv);
  s.total = s.upper + s.lower;
  return s;
}

double scale_torque(double height_robot, double mass_robot, double height_human,
                    double mass_human, double tau_human) {
  if (!(height_robot > 0.0) || !(mass_robot > 0.0) || !(height_human > 0.0) ||
      !(mass_human > 0.0)) {
    throw ValidationError("scale_torque: heights and masses must be > 0");
  }
  return (height_robot * mass_robot) / (height_human * mass_human) * tau_human;
}

double relative_deflection(double load, double modulus, double length) {
  if (!(load > 0.0)) throw ValidationError("relative_deflection: load must be > 0");
  if (!(modulus > 0.0)) throw ValidationError("relative_deflection: modulus must be > 0");
  if (!(length > 0.0)) throw ValidationError("relative_deflection: length must be > 0");
  return load / (3.0 * modulus * length * length);
}

TorqueInventory read_inventory(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("malformed inventory: ") + e.what());
  }
  TorqueInventory inv;
  try {
    inv.height = doc.at("height").get<double>();
    inv.mass = doc.at("mass").get<double>();
    for (const auto& j : doc.at("joints")) {
      InventoryEntry e;
      e.joint = j.at("name").get<std::string>();
      e.tau_max = j.at("tau_max").get<double>();
      const auto seg = j.at("segment").get<std::string>();
      if (seg == "upper") {
        e.segment = BodySegment::kUpper;
      } else if (seg == "lower") {
        e.segment = BodySegment::kLower;
      } else {
        throw ValidationError("joint '" + e.joint + "': segment must be upper or lower");
      }
      e.end_effector = j.value("end_effector", false);
      inv.entries.push_back(e);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("inventory: ") + e.what());
  }
  validate(inv);
  return inv;
}

void write_inventory(const TorqueInventory& inv, const std::filesystem::path& path) {
  nlohmann::json joints = nlohmann::json::array();
  for (const auto& e : inv.entries) {
    joints.push_back({{"name", e.joint},
                      {"tau_max", e.tau_max},
                      {"segment", e.segment == BodySegment::kUpper ? "upper" : "lower"},
                      {"end_effector", e.end_effector}});
  }
  nlohmann::json doc = {{"height", inv.height}, {"mass", inv.mass}, {"joints", joints}};
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << doc.dump(2) << "\n";
}

}  // namespace servosys
