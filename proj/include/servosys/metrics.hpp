#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace servosys {

inline constexpr double kGravity = 9.81;  // m/s^2

enum class BodySegment { kUpper, kLower };

struct InventoryEntry {
  std::string joint;
  double tau_max = 0.0;  // N*m, stall torque of the joint's actuator
  BodySegment segment = BodySegment::kUpper;
  bool end_effector = false;
};

struct TorqueInventory {
  std::vector<InventoryEntry> entries;
  double height = 0.0;  // m
  double mass = 0.0;    // kg
};

void validate(const TorqueInventory& inv);

/// Sum of |tau_max| over the inventory. End effectors are skipped unless
/// requested.
double total_torque(const TorqueInventory& inv, bool include_end_effectors = false);

/// Power factor: total stall torque over height * weight.
double power_factor(const TorqueInventory& inv, bool include_end_effectors = false);

struct PowerFactorSplit {
  double upper = 0.0;
  double lower = 0.0;
  // upper + lower; may differ from power_factor() in the last bit.
  double total = 0.0;
};

PowerFactorSplit power_factor_split(const TorqueInventory& inv,
                                    bool include_end_effectors = false);

/// Inventory restricted to one body segment, same height and mass.
TorqueInventory segment_of(const TorqueInventory& inv, BodySegment segment);

/// Carries a joint torque across body scales in proportion to height * mass.
double scale_torque(double height_robot, double mass_robot, double height_human,
                    double mass_human, double tau_human);

/// Tip deflection relative to length of a cantilever whose section scales
/// with its length: P / (3 E L^2).
double relative_deflection(double load, double modulus, double length);

TorqueInventory read_inventory(const std::filesystem::path& path);
void write_inventory(const TorqueInventory& inv, const std::filesystem::path& path);

}  // namespace servosys
