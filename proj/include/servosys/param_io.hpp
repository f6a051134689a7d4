#pragma once

#include <filesystem>
#include <string>

#include "servosys/actuator_model.hpp"
#include "servosys/sysid_fit.hpp"

namespace servosys {

inline constexpr int kParamSchemaVersion = 1;

/// Contents of a parameter file: schema version, family name and the eleven
/// actuator fields, each stored with its unit.
struct ParamFile {
  std::string family;
  ActuatorParams params;
};

ParamFile read_params(const std::filesystem::path& path);
void write_params(const ParamFile& file, const std::filesystem::path& path);

std::string params_to_string(const ParamFile& file);
ParamFile params_from_string(const std::string& text);

ParamBounds read_bounds(const std::filesystem::path& path);
void write_bounds(const ParamBounds& bounds, const std::filesystem::path& path);

}  // namespace servosys
