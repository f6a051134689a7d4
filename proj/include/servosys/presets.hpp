#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "servosys/actuator_model.hpp"

namespace servosys {

/// Environment variable that overrides the bundled preset directory.
inline constexpr const char* kPresetDirEnv = "SERVOSYS_PRESET_DIR";

std::filesystem::path preset_dir();

/// Names of the bundled motor families, in table order.
const std::vector<std::string>& preset_families();

std::filesystem::path preset_path(std::string_view family);

/// Reads a bundled family preset; unknown names are a ValidationError.
ActuatorParams load_preset(std::string_view family);

}  // namespace servosys
