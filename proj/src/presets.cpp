#include "servosys/presets.hpp"

#include <algorithm>
#include <cstdlib>

#include "servosys/errors.hpp"
#include "servosys/param_io.hpp"

namespace servosys {

std::filesystem::path preset_dir() {
  if (const char* env = std::getenv(kPresetDirEnv); env && *env) return env;
  return SERVOSYS_DEFAULT_PRESET_DIR;
}

const std::vector<std::string>& preset_families() {
  static const std::vector<std::string> families = {
      "2XL430", "XC330", "XC430", "2XC430", "XM430-W210"};
  return families;
}

std::filesystem::path preset_path(std::string_view family) {
  const auto& names = preset_families();
  if (std::find(names.begin(), names.end(), family) == names.end()) {
    throw ValidationError("unknown motor family '" + std::string(family) + "'");
  }
  return preset_dir() / (std::string(family) + ".json");
}

ActuatorParams load_preset(std::string_view family) {
  return read_params(preset_path(family)).params;
}

}  // namespace servosys
