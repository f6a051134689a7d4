#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "servosys/actuator_model.hpp"

namespace servosys {

/// The nine jointly fitted actuation parameters, in a fixed order.
enum class FitParam : int {
  kDamping,
  kArmature,
  kFrictionLoss,
  kTauMax,
  kQdotTauMax,
  kQdotMax,
  kTauAtQdotMax,
  kKdMin,
  kTauBrake,
};
inline constexpr std::size_t kNumFitParams = 9;

std::string_view field_name(FitParam p);
double get(const ActuatorParams& params, FitParam p);
void set(ActuatorParams& params, FitParam p, double value);

struct Range {
  double lower = 0.0;
  double upper = 0.0;
  bool contains(double x) const { return x >= lower && x <= upper; }
  bool operator==(const Range&) const = default;
};

struct ParamBounds {
  std::array<Range, kNumFitParams> ranges{};

  Range& operator[](FitParam p) { return ranges[static_cast<std::size_t>(p)]; }
  const Range& operator[](FitParam p) const {
    return ranges[static_cast<std::size_t>(p)];
  }
  bool contains(const ActuatorParams& params) const;
  bool operator==(const ParamBounds&) const = default;
};

/// Throws ValidationError if a range is inverted or negative, or if either
/// corner of the box is not a valid ActuatorParams.
void validate(const ParamBounds& bounds);

/// Bounds bracketing a bundled motor family: [0.2x, 5x] of its values. With
/// no family, the hull over all bundled families widened 2x each way.
ParamBounds default_bounds(std::optional<std::string_view> family);

/// Bounds of +/- fraction around a parameter set.
ParamBounds bounds_around(const ActuatorParams& center, double fraction);

/// Mean absolute position error in degrees.
double tracking_error(const Trace& reference, const Trace& simulated);

struct FitConfig {
  int restarts = 8;
  // Per-restart budget of simplex iterations.
  int max_iters = 1500;
  std::uint64_t seed = 0;
  // Held fixed during the fit.
  double passive_active_ratio = 3.0;
  double kp_conversion = 150.0;
  // 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
  SimOptions sim;
};

struct FitResult {
  ActuatorParams params;
  double mae_deg = 0.0;
  int iterations = 0;
  int evaluations = 0;
  int restarts_used = 0;
  // Index of the winning restart.
  int best_restart = 0;
  // MAE at the winning restart's starting point.
  double start_mae_deg = 0.0;
  bool converged = false;
};

/// Multi-start bounded simplex search minimising tracking_error between the
/// reference and a closed-loop simulation driven by the reference setpoints.
FitResult fit_parameters(const Trace& reference, const TrackingGains& gains,
                         const LoadConfig& load, const ParamBounds& bounds,
                         const FitConfig& config = {});

}  // namespace servosys
