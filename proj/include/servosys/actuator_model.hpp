#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace servosys {

/// Joints slower than this (rad/s) are treated as resting; applied torque is
/// then deadbanded by the friction loss.
inline constexpr double kStictionVelocity = 1e-4;

/// Largest integration step accepted by step().
inline constexpr double kMaxStepDt = 2e-3;
inline constexpr double kDefaultStepDt = 1e-3;

/**
 * Actuation model of one servo family.
 *
 * The nine fitted quantities describe passive resistance (damping,
 * friction_loss), reflected inertia (armature), the velocity dependent
 * acceleration-torque ceiling (tau_max, qdot_tau_max, qdot_max,
 * tau_at_qdot_max), the powered-on extra damping (kd_min) and the
 * deceleration limit (tau_brake). passive_active_ratio and kp_conversion are
 * measured constants that are never fitted.
 */
struct ActuatorParams {
  double damping = 0.0;          // N*m*s/rad
  double armature = 0.0;         // kg*m^2
  double friction_loss = 0.0;    // N*m
  double tau_max = 0.0;          // N*m
  double qdot_tau_max = 0.0;     // rad/s
  double qdot_max = 0.0;         // rad/s
  double tau_at_qdot_max = 0.0;  // N*m
  double kd_min = 0.0;           // N*m*s/rad
  double tau_brake = 0.0;        // N*m
  double passive_active_ratio = 3.0;
  double kp_conversion = 150.0;

  bool operator==(const ActuatorParams&) const = default;
};

/// Throws ValidationError naming the first offending field.
void validate(const ActuatorParams& params);

/// Returns an explanation of the first violated invariant, if any.
std::optional<std::string> check_invariants(const ActuatorParams& params);

struct JointState {
  double q = 0.0;     // rad
  double qdot = 0.0;  // rad/s
  double t = 0.0;     // s
};

enum class GainUnits { kPhysical, kUnitless };

struct ControlCommand {
  double setpoint = 0.0;
  double kp = 0.0;
  double kd = 0.0;
  bool powered = true;
  // Unitless gains are the servo's register values; kp is divided by
  // ActuatorParams::kp_conversion before use. kd is taken as physical.
  GainUnits units = GainUnits::kPhysical;
};

struct LoadConfig {
  double inertia = 0.0;          // kg*m^2, added to the armature
  double external_torque = 0.0;  // N*m, constant
  // Optional time-indexed torque, added to external_torque.
  std::function<double(double t)> external_torque_profile;
  // Pendulum-style load: gravity_torque_amplitude * sin(q).
  double gravity_torque_amplitude = 0.0;

  double applied_torque(double q, double t) const;
};

/// Physical proportional gain of a command.
double physical_kp(const ControlCommand& cmd, const ActuatorParams& params);

/// Unclamped PD motor torque; zero when the command is unpowered.
double pd_torque(const JointState& state, const ControlCommand& cmd,
                 const ActuatorParams& params);

/// Velocity dependent acceleration-torque ceiling. Even in qdot.
double torque_limit(double qdot, const ActuatorParams& params);

/// Magnitude of the passive resistance tau_f + d*|qdot|, amplified by the
/// passive-active ratio when the joint is back-driven.
double resistance_torque(double qdot, const ActuatorParams& params,
                         bool backdriven);

/// Motor torque after the acceleration / brake clamp, minus resistance
/// opposing the motion. At rest (|qdot| < kStictionVelocity) only the clamp
/// is applied; the stiction deadband is resolved by step().
double net_torque(double tau_m, double qdot, const ActuatorParams& params,
                  bool backdriven = false);

/// Motor torque after the clamp only.
double clamp_motor_torque(double tau_m, double qdot,
                          const ActuatorParams& params);

/// One semi-implicit Euler step. Requires 0 < dt <= kMaxStepDt and a
/// positive total inertia.
JointState step(const JointState& state, const ControlCommand& cmd,
                const LoadConfig& load, double dt,
                const ActuatorParams& params);

struct TraceRow {
  double t = 0.0;
  double setpoint = 0.0;
  double q = 0.0;
  double qdot = 0.0;
  std::optional<double> tau;

  bool operator==(const TraceRow&) const = default;
};

/// Uniformly sampled tracking log. Comment metadata travels with the trace
/// through the text format.
struct Trace {
  double dt = 0.0;
  std::vector<TraceRow> rows;
  std::vector<std::string> comments;

  bool has_tau() const { return !rows.empty() && rows.front().tau.has_value(); }
  std::size_t size() const { return rows.size(); }
};

/// Throws ValidationError when dt, spacing or values are inconsistent.
void validate(const Trace& trace);

/// A setpoint stream with uniform spacing; values[i] is commanded at
/// t0 + i * dt and held until the next sample.
struct SetpointSeries {
  double dt = 0.0;
  double t0 = 0.0;
  std::vector<double> values;
};

SetpointSeries setpoints_of(const Trace& trace);

struct TrackingGains {
  double kp = 0.0;
  double kd = 0.0;
  GainUnits units = GainUnits::kPhysical;
};

struct SimOptions {
  double max_step = kDefaultStepDt;
  // Extra refinement on top of the substeps needed to respect max_step.
  int refine = 1;
  // Defaults to resting at the first setpoint.
  std::optional<JointState> initial;
};

/// Closes the PD loop over a setpoint series. Row i holds the state at
/// t0 + i*dt; the output is bit-reproducible for identical inputs.
Trace simulate_tracking(const SetpointSeries& setpoints,
                        const TrackingGains& gains, const LoadConfig& load,
                        const ActuatorParams& params,
                        const SimOptions& options = {});

}  // namespace servosys
