#include "servosys/actuator_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "servosys/errors.hpp"

namespace servosys {

namespace {

bool finite(double x) { return std::isfinite(x); }

void require_finite(double x, const char* what) {
  if (!finite(x)) {
    throw ValidationError(std::string("non-finite ") + what);
  }
}

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// PD torque without input checks, for the integration loop.
double pd_torque_fast(const JointState& state, const ControlCommand& cmd,
                      const ActuatorParams& params) {
  if (!cmd.powered) return 0.0;
  return physical_kp(cmd, params) * (cmd.setpoint - state.q) -
         (params.kd_min + cmd.kd) * state.qdot;
}

// Caller guarantees positive inertia and dt in range.
JointState step_unchecked(const JointState& state, const ControlCommand& cmd,
                          const LoadConfig& load, double dt,
                          const ActuatorParams& params, double inv_inertia) {
  const double tau_m = pd_torque_fast(state, cmd, params);
  const double tau_ext = load.applied_torque(state.q, state.t);

  double qdot_next;
  if (std::abs(state.qdot) < kStictionVelocity) {
    const double applied = clamp_motor_torque(tau_m, 0.0, params) + tau_ext;
    if (std::abs(applied) <= params.friction_loss) {
      return {state.q, 0.0, state.t + dt};
    }
    const double accel =
        (applied - std::copysign(params.friction_loss, applied)) * inv_inertia;
    qdot_next = state.qdot + accel * dt;
  } else {
    const bool backdriven = cmd.powered && tau_m * state.qdot < 0.0;
    const double total =
        net_torque(tau_m, state.qdot, params, backdriven) + tau_ext;
    qdot_next = state.qdot + total * inv_inertia * dt;
    // A velocity reversal lands on rest; breakaway is decided next step.
    if (qdot_next * state.qdot < 0.0) qdot_next = 0.0;
  }
  return {state.q + qdot_next * dt, qdot_next, state.t + dt};
}

}  // namespace

std::optional<std::string> check_invariants(const ActuatorParams& p) {
  const std::pair<const char*, double> fields[] = {
      {"damping", p.damping},
      {"armature", p.armature},
      {"friction_loss", p.friction_loss},
      {"tau_max", p.tau_max},
      {"qdot_tau_max", p.qdot_tau_max},
      {"qdot_max", p.qdot_max},
      {"tau_at_qdot_max", p.tau_at_qdot_max},
      {"kd_min", p.kd_min},
      {"tau_brake", p.tau_brake},
      {"passive_active_ratio", p.passive_active_ratio},
      {"kp_conversion", p.kp_conversion},
  };
  for (const auto& [name, value] : fields) {
    if (!finite(value)) return std::string(name) + " is not finite";
    if (value < 0.0) return std::string(name) + " must be >= 0";
  }
  if (!(p.qdot_tau_max > 0.0)) return std::string("qdot_tau_max must be > 0");
  if (!(p.qdot_max > p.qdot_tau_max)) {
    return std::string("qdot_max must exceed qdot_tau_max");
  }
  if (p.tau_at_qdot_max > p.tau_max) {
    return std::string("tau_at_qdot_max must not exceed tau_max");
  }
  if (p.tau_brake < p.tau_max) {
    return std::string("tau_brake must be >= tau_max");
  }
  if (p.passive_active_ratio < 1.0) {
    return std::string("passive_active_ratio must be >= 1");
  }
  return std::nullopt;
}

void validate(const ActuatorParams& params) {
  if (auto problem = check_invariants(params)) {
    throw ValidationError("invalid actuator parameters: " + *problem);
  }
}

double LoadConfig::applied_torque(double q, double t) const {
  double tau = external_torque;
  if (external_torque_profile) tau += external_torque_profile(t);
  if (gravity_torque_amplitude != 0.0) {
    tau += gravity_torque_amplitude * std::sin(q);
  }
  return tau;
}

double physical_kp(const ControlCommand& cmd, const ActuatorParams& params) {
  if (cmd.units == GainUnits::kUnitless) return cmd.kp / params.kp_conversion;
  return cmd.kp;
}

double pd_torque(const JointState& state, const ControlCommand& cmd,
                 const ActuatorParams& params) {
  if (!cmd.powered) return 0.0;
  require_finite(state.q, "joint position");
  require_finite(state.qdot, "joint velocity");
  require_finite(cmd.setpoint, "setpoint");
  require_finite(cmd.kp, "kp");
  require_finite(cmd.kd, "kd");
  const double kp = physical_kp(cmd, params);
  return kp * (cmd.setpoint - state.q) - (params.kd_min + cmd.kd) * state.qdot;
}

double torque_limit(double qdot, const ActuatorParams& params) {
  require_finite(qdot, "joint velocity");
  const double speed = std::abs(qdot);
  if (speed <= params.qdot_tau_max) return params.tau_max;
  if (speed > params.qdot_max) return 0.0;
  // Written as a convex blend so both anchors are reproduced exactly.
  const double w =
      (speed - params.qdot_tau_max) / (params.qdot_max - params.qdot_tau_max);
  return (1.0 - w) * params.tau_max + w * params.tau_at_qdot_max;
}

double resistance_torque(double qdot, const ActuatorParams& params,
                         bool backdriven) {
  const double tau_r = params.friction_loss + params.damping * std::abs(qdot);
  return backdriven ? params.passive_active_ratio * tau_r : tau_r;
}

double clamp_motor_torque(double tau_m, double qdot,
                          const ActuatorParams& params) {
  const double limit = torque_limit(qdot, params);
  if (std::abs(qdot) < kStictionVelocity) {
    return std::clamp(tau_m, -limit, limit);
  }
  if (qdot > 0.0) return std::clamp(tau_m, -params.tau_brake, limit);
  return std::clamp(tau_m, -limit, params.tau_brake);
}

double net_torque(double tau_m, double qdot, const ActuatorParams& params,
                  bool backdriven) {
  const double motor = clamp_motor_torque(tau_m, qdot, params);
  if (std::abs(qdot) < kStictionVelocity) return motor;
  return motor - sign(qdot) * resistance_torque(qdot, params, backdriven);
}

JointState step(const JointState& state, const ControlCommand& cmd,
                const LoadConfig& load, double dt,
                const ActuatorParams& params) {
  if (!(dt > 0.0) || dt > kMaxStepDt) {
    std::ostringstream msg;
    msg << "step dt must be in (0, " << kMaxStepDt << "], got " << dt;
    throw ValidationError(msg.str());
  }
  if (load.inertia < 0.0) throw ValidationError("load inertia must be >= 0");
  const double inertia = params.armature + load.inertia;
  if (!(inertia > 0.0)) throw ValidationError("total inertia must be > 0");
  require_finite(state.t, "time");
  return step_unchecked(state, cmd, load, dt, params, 1.0 / inertia);
}

void validate(const Trace& trace) {
  if (!(trace.dt > 0.0) || !finite(trace.dt)) {
    throw ValidationError("trace dt must be > 0");
  }
  const bool tau = trace.has_tau();
  for (std::size_t i = 0; i < trace.rows.size(); ++i) {
    const auto& r = trace.rows[i];
    if (!finite(r.t) || !finite(r.setpoint) || !finite(r.q) ||
        !finite(r.qdot)) {
      throw ValidationError("non-finite value in trace row " +
                            std::to_string(i));
    }
    if (r.tau.has_value() != tau) {
      throw ValidationError("inconsistent tau column at row " +
                            std::to_string(i));
    }
    if (i > 0 && !(r.t > trace.rows[i - 1].t)) {
      throw ValidationError("trace time not strictly increasing at row " +
                            std::to_string(i));
    }
  }
}

SetpointSeries setpoints_of(const Trace& trace) {
  SetpointSeries s;
  s.dt = trace.dt;
  s.t0 = trace.rows.empty() ? 0.0 : trace.rows.front().t;
  s.values.reserve(trace.rows.size());
  for (const auto& r : trace.rows) s.values.push_back(r.setpoint);
  return s;
}

Trace simulate_tracking(const SetpointSeries& setpoints,
                        const TrackingGains& gains, const LoadConfig& load,
                        const ActuatorParams& params,
                        const SimOptions& options) {
  if (setpoints.values.empty()) {
    throw ValidationError("setpoint series is empty");
  }
  if (!(setpoints.dt > 0.0) || !finite(setpoints.dt)) {
    throw ValidationError("setpoint dt must be > 0");
  }
  if (!(options.max_step > 0.0) || options.max_step > kMaxStepDt) {
    throw ValidationError("simulation max_step must be in (0, 2 ms]");
  }
  if (options.refine < 1) throw ValidationError("refine must be >= 1");
  if (gains.kp < 0.0 || gains.kd < 0.0) {
    throw ValidationError("gains must be >= 0");
  }
  if (load.inertia < 0.0) throw ValidationError("load inertia must be >= 0");
  const double inertia = params.armature + load.inertia;
  if (!(inertia > 0.0)) throw ValidationError("total inertia must be > 0");
  for (double v : setpoints.values) require_finite(v, "setpoint");

  const double inv_inertia = 1.0 / inertia;
  const int substeps =
      static_cast<int>(std::ceil(setpoints.dt / options.max_step - 1e-9)) *
      options.refine;
  const double h = setpoints.dt / substeps;

  JointState state = options.initial.value_or(
      JointState{setpoints.values.front(), 0.0, setpoints.t0});
  state.t = setpoints.t0;

  ControlCommand cmd;
  cmd.kp = gains.kp;
  cmd.kd = gains.kd;
  cmd.units = gains.units;

  Trace out;
  out.dt = setpoints.dt;
  out.rows.reserve(setpoints.values.size());
  auto record = [&](double setpoint) {
    cmd.setpoint = setpoint;
    const double tau = clamp_motor_torque(pd_torque_fast(state, cmd, params),
                                          state.qdot, params);
    out.rows.push_back({state.t, setpoint, state.q, state.qdot, tau});
  };
  record(setpoints.values.front());
  for (std::size_t i = 1; i < setpoints.values.size(); ++i) {
    cmd.setpoint = setpoints.values[i - 1];
    for (int s = 0; s < substeps; ++s) {
      state = step_unchecked(state, cmd, load, h, params, inv_inertia);
    }
    if (!finite(state.q) || !finite(state.qdot)) {
      throw ValidationError("simulation diverged at sample " + std::to_string(i));
    }
    state.t = setpoints.t0 + static_cast<double>(i) * setpoints.dt;
    record(setpoints.values[i]);
  }
  return out;
}

}  // namespace servosys
