#pragma once

#include <cstdint>
#include <vector>

#include "servosys/actuator_model.hpp"

namespace servosys {

/// Default torque-sensor noise (N*m), the stated precision of the test stand.
inline constexpr double kSensorNoiseStd = 3e-4;

struct BackdriveSample {
  double omega = 0.0;       // rad/s, > 0
  double tau_resist = 0.0;  // N*m
};

struct SpindownTrace {
  double dt = 0.0;
  std::vector<double> omega;  // omega[0] is the speed at power cut
  // Set when the run hit the duration cap before coming to rest.
  bool capped = false;
};

struct ChirpSpec {
  double f0 = 0.2;  // Hz
  double f1 = 4.0;  // Hz
  double amplitude = 0.5;  // rad
  double offset = 0.0;     // rad
  double duration = 10.0;  // s
  double dt = 1e-3;        // s
};

void validate(const ChirpSpec& spec);

/// Linear sweep offset + A*sin(2*pi*(f0*t + (f1-f0)*t^2/(2*T))), sampled at
/// t = i*dt for i = 0..round(T/dt).
SetpointSeries gen_chirp(const ChirpSpec& spec);

/// Instantaneous sweep frequency in Hz.
double chirp_frequency(const ChirpSpec& spec, double t);

/// Eight log-spaced speeds in [0.5, 0.9*qdot_max].
std::vector<double> default_backdrive_speeds(const ActuatorParams& params);

/// Powered-off constant-speed backdrive with additive Gaussian sensor noise.
std::vector<BackdriveSample> run_backdrive(const ActuatorParams& params,
                                           const std::vector<double>& omegas,
                                           double noise_std,
                                           std::uint64_t seed);

struct FrictionFit {
  double friction_loss = 0.0;
  double damping = 0.0;
  // The free intercept came out negative; the line was refit through zero.
  bool intercept_clamped = false;
};

/// Least-squares line tau = tau_f + d*omega.
FrictionFit fit_friction_damping(const std::vector<BackdriveSample>& samples);

/// Cuts power at omega0 and logs the passive spin-down until rest or until
/// max_duration elapses.
SpindownTrace run_spindown(const ActuatorParams& params, double omega0,
                           double dt = kDefaultStepDt,
                           double max_duration = 60.0);

/// Armature from the energy dissipated during spin-down,
/// I = 2/omega0^2 * integral(tau_f*|omega| + d*omega^2) dt.
double estimate_armature(const SpindownTrace& trace, double friction_loss,
                         double damping);

}  // namespace servosys
