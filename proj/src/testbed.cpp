#include "servosys/testbed.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "servosys/errors.hpp"

namespace servosys {

void validate(const ChirpSpec& spec) {
  if (!(spec.f0 > 0.0) || !(spec.f1 > 0.0)) {
    throw ValidationError("chirp frequencies must be > 0");
  }
  if (!(spec.duration > 0.0)) throw ValidationError("chirp duration must be > 0");
  if (!(spec.dt > 0.0)) throw ValidationError("chirp dt must be > 0");
  if (!std::isfinite(spec.amplitude) || !std::isfinite(spec.offset)) {
    throw ValidationError("chirp amplitude and offset must be finite");
  }
  if (!(spec.f1 * spec.dt < 0.5) || !(spec.f0 * spec.dt < 0.5)) {
    throw ValidationError("chirp violates Nyquist: f*dt must be < 0.5");
  }
}

double chirp_frequency(const ChirpSpec& spec, double t) {
  return spec.f0 + (spec.f1 - spec.f0) * t / spec.duration;
}

SetpointSeries gen_chirp(const ChirpSpec& spec) {
  validate(spec);
  const auto n = static_cast<std::size_t>(std::llround(spec.duration / spec.dt)) + 1;
  const double sweep = (spec.f1 - spec.f0) / (2.0 * spec.duration);
  SetpointSeries out;
  out.dt = spec.dt;
  out.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * spec.dt;
    const double phase = 2.0 * std::numbers::pi * (spec.f0 * t + sweep * t * t);
    out.values[i] = spec.offset + spec.amplitude * std::sin(phase);
  }
  return out;
}

std::vector<double> default_backdrive_speeds(const ActuatorParams& params) {
  constexpr int kCount = 8;
  const double lo = 0.5;
  const double hi = 0.9 * params.qdot_max;
  if (!(hi > lo)) throw ValidationError("qdot_max too small for the speed grid");
  std::vector<double> speeds(kCount);
  for (int i = 0; i < kCount; ++i) {
    speeds[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (kCount - 1));
  }
  return speeds;
}

std::vector<BackdriveSample> run_backdrive(const ActuatorParams& params,
                                           const std::vector<double>& omegas,
                                           double noise_std,
                                           std::uint64_t seed) {
  if (noise_std < 0.0) throw ValidationError("noise_std must be >= 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<BackdriveSample> out;
  out.reserve(omegas.size());
  for (double omega : omegas) {
    if (!(omega > kStictionVelocity) || !std::isfinite(omega)) {
      throw ValidationError("backdrive speeds must exceed the stiction threshold");
    }
    double tau = resistance_torque(omega, params, /*backdriven=*/false);
    if (noise_std > 0.0) tau += noise_std * noise(rng);
    out.push_back({omega, tau});
  }
  return out;
}

FrictionFit fit_friction_damping(const std::vector<BackdriveSample>& samples) {
  if (samples.size() < 2) {
    throw ValidationError("friction fit needs at least two samples");
  }
  const double n = static_cast<double>(samples.size());
  double mean_w = 0.0, mean_t = 0.0;
  for (const auto& s : samples) {
    mean_w += s.omega;
    mean_t += s.tau_resist;
  }
  mean_w /= n;
  mean_t /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& s : samples) {
    sxx += (s.omega - mean_w) * (s.omega - mean_w);
    sxy += (s.omega - mean_w) * (s.tau_resist - mean_t);
  }
  if (!(sxx > 1e-12 * mean_w * mean_w * n) || !(sxx > 0.0)) {
    throw ValidationError("friction fit needs distinct speeds");
  }
  FrictionFit fit;
  fit.damping = sxy / sxx;
  fit.friction_loss = mean_t - fit.damping * mean_w;
  if (fit.friction_loss < 0.0) {
    double sww = 0.0, swt = 0.0;
    for (const auto& s : samples) {
      sww += s.omega * s.omega;
      swt += s.omega * s.tau_resist;
    }
    fit.friction_loss = 0.0;
    fit.damping = swt / sww;
    fit.intercept_clamped = true;
  }
  return fit;
}

SpindownTrace run_spindown(const ActuatorParams& params, double omega0,
                           double dt, double max_duration) {
  if (!(omega0 > 0.0)) throw ValidationError("spin-down omega0 must be > 0");
  if (!(max_duration > 0.0)) throw ValidationError("max_duration must be > 0");
  ControlCommand off;
  off.powered = false;
  const LoadConfig free_shaft;
  const auto max_steps = static_cast<std::size_t>(std::ceil(max_duration / dt));

  SpindownTrace trace;
  trace.dt = dt;
  JointState state{0.0, omega0, 0.0};
  trace.omega.push_back(omega0);
  for (std::size_t k = 0; k < max_steps; ++k) {
    state = step(state, off, free_shaft, dt, params);
    trace.omega.push_back(state.qdot);
    if (state.qdot == 0.0) return trace;
  }
  trace.capped = true;
  return trace;
}

double estimate_armature(const SpindownTrace& trace, double friction_loss,
                         double damping) {
  if (trace.omega.size() < 2) {
    throw ValidationError("spin-down trace needs at least two samples");
  }
  if (!(trace.dt > 0.0)) throw ValidationError("spin-down dt must be > 0");
  const double omega0 = trace.omega.front();
  if (!(std::abs(omega0) > 0.0)) {
    throw ValidationError("spin-down omega0 must be nonzero");
  }
  auto power = [&](double w) {
    return friction_loss * std::abs(w) + damping * w * w;
  };
  double energy = 0.0;
  for (std::size_t k = 1; k < trace.omega.size(); ++k) {
    energy += 0.5 * trace.dt * (power(trace.omega[k - 1]) + power(trace.omega[k]));
  }
  return 2.0 * energy / (omega0 * omega0);
}

}  // namespace servosys
