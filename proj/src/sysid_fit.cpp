#include "servosys/sysid_fit.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <random>
#include <thread>

#include "servosys/errors.hpp"
#include "servosys/nelder_mead.hpp"
#include "servosys/presets.hpp"

namespace servosys {

namespace {

constexpr FitParam kAllParams[kNumFitParams] = {
    FitParam::kDamping,     FitParam::kArmature,     FitParam::kFrictionLoss,
    FitParam::kTauMax,      FitParam::kQdotTauMax,   FitParam::kQdotMax,
    FitParam::kTauAtQdotMax, FitParam::kKdMin,       FitParam::kTauBrake,
};

// Objective value for parameter combinations that break the ordering
// invariants; always larger than any attainable tracking error.
constexpr double kInvalidPenalty = 1e4;

double ordering_violation(const ActuatorParams& p) {
  double v = 0.0;
  v += std::max(0.0, p.qdot_tau_max - p.qdot_max);
  if (p.qdot_max == p.qdot_tau_max) v += 1e-9;
  v += std::max(0.0, p.tau_at_qdot_max - p.tau_max);
  v += std::max(0.0, p.tau_max - p.tau_brake);
  return v;
}

// Maps free parameters onto the unit box; log-spaced where the range allows.
class BoxCoding {
 public:
  BoxCoding(const ParamBounds& bounds, const ActuatorParams& base)
      : bounds_(bounds), base_(base) {
    for (FitParam p : kAllParams) {
      const Range& r = bounds_[p];
      if (r.upper > r.lower) free_.push_back(p);
      set(base_, p, r.lower);
    }
  }

  std::size_t dims() const { return free_.size(); }

  ActuatorParams decode(std::span<const double> u) const {
    ActuatorParams out = base_;
    for (std::size_t i = 0; i < free_.size(); ++i) {
      const Range& r = bounds_[free_[i]];
      const double t = std::clamp(u[i], 0.0, 1.0);
      double x = log_scaled(r) ? r.lower * std::pow(r.upper / r.lower, t)
                               : r.lower + t * (r.upper - r.lower);
      set(out, free_[i], std::clamp(x, r.lower, r.upper));
    }
    return out;
  }

  std::vector<double> encode(const ActuatorParams& params) const {
    std::vector<double> u(free_.size());
    for (std::size_t i = 0; i < free_.size(); ++i) {
      const Range& r = bounds_[free_[i]];
      const double x = get(params, free_[i]);
      u[i] = log_scaled(r) ? std::log(x / r.lower) / std::log(r.upper / r.lower)
                           : (x - r.lower) / (r.upper - r.lower);
      u[i] = std::clamp(u[i], 0.0, 1.0);
    }
    return u;
  }

  // Uniform in the physical box, rejecting ordering violations.
  ActuatorParams sample(std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    ActuatorParams p = base_;
    for (int attempt = 0; attempt < 10000; ++attempt) {
      for (FitParam f : free_) {
        const Range& r = bounds_[f];
        set(p, f, r.lower + unit(rng) * (r.upper - r.lower));
      }
      if (ordering_violation(p) == 0.0) return p;
    }
    // The lower corner is valid by construction of validated bounds.
    return base_;
  }

 private:
  static bool log_scaled(const Range& r) {
    return r.lower > 0.0 && r.upper / r.lower > 4.0;
  }

  ParamBounds bounds_;
  ActuatorParams base_;
  std::vector<FitParam> free_;
};

struct RestartOutcome {
  ActuatorParams params;
  double mae = 0.0;
  double start_mae = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

}  // namespace

std::string_view field_name(FitParam p) {
  switch (p) {
    case FitParam::kDamping: return "damping";
    case FitParam::kArmature: return "armature";
    case FitParam::kFrictionLoss: return "friction_loss";
    case FitParam::kTauMax: return "tau_max";
    case FitParam::kQdotTauMax: return "qdot_tau_max";
    case FitParam::kQdotMax: return "qdot_max";
    case FitParam::kTauAtQdotMax: return "tau_at_qdot_max";
    case FitParam::kKdMin: return "kd_min";
    case FitParam::kTauBrake: return "tau_brake";
  }
  return "?";
}

double get(const ActuatorParams& params, FitParam p) {
  switch (p) {
    case FitParam::kDamping: return params.damping;
    case FitParam::kArmature: return params.armature;
    case FitParam::kFrictionLoss: return params.friction_loss;
    case FitParam::kTauMax: return params.tau_max;
    case FitParam::kQdotTauMax: return params.qdot_tau_max;
    case FitParam::kQdotMax: return params.qdot_max;
    case FitParam::kTauAtQdotMax: return params.tau_at_qdot_max;
    case FitParam::kKdMin: return params.kd_min;
    case FitParam::kTauBrake: return params.tau_brake;
  }
  return 0.0;
}

void set(ActuatorParams& params, FitParam p, double value) {
  switch (p) {
    case FitParam::kDamping: params.damping = value; break;
    case FitParam::kArmature: params.armature = value; break;
    case FitParam::kFrictionLoss: params.friction_loss = value; break;
    case FitParam::kTauMax: params.tau_max = value; break;
    case FitParam::kQdotTauMax: params.qdot_tau_max = value; break;
    case FitParam::kQdotMax: params.qdot_max = value; break;
    case FitParam::kTauAtQdotMax: params.tau_at_qdot_max = value; break;
    case FitParam::kKdMin: params.kd_min = value; break;
    case FitParam::kTauBrake: params.tau_brake = value; break;
  }
}

bool ParamBounds::contains(const ActuatorParams& params) const {
  return std::all_of(std::begin(kAllParams), std::end(kAllParams),
                     [&](FitParam p) { return (*this)[p].contains(get(params, p)); });
}

void validate(const ParamBounds& bounds) {
  ActuatorParams lo, hi;
  for (FitParam p : kAllParams) {
    const Range& r = bounds[p];
    const std::string name(field_name(p));
    if (!std::isfinite(r.lower) || !std::isfinite(r.upper)) {
      throw ValidationError("bounds for " + name + " are not finite");
    }
    if (r.lower < 0.0) throw ValidationError("lower bound of " + name + " is negative");
    if (r.lower > r.upper) throw ValidationError("bounds for " + name + " are inverted");
    set(lo, p, r.lower);
    set(hi, p, r.upper);
  }
  if (auto problem = check_invariants(lo)) {
    throw ValidationError("lower bound corner invalid: " + *problem);
  }
  if (auto problem = check_invariants(hi)) {
    throw ValidationError("upper bound corner invalid: " + *problem);
  }
}

ParamBounds default_bounds(std::optional<std::string_view> family) {
  ParamBounds b;
  if (family) {
    const ActuatorParams p = load_preset(*family);
    for (FitParam f : kAllParams) b[f] = {0.2 * get(p, f), 5.0 * get(p, f)};
    return b;
  }
  bool first = true;
  for (const auto& name : preset_families()) {
    const ActuatorParams p = load_preset(name);
    for (FitParam f : kAllParams) {
      const double v = get(p, f);
      Range& r = b[f];
      r.lower = first ? v : std::min(r.lower, v);
      r.upper = first ? v : std::max(r.upper, v);
    }
    first = false;
  }
  for (auto& r : b.ranges) r = {r.lower / 2.0, r.upper * 2.0};
  return b;
}

ParamBounds bounds_around(const ActuatorParams& center, double fraction) {
  if (!(fraction >= 0.0) || fraction >= 1.0) {
    throw ValidationError("bounds fraction must be in [0, 1)");
  }
  ParamBounds b;
  for (FitParam f : kAllParams) {
    const double v = get(center, f);
    b[f] = {(1.0 - fraction) * v, (1.0 + fraction) * v};
  }
  return b;
}

double tracking_error(const Trace& reference, const Trace& simulated) {
  if (reference.rows.size() != simulated.rows.size()) {
    throw ValidationError("tracking_error: trace lengths differ (" +
                          std::to_string(reference.rows.size()) + " vs " +
                          std::to_string(simulated.rows.size()) + ")");
  }
  if (std::abs(reference.dt - simulated.dt) > 1e-12) {
    throw ValidationError("tracking_error: trace dt differs");
  }
  if (reference.rows.empty()) throw ValidationError("tracking_error: empty traces");
  double sum = 0.0;
  for (std::size_t i = 0; i < reference.rows.size(); ++i) {
    sum += std::abs(reference.rows[i].q - simulated.rows[i].q);
  }
  return sum / static_cast<double>(reference.rows.size()) * 180.0 /
         std::numbers::pi;
}

FitResult fit_parameters(const Trace& reference, const TrackingGains& gains,
                         const LoadConfig& load, const ParamBounds& bounds,
                         const FitConfig& config) {
  if (reference.rows.empty()) throw ValidationError("reference trace is empty");
  validate(reference);
  validate(bounds);
  if (config.restarts < 1) throw ValidationError("restarts must be >= 1");
  if (config.max_iters < 1) throw ValidationError("max_iters must be >= 1");

  ActuatorParams base;
  base.passive_active_ratio = config.passive_active_ratio;
  base.kp_conversion = config.kp_conversion;
  const BoxCoding coding(bounds, base);
  const SetpointSeries setpoints = setpoints_of(reference);

  SimOptions sim = config.sim;
  sim.initial = JointState{reference.rows.front().q, reference.rows.front().qdot,
                           reference.rows.front().t};

  auto objective_of = [&](const ActuatorParams& p) {
    if (const double v = ordering_violation(p); v > 0.0) {
      return kInvalidPenalty * (1.0 + v);
    }
    return tracking_error(reference,
                          simulate_tracking(setpoints, gains, load, p, sim));
  };

  std::mt19937_64 rng(config.seed);
  std::vector<ActuatorParams> starts;
  for (int r = 0; r < config.restarts; ++r) starts.push_back(coding.sample(rng));

  auto run_restart = [&](const ActuatorParams& start) {
    RestartOutcome out;
    out.start_mae = objective_of(start);
    out.params = start;
    out.mae = out.start_mae;
    if (coding.dims() == 0) {
      out.converged = true;
      return out;
    }
    const std::vector<double> lo(coding.dims(), 0.0), hi(coding.dims(), 1.0);
    auto f = [&](std::span<const double> u) { return objective_of(coding.decode(u)); };
    std::vector<double> u = coding.encode(start);
    optim::NelderMeadOptions opts;
    opts.max_iterations = config.max_iters;
    opts.max_evaluations = 2 * config.max_iters + 4 * static_cast<int>(coding.dims());
    // Re-seed the simplex around the incumbent until a round stops paying.
    const double steps[] = {0.25, 0.05, 0.01};
    for (double step : steps) {
      opts.initial_step = step;
      const auto res = optim::minimize(f, u, lo, hi, opts);
      out.iterations += res.iterations;
      out.evaluations += res.evaluations;
      out.converged = res.converged;
      if (res.value < out.mae) {
        out.mae = res.value;
        out.params = coding.decode(res.x);
        u = res.x;
      }
      if (out.mae == 0.0) break;
    }
    return out;
  };

  unsigned threads = config.threads ? config.threads : std::thread::hardware_concurrency();
  threads = std::max(1u, threads);
  std::vector<RestartOutcome> outcomes(starts.size());
  if (threads == 1 || starts.size() == 1) {
    for (std::size_t r = 0; r < starts.size(); ++r) outcomes[r] = run_restart(starts[r]);
  } else {
    std::vector<std::future<RestartOutcome>> futures;
    for (std::size_t r = 0; r < starts.size(); ++r) {
      futures.push_back(std::async(std::launch::async, run_restart, std::cref(starts[r])));
    }
    for (std::size_t r = 0; r < starts.size(); ++r) outcomes[r] = futures[r].get();
  }

  FitResult result;
  std::size_t best = 0;
  for (std::size_t r = 0; r < outcomes.size(); ++r) {
    result.iterations += outcomes[r].iterations;
    result.evaluations += outcomes[r].evaluations;
    // Strict comparison: ties go to the lowest restart index.
    if (outcomes[r].mae < outcomes[best].mae) best = r;
  }
  result.params = outcomes[best].params;
  result.mae_deg = outcomes[best].mae;
  result.start_mae_deg = outcomes[best].start_mae;
  result.converged = outcomes[best].converged;
  result.best_restart = static_cast<int>(best);
  result.restarts_used = static_cast<int>(outcomes.size());
  return result;
}

}  // namespace servosys
