#include "servosys/cli.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "servosys/errors.hpp"
#include "servosys/gait_balance.hpp"
#include "servosys/metrics.hpp"
#include "servosys/param_io.hpp"
#include "servosys/presets.hpp"
#include "servosys/sysid_fit.hpp"
#include "servosys/testbed.hpp"
#include "servosys/trace_io.hpp"

namespace servosys {

namespace {

using nlohmann::json;

// Physical gains used when logging chirp traces, absent other instructions.
constexpr double kDefaultLogKp = 6.0;
constexpr double kDefaultLogKd = 0.0;

std::vector<double> parse_list(const std::string& text, std::size_t expected,
                               const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError(flag + ": bad number '" + item + "'");
    }
  }
  if (expected && out.size() != expected) {
    throw ValidationError(flag + " expects " + std::to_string(expected) +
                          " comma-separated values");
  }
  return out;
}

json params_json(const ActuatorParams& p) {
  json j = json::object();
  for (std::size_t i = 0; i < kNumFitParams; ++i) {
    const auto f = static_cast<FitParam>(i);
    j[std::string(field_name(f))] = get(p, f);
  }
  return j;
}

double metadata_number(const Trace& trace, const char* key, double fallback) {
  if (auto v = metadata(trace.comments, key)) {
    try {
      return std::stod(*v);
    } catch (const std::exception&) {
      throw ValidationError(std::string("trace metadata '") + key + "' is not a number");
    }
  }
  return fallback;
}

struct SimulateArgs {
  std::string params;
  std::string chirp = "0.2,4,0.5,10";
  double dt = 1e-3;
  std::string out;
  double kp = kDefaultLogKp;
  double kd = kDefaultLogKd;
  bool unitless = false;
  double load_inertia = 0.0;
  double noise_std = 0.0;
  std::uint64_t seed = 0;
};

json cmd_simulate(const SimulateArgs& a) {
  const ParamFile pf = read_params(a.params);
  const auto c = parse_list(a.chirp, 4, "--chirp");
  ChirpSpec spec;
  spec.f0 = c[0];
  spec.f1 = c[1];
  spec.amplitude = c[2];
  spec.duration = c[3];
  spec.dt = a.dt;
  if (a.noise_std < 0.0) throw ValidationError("--noise-std must be >= 0");

  const TrackingGains gains{a.kp, a.kd, a.unitless ? GainUnits::kUnitless : GainUnits::kPhysical};
  LoadConfig load;
  load.inertia = a.load_inertia;
  Trace trace = simulate_tracking(gen_chirp(spec), gains, load, pf.params);
  if (a.noise_std > 0.0) {
    std::mt19937_64 rng(a.seed);
    std::normal_distribution<double> noise(0.0, a.noise_std);
    for (auto& r : trace.rows) r.q += noise(rng);
  }
  trace.comments = {"servosys simulate"};
  set_metadata(trace.comments, "family", pf.family);
  set_metadata(trace.comments, "chirp", a.chirp);
  set_metadata(trace.comments, "kp", format_double(a.kp));
  set_metadata(trace.comments, "kd", format_double(a.kd));
  set_metadata(trace.comments, "gain_units", a.unitless ? "unitless" : "physical");
  set_metadata(trace.comments, "load_inertia", format_double(a.load_inertia));
  set_metadata(trace.comments, "noise_std", format_double(a.noise_std));
  set_metadata(trace.comments, "seed", std::to_string(a.seed));
  write_trace(trace, a.out);
  return {{"command", "simulate"}, {"family", pf.family}, {"rows", trace.rows.size()},
          {"dt", trace.dt}, {"out", a.out}};
}

struct BackdriveArgs {
  std::string params;
  std::uint64_t seed = 0;
  std::string out;
  double noise_std = kSensorNoiseStd;
  std::string speeds;
};

json cmd_backdrive(const BackdriveArgs& a) {
  const ParamFile pf = read_params(a.params);
  const std::vector<double> speeds =
      a.speeds.empty() ? default_backdrive_speeds(pf.params) : parse_list(a.speeds, 0, "--speeds");
  const auto samples = run_backdrive(pf.params, speeds, a.noise_std, a.seed);
  const FrictionFit fit = fit_friction_damping(samples);
  Table table;
  table.comments = {"servosys testbed backdrive"};
  set_metadata(table.comments, "family", pf.family);
  set_metadata(table.comments, "noise_std", format_double(a.noise_std));
  set_metadata(table.comments, "seed", std::to_string(a.seed));
  table.columns = {"omega", "tau_resist"};
  for (const auto& s : samples) table.rows.push_back({s.omega, s.tau_resist});
  write_table(table, a.out);
  return {{"command", "testbed backdrive"}, {"family", pf.family},
          {"samples", samples.size()}, {"friction_loss", fit.friction_loss},
          {"damping", fit.damping}, {"intercept_clamped", fit.intercept_clamped},
          {"out", a.out}};
}

struct SpindownArgs {
  std::string params;
  std::uint64_t seed = 0;
  std::string out;
  double omega0 = 10.0;
  double dt = kDefaultStepDt;
  double noise_std = 0.0;
};

json cmd_spindown(const SpindownArgs& a) {
  const ParamFile pf = read_params(a.params);
  if (a.noise_std < 0.0) throw ValidationError("--noise-std must be >= 0");
  SpindownTrace trace = run_spindown(pf.params, a.omega0, a.dt);
  if (a.noise_std > 0.0) {
    std::mt19937_64 rng(a.seed);
    std::normal_distribution<double> noise(0.0, a.noise_std);
    for (auto& w : trace.omega) w += noise(rng);
  }
  const double armature =
      estimate_armature(trace, pf.params.friction_loss, pf.params.damping);
  Table table;
  table.comments = {"servosys testbed spindown"};
  set_metadata(table.comments, "family", pf.family);
  set_metadata(table.comments, "dt", format_double(a.dt));
  set_metadata(table.comments, "seed", std::to_string(a.seed));
  table.columns = {"t", "omega"};
  for (std::size_t k = 0; k < trace.omega.size(); ++k) {
    table.rows.push_back({a.dt * static_cast<double>(k), trace.omega[k]});
  }
  write_table(table, a.out);
  return {{"command", "testbed spindown"}, {"family", pf.family},
          {"samples", trace.omega.size()},
          {"time_to_rest", a.dt * static_cast<double>(trace.omega.size() - 1)},
          {"capped", trace.capped}, {"armature_estimate", armature},
          {"armature_true", pf.params.armature}, {"out", a.out}};
}

struct FitArgs {
  std::string trace;
  std::string bounds;
  std::string family;
  int restarts = 8;
  std::uint64_t seed = 0;
  std::string out;
  int max_iters = FitConfig{}.max_iters;
  std::optional<double> kp;
  std::optional<double> kd;
  std::optional<double> load_inertia;
  unsigned threads = 0;
};

json cmd_fit(const FitArgs& a) {
  const Trace reference = read_trace(a.trace);
  ParamBounds bounds;
  if (!a.bounds.empty()) {
    bounds = read_bounds(a.bounds);
  } else if (!a.family.empty()) {
    bounds = default_bounds(a.family);
  } else {
    bounds = default_bounds(std::nullopt);
  }
  TrackingGains gains;
  gains.kp = a.kp.value_or(metadata_number(reference, "kp", kDefaultLogKp));
  gains.kd = a.kd.value_or(metadata_number(reference, "kd", kDefaultLogKd));
  if (auto units = metadata(reference.comments, "gain_units"); units && *units == "unitless") {
    gains.units = GainUnits::kUnitless;
  }
  LoadConfig load;
  load.inertia = a.load_inertia.value_or(metadata_number(reference, "load_inertia", 0.0));

  FitConfig config;
  config.restarts = a.restarts;
  config.seed = a.seed;
  config.max_iters = a.max_iters;
  config.threads = a.threads;
  const FitResult res = fit_parameters(reference, gains, load, bounds, config);

  ParamFile pf;
  pf.family = !a.family.empty() ? a.family
                                : metadata(reference.comments, "family").value_or("fitted");
  pf.params = res.params;
  write_params(pf, a.out);
  return {{"command", "fit"}, {"mae_deg", res.mae_deg}, {"iterations", res.iterations},
          {"evaluations", res.evaluations}, {"restarts", res.restarts_used},
          {"best_restart", res.best_restart}, {"converged", res.converged},
          {"params", params_json(res.params)}, {"out", a.out}};
}

struct PowerFactorArgs {
  std::string inventory;
  bool include_end_effectors = false;
};

json cmd_power_factor(const PowerFactorArgs& a) {
  const std::filesystem::path path =
      a.inventory.empty() ? preset_dir() / "toddlerbot_inventory.json"
                          : std::filesystem::path(a.inventory);
  const TorqueInventory inv = read_inventory(path);
  const PowerFactorSplit s = power_factor_split(inv, a.include_end_effectors);
  return {{"command", "metrics power-factor"},
          {"total_torque", total_torque(inv, a.include_end_effectors)},
          {"height", inv.height}, {"mass", inv.mass},
          {"power_factor_upper", s.upper}, {"power_factor_lower", s.lower},
          {"power_factor", s.total}};
}

struct ScaleArgs {
  std::string robot;
  std::string human;
  double tau = 0.0;
};

json cmd_scale(const ScaleArgs& a) {
  const auto r = parse_list(a.robot, 2, "--robot");
  const auto h = parse_list(a.human, 2, "--human");
  return {{"command", "metrics scale-torque"},
          {"tau_robot", scale_torque(r[0], r[1], h[0], h[1], a.tau)}};
}

struct DeflectionArgs {
  double load = 0.0;
  double modulus = 0.0;
  double length = 0.0;
};

json cmd_deflection(const DeflectionArgs& a) {
  return {{"command", "metrics deflection"},
          {"relative_deflection", relative_deflection(a.load, a.modulus, a.length)}};
}

struct GaitArgs {
  double vx = 0.0, vy = 0.0, wz = 0.0;
  int steps = 4;
  std::string out;
  double step_duration = GaitDefaults::kStepDuration;
  double stance_width = GaitDefaults::kStanceWidth;
  double ds_fraction = GaitDefaults::kDoubleSupportFraction;
  double z_com = GaitDefaults::kComHeight;
  double dt = 0.01;
};

json cmd_gait(const GaitArgs& a) {
  const FootstepPlan plan = plan_footsteps({a.vx, a.vy, a.wz}, a.steps, a.step_duration,
                                           a.stance_width, a.ds_fraction);
  const ZmpReference zmp = zmp_reference(plan, a.dt);
  const ComTrajectory com = com_trajectory(zmp, a.z_com);
  const double omega2 = kGravity / a.z_com;
  const double cycle = 2.0 * a.step_duration;

  Table table;
  table.comments = {"servosys gait"};
  set_metadata(table.comments, "dt", format_double(a.dt));
  set_metadata(table.comments, "z_com", format_double(a.z_com));
  set_metadata(table.comments, "step_duration", format_double(a.step_duration));
  set_metadata(table.comments, "command",
               format_double(a.vx) + "," + format_double(a.vy) + "," + format_double(a.wz));
  table.columns = {"t",     "zmp_x", "zmp_y", "com_x",     "com_y",    "vel_x",
                   "vel_y", "acc_x", "acc_y", "phase_sin", "phase_cos"};
  double residual = 0.0;
  for (std::size_t i = 0; i < com.t.size(); ++i) {
    const PhaseSignal ph = phase_signal(com.t[i], cycle);
    table.rows.push_back({com.t[i], zmp.zmp[i].x, zmp.zmp[i].y, com.pos[i].x, com.pos[i].y,
                          com.vel[i].x, com.vel[i].y, com.acc[i].x, com.acc[i].y, ph.sin_phi,
                          ph.cos_phi});
    residual = std::max({residual,
                         std::abs(com.acc[i].x - omega2 * (com.pos[i].x - zmp.zmp[i].x)),
                         std::abs(com.acc[i].y - omega2 * (com.pos[i].y - zmp.zmp[i].y))});
  }
  write_table(table, a.out);
  return {{"command", "gait"}, {"rows", com.t.size()}, {"steps", plan.steps.size()},
          {"max_lipm_residual", residual}, {"out", a.out}};
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Servo actuator simulation and system identification", "servosys"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate PD tracking of a chirp");
  simulate->add_option("--params", sim.params, "Parameter file")->required();
  simulate->add_option("--chirp", sim.chirp, "f0,f1,amplitude,duration");
  simulate->add_option("--dt", sim.dt, "Sample interval (s)");
  simulate->add_option("--out", sim.out, "Output trace file")->required();
  simulate->add_option("--kp", sim.kp, "Proportional gain");
  simulate->add_option("--kd", sim.kd, "Derivative gain");
  simulate->add_flag("--unitless-gains", sim.unitless, "Gains are servo register values");
  simulate->add_option("--load-inertia", sim.load_inertia, "Load inertia (kg*m^2)");
  simulate->add_option("--noise-std", sim.noise_std, "Position measurement noise (rad)");
  simulate->add_option("--seed", sim.seed, "Noise seed");

  auto* testbed = app.add_subcommand("testbed", "Simulated motor test-bed experiments");
  testbed->require_subcommand(1);
  BackdriveArgs bd;
  auto* backdrive = testbed->add_subcommand("backdrive", "Constant-speed backdrive sweep");
  backdrive->add_option("--params", bd.params)->required();
  backdrive->add_option("--seed", bd.seed);
  backdrive->add_option("--out", bd.out)->required();
  backdrive->add_option("--noise-std", bd.noise_std, "Torque sensor noise (N*m)");
  backdrive->add_option("--speeds", bd.speeds, "Comma-separated speeds (rad/s)");
  SpindownArgs sd;
  auto* spindown = testbed->add_subcommand("spindown", "Unpowered spin-down");
  spindown->add_option("--params", sd.params)->required();
  spindown->add_option("--seed", sd.seed);
  spindown->add_option("--out", sd.out)->required();
  spindown->add_option("--omega0", sd.omega0, "Initial speed (rad/s)");
  spindown->add_option("--dt", sd.dt, "Integration step (s)");
  spindown->add_option("--noise-std", sd.noise_std, "Speed measurement noise (rad/s)");

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "Fit actuation parameters to a tracking trace");
  fit->add_option("--trace", fa.trace)->required();
  auto* bounds_opt = fit->add_option("--bounds", fa.bounds, "Bounds file");
  fit->add_option("--family", fa.family, "Bundled family for default bounds")
      ->excludes(bounds_opt);
  fit->add_option("--restarts", fa.restarts);
  fit->add_option("--seed", fa.seed);
  fit->add_option("--out", fa.out)->required();
  fit->add_option("--max-iters", fa.max_iters);
  fit->add_option("--kp", fa.kp);
  fit->add_option("--kd", fa.kd);
  fit->add_option("--load-inertia", fa.load_inertia);
  fit->add_option("--threads", fa.threads);

  auto* metrics = app.add_subcommand("metrics", "Humanoid capability metrics");
  metrics->require_subcommand(1);
  PowerFactorArgs pfa;
  auto* pf = metrics->add_subcommand("power-factor", "Power factor of a torque inventory");
  pf->add_option("--inventory", pfa.inventory, "Inventory file (default: bundled)");
  pf->add_flag("--include-end-effectors", pfa.include_end_effectors);
  ScaleArgs sa;
  auto* scale = metrics->add_subcommand("scale-torque", "Scale a human joint torque");
  scale->add_option("--robot", sa.robot, "height,mass")->required();
  scale->add_option("--human", sa.human, "height,mass")->required();
  scale->add_option("--tau", sa.tau, "Human torque (N*m)")->required();
  DeflectionArgs da;
  auto* defl = metrics->add_subcommand("deflection", "Relative beam deflection");
  defl->add_option("--load", da.load)->required();
  defl->add_option("--modulus", da.modulus)->required();
  defl->add_option("--length", da.length)->required();

  GaitArgs ga;
  auto* gait = app.add_subcommand("gait", "ZMP reference and CoM trajectory");
  gait->add_option("--vx", ga.vx);
  gait->add_option("--vy", ga.vy);
  gait->add_option("--wz", ga.wz);
  gait->add_option("--steps", ga.steps);
  gait->add_option("--out", ga.out)->required();
  gait->add_option("--step-duration", ga.step_duration);
  gait->add_option("--stance-width", ga.stance_width);
  gait->add_option("--ds-fraction", ga.ds_fraction);
  gait->add_option("--z-com", ga.z_com);
  gait->add_option("--dt", ga.dt);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n\n" << app.help();
    return kExitValidation;
  }

  try {
    json summary;
    if (*simulate) {
      summary = cmd_simulate(sim);
    } else if (*backdrive) {
      summary = cmd_backdrive(bd);
    } else if (*spindown) {
      summary = cmd_spindown(sd);
    } else if (*fit) {
      summary = cmd_fit(fa);
    } else if (*pf) {
      summary = cmd_power_factor(pfa);
    } else if (*scale) {
      summary = cmd_scale(sa);
    } else if (*defl) {
      summary = cmd_deflection(da);
    } else if (*gait) {
      summary = cmd_gait(ga);
    }
    out << summary.dump() << "\n";
    return kExitOk;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "io error: " << e.what() << "\n";
    return kExitIo;
  }
}

}  // namespace servosys
