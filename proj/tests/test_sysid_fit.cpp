#include "servosys/sysid_fit.hpp"

#include <gtest/gtest.h>

#include <numbers>

#include "servosys/errors.hpp"
#include "servosys/presets.hpp"
#include "servosys/testbed.hpp"

namespace servosys {
namespace {

const TrackingGains kGains{6.0, 0.0};

Trace chirp_trace(const ActuatorParams& p, double duration = 10.0) {
  ChirpSpec spec;
  spec.duration = duration;
  return simulate_tracking(gen_chirp(spec), kGains, {}, p);
}

TEST(TrackingError, IdenticalTracesAreZero) {
  const Trace t = chirp_trace(load_preset("XC330"), 1.0);
  EXPECT_EQ(tracking_error(t, t), 0.0);
}

TEST(TrackingError, ConstantOffsetInDegrees) {
  const Trace t = chirp_trace(load_preset("XC330"), 1.0);
  Trace shifted = t;
  for (auto& r : shifted.rows) r.q += 0.1;
  EXPECT_NEAR(tracking_error(t, shifted), 5.7296, 1e-4);
  EXPECT_NEAR(tracking_error(t, shifted), 0.1 * 180.0 / std::numbers::pi, 1e-12);
}

TEST(TrackingError, PerturbedParameterIsVisible) {
  const auto p = load_preset("XC330");
  const Trace ref = chirp_trace(p);
  for (std::size_t i = 0; i < kNumFitParams; ++i) {
    const auto f = static_cast<FitParam>(i);
    // At kp = 6 the motor torque stays under the velocity ceiling below
    // qdot_max and braking never binds, so those parameters are invisible.
    if (f == FitParam::kTauBrake || f == FitParam::kTauMax ||
        f == FitParam::kQdotTauMax || f == FitParam::kTauAtQdotMax) {
      continue;
    }
    ActuatorParams q = p;
    set(q, f, 1.2 * get(p, f));
    if (check_invariants(q)) set(q, f, 0.8 * get(p, f));
    EXPECT_GT(tracking_error(ref, chirp_trace(q)), 0.0) << field_name(f);
  }
}

TEST(TrackingError, StiffGainsExposeTorqueCeiling) {
  const auto p = load_preset("XC330");
  ChirpSpec spec;
  spec.duration = 4.0;
  const auto sp = gen_chirp(spec);
  const TrackingGains stiff{40.0, 0.0};
  const Trace ref = simulate_tracking(sp, stiff, {}, p);
  for (FitParam f : {FitParam::kTauMax, FitParam::kQdotTauMax, FitParam::kTauAtQdotMax}) {
    ActuatorParams q = p;
    set(q, f, 0.8 * get(p, f));
    ASSERT_FALSE(check_invariants(q).has_value()) << field_name(f);
    EXPECT_GT(tracking_error(ref, simulate_tracking(sp, stiff, {}, q)), 0.0) << field_name(f);
  }
}

TEST(TrackingError, LengthMismatch) {
  const Trace a = chirp_trace(load_preset("XC330"), 1.0);
  Trace b = a;
  b.rows.pop_back();
  EXPECT_THROW(tracking_error(a, b), ValidationError);
}

TEST(DefaultBounds, NamedFamily) {
  const ParamBounds b = default_bounds("XC330");
  EXPECT_NEAR(b[FitParam::kDamping].lower, 0.00072, 1e-15);
  EXPECT_NEAR(b[FitParam::kDamping].upper, 0.018, 1e-15);
  EXPECT_TRUE(b[FitParam::kTauMax].contains(0.76));
  EXPECT_TRUE(default_bounds("XM430-W210")[FitParam::kTauMax].contains(1.61));
  EXPECT_NO_THROW(validate(b));
}

TEST(DefaultBounds, HullContainsEveryFamily) {
  const ParamBounds hull = default_bounds(std::nullopt);
  EXPECT_NO_THROW(validate(hull));
  for (const auto& family : preset_families()) {
    EXPECT_TRUE(hull.contains(load_preset(family))) << family;
  }
}

TEST(DefaultBounds, UnknownFamily) {
  EXPECT_THROW(default_bounds("XH540"), ValidationError);
}

TEST(Bounds, ValidationErrors) {
  ParamBounds b = default_bounds("XC330");
  b[FitParam::kArmature] = {0.01, 0.001};
  EXPECT_THROW(validate(b), ValidationError);
  b = default_bounds("XC330");
  b[FitParam::kDamping].lower = -1.0;
  EXPECT_THROW(validate(b), ValidationError);
  b = default_bounds("XC330");
  b[FitParam::kQdotMax] = {0.1, 0.2};
  EXPECT_THROW(validate(b), ValidationError);
}

TEST(FitParameters, ObjectiveIsZeroAtGeneratingParameters) {
  const auto p = load_preset("XC330");
  const Trace ref = chirp_trace(p, 3.0);
  // Degenerate bounds pin every parameter to the truth.
  const ParamBounds pinned = bounds_around(p, 0.0);
  FitConfig cfg;
  cfg.restarts = 1;
  const FitResult r = fit_parameters(ref, kGains, {}, pinned, cfg);
  EXPECT_EQ(r.mae_deg, 0.0);
  EXPECT_EQ(r.params, p);
}

TEST(FitParameters, DeterministicWithinBoundsAndImproving) {
  const auto p = load_preset("2XC430");
  const Trace ref = chirp_trace(p, 3.0);
  const ParamBounds bounds = default_bounds("2XC430");
  FitConfig cfg;
  cfg.restarts = 2;
  cfg.max_iters = 60;
  cfg.seed = 99;
  const FitResult a = fit_parameters(ref, kGains, {}, bounds, cfg);
  const FitResult b = fit_parameters(ref, kGains, {}, bounds, cfg);
  EXPECT_EQ(a.params, b.params);
  EXPECT_EQ(a.mae_deg, b.mae_deg);
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_TRUE(bounds.contains(a.params));
  EXPECT_FALSE(check_invariants(a.params).has_value());
  EXPECT_GE(a.mae_deg, 0.0);
  EXPECT_LE(a.mae_deg, a.start_mae_deg);
  EXPECT_EQ(a.restarts_used, 2);
}

TEST(FitParameters, ThreadedMatchesSequential) {
  const auto p = load_preset("XC430");
  const Trace ref = chirp_trace(p, 2.0);
  FitConfig cfg;
  cfg.restarts = 3;
  cfg.max_iters = 40;
  cfg.threads = 1;
  const FitResult seq = fit_parameters(ref, kGains, {}, default_bounds("XC430"), cfg);
  cfg.threads = 3;
  const FitResult par = fit_parameters(ref, kGains, {}, default_bounds("XC430"), cfg);
  EXPECT_EQ(seq.params, par.params);
  EXPECT_EQ(seq.best_restart, par.best_restart);
}

TEST(FitParameters, RecoversPassiveParametersFromChirp) {
  const auto p = load_preset("XC330");
  const Trace ref = chirp_trace(p);
  FitConfig cfg;
  cfg.seed = 5;
  const FitResult r = fit_parameters(ref, kGains, {}, bounds_around(p, 0.5), cfg);
  EXPECT_LE(r.mae_deg, 0.3);
  EXPECT_NEAR(r.params.damping, p.damping, 0.15 * p.damping);
  EXPECT_NEAR(r.params.friction_loss, p.friction_loss, 0.15 * p.friction_loss);
  EXPECT_NEAR(r.params.armature, p.armature, 0.15 * p.armature);
  EXPECT_EQ(r.params.passive_active_ratio, 3.0);
  EXPECT_EQ(r.params.kp_conversion, 150.0);
}

TEST(FitParameters, RejectsBadInput) {
  Trace empty;
  empty.dt = 1e-3;
  EXPECT_THROW(fit_parameters(empty, kGains, {}, default_bounds("XC330")), ValidationError);
  const Trace ref = chirp_trace(load_preset("XC330"), 0.5);
  ParamBounds bad = default_bounds("XC330");
  bad[FitParam::kTauBrake] = {0.0, 0.1};
  EXPECT_THROW(fit_parameters(ref, kGains, {}, bad), ValidationError);
}

}  // namespace
}  // namespace servosys
