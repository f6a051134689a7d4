#pragma once

#include <vector>

#include "servosys/metrics.hpp"

namespace servosys {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  bool operator==(const Vec2&) const = default;
};

enum class Foot { kLeft, kRight };

struct Footstep {
  Foot foot = Foot::kLeft;
  Vec2 position;          // m, foot center
  double heading = 0.0;   // rad
  double touchdown = 0.0; // s
};

struct FootstepPlan {
  // Placement of the trailing foot before the first step.
  Footstep initial;
  std::vector<Footstep> steps;
  double step_duration = 0.5;
  double double_support_fraction = 0.2;
};

struct WalkCommand {
  double vx = 0.0;  // m/s, body frame
  double vy = 0.0;  // m/s, body frame
  double wz = 0.0;  // rad/s
};

struct GaitDefaults {
  static constexpr double kComHeight = 0.22;
  static constexpr double kStepDuration = 0.5;
  static constexpr double kDoubleSupportFraction = 0.2;
  static constexpr double kStanceWidth = 0.08;
};

/// Alternating steps (left first) that advance the body by v*step_duration
/// per step while integrating the heading from wz.
FootstepPlan plan_footsteps(const WalkCommand& cmd, int n_steps,
                            double step_duration = GaitDefaults::kStepDuration,
                            double stance_width = GaitDefaults::kStanceWidth,
                            double double_support_fraction =
                                GaitDefaults::kDoubleSupportFraction);

void validate(const FootstepPlan& plan);

/// One linear piece of the ZMP path.
struct ZmpSegment {
  double t0 = 0.0;
  double t1 = 0.0;
  Vec2 p0;
  Vec2 p1;

  Vec2 at(double t) const;
};

struct ZmpReference {
  double dt = 0.0;
  std::vector<double> t;
  std::vector<Vec2> zmp;
  // Exact piecewise-linear definition the samples were drawn from.
  std::vector<ZmpSegment> segments;
};

/// ZMP at the stance foot during single support, moving linearly from the
/// previous foot during double support.
ZmpReference zmp_reference(const FootstepPlan& plan, double dt);

/// Reference whose segments join consecutive samples.
ZmpReference zmp_from_samples(double dt, std::vector<Vec2> points, double t0 = 0.0);

struct ComTrajectory {
  double dt = 0.0;
  double z_com = 0.0;
  std::vector<double> t;
  std::vector<Vec2> pos;
  std::vector<Vec2> vel;
  std::vector<Vec2> acc;
};

/// Closed-form linear inverted pendulum solution x'' = (g/z)(x - p) over the
/// ZMP segments, with cyclic boundary conditions: the deviation x - p and the
/// velocity at the end equal those at the start. Throws ValidationError when
/// the boundary problem diverges.
ComTrajectory com_trajectory(const ZmpReference& zmp, double z_com);

struct PhaseSignal {
  double sin_phi = 0.0;
  double cos_phi = 1.0;
};

/// Gait phase 2*pi*(t mod period)/period encoded as (sin, cos).
PhaseSignal phase_signal(double t, double period);

struct BalanceGains {
  double com_kp = 0.0;
  double com_kd = 0.0;
  double pitch_kp = 0.0;
  double pitch_kd = 0.0;
};

void validate(const BalanceGains& gains);

/// CoM layer: restoring command toward the support polygon center.
Vec2 com_pd(Vec2 com_offset, Vec2 com_vel, const BalanceGains& gains);

/// Torso layer: hip-pitch correction keeping the torso upright.
double torso_pitch_pd(double pitch, double pitch_rate, const BalanceGains& gains);

}  // namespace servosys
