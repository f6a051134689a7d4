#include "servosys/gait_balance.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "servosys/errors.hpp"

namespace servosys {
namespace {

double distance_to_segment(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = ab.x * ab.x + ab.y * ab.y;
  double t = len2 > 0.0 ? ((p.x - a.x) * ab.x + (p.y - a.y) * ab.y) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const Vec2 q = a + t * ab;
  return std::hypot(p.x - q.x, p.y - q.y);
}

void expect_lipm_consistent(const ZmpReference& zmp, const ComTrajectory& com) {
  const double w2 = kGravity / com.z_com;
  for (std::size_t i = 0; i < com.t.size(); ++i) {
    EXPECT_LE(std::abs(com.acc[i].x - w2 * (com.pos[i].x - zmp.zmp[i].x)), 1e-6);
    EXPECT_LE(std::abs(com.acc[i].y - w2 * (com.pos[i].y - zmp.zmp[i].y)), 1e-6);
    EXPECT_LE(std::abs(com.pos[i].x - com.acc[i].x / w2 - zmp.zmp[i].x), 1e-6);
    EXPECT_LE(std::abs(com.pos[i].y - com.acc[i].y / w2 - zmp.zmp[i].y), 1e-6);
  }
}

TEST(PlanFootsteps, MarchingInPlace) {
  const auto plan = plan_footsteps({}, 6, 0.5, 0.08);
  for (std::size_t k = 0; k < plan.steps.size(); ++k) {
    const auto& s = plan.steps[k];
    EXPECT_EQ(s.foot, k % 2 == 0 ? Foot::kLeft : Foot::kRight);
    EXPECT_NEAR(s.position.x, 0.0, 1e-15);
    EXPECT_NEAR(s.position.y, k % 2 == 0 ? 0.04 : -0.04, 1e-15);
    EXPECT_DOUBLE_EQ(s.touchdown, 0.5 * k);
  }
  EXPECT_EQ(plan.initial.foot, Foot::kRight);
  EXPECT_NO_THROW(validate(plan));
}

TEST(PlanFootsteps, ForwardSpacing) {
  const auto plan = plan_footsteps({0.1, 0.0, 0.0}, 4, 0.5, 0.08);
  for (std::size_t k = 1; k < plan.steps.size(); ++k) {
    EXPECT_NEAR(plan.steps[k].position.x - plan.steps[k - 1].position.x, 0.05, 1e-15);
  }
}

TEST(PlanFootsteps, TurningHeadingsIncrease) {
  const auto plan = plan_footsteps({0.0, 0.0, 0.3}, 5, 0.5, 0.08);
  for (std::size_t k = 1; k < plan.steps.size(); ++k) {
    EXPECT_GT(plan.steps[k].heading, plan.steps[k - 1].heading);
  }
}

TEST(PlanFootsteps, RejectsBadInput) {
  EXPECT_THROW(plan_footsteps({}, 1), ValidationError);
  EXPECT_THROW(plan_footsteps({}, 4, 0.0), ValidationError);
  EXPECT_THROW(plan_footsteps({}, 4, 0.5, 0.08, 0.7), ValidationError);
}

TEST(ZmpReference, MarchingAlternatesBetweenFeet) {
  const auto plan = plan_footsteps({}, 4, 0.5, 0.08, 0.2);
  const auto zmp = zmp_reference(plan, 0.01);
  // Single support of step 1 (right foot) spans [0.6, 1.0).
  EXPECT_NEAR(zmp.zmp[80].y, -0.04, 1e-15);
  // Single support of step 2 (left foot) spans [1.1, 1.5).
  EXPECT_NEAR(zmp.zmp[130].y, 0.04, 1e-15);
  // Midpoint of the double support between step 1 and step 2.
  EXPECT_NEAR(zmp.zmp[105].y, 0.0, 1e-12);
}

TEST(ZmpReference, InsideSupportRegion) {
  for (const WalkCommand cmd : {WalkCommand{}, WalkCommand{0.1, 0.0, 0.0},
                                WalkCommand{0.05, 0.03, 0.2}}) {
    const auto plan = plan_footsteps(cmd, 6, 0.5, 0.08, 0.2);
    const auto zmp = zmp_reference(plan, 0.005);
    const double ds = 0.2 * 0.5;
    for (std::size_t i = 0; i < zmp.t.size(); ++i) {
      const double t = zmp.t[i];
      auto k = static_cast<std::size_t>(std::floor(t / 0.5 + 1e-12));
      k = std::min(k, plan.steps.size() - 1);
      const double tau = t - 0.5 * static_cast<double>(k);
      const Vec2 stance = plan.steps[k].position;
      const Vec2 prev = k == 0 ? plan.initial.position : plan.steps[k - 1].position;
      if (tau < ds - 1e-12) {
        EXPECT_LE(distance_to_segment(zmp.zmp[i], prev, stance), 1e-12);
      } else {
        EXPECT_LE(std::hypot(zmp.zmp[i].x - stance.x, zmp.zmp[i].y - stance.y), 1e-12);
      }
    }
  }
}

TEST(ComTrajectory, EquilibriumAtOrigin) {
  const auto zmp = zmp_from_samples(0.01, std::vector<Vec2>(101));
  const auto com = com_trajectory(zmp, 0.22);
  for (std::size_t i = 0; i < com.t.size(); ++i) {
    EXPECT_NEAR(com.pos[i].x, 0.0, 1e-15);
    EXPECT_NEAR(com.vel[i].y, 0.0, 1e-15);
  }
}

TEST(ComTrajectory, FixedPointAtConstantOffset) {
  const Vec2 p0{0.03, -0.02};
  const auto zmp = zmp_from_samples(0.01, std::vector<Vec2>(51, p0));
  const auto com = com_trajectory(zmp, 0.22);
  for (std::size_t i = 0; i < com.t.size(); ++i) {
    EXPECT_NEAR(com.pos[i].x, p0.x, 1e-15);
    EXPECT_NEAR(com.pos[i].y, p0.y, 1e-15);
    EXPECT_NEAR(com.acc[i].x, 0.0, 1e-13);
  }
}

TEST(ComTrajectory, LipmResidualAndReconstruction) {
  for (const WalkCommand cmd : {WalkCommand{}, WalkCommand{0.1, 0.0, 0.0},
                                WalkCommand{0.0, 0.05, 0.0}, WalkCommand{0.08, 0.0, 0.4}}) {
    const auto zmp = zmp_reference(plan_footsteps(cmd, 8), 0.005);
    expect_lipm_consistent(zmp, com_trajectory(zmp, 0.22));
  }
}

TEST(ComTrajectory, ContinuousAcrossSegmentBoundaries) {
  const auto plan = plan_footsteps({0.1, 0.0, 0.1}, 6);
  ZmpReference zmp = zmp_reference(plan, 0.01);
  // Sample just either side of each knot.
  ZmpReference probe = zmp;
  probe.t.clear();
  probe.zmp.clear();
  const double eps = 1e-12;
  for (std::size_t j = 1; j < zmp.segments.size(); ++j) {
    const double knot = zmp.segments[j].t0;
    probe.t.push_back(knot - eps);
    probe.t.push_back(knot);
  }
  probe.zmp.assign(probe.t.size(), Vec2{});
  const auto com = com_trajectory(probe, 0.22);
  for (std::size_t i = 0; i + 1 < com.t.size(); i += 2) {
    EXPECT_NEAR(com.pos[i].x, com.pos[i + 1].x, 1e-9);
    EXPECT_NEAR(com.pos[i].y, com.pos[i + 1].y, 1e-9);
    EXPECT_NEAR(com.vel[i].x, com.vel[i + 1].x, 1e-9);
    EXPECT_NEAR(com.vel[i].y, com.vel[i + 1].y, 1e-9);
  }
}

TEST(ComTrajectory, MarchingMatchesFiniteDifferenceOracle) {
  const double h = 5e-4;
  const auto plan = plan_footsteps({}, 4, 0.5, 0.08, 0.2);
  const auto zmp = zmp_reference(plan, h);
  const auto com = com_trajectory(zmp, 0.22);
  // One period: drop the duplicated end sample.
  std::vector<double> py(zmp.zmp.size() - 1);
  for (std::size_t i = 0; i < py.size(); ++i) py[i] = zmp.zmp[i].y;
  const auto oracle = testing::periodic_lipm_fd(py, h, kGravity / 0.22);
  double worst = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < py.size(); ++i) {
    worst = std::max(worst, std::abs(oracle[i] - com.pos[i].y));
    peak = std::max(peak, std::abs(com.pos[i].y));
    EXPECT_NEAR(com.pos[i].x, 0.0, 1e-12);
  }
  EXPECT_LE(worst, 1e-4);
  EXPECT_GT(peak, 0.005);
  // Symmetric about the midline: half a cycle later the sway is mirrored.
  const std::size_t half = static_cast<std::size_t>(std::llround(0.5 / h));
  for (std::size_t i = 0; i + half < com.t.size(); i += 37) {
    EXPECT_NEAR(com.pos[i].y, -com.pos[i + half].y, 1e-9);
  }
  // Periodic with the two-step cycle.
  EXPECT_NEAR(com.pos.front().y, com.pos.back().y, 1e-9);
  EXPECT_NEAR(com.vel.front().y, com.vel.back().y, 1e-9);
}

TEST(ComTrajectory, RejectsBadHeight) {
  const auto zmp = zmp_from_samples(0.01, std::vector<Vec2>(3));
  EXPECT_THROW(com_trajectory(zmp, 0.0), ValidationError);
}

TEST(PhaseSignal, Examples) {
  const auto a = phase_signal(0.0, 1.0);
  EXPECT_EQ(a.sin_phi, 0.0);
  EXPECT_EQ(a.cos_phi, 1.0);
  const auto b = phase_signal(0.25, 1.0);
  EXPECT_NEAR(b.sin_phi, 1.0, 1e-15);
  EXPECT_NEAR(b.cos_phi, 0.0, 1e-15);
  const auto c = phase_signal(0.3, 0.8);
  const auto d = phase_signal(1.1, 0.8);
  EXPECT_NEAR(c.sin_phi, d.sin_phi, 1e-12);
  EXPECT_NEAR(c.cos_phi, d.cos_phi, 1e-12);
  for (double t = -3.0; t < 3.0; t += 0.0137) {
    const auto p = phase_signal(t, 0.7);
    EXPECT_NEAR(p.sin_phi * p.sin_phi + p.cos_phi * p.cos_phi, 1.0, 1e-15);
  }
  EXPECT_THROW(phase_signal(0.0, 0.0), ValidationError);
}

TEST(BalancePd, ComLayer) {
  BalanceGains g;
  g.com_kp = 10.0;
  const Vec2 zero = com_pd({}, {}, g);
  EXPECT_EQ(zero.x, 0.0);
  EXPECT_EQ(zero.y, 0.0);
  const Vec2 c = com_pd({0.02, 0.0}, {}, g);
  EXPECT_DOUBLE_EQ(c.x, -0.2);
  EXPECT_EQ(c.y, 0.0);
  for (double a = 0.0; a < 2.0 * std::numbers::pi; a += 0.3) {
    const Vec2 off{std::cos(a) * 0.01, std::sin(a) * 0.01};
    const Vec2 u = com_pd(off, {0.5, -0.2}, g);
    EXPECT_LT(u.x * off.x + u.y * off.y, 0.0);
  }
}

TEST(BalancePd, TorsoLayer) {
  BalanceGains g;
  g.pitch_kp = 2.0;
  EXPECT_EQ(torso_pitch_pd(0.0, 0.0, g), 0.0);
  EXPECT_DOUBLE_EQ(torso_pitch_pd(0.1, 0.0, g), -0.2);
  EXPECT_GT(torso_pitch_pd(-0.05, 0.0, g), 0.0);
  g.pitch_kd = -1.0;
  EXPECT_THROW(torso_pitch_pd(0.1, 0.0, g), ValidationError);
}

}  // namespace
}  // namespace servosys
