#include "servosys/gait_balance.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "servosys/errors.hpp"

namespace servosys {

namespace {

Vec2 rotate(double heading, Vec2 v) {
  const double c = std::cos(heading), s = std::sin(heading);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

// Divergence guard on the hyperbolic coefficients, in metres.
constexpr double kMaxDeviation = 100.0;

std::size_t segment_index(const std::vector<ZmpSegment>& segs, double t) {
  const auto it = std::upper_bound(segs.begin(), segs.end(), t,
                                   [](double v, const ZmpSegment& s) { return v < s.t0; });
  if (it == segs.begin()) return 0;
  return static_cast<std::size_t>(it - segs.begin()) - 1;
}

struct AxisSolution {
  std::vector<double> alpha;  // decaying-exponential weights
  std::vector<double> beta;   // growing-exponential weights, normalized at t1
};

// Per segment j with length L and slope b, x - p = a*exp(-w*tau) +
// c*exp(w*(tau - L)); both basis functions are bounded by 1 on the segment,
// which keeps the linear system well conditioned over long plans.
AxisSolution solve_axis(const std::vector<ZmpSegment>& segs, double omega,
                        double (*coord)(const Vec2&)) {
  const std::size_t m = segs.size();
  const auto n = static_cast<Eigen::Index>(2 * m);
  std::vector<double> len(m), slope(m), decay(m);
  for (std::size_t j = 0; j < m; ++j) {
    len[j] = segs[j].t1 - segs[j].t0;
    slope[j] = (coord(segs[j].p1) - coord(segs[j].p0)) / len[j];
    decay[j] = std::exp(-omega * len[j]);
  }

  std::vector<Eigen::Triplet<double>> entries;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  auto a = [](std::size_t j) { return static_cast<Eigen::Index>(2 * j); };
  auto c = [](std::size_t j) { return static_cast<Eigen::Index>(2 * j + 1); };

  // Rows 2j, 2j+1 join segment j to segment j+1 (cyclically for the last):
  // deviation jumps by the ZMP discontinuity; velocity jumps by the slope change.
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t k = (j + 1) % m;
    const auto r0 = static_cast<Eigen::Index>(2 * j);
    const auto r1 = r0 + 1;
    entries.emplace_back(r0, a(j), decay[j]);
    entries.emplace_back(r0, c(j), 1.0);
    entries.emplace_back(r0, a(k), -1.0);
    entries.emplace_back(r0, c(k), -decay[k]);
    // The wrap row compares deviations, so the ZMP offset does not enter.
    rhs(r0) = (k == 0) ? 0.0 : coord(segs[k].p0) - coord(segs[j].p1);

    entries.emplace_back(r1, a(j), -omega * decay[j]);
    entries.emplace_back(r1, c(j), omega);
    entries.emplace_back(r1, a(k), omega);
    entries.emplace_back(r1, c(k), -omega * decay[k]);
    rhs(r1) = slope[k] - slope[j];
  }

  Eigen::SparseMatrix<double> mat(n, n);
  mat.setFromTriplets(entries.begin(), entries.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(mat);
  if (lu.info() != Eigen::Success) {
    throw ValidationError("com_trajectory: boundary system is singular");
  }
  const Eigen::VectorXd sol = lu.solve(rhs);
  if (lu.info() != Eigen::Success) {
    throw ValidationError("com_trajectory: boundary solve failed");
  }

  AxisSolution out;
  out.alpha.resize(m);
  out.beta.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    out.alpha[j] = sol(a(j));
    out.beta[j] = sol(c(j));
    if (!std::isfinite(out.alpha[j]) || !std::isfinite(out.beta[j]) ||
        std::abs(out.alpha[j]) > kMaxDeviation || std::abs(out.beta[j]) > kMaxDeviation) {
      throw ValidationError("com_trajectory: divergent boundary solution");
    }
  }
  return out;
}

double coord_x(const Vec2& v) { return v.x; }
double coord_y(const Vec2& v) { return v.y; }

}  // namespace

FootstepPlan plan_footsteps(const WalkCommand& cmd, int n_steps, double step_duration,
                            double stance_width, double double_support_fraction) {
  if (n_steps < 2) throw ValidationError("plan_footsteps: need at least 2 steps");
  if (!(step_duration > 0.0)) throw ValidationError("plan_footsteps: step_duration must be > 0");
  if (!(stance_width >= 0.0)) throw ValidationError("plan_footsteps: stance_width must be >= 0");
  if (!(double_support_fraction >= 0.0 && double_support_fraction <= 0.5)) {
    throw ValidationError("plan_footsteps: double support fraction must be in [0, 0.5]");
  }
  const Vec2 v{cmd.vx, cmd.vy};
  auto foot_at = [&](Vec2 body, double heading, Foot foot, double t) {
    const double side = foot == Foot::kLeft ? 0.5 : -0.5;
    return Footstep{foot, body + rotate(heading, Vec2{0.0, side * stance_width}), heading, t};
  };

  FootstepPlan plan;
  plan.step_duration = step_duration;
  plan.double_support_fraction = double_support_fraction;
  const double h_prev = -cmd.wz * step_duration;
  plan.initial = foot_at(-step_duration * rotate(h_prev, v), h_prev, Foot::kRight,
                         -step_duration);

  Vec2 body;
  for (int k = 0; k < n_steps; ++k) {
    const double heading = cmd.wz * step_duration * k;
    const Foot foot = (k % 2 == 0) ? Foot::kLeft : Foot::kRight;
    plan.steps.push_back(foot_at(body, heading, foot, step_duration * k));
    body = body + step_duration * rotate(heading, v);
  }
  return plan;
}

void validate(const FootstepPlan& plan) {
  if (plan.steps.empty()) throw ValidationError("footstep plan is empty");
  if (!(plan.step_duration > 0.0)) throw ValidationError("step_duration must be > 0");
  if (!(plan.double_support_fraction >= 0.0 && plan.double_support_fraction <= 0.5)) {
    throw ValidationError("double support fraction must be in [0, 0.5]");
  }
  const Footstep* prev = &plan.initial;
  for (const auto& s : plan.steps) {
    if (!(s.touchdown > prev->touchdown)) {
      throw ValidationError("touchdown times must be strictly increasing");
    }
    if (s.foot == prev->foot) throw ValidationError("footsteps must alternate feet");
    prev = &s;
  }
}

Vec2 ZmpSegment::at(double t) const {
  if (t1 <= t0) return p1;
  const double w = std::clamp((t - t0) / (t1 - t0), 0.0, 1.0);
  return (1.0 - w) * p0 + w * p1;
}

ZmpReference zmp_reference(const FootstepPlan& plan, double dt) {
  validate(plan);
  if (!(dt > 0.0)) throw ValidationError("zmp_reference: dt must be > 0");
  const double period = plan.step_duration;
  const double ds = plan.double_support_fraction * period;

  ZmpReference ref;
  ref.dt = dt;
  const double start = plan.steps.front().touchdown;
  for (std::size_t k = 0; k < plan.steps.size(); ++k) {
    const double t0 = start + period * static_cast<double>(k);
    const Vec2 from = (k == 0 ? plan.initial : plan.steps[k - 1]).position;
    const Vec2 to = plan.steps[k].position;
    if (ds > 0.0) ref.segments.push_back({t0, t0 + ds, from, to});
    ref.segments.push_back({t0 + ds, t0 + period, to, to});
  }

  const double end = ref.segments.back().t1;
  const auto n = static_cast<std::size_t>(std::llround((end - start) / dt));
  ref.t.reserve(n + 1);
  ref.zmp.reserve(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const double t = std::min(start + static_cast<double>(i) * dt, end);
    ref.t.push_back(t);
    ref.zmp.push_back(ref.segments[segment_index(ref.segments, t)].at(t));
  }
  return ref;
}

ZmpReference zmp_from_samples(double dt, std::vector<Vec2> points, double t0) {
  if (!(dt > 0.0)) throw ValidationError("zmp_from_samples: dt must be > 0");
  if (points.size() < 2) throw ValidationError("zmp_from_samples: need two samples");
  ZmpReference ref;
  ref.dt = dt;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double t = t0 + static_cast<double>(i) * dt;
    ref.t.push_back(t);
    if (i + 1 < points.size()) ref.segments.push_back({t, t + dt, points[i], points[i + 1]});
  }
  ref.zmp = std::move(points);
  return ref;
}

ComTrajectory com_trajectory(const ZmpReference& zmp, double z_com) {
  if (!(z_com > 0.0)) throw ValidationError("com_trajectory: z_com must be > 0");
  if (zmp.t.empty() || zmp.segments.empty()) {
    throw ValidationError("com_trajectory: empty ZMP reference");
  }
  for (const auto& s : zmp.segments) {
    if (!(s.t1 > s.t0)) throw ValidationError("com_trajectory: degenerate ZMP segment");
  }
  const double omega = std::sqrt(kGravity / z_com);
  const double omega2 = omega * omega;
  const AxisSolution sx = solve_axis(zmp.segments, omega, coord_x);
  const AxisSolution sy = solve_axis(zmp.segments, omega, coord_y);

  ComTrajectory out;
  out.dt = zmp.dt;
  out.z_com = z_com;
  out.t = zmp.t;
  const std::size_t n = zmp.t.size();
  out.pos.resize(n);
  out.vel.resize(n);
  out.acc.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = zmp.t[i];
    const std::size_t j = segment_index(zmp.segments, t);
    const ZmpSegment& seg = zmp.segments[j];
    const double len = seg.t1 - seg.t0;
    const double tau = t - seg.t0;
    const double grow = std::exp(omega * (tau - len));
    const double fall = std::exp(-omega * tau);
    const Vec2 p = seg.at(t);
    const Vec2 slope = (1.0 / len) * (seg.p1 - seg.p0);
    const Vec2 dev{sx.alpha[j] * fall + sx.beta[j] * grow,
                   sy.alpha[j] * fall + sy.beta[j] * grow};
    const Vec2 ddev{omega * (-sx.alpha[j] * fall + sx.beta[j] * grow),
                    omega * (-sy.alpha[j] * fall + sy.beta[j] * grow)};
    out.pos[i] = p + dev;
    out.vel[i] = slope + ddev;
    out.acc[i] = omega2 * dev;
  }
  return out;
}

PhaseSignal phase_signal(double t, double period) {
  if (!(period > 0.0)) throw ValidationError("phase_signal: period must be > 0");
  const double phi = 2.0 * std::numbers::pi * std::fmod(t, period) / period;
  return {std::sin(phi), std::cos(phi)};
}

void validate(const BalanceGains& g) {
  if (!(g.com_kp >= 0.0 && g.com_kd >= 0.0 && g.pitch_kp >= 0.0 && g.pitch_kd >= 0.0)) {
    throw ValidationError("balance gains must be >= 0");
  }
}

Vec2 com_pd(Vec2 com_offset, Vec2 com_vel, const BalanceGains& gains) {
  validate(gains);
  return {-gains.com_kp * com_offset.x - gains.com_kd * com_vel.x,
          -gains.com_kp * com_offset.y - gains.com_kd * com_vel.y};
}

double torso_pitch_pd(double pitch, double pitch_rate, const BalanceGains& gains) {
  validate(gains);
  return -gains.pitch_kp * pitch - gains.pitch_kd * pitch_rate;
}

}  // namespace servosys
