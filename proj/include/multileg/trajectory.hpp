#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "multileg/connection.hpp"
#include "multileg/coulomb.hpp"
#include "multileg/gait.hpp"
#include "multileg/support.hpp"

// Per-frame solving, exact SE(2) pose integration, filtering, and the small
// statistics used to compare runs.

namespace multileg {

struct ShapeTrajectory {
  std::vector<ShapeFrame> frames;
  double dt = 0.01;
};

struct FrameLog {
  PoseState pose;                    // pose at the frame's time
  SupportState support_state;
  std::vector<std::size_t> contacts;
  std::vector<double> normal_forces;  // per leg
  BodyVelocity vel;                   // world frame
  std::vector<Vec2> foot_forces;      // per leg, world frame
  bool failed = false;
  std::string error;
};

struct TrajectoryLog {
  std::vector<FrameLog> frames;
  double dt = 0.01;
  std::size_t leg_count = 0;
  int solver_failures = 0;  // frames where even the fallback failed
};

// Build a shape trajectory by sampling a gait generator through the crank
// legs. Times start at 0 with uniform dt.
inline ShapeTrajectory gait_trajectory(const GaitSpec& spec,
                                       const std::vector<LegGeometry>& geometry,
                                       double cycles, double dt) {
  if (!(dt > 0.0)) raise(errc::invalid_argument, "dt must be positive");
  spec.validate(geometry.size());
  const std::size_t n_frames =
      static_cast<std::size_t>(std::llround(cycles / (spec.frequency * dt)));
  ShapeTrajectory traj;
  traj.dt = dt;
  traj.frames.reserve(n_frames);
  for (std::size_t i = 0; i < n_frames; ++i) {
    const double t = static_cast<double>(i) * dt;
    const auto samples = (spec.kind == GaitKind::MetachronalCubic)
                             ? metachronal_cubic(spec, t, geometry.size())
                             : buehler_clock(spec, t, geometry.size());
    ShapeFrame frame;
    frame.time = t;
    frame.q.reserve(geometry.size());
    frame.qdot.reserve(geometry.size());
    for (std::size_t j = 0; j < geometry.size(); ++j) {
      frame.q.push_back(leg_forward_kinematics(geometry[j], samples[j].angle));
      frame.qdot.push_back(
          leg_forward_velocity(geometry[j], samples[j].angle, samples[j].rate));
    }
    traj.frames.push_back(std::move(frame));
  }
  return traj;
}

// Simulate a shape trajectory. Each frame is solved quasi-statically; the
// pose advances by the exact exponential of the constant body twist over dt.
// Height, pitch, and roll are overwritten from the support solution each
// frame. Solver failures keep the previous body twist and are flagged.
inline TrajectoryLog simulate(const RobotModel& robot, const ShapeTrajectory& traj,
                              const FrictionModel& model,
                              const PoseState& initial_pose = {},
                              const HomotopySchedule& sched = default_schedule()) {
  TrajectoryLog log;
  log.dt = traj.dt;
  log.leg_count = robot.leg_count();
  log.frames.reserve(traj.frames.size());

  Vec2 p = initial_pose.p_xy;
  double theta = initial_pose.theta;
  Vec2 u_body{0.0, 0.0};  // carried across failed frames
  double omega = 0.0;
  std::optional<BodyVelocity> hot_start;

  for (const ShapeFrame& frame : traj.frames) {
    FrameLog entry;
    entry.pose.p_xy = p;
    entry.pose.theta = theta;
    try {
      const SupportSolution support = solve_support(robot, frame);
      entry.support_state = support.state;
      entry.contacts = support.contacts;
      entry.normal_forces = support.normal_forces;
      entry.pose.alpha_x = support.state.alpha_x;
      entry.pose.alpha_y = support.state.alpha_y;
      entry.pose.z0 = support.state.z0;

      auto [planar, conn] = solve_planar(robot, frame, support, theta);
      (void)conn;
      if (model.kind == FrictionKind::SmoothedCoulomb) {
        const BodyVelocity init = hot_start ? *hot_start : planar.vel;
        CoulombSolution cs = solve_coulomb(robot, frame, support, theta, init, sched);
        if (!cs.converged && hot_start) {
          // fall back to a fresh start from the linear solution
          cs = solve_coulomb(robot, frame, support, theta, planar.vel, sched);
        }
        if (!cs.converged) raise(errc::no_convergence, "Coulomb homotopy stalled");
        entry.vel = cs.vel;
        entry.foot_forces = cs.foot_forces;
        hot_start = cs.vel;
      } else {
        entry.vel = planar.vel;
        entry.foot_forces = planar.foot_forces;
      }
      const Mat2 Rinv = Mat2::rotation(-theta);
      u_body = Rinv * entry.vel.v_xy;
      omega = entry.vel.omega;
    } catch (const Error& e) {
      entry.failed = true;
      entry.error = e.what();
      entry.normal_forces.assign(robot.leg_count(), 0.0);
      entry.foot_forces.assign(robot.leg_count(), Vec2{0.0, 0.0});
      const Mat2 R = Mat2::rotation(theta);
      entry.vel = {R * u_body, omega};
      ++log.solver_failures;
    }
    log.frames.push_back(std::move(entry));

    const Pose2 step = se2_exp(u_body, omega, traj.dt);
    const Pose2 next = Pose2{p, theta}.compose(step);
    p = next.p;
    theta = next.theta;
  }
  return log;
}

// First-order IIR lowpass, y_n = gamma y_{n-1} + (1 - gamma) x_n, y_0 = x_0.
template <class T>
std::vector<T> lowpass(const std::vector<T>& series, double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0))
    raise(errc::invalid_argument, "gamma must be in [0, 1)");
  std::vector<T> out;
  out.reserve(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (i == 0)
      out.push_back(series[0]);
    else
      out.push_back(out.back() * gamma + series[i] * (1.0 - gamma));
  }
  return out;
}

// Closed-form scale between predicted and measured force magnitudes:
// argmin_c sum (c |Fhat| - |F|)^2 = sum |Fhat||F| / sum |Fhat|^2.
inline double fit_sigma(const std::vector<double>& predicted,
                        const std::vector<double>& measured) {
  if (predicted.size() != measured.size())
    raise(errc::length_mismatch, "fit_sigma input lengths differ");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    num += predicted[i] * measured[i];
    den += predicted[i] * predicted[i];
  }
  if (den == 0.0) raise(errc::degenerate_fit, "all predictions are zero");
  return num / den;
}

// RMSE per channel between two logs of equal length. Velocities are compared
// in the body frame of the reference heading (heading/side split).
struct ErrorStats {
  double v_heading = 0.0;
  double v_side = 0.0;
  double omega = 0.0;
  double alpha_x = 0.0;
  double alpha_y = 0.0;
  std::vector<double> force_x;  // per leg
  std::vector<double> force_y;
  std::vector<double> force_z;
};

inline ErrorStats error_stats(const TrajectoryLog& log, const TrajectoryLog& reference) {
  if (log.frames.size() != reference.frames.size() ||
      log.leg_count != reference.leg_count)
    raise(errc::length_mismatch, "log lengths differ");
  const std::size_t n = log.frames.size();
  const std::size_t legs = log.leg_count;
  ErrorStats st;
  st.force_x.assign(legs, 0.0);
  st.force_y.assign(legs, 0.0);
  st.force_z.assign(legs, 0.0);
  if (n == 0) return st;
  double sh = 0, ss = 0, sw = 0, sax = 0, say = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = log.frames[i];
    const auto& b = reference.frames[i];
    const Mat2 Rinv = Mat2::rotation(-b.pose.theta);
    const Vec2 ua = Rinv * a.vel.v_xy;
    const Vec2 ub = Rinv * b.vel.v_xy;
    sh += (ua.x - ub.x) * (ua.x - ub.x);
    ss += (ua.y - ub.y) * (ua.y - ub.y);
    sw += (a.vel.omega - b.vel.omega) * (a.vel.omega - b.vel.omega);
    sax += (a.pose.alpha_x - b.pose.alpha_x) * (a.pose.alpha_x - b.pose.alpha_x);
    say += (a.pose.alpha_y - b.pose.alpha_y) * (a.pose.alpha_y - b.pose.alpha_y);
    for (std::size_t j = 0; j < legs; ++j) {
      const Vec2 df = a.foot_forces[j] - b.foot_forces[j];
      st.force_x[j] += df.x * df.x;
      st.force_y[j] += df.y * df.y;
      const double dz = a.normal_forces[j] - b.normal_forces[j];
      st.force_z[j] += dz * dz;
    }
  }
  const double inv = 1.0 / static_cast<double>(n);
  st.v_heading = std::sqrt(sh * inv);
  st.v_side = std::sqrt(ss * inv);
  st.omega = std::sqrt(sw * inv);
  st.alpha_x = std::sqrt(sax * inv);
  st.alpha_y = std::sqrt(say * inv);
  for (std::size_t j = 0; j < legs; ++j) {
    st.force_x[j] = std::sqrt(st.force_x[j] * inv);
    st.force_y[j] = std::sqrt(st.force_y[j] * inv);
    st.force_z[j] = std::sqrt(st.force_z[j] * inv);
  }
  return st;
}

}  // namespace multileg
