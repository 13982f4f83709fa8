#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "multileg/error.hpp"
#include "multileg/math.hpp"

namespace multileg {

// One leg: vertical spring stiffness, friction coefficient, and an optional
// enhanced-traction direction in the body frame (zero vector = isotropic).
struct LegParam {
  double stiffness = 1.0;
  double mu = 1.0;
  Vec2 traction_dir{0.0, 0.0};
};

// Fixed physical description of the robot. Forces are normalized so the
// total weight is usually 1; only the products K*length and mu*Fz matter.
class RobotModel {
 public:
  RobotModel(std::vector<LegParam> legs, double weight)
      : legs_(std::move(legs)), weight_(weight) {
    if (legs_.empty()) raise(errc::invalid_argument, "robot needs at least one leg");
    if (!(weight_ > 0.0)) raise(errc::invalid_argument, "weight must be positive");
    for (const auto& l : legs_) {
      if (!(l.stiffness > 0.0))
        raise(errc::invalid_argument, "leg stiffness must be positive");
      if (!(l.mu >= 0.0)) raise(errc::invalid_argument, "leg mu must be non-negative");
    }
  }

  const std::vector<LegParam>& legs() const { return legs_; }
  const LegParam& leg(std::size_t j) const { return legs_[j]; }
  std::size_t leg_count() const { return legs_.size(); }
  double weight() const { return weight_; }

 private:
  std::vector<LegParam> legs_;
  double weight_;
};

// Body-frame foot positions and velocities at one instant.
struct ShapeFrame {
  double time = 0.0;
  std::vector<Vec3> q;     // foot positions, body frame
  std::vector<Vec3> qdot;  // foot velocities, body frame
};

inline void check_frame(const RobotModel& robot, const ShapeFrame& frame) {
  if (frame.q.size() != robot.leg_count() || frame.qdot.size() != robot.leg_count())
    raise(errc::invalid_argument, "frame leg count does not match robot");
  // NaN/Inf propagate through the sums, so one finiteness test covers all;
  // separate per-component accumulators keep the loop out of a single
  // floating-point dependency chain
  double px = 0.0, py = 0.0, pz = 0.0;
  for (const auto& v : frame.q) {
    px += v.x;
    py += v.y;
    pz += v.z;
  }
  for (const auto& v : frame.qdot) {
    px += v.x;
    py += v.y;
    pz += v.z;
  }
  const double probe = px + py + pz;
  if (!std::isfinite(probe)) {
    for (const auto& v : frame.q)
      if (!std::isfinite(v.x) || !std::isfinite(v.y) || !std::isfinite(v.z))
        raise(errc::invalid_argument, "non-finite foot position");
    for (const auto& v : frame.qdot)
      if (!std::isfinite(v.x) || !std::isfinite(v.y) || !std::isfinite(v.z))
        raise(errc::invalid_argument, "non-finite foot velocity");
    // sum overflowed on finite input: nothing actually wrong
  }
}

// Pitch/roll slopes, height, heading, and planar position of the body frame.
// The slopes enter the kinematics to first order only.
struct PoseState {
  double alpha_x = 0.0;
  double alpha_y = 0.0;
  double z0 = 0.0;
  double theta = 0.0;
  Vec2 p_xy{0.0, 0.0};
};

struct BodyVelocity {
  Vec2 v_xy{0.0, 0.0};  // world frame
  double omega = 0.0;
};

}  // namespace multileg
