#pragma once

#include "multileg/math.hpp"
#include "multileg/model.hpp"

// Simplified rigid-body kinematics: planar rotation plus first-order
// pitch/roll shear. Not an exact SE(3) element; the slopes alpha_x, alpha_y
// enter linearly and their rates are taken as zero.

namespace multileg {

// Homogeneous body-to-world transform:
//   [ cos t  -sin t   a_x   p_x ]
//   [ sin t   cos t  -a_y   p_y ]
//   [ -a_x    a_y     1     z0  ]
//   [ 0       0       0     1   ]
inline Mat4 body_transform(const PoseState& pose) {
  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  Mat4 T = Mat4::identity();
  T(0, 0) = c;  T(0, 1) = -s; T(0, 2) = pose.alpha_x;  T(0, 3) = pose.p_xy.x;
  T(1, 0) = s;  T(1, 1) = c;  T(1, 2) = -pose.alpha_y; T(1, 3) = pose.p_xy.y;
  T(2, 0) = -pose.alpha_x;    T(2, 1) = pose.alpha_y;  T(2, 2) = 1.0;
  T(2, 3) = pose.z0;
  return T;
}

// World height of a body-frame point; negative means below ground.
inline double foot_height(double alpha_x, double alpha_y, double z0, Vec3 q) {
  return -alpha_x * q.x + alpha_y * q.y + q.z + z0;
}

inline double foot_height(const PoseState& pose, Vec3 q) {
  return foot_height(pose.alpha_x, pose.alpha_y, pose.z0, q);
}

struct PlanarKinematics {
  Vec2 p_xy;     // world position
  Vec2 pdot_xy;  // world velocity
};

// Planar foot position and velocity. The velocity is the time derivative of
// the transform applied to q with alpha-dot and z0-dot frozen at zero, so it
// is exactly linear in (vel, qdot):
//   p    = R q_xy + p0
//   pdot = omega S R q_xy + R qdot_xy + p0dot + (a_x qdot_z, -a_y qdot_z)
inline PlanarKinematics foot_planar_kinematics(const PoseState& pose,
                                               const BodyVelocity& vel, Vec3 q,
                                               Vec3 qdot) {
  const Mat2 R = Mat2::rotation(pose.theta);
  const Vec2 rq = R * q.xy();
  PlanarKinematics out;
  out.p_xy = rq + pose.p_xy;
  out.pdot_xy = vel.omega * perp(rq) + R * qdot.xy() + vel.v_xy +
                Vec2{pose.alpha_x * qdot.z, -pose.alpha_y * qdot.z};
  return out;
}

}  // namespace multileg
