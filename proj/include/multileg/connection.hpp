#pragma once

#include <cstddef>
#include <vector>

#include "multileg/friction.hpp"
#include "multileg/math.hpp"
#include "multileg/support.hpp"

// Planar force/moment balance under the viscous-Coulomb ansatz. With the
// contact Jacobian J_k = [I2 | S q_k] mapping the body twist (u, omega) to a
// foot's body-frame velocity, the balance sum_k J_k^T H_k (J_k x + qdot_k) = 0
// is a symmetric 3x3 linear system; its solution is linear in the shape
// velocity, which is exactly the local connection.

namespace multileg {

struct PlanarSolution {
  BodyVelocity vel;                 // world-frame p0dot and omega
  std::vector<Vec2> foot_forces;    // per leg, world frame, zero off contact
  Vec3 balance_residual{0, 0, 0};   // net (Fx, Fy, Mz) at the solution
};

// Per-leg connection blocks: u_body = sum A_xy[k] qdot_xy[k],
// omega = -sum A_theta[k] . qdot_xy[k]. Zero blocks off contact.
struct ConnectionMatrices {
  std::vector<Mat2> A_xy;
  std::vector<Vec2> A_theta;
};

struct BalanceSystem {
  Mat3 A;                      // sum J^T H J
  std::vector<Mat3> rhs_blocks;  // per contact: [H; (Sq)^T H] as 3x2 in cols 0,1
};

namespace detail {

// Accumulate J^T H into a 3x2 block (stored in the first two columns).
inline Mat3 jt_h_block(const Mat2& H, Vec2 q) {
  const Vec2 sq = perp(q);
  Mat3 B = Mat3::zero();
  B(0, 0) = H.a00; B(0, 1) = H.a01;
  B(1, 0) = H.a10; B(1, 1) = H.a11;
  B(2, 0) = sq.x * H.a00 + sq.y * H.a10;
  B(2, 1) = sq.x * H.a01 + sq.y * H.a11;
  return B;
}

}  // namespace detail

// Assemble the body-frame balance operator and per-contact RHS blocks from
// body-frame traction matrices and contact positions.
inline BalanceSystem assemble_balance(const std::vector<Mat2>& H_q,
                                      const std::vector<Vec2>& q_xy) {
  BalanceSystem sys;
  sys.A = Mat3::zero();
  sys.rhs_blocks.reserve(H_q.size());
  for (std::size_t k = 0; k < H_q.size(); ++k) {
    const Mat3 B = detail::jt_h_block(H_q[k], q_xy[k]);
    const Vec2 sq = perp(q_xy[k]);
    // A += J^T H J, columns of J are (e_x, e_y, S q).
    for (int r = 0; r < 3; ++r) {
      sys.A(r, 0) += B(r, 0);
      sys.A(r, 1) += B(r, 1);
      sys.A(r, 2) += B(r, 0) * sq.x + B(r, 1) * sq.y;
    }
    sys.rhs_blocks.push_back(B);
  }
  return sys;
}

// Solve the planar balance for one frame given the support solution.
// Produces the body velocity, per-foot traction forces, and the connection.
// The per-contact H blocks are cheap to rebuild, so the passes recompute them
// instead of storing intermediate arrays.
inline std::pair<PlanarSolution, ConnectionMatrices> solve_planar(
    const RobotModel& robot, const ShapeFrame& frame,
    const SupportSolution& support, double theta) {
  check_frame(robot, frame);
  const std::size_t n = robot.leg_count();

  Mat3 A = Mat3::zero();
  Vec3 rhs{0, 0, 0};
  for (std::size_t j : support.contacts) {
    const auto& leg = robot.leg(j);
    const Mat2 H = h_anisotropic_body(leg.mu, leg.traction_dir, support.normal_forces[j]);
    const Vec2 q = frame.q[j].xy();
    const Vec2 qd = frame.qdot[j].xy();
    const Vec2 sq = perp(q);
    const double m20 = sq.x * H.a00 + sq.y * H.a10;
    const double m21 = sq.x * H.a01 + sq.y * H.a11;
    A(0, 0) += H.a00;  A(0, 1) += H.a01;  A(0, 2) += H.a00 * sq.x + H.a01 * sq.y;
    A(1, 0) += H.a10;  A(1, 1) += H.a11;  A(1, 2) += H.a10 * sq.x + H.a11 * sq.y;
    A(2, 0) += m20;    A(2, 1) += m21;    A(2, 2) += m20 * sq.x + m21 * sq.y;
    rhs += Vec3{H.a00 * qd.x + H.a01 * qd.y, H.a10 * qd.x + H.a11 * qd.y,
                m20 * qd.x + m21 * qd.y};
  }
  rhs = -rhs;

  const auto x = solve3(A, rhs);
  if (!x) raise(errc::singular_balance, "planar balance matrix is rank deficient");
  const Vec2 u{x->x, x->y};
  const double omega = x->z;

  const Mat2 R = Mat2::rotation(theta);
  PlanarSolution sol;
  sol.vel = {R * u, omega};
  sol.foot_forces.assign(n, Vec2{0.0, 0.0});

  ConnectionMatrices conn;
  conn.A_xy.assign(n, Mat2{});
  conn.A_theta.assign(n, Vec2{0.0, 0.0});
  const auto inv = inverse3(A);

  Vec3 residual{0, 0, 0};
  for (std::size_t j : support.contacts) {
    const auto& leg = robot.leg(j);
    const Mat2 H = h_anisotropic_body(leg.mu, leg.traction_dir, support.normal_forces[j]);
    const Vec2 q = frame.q[j].xy();
    const Vec2 sq = perp(q);
    const Vec2 vb = u + omega * sq + frame.qdot[j].xy();
    const Vec2 f_body = H * vb;
    sol.foot_forces[j] = R * f_body;
    residual += Vec3{f_body.x, f_body.y, sq.dot(f_body)};
    if (inv) {
      // B = J^T H (3x2); connection block C = -A^-1 B
      const double B[3][2] = {{H.a00, H.a01},
                              {H.a10, H.a11},
                              {sq.x * H.a00 + sq.y * H.a10,
                               sq.x * H.a01 + sq.y * H.a11}};
      double C[3][2];
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 2; ++c)
          C[r][c] = -((*inv)(r, 0) * B[0][c] + (*inv)(r, 1) * B[1][c] +
                      (*inv)(r, 2) * B[2][c]);
      conn.A_xy[j] = {C[0][0], C[0][1], C[1][0], C[1][1]};
      conn.A_theta[j] = {-C[2][0], -C[2][1]};
    }
  }
  sol.balance_residual = residual;
  return {sol, conn};
}

}  // namespace multileg
