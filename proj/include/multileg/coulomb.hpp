#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "multileg/connection.hpp"
#include "multileg/friction.hpp"
#include "multileg/support.hpp"

// Coulomb friction balance via epsilon-homotopy: solve the smoothed problem
// at a moderate epsilon, then repeatedly shrink epsilon, warm-starting each
// stage from the previous solution, until consecutive solutions agree.

namespace multileg {

struct HomotopySchedule {
  double eps0 = 1e-5;
  double shrink = 0.1;
  double rel_tol = 1e-3;
  int max_stages = 10;
};

inline HomotopySchedule default_schedule() { return {1e-5, 0.1, 1e-3, 10}; }

struct CoulombSolution {
  BodyVelocity vel;               // world frame
  std::vector<Vec2> foot_forces;  // per leg, world frame
  int stages = 0;
  bool converged = false;
  double final_epsilon = 0.0;
  double residual_norm = 0.0;
};

namespace detail {

struct CoulombContext {
  std::vector<Vec2> q_xy;
  std::vector<Vec2> qd_xy;
  std::vector<double> mu_fz;   // mu_k * Fz_k per contact
  double force_scale = 0.0;    // sum mu_k Fz_k
};

inline CoulombContext make_context(const RobotModel& robot, const ShapeFrame& frame,
                                   const SupportSolution& support) {
  CoulombContext ctx;
  ctx.q_xy.reserve(support.contacts.size());
  for (std::size_t j : support.contacts) {
    ctx.q_xy.push_back(frame.q[j].xy());
    ctx.qd_xy.push_back(frame.qdot[j].xy());
    const double mf = robot.leg(j).mu * support.normal_forces[j];
    ctx.mu_fz.push_back(mf);
    ctx.force_scale += mf;
  }
  return ctx;
}

// Net (Fx, Fy, Mz) in body coordinates for the smoothed Coulomb model at body
// twist x = (ux, uy, omega).
inline Vec3 residual_body(const CoulombContext& ctx, Vec3 x, double epsilon) {
  Vec3 r{0, 0, 0};
  const Vec2 u{x.x, x.y};
  for (std::size_t k = 0; k < ctx.q_xy.size(); ++k) {
    const Vec2 vb = u + x.z * perp(ctx.q_xy[k]) + ctx.qd_xy[k];
    const double v = vb.norm();
    const double h = -ctx.mu_fz[k] * (epsilon + v) / (epsilon + v * v);
    const Vec2 f = vb * h;
    r += Vec3{f.x, f.y, perp(ctx.q_xy[k]).dot(f)};
  }
  return r;
}

// Jacobian of the net force/moment with respect to the body twist. Exact:
// with F_k = h(v) vb and J_k = [I | S q], the per-contact block is
// J_k^T (h I + (h'(v)/v) vb vb^T) J_k; the rank-one term vanishes at v -> 0.
inline Mat3 residual_jacobian(const CoulombContext& ctx, Vec3 x, double epsilon) {
  Mat3 J = Mat3::zero();
  const Vec2 u{x.x, x.y};
  for (std::size_t k = 0; k < ctx.q_xy.size(); ++k) {
    const Vec2 sq = perp(ctx.q_xy[k]);
    const Vec2 vb = u + x.z * sq + ctx.qd_xy[k];
    const double v = vb.norm();
    const double denom = epsilon + v * v;
    const double h = -ctx.mu_fz[k] * (epsilon + v) / denom;
    // dh/dv = -mu Fz (eps - 2 eps v - v^2) / (eps + v^2)^2
    const double dh = -ctx.mu_fz[k] *
                      (epsilon - 2.0 * epsilon * v - v * v) / (denom * denom);
    // dF/dvb = h I + (dh / v) vb vb^T, with the rank-one part zero at rest
    Mat2 dF{h, 0.0, 0.0, h};
    if (v > 1e-300) {
      const double s = dh / v;
      dF.a00 += s * vb.x * vb.x;
      dF.a01 += s * vb.x * vb.y;
      dF.a10 += s * vb.y * vb.x;
      dF.a11 += s * vb.y * vb.y;
    }
    // accumulate J_k^T dF J_k into the 3x3
    const double m20 = sq.x * dF.a00 + sq.y * dF.a10;
    const double m21 = sq.x * dF.a01 + sq.y * dF.a11;
    J(0, 0) += dF.a00;  J(0, 1) += dF.a01;  J(0, 2) += dF.a00 * sq.x + dF.a01 * sq.y;
    J(1, 0) += dF.a10;  J(1, 1) += dF.a11;  J(1, 2) += dF.a10 * sq.x + dF.a11 * sq.y;
    J(2, 0) += m20;     J(2, 1) += m21;     J(2, 2) += m20 * sq.x + m21 * sq.y;
  }
  return J;
}

// Damped Gauss-Newton root find on the 3-d balance residual with the exact
// Jacobian and adaptive Levenberg damping.
inline bool lm_root(const CoulombContext& ctx, double epsilon, Vec3& x,
                    double res_tol, int max_iter = 100) {
  const double step_tol = 1e-12;
  Vec3 r = residual_body(ctx, x, epsilon);
  double cost = r.squared_norm();
  double lambda = 1e-3;
  for (int it = 0; it < max_iter; ++it) {
    if (std::sqrt(cost) <= res_tol) return true;

    const Mat3 J = residual_jacobian(ctx, x, epsilon);

    // Normal equations J^T J + lambda diag(J^T J).
    Mat3 JtJ = Mat3::zero();
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        for (int i = 0; i < 3; ++i) JtJ(a, b) += J(i, a) * J(i, b);
    const Vec3 g{J(0, 0) * r.x + J(1, 0) * r.y + J(2, 0) * r.z,
                 J(0, 1) * r.x + J(1, 1) * r.y + J(2, 1) * r.z,
                 J(0, 2) * r.x + J(1, 2) * r.y + J(2, 2) * r.z};

    bool stepped = false;
    for (int tries = 0; tries < 25; ++tries) {
      Mat3 M = JtJ;
      for (int d = 0; d < 3; ++d)
        M(d, d) += lambda * std::max(JtJ(d, d), 1e-12);
      const auto delta = solve3(M, -g, 1e-15);
      if (delta) {
        const Vec3 trial = x + *delta;
        const Vec3 rt = residual_body(ctx, trial, epsilon);
        const double ct = rt.squared_norm();
        if (ct < cost) {
          const double step = delta->norm();
          x = trial;
          r = rt;
          cost = ct;
          lambda = std::max(lambda / 3.0, 1e-12);
          stepped = true;
          if (step < step_tol * (1.0 + x.norm())) return std::sqrt(cost) <= res_tol;
          break;
        }
      }
      lambda *= 10.0;
      if (lambda > 1e12) break;
    }
    if (!stepped) return std::sqrt(cost) <= res_tol;
  }
  return std::sqrt(cost) <= res_tol;
}

}  // namespace detail

// Net planar force and z-moment (body frame) under the eps-smoothed Coulomb
// model at the given body velocity.
inline Vec3 balance_residual(const RobotModel& robot, const ShapeFrame& frame,
                             const SupportSolution& support, double theta,
                             const BodyVelocity& vel, double epsilon) {
  const auto ctx = detail::make_context(robot, frame, support);
  const Mat2 Rinv = Mat2::rotation(-theta);
  const Vec2 u = Rinv * vel.v_xy;
  return detail::residual_body(ctx, {u.x, u.y, vel.omega}, epsilon);
}

// Homotopy solve: start from `init` at eps0 and track the solution while
// epsilon shrinks, stopping once consecutive stage solutions differ by less
// than rel_tol in relative L2 norm.
inline CoulombSolution solve_coulomb(const RobotModel& robot, const ShapeFrame& frame,
                                     const SupportSolution& support, double theta,
                                     const BodyVelocity& init,
                                     const HomotopySchedule& sched = default_schedule()) {
  if (!(sched.eps0 > 0.0) || !(sched.shrink > 0.0 && sched.shrink < 1.0) ||
      !(sched.rel_tol > 0.0))
    raise(errc::invalid_argument, "bad homotopy schedule");
  const auto ctx = detail::make_context(robot, frame, support);
  // inner target is tighter than the acceptance gate: with a sticking foot
  // the smoothed force slope is ~ mu Fz / eps, so the representable residual
  // floor rises as eps shrinks; 1e-8 * scale is the contract, 1e-10 the goal
  const double res_target = 1e-10 * std::max(ctx.force_scale, 1e-30);
  const double res_ok = 1e-8 * std::max(ctx.force_scale, 1e-30);

  const Mat2 Rinv = Mat2::rotation(-theta);
  const Vec2 u0 = Rinv * init.v_xy;
  Vec3 x{u0.x, u0.y, init.omega};

  CoulombSolution out;
  double epsilon = sched.eps0;
  bool have_prev = false;
  Vec3 prev{0, 0, 0};
  for (int stage = 0; stage < sched.max_stages; ++stage) {
    detail::lm_root(ctx, epsilon, x, res_target);
    const bool ok = detail::residual_body(ctx, x, epsilon).norm() <= res_ok;
    ++out.stages;
    out.final_epsilon = epsilon;
    if (have_prev && ok) {
      // converged when the returned stage solved its root-find and the
      // solution stopped moving between consecutive epsilon stages
      const double change = (x - prev).norm() / std::max(x.norm(), 1e-12);
      if (change < sched.rel_tol) {
        out.converged = true;
        break;
      }
    }
    prev = x;
    have_prev = true;
    epsilon *= sched.shrink;
  }

  const Mat2 R = Mat2::rotation(theta);
  out.vel = {R * Vec2{x.x, x.y}, x.z};
  out.foot_forces.assign(robot.leg_count(), Vec2{0.0, 0.0});
  const Vec2 u{x.x, x.y};
  for (std::size_t k = 0; k < ctx.q_xy.size(); ++k) {
    const Vec2 vb = u + x.z * perp(ctx.q_xy[k]) + ctx.qd_xy[k];
    const double v = vb.norm();
    const double h = -ctx.mu_fz[k] * (out.final_epsilon + v) /
                     (out.final_epsilon + v * v);
    out.foot_forces[support.contacts[k]] = R * (vb * h);
  }
  out.residual_norm = detail::residual_body(ctx, x, out.final_epsilon).norm();
  return out;
}

}  // namespace multileg
