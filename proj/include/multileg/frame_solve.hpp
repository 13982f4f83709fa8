#pragma once

#include "multileg/connection.hpp"
#include "multileg/coulomb.hpp"
#include "multileg/support.hpp"

// End-to-end per-frame pipeline: spring support first, then the planar
// balance for the requested friction model.

namespace multileg {

struct FullFrameResult {
  SupportSolution support;
  PlanarSolution planar;
  ConnectionMatrices connection;
};

// Viscous-Coulomb solves are purely linear. With a smoothed-Coulomb model the
// linear solution seeds the homotopy and the planar fields carry the Coulomb
// velocities/forces; the connection stays the viscous linearization.
inline FullFrameResult full_frame_solve(
    const RobotModel& robot, const ShapeFrame& frame, double theta = 0.0,
    const FrictionModel& model = FrictionModel::viscous_coulomb(),
    const HomotopySchedule& sched = default_schedule()) {
  FullFrameResult out;
  out.support = solve_support(robot, frame);
  auto [planar, conn] = solve_planar(robot, frame, out.support, theta);
  out.planar = std::move(planar);
  out.connection = std::move(conn);
  if (model.kind == FrictionKind::SmoothedCoulomb) {
    CoulombSolution cs =
        solve_coulomb(robot, frame, out.support, theta, out.planar.vel, sched);
    if (!cs.converged)
      raise(errc::no_convergence, "Coulomb homotopy did not converge");
    out.planar.vel = cs.vel;
    out.planar.foot_forces = cs.foot_forces;
    out.planar.balance_residual = balance_residual(
        robot, frame, out.support, theta, cs.vel, cs.final_epsilon);
  }
  return out;
}

}  // namespace multileg
