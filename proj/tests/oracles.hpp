#pragma once

// Test-only reference implementations, written independently of the library
// solvers: brute-force contact enumeration with Eigen dense solves, a direct
// force-summation residual, grid/coordinate-descent minimization, and a
// golden-section line minimizer.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "multileg/model.hpp"
#include "multileg/support.hpp"

namespace oracles {

using multileg::RobotModel;
using multileg::ShapeFrame;
using multileg::Vec2;
using multileg::Vec3;

struct SupportOracle {
  Eigen::Vector3d state;  // alpha_x, alpha_y, z0
  std::vector<std::size_t> contacts;
  std::vector<double> forces;
};

// Height of foot j at state s, straight from the definition.
inline double height(const Eigen::Vector3d& s, Vec3 q) {
  return -s[0] * q.x + s[1] * q.y + q.z + s[2];
}

// Solve the fixed-contact-set balance with Eigen (full-pivot LU), assembling
// the equations directly from F_z = -K h, Mx = -q_y Fz, My = q_x Fz.
inline std::optional<Eigen::Vector3d> balance_for_subset(
    const RobotModel& robot, const ShapeFrame& frame,
    const std::vector<std::size_t>& subset) {
  Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
  Eigen::Vector3d b = Eigen::Vector3d::Zero();
  // unknown s = (ax, ay, z0); F_j = -K(-ax qx + ay qy + qz + z0)
  for (std::size_t j : subset) {
    const double K = robot.leg(j).stiffness;
    const Vec3 q = frame.q[j];
    const Eigen::Vector3d grad(K * q.x, -K * q.y, -K);  // dF/ds
    const double f0 = -K * q.z;                          // F at s = 0
    // sum F = Mg
    A.row(0) += grad.transpose();
    b[0] += -f0;
    // sum -q_y F = 0
    A.row(1) += -q.y * grad.transpose();
    b[1] += q.y * f0;
    // sum q_x F = 0
    A.row(2) += q.x * grad.transpose();
    b[2] += -q.x * f0;
  }
  b[0] += robot.weight();
  Eigen::FullPivLU<Eigen::Matrix3d> lu(A);
  lu.setThreshold(1e-10);
  if (lu.rank() < 3) return std::nullopt;
  return lu.solve(b);
}

// Enumerate every contact subset of size >= 3 and keep the self-consistent
// ones: subset legs compressed, all others above ground.
inline std::vector<SupportOracle> enumerate_support(const RobotModel& robot,
                                                    const ShapeFrame& frame,
                                                    double tol = 1e-9) {
  const std::size_t n = robot.leg_count();
  std::vector<SupportOracle> found;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    std::vector<std::size_t> subset;
    for (std::size_t j = 0; j < n; ++j)
      if (mask & (1u << j)) subset.push_back(j);
    if (subset.size() < 3) continue;
    const auto s = balance_for_subset(robot, frame, subset);
    if (!s) continue;
    bool consistent = true;
    for (std::size_t j = 0; j < n && consistent; ++j) {
      const double h = height(*s, frame.q[j]);
      const bool inside = mask & (1u << j);
      if (inside && h > tol) consistent = false;
      if (!inside && h < -tol) consistent = false;
    }
    if (!consistent) continue;
    SupportOracle o;
    o.state = *s;
    o.contacts = subset;
    o.forces.assign(n, 0.0);
    for (std::size_t j : subset)
      o.forces[j] = -robot.leg(j).stiffness * height(*s, frame.q[j]);
    found.push_back(std::move(o));
  }
  return found;
}

// Independent smoothed-Coulomb net force/moment summation (body frame).
inline Eigen::Vector3d coulomb_net(const RobotModel& robot, const ShapeFrame& frame,
                                   const std::vector<std::size_t>& contacts,
                                   const std::vector<double>& normal_forces,
                                   const Eigen::Vector3d& x, double epsilon) {
  Eigen::Vector3d net = Eigen::Vector3d::Zero();
  for (std::size_t j : contacts) {
    const Vec2 q = frame.q[j].xy();
    const Vec2 qd = frame.qdot[j].xy();
    const double vx = x[0] - x[2] * q.y + qd.x;
    const double vy = x[1] + x[2] * q.x + qd.y;
    const double v = std::sqrt(vx * vx + vy * vy);
    const double h =
        -robot.leg(j).mu * normal_forces[j] * (epsilon + v) / (epsilon + v * v);
    net[0] += h * vx;
    net[1] += h * vy;
    net[2] += -q.y * (h * vx) + q.x * (h * vy);  // z-moment about the origin
  }
  return net;
}

// Grid search refined by coordinate descent on the residual norm.
// The landscape at tiny epsilon is too stiff for a one-shot grid, so the
// search does its own continuation: locate the basin at the starting
// smoothing, then track the minimizer with derivative-free coordinate
// descent while epsilon shrinks.
inline Eigen::Vector3d grid_search_velocity(const RobotModel& robot,
                                            const ShapeFrame& frame,
                                            const std::vector<std::size_t>& contacts,
                                            const std::vector<double>& normal_forces,
                                            const Eigen::Vector3d& center,
                                            double half_width, double eps_final,
                                            double eps_start = 1e-5) {
  auto cost = [&](const Eigen::Vector3d& x, double eps) {
    return coulomb_net(robot, frame, contacts, normal_forces, x, eps).norm();
  };
  auto descend = [&](Eigen::Vector3d x, double eps, double step0) {
    double best_cost = cost(x, eps);
    double step = step0;
    while (step > 1e-10) {
      bool improved = false;
      for (int d = 0; d < 3; ++d)
        for (double sgn : {-1.0, 1.0}) {
          Eigen::Vector3d trial = x;
          trial[d] += sgn * step;
          const double f = cost(trial, eps);
          if (f < best_cost) {
            best_cost = f;
            x = trial;
            improved = true;
          }
        }
      if (!improved) step /= 2.0;
    }
    return x;
  };

  // coarse grid at the mildest smoothing
  Eigen::Vector3d best = center;
  double best_cost = cost(best, eps_start);
  const int pts = 10;
  double width = half_width;
  for (int round = 0; round < 3; ++round) {
    const Eigen::Vector3d c = best;
    for (int i = -pts; i <= pts; ++i)
      for (int j = -pts; j <= pts; ++j)
        for (int k = -pts; k <= pts; ++k) {
          const Eigen::Vector3d x = c + width / pts * Eigen::Vector3d(i, j, k);
          const double f = cost(x, eps_start);
          if (f < best_cost) {
            best_cost = f;
            best = x;
          }
        }
    width /= pts;
  }
  best = descend(best, eps_start, width * 2.0);

  // continuation toward the final epsilon
  double eps = eps_start;
  while (eps > eps_final * 1.0000001) {
    eps = std::max(eps * 0.1, eps_final);
    best = descend(best, eps, 1e-2);
  }
  return best;
}

// Golden-section search with a final parabolic-vertex refinement. The pure
// golden section bottoms out near sqrt(eps) on flat minima; the three-point
// parabola step recovers the vertex to rounding for smooth costs.
inline double golden_section(const std::function<double(double)>& f, double lo,
                             double hi, double tol = 1e-12) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - phi * (b - a);
  double d = a + phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > std::max(tol, 1e-7)) {
    if (fc < fd) {
      b = d; d = c; fd = fc;
      c = b - phi * (b - a);
      fc = f(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + phi * (b - a);
      fd = f(d);
    }
  }
  const double m = 0.5 * (a + b);
  const double h = std::max(1e-4 * (hi - lo), 1e-6);
  const double f0 = f(m - h), f1 = f(m), f2 = f(m + h);
  const double denom = f0 - 2.0 * f1 + f2;
  if (denom <= 0.0) return m;
  return m + h * 0.5 * (f0 - f2) / denom;
}

// Random well-posed support instances: feet spread in angle around the body
// so some subset of size >= 3 supports the weight.
template <class Rng>
std::pair<RobotModel, ShapeFrame> random_support_instance(Rng& rng,
                                                          std::size_t n_legs) {
  using multileg::uniform;
  std::vector<multileg::LegParam> legs;
  ShapeFrame frame;
  for (std::size_t j = 0; j < n_legs; ++j) {
    legs.push_back({uniform(rng, 0.5, 2.0), uniform(rng, 0.3, 1.5), {0.0, 0.0}});
    const double ang = 2.0 * M_PI * (static_cast<double>(j) + uniform(rng, -0.25, 0.25)) /
                       static_cast<double>(n_legs);
    const double rad = uniform(rng, 0.6, 1.4);
    frame.q.push_back({rad * std::cos(ang), rad * std::sin(ang),
                       uniform(rng, -1.2, -0.8)});
    frame.qdot.push_back({uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0),
                          uniform(rng, -0.5, 0.5)});
  }
  return {RobotModel(std::move(legs), 1.0), std::move(frame)};
}

}  // namespace oracles
