#include <catch2/catch.hpp>
#include <algorithm>
#include <random>

#include "multileg/bench.hpp"
#include "multileg/connection.hpp"
#include "multileg/coulomb.hpp"
#include "oracles.hpp"

using namespace multileg;

namespace {

// Collinear equal-load instance: n legs at distinct x on the x axis, all
// driven along x. Well-posed for the planar solvers even though the support
// solver could never produce it (collinear feet), so the support solution is
// prescribed directly.
struct LineInstance {
  RobotModel robot;
  ShapeFrame frame;
  SupportSolution support;
  std::vector<double> speeds;
};

LineInstance line_instance(const std::vector<double>& xs,
                           const std::vector<double>& speeds) {
  const std::size_t n = xs.size();
  LineInstance li{RobotModel(std::vector<LegParam>(n, {1.0, 1.0, {0, 0}}), 1.0),
                  {}, {}, speeds};
  for (std::size_t j = 0; j < n; ++j) {
    li.frame.q.push_back({xs[j], 0.0, -0.5});
    li.frame.qdot.push_back({speeds[j], 0.0, 0.0});
  }
  li.support.contacts.resize(n);
  std::iota(li.support.contacts.begin(), li.support.contacts.end(), 0);
  li.support.normal_forces.assign(n, 1.0 / static_cast<double>(n));
  return li;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

}  // namespace

TEST_CASE("default_schedule carries the published constants") {
  const auto s = default_schedule();
  CHECK(s.eps0 == 1e-5);
  CHECK(s.rel_tol == 1e-3);
  CHECK(s.shrink == 0.1);
  CHECK(s.max_stages == 10);
  CHECK(s.eps0 > 0.0);
  // stage sequence is geometric
  CHECK(s.eps0 * s.shrink == Approx(1e-6));
}

TEST_CASE("balance_residual") {
  SECTION("the viscous solution zeroes the huge-epsilon residual") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 20; ++trial) {
      auto [robot, frame] = oracles::random_support_instance(rng, 6);
      SupportSolution support;
      try {
        support = solve_support(robot, frame);
      } catch (const Error&) {
        continue;
      }
      if (support.contacts.size() < 3) continue;
      std::vector<LegParam> iso = robot.legs();
      for (auto& l : iso) l.traction_dir = {0, 0};
      const RobotModel riso(iso, robot.weight());
      const auto vel = solve_planar(riso, frame, support, 0.0).first.vel;
      // (eps + v)/(eps + v^2) -> 1, so the residual approaches the viscous one
      const Vec3 r = balance_residual(riso, frame, support, 0.0, vel, 1e12);
      CHECK(r.norm() < 1e-8);
    }
  }
  SECTION("mirrored legs at rest balance exactly") {
    const auto li = line_instance({-1.0, 1.0, -0.5, 0.5}, {0.7, -0.7, 0.2, -0.2});
    const Vec3 r = balance_residual(li.robot, li.frame, li.support, 0.0,
                                    BodyVelocity{}, 1e-3);
    CHECK(r.x == Approx(0.0).margin(1e-12));
    CHECK(r.y == Approx(0.0).margin(1e-12));
    CHECK(r.z == Approx(0.0).margin(1e-12));
  }
  SECTION("matches the independently coded summation") {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 30; ++trial) {
      auto [robot, frame] = oracles::random_support_instance(rng, 5);
      SupportSolution support;
      try {
        support = solve_support(robot, frame);
      } catch (const Error&) {
        continue;
      }
      const BodyVelocity vel{{uniform(rng, -1, 1), uniform(rng, -1, 1)},
                             uniform(rng, -1, 1)};
      const double eps = uniform(rng, 1e-6, 1e-2);
      const Vec3 mine = balance_residual(robot, frame, support, 0.0, vel, eps);
      const Eigen::Vector3d oracle = oracles::coulomb_net(
          robot, frame, support.contacts, support.normal_forces,
          {vel.v_xy.x, vel.v_xy.y, vel.omega}, eps);
      CHECK(mine.x == Approx(oracle[0]).margin(1e-12));
      CHECK(mine.y == Approx(oracle[1]).margin(1e-12));
      CHECK(mine.z == Approx(oracle[2]).margin(1e-12));
    }
  }
}

TEST_CASE("1-D motivating example: Coulomb is the median, viscous the mean") {
  const auto li = line_instance({-1.2, 0.3, 1.4}, {1.0, 2.0, 4.0});

  SECTION("viscous-Coulomb gives minus the mean") {
    const auto vel = solve_planar(li.robot, li.frame, li.support, 0.0).first.vel;
    CHECK(vel.v_xy.x == Approx(-7.0 / 3.0).margin(1e-12));
    CHECK(vel.v_xy.y == Approx(0.0).margin(1e-12));
    CHECK(vel.omega == Approx(0.0).margin(1e-12));
  }
  SECTION("Coulomb homotopy gives minus the median") {
    const auto init = solve_planar(li.robot, li.frame, li.support, 0.0).first.vel;
    const auto sol = solve_coulomb(li.robot, li.frame, li.support, 0.0, init);
    CHECK(sol.converged);
    CHECK(sol.vel.v_xy.x == Approx(-2.0).margin(1e-3));
    CHECK(std::abs(sol.vel.v_xy.y) < 1e-6);
    CHECK(std::abs(sol.vel.omega) < 1e-6);
  }
}

TEST_CASE("odd collinear instances track the median over random draws") {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 3 + 2 * (rng() % 3);  // 3, 5, 7
    std::vector<double> xs, speeds;
    for (std::size_t j = 0; j < n; ++j) {
      xs.push_back(uniform(rng, -2, 2) + 0.37 * static_cast<double>(j));
      speeds.push_back(uniform(rng, -3, 3));
    }
    const auto li = line_instance(xs, speeds);
    const auto init = solve_planar(li.robot, li.frame, li.support, 0.0).first.vel;
    const auto sol = solve_coulomb(li.robot, li.frame, li.support, 0.0, init);
    CHECK(sol.converged);
    CHECK(sol.vel.v_xy.x == Approx(-median_of(speeds)).margin(1e-3));
  }
}

TEST_CASE("even collinear instances land inside the median interval") {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 15; ++trial) {
    const std::size_t n = 4 + 2 * (rng() % 2);  // 4 or 6
    std::vector<double> xs, speeds;
    for (std::size_t j = 0; j < n; ++j) {
      xs.push_back(uniform(rng, -2, 2) + 0.41 * static_cast<double>(j));
      speeds.push_back(uniform(rng, -3, 3));
    }
    const auto li = line_instance(xs, speeds);
    const auto init = solve_planar(li.robot, li.frame, li.support, 0.0).first.vel;
    const auto sol = solve_coulomb(li.robot, li.frame, li.support, 0.0, init);
    std::vector<double> sorted = speeds;
    std::sort(sorted.begin(), sorted.end());
    const double lo = -sorted[n / 2];      // upper median, negated
    const double hi = -sorted[n / 2 - 1];  // lower median, negated
    CHECK(sol.vel.v_xy.x >= lo - 1e-3);
    CHECK(sol.vel.v_xy.x <= hi + 1e-3);
  }
}

TEST_CASE("solve_coulomb matches the grid-search oracle on hexapod frames") {
  std::mt19937_64 rng(59);
  const DiskRobot disk = disk_robot(6);
  int tested = 0;
  while (tested < 15) {
    const ShapeFrame frame = random_disk_frame(disk, rng);
    SupportSolution support;
    try {
      support = solve_support(disk.model, frame);
    } catch (const Error&) {
      continue;
    }
    if (support.contacts.size() < 3) continue;
    ++tested;
    const auto init = solve_planar(disk.model, frame, support, 0.0).first.vel;
    const auto sol = solve_coulomb(disk.model, frame, support, 0.0, init);
    REQUIRE(sol.converged);

    double scale = 0.0;
    for (std::size_t j : support.contacts)
      scale += disk.model.leg(j).mu * support.normal_forces[j];
    CHECK(sol.residual_norm <= 1e-8 * scale);

    const Eigen::Vector3d best = oracles::grid_search_velocity(
        disk.model, frame, support.contacts, support.normal_forces,
        {init.v_xy.x, init.v_xy.y, init.omega}, 1.0, sol.final_epsilon);
    CHECK(sol.vel.v_xy.x == Approx(best[0]).margin(1e-3));
    CHECK(sol.vel.v_xy.y == Approx(best[1]).margin(1e-3));
    CHECK(sol.vel.omega == Approx(best[2]).margin(1e-3));
  }
}

TEST_CASE("homotopy stage path shrinks epsilon geometrically") {
  const auto li = line_instance({-1.0, 0.0, 1.0}, {0.5, 1.5, 2.5});
  const auto init = solve_planar(li.robot, li.frame, li.support, 0.0).first.vel;
  HomotopySchedule sched = default_schedule();
  const auto sol = solve_coulomb(li.robot, li.frame, li.support, 0.0, init, sched);
  CHECK(sol.converged);
  CHECK(sol.stages >= 2);
  CHECK(sol.final_epsilon ==
        Approx(sched.eps0 * std::pow(sched.shrink, sol.stages - 1)).epsilon(1e-12));
  CHECK_THROWS_AS(
      solve_coulomb(li.robot, li.frame, li.support, 0.0, init, {0.0, 0.1, 1e-3, 5}),
      Error);
}
