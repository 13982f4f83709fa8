#include <catch2/catch.hpp>
#include <Eigen/Dense>
#include <random>

#include "multileg/fitting.hpp"
#include "multileg/frame_solve.hpp"
#include "multileg/trajectory.hpp"
#include "oracles.hpp"

using namespace multileg;

namespace {

// Synthesize measured frames from a ground-truth robot running a gait.
std::vector<MeasuredFrame> synthesize(const RobotModel& truth,
                                      const ShapeTrajectory& traj,
                                      std::uint64_t noise_seed = 0,
                                      double force_noise = 0.0) {
  std::mt19937_64 rng(noise_seed);
  std::vector<MeasuredFrame> out;
  for (const auto& frame : traj.frames) {
    const auto res = full_frame_solve(truth, frame);
    MeasuredFrame m;
    m.shape = frame;
    m.theta = 0.0;
    m.normal_forces = res.support.normal_forces;
    m.planar_forces = res.planar.foot_forces;
    m.foot_velocities.assign(truth.leg_count(), Vec2{0, 0});
    const Mat2 Rinv = Mat2::rotation(0.0);
    const Vec2 u = Rinv * res.planar.vel.v_xy;
    for (std::size_t j : res.support.contacts) {
      const Vec2 vb = u + res.planar.vel.omega * perp(frame.q[j].xy()) +
                      frame.qdot[j].xy();
      m.foot_velocities[j] = vb;  // theta = 0: body frame == world frame
    }
    if (force_noise > 0.0) {
      for (std::size_t j = 0; j < truth.leg_count(); ++j) {
        m.normal_forces[j] += force_noise * (uniform01(rng) - 0.5) * 2.0 *
                              (m.normal_forces[j] != 0.0 ? 1.0 : 0.0);
        m.planar_forces[j] += Vec2{force_noise * (uniform01(rng) - 0.5) * 2.0,
                                   force_noise * (uniform01(rng) - 0.5) * 2.0} *
                              (m.planar_forces[j].norm() != 0.0 ? 1.0 : 0.0);
      }
    }
    out.push_back(std::move(m));
  }
  return out;
}

RobotModel hexapod_truth(const std::vector<double>& K, const std::vector<double>& mu,
                         const std::vector<Vec2>& w) {
  std::vector<LegParam> legs;
  for (std::size_t j = 0; j < K.size(); ++j) legs.push_back({K[j], mu[j], w[j]});
  return RobotModel(legs, 1.0);
}

}  // namespace

TEST_CASE("least_squares on reference problems") {
  SECTION("identity residual converges in one step") {
    const auto res = least_squares(
        [](const std::vector<double>& p) {
          return std::vector<double>{p[0] - 3.0, p[1] + 1.0};
        },
        {0.0, 0.0});
    CHECK(res.params[0] == Approx(3.0).margin(1e-8));
    CHECK(res.params[1] == Approx(-1.0).margin(1e-8));
    CHECK(res.cost == Approx(0.0).margin(1e-12));
  }
  SECTION("linear residual reaches the normal-equations solution") {
    // r = A p - b with a fixed well-conditioned A
    const double A[3][2] = {{2, 1}, {1, 3}, {0.5, -1}};
    const double b[3] = {1.0, -2.0, 0.7};
    const auto res = least_squares(
        [&](const std::vector<double>& p) {
          std::vector<double> r(3);
          for (int i = 0; i < 3; ++i)
            r[i] = A[i][0] * p[0] + A[i][1] * p[1] - b[i];
          return r;
        },
        {0.0, 0.0});
    Eigen::Matrix<double, 3, 2> Am;
    Eigen::Vector3d bv;
    for (int i = 0; i < 3; ++i) {
      Am(i, 0) = A[i][0];
      Am(i, 1) = A[i][1];
      bv[i] = b[i];
    }
    const Eigen::Vector2d expect =
        (Am.transpose() * Am).ldlt().solve(Am.transpose() * bv);
    CHECK(res.params[0] == Approx(expect[0]).margin(1e-8));
    CHECK(res.params[1] == Approx(expect[1]).margin(1e-8));
  }
  SECTION("Rosenbrock valley") {
    const auto res = least_squares(
        [](const std::vector<double>& p) {
          return std::vector<double>{10.0 * (p[1] - p[0] * p[0]), 1.0 - p[0]};
        },
        {-1.2, 1.0}, {0.1, 500, 1e-14, false, 1e-3});
    CHECK(res.params[0] == Approx(1.0).margin(1e-6));
    CHECK(res.params[1] == Approx(1.0).margin(1e-6));
  }
  SECTION("cost never increases along the iteration (tracked externally)") {
    // wrap the residual to record every accepted cost via the returned cost
    double prev_cost = std::numeric_limits<double>::infinity();
    for (int budget : {1, 2, 5, 20, 100}) {
      FitConfig cfg;
      cfg.max_iterations = budget;
      cfg.tolerance = 1e-15;
      FitResult res;
      try {
        res = least_squares(
            [](const std::vector<double>& p) {
              return std::vector<double>{10.0 * (p[1] - p[0] * p[0]), 1.0 - p[0]};
            },
            {-1.2, 1.0}, cfg);
      } catch (const Error&) {
        continue;  // iteration cap reached before the tolerances
      }
      CHECK(res.cost <= prev_cost + 1e-15);
      prev_cost = res.cost;
    }
  }
  SECTION("non-finite initial residual is rejected") {
    CHECK_THROWS_AS(least_squares(
                        [](const std::vector<double>&) {
                          return std::vector<double>{
                              std::numeric_limits<double>::quiet_NaN()};
                        },
                        {1.0}),
                    Error);
  }
}

TEST_CASE("fit_stiffness") {
  // four contacting feet at all times: the force distribution is statically
  // indeterminate, so it actually depends on the stiffness ratios
  GaitSpec spec;
  spec.kind = GaitKind::MetachronalCubic;
  spec.duty = 2.0 / 3.0;
  spec.frequency = 0.4;
  const auto traj = gait_trajectory(spec, hexapod_geometry(), 1.0, 0.04);

  SECTION("noiseless round trip recovers the spring constants within 1%") {
    const std::vector<double> K_true{8.0, 11.0, 9.5, 12.5, 10.0, 9.0};
    const auto truth = hexapod_truth(K_true, {1, 1, 1, 1, 1, 1},
                                     std::vector<Vec2>(6, {0, 0}));
    const auto logs = synthesize(truth, traj);
    // start from a deliberately wrong uniform guess
    const auto start = uniform_robot(6, 10.0, 1.0);
    FitConfig cfg;
    cfg.cov_penalty_weight = 0.0;
    const auto fit = fit_stiffness(start, logs, cfg);
    for (std::size_t j = 0; j < 6; ++j) {
      CHECK(fit.identifiable[j]);
      CHECK(fit.stiffness[j] == Approx(K_true[j]).epsilon(0.01));
    }
    CHECK(fit.final_cost < fit.initial_cost);
  }
  SECTION("regularization shrinks the spread of fitted constants") {
    const std::vector<double> K_true{9.0, 10.5, 10.0, 11.0, 9.5, 10.0};
    const auto truth = hexapod_truth(K_true, {1, 1, 1, 1, 1, 1},
                                     std::vector<Vec2>(6, {0, 0}));
    auto logs = synthesize(truth, traj, 99, 0.01);
    const auto start = uniform_robot(6, 10.0, 1.0);
    FitConfig loose;
    loose.cov_penalty_weight = 0.0;
    FitConfig tight;
    tight.cov_penalty_weight = 10.0;
    const auto a = fit_stiffness(start, logs, loose);
    const auto b = fit_stiffness(start, logs, tight);
    auto cov = [](const std::vector<double>& v) {
      double mean = 0, var = 0;
      for (double x : v) mean += x;
      mean /= v.size();
      for (double x : v) var += (x - mean) * (x - mean);
      return std::sqrt(var / v.size()) / mean;
    };
    CHECK(cov(b.stiffness) <= cov(a.stiffness) + 1e-12);
  }
  SECTION("legs that never load are flagged unidentifiable") {
    const auto truth = uniform_robot(6, 10.0, 1.0);
    auto logs = synthesize(truth, traj);
    for (auto& m : logs) m.normal_forces[4] = 0.0;  // leg 4 never measured loaded
    const auto fit = fit_stiffness(truth, logs, {0.0, 100, 1e-10, false, 1e-3});
    CHECK_FALSE(fit.identifiable[4]);
    CHECK(fit.stiffness[4] == Approx(10.0));  // untouched
  }
  SECTION("no usable frames raises InsufficientData") {
    const auto truth = uniform_robot(6, 10.0, 1.0);
    std::vector<MeasuredFrame> empty;
    CHECK_THROWS_AS(fit_stiffness(truth, empty), Error);
  }
}

TEST_CASE("fit_friction") {
  GaitSpec spec;
  spec.kind = GaitKind::MetachronalCubic;
  spec.duty = 2.0 / 3.0;
  spec.frequency = 0.4;
  const auto traj = gait_trajectory(spec, hexapod_geometry(), 1.0, 0.04);

  SECTION("noiseless round trip recovers mu and w within 1%") {
    const std::vector<double> mu_true{0.8, 1.1, 0.9, 1.3, 0.7, 1.0};
    std::vector<Vec2> w_true{{0.3, 0.1}, {0.0, 0.0}, {0.4, -0.2},
                             {0.2, 0.3}, {0.5, 0.0}, {0.1, -0.4}};
    const auto truth =
        hexapod_truth({10, 10, 10, 10, 10, 10}, mu_true, w_true);
    const auto logs = synthesize(truth, traj);
    const auto fits = fit_friction(truth, logs);
    for (std::size_t j = 0; j < 6; ++j) {
      CHECK(fits[j].mu == Approx(mu_true[j]).epsilon(0.01));
      // compare H matrices rather than w (sign ambiguity)
      const Mat2 Ht = h_anisotropic_body(mu_true[j], w_true[j], 1.0);
      const Mat2 Hf = h_anisotropic_body(fits[j].mu, fits[j].w, 1.0);
      CHECK(Hf.a00 == Approx(Ht.a00).epsilon(0.02));
      CHECK(Hf.a11 == Approx(Ht.a11).epsilon(0.02));
      CHECK(Hf.a01 == Approx(Ht.a01).margin(0.02));
      CHECK(fits[j].w.x >= 0.0);
    }
  }
  SECTION("isotropic truth fits a near-zero w") {
    const auto truth = uniform_robot(6, 10.0, 0.9);
    const auto logs = synthesize(truth, traj);
    const auto fits = fit_friction(truth, logs);
    for (const auto& f : fits) {
      CHECK(f.mu == Approx(0.9).epsilon(0.01));
      CHECK(f.w.norm() <= 0.05);
    }
  }
  SECTION("no slipping samples raises InsufficientData") {
    const auto truth = uniform_robot(6, 10.0, 1.0);
    auto logs = synthesize(truth, traj);
    for (auto& m : logs)
      m.foot_velocities.assign(6, Vec2{0, 0});
    CHECK_THROWS_AS(fit_friction(truth, logs), Error);
  }
}

TEST_CASE("fits are invariant to frame order") {
  GaitSpec spec;
  spec.kind = GaitKind::MetachronalCubic;
  spec.duty = 2.0 / 3.0;
  spec.frequency = 0.4;
  const auto traj = gait_trajectory(spec, hexapod_geometry(), 1.0, 0.05);
  const std::vector<double> K_true{9.0, 11.0, 10.0, 10.5, 9.5, 10.2};
  const auto truth =
      hexapod_truth(K_true, {1, 1, 1, 1, 1, 1}, std::vector<Vec2>(6, {0, 0}));
  auto logs = synthesize(truth, traj);
  const auto start = uniform_robot(6, 10.0, 1.0);
  FitConfig cfg;
  cfg.cov_penalty_weight = 0.0;
  const auto a = fit_stiffness(start, logs, cfg);
  std::reverse(logs.begin(), logs.end());
  const auto b = fit_stiffness(start, logs, cfg);
  for (std::size_t j = 0; j < 6; ++j)
    CHECK(a.stiffness[j] == Approx(b.stiffness[j]).margin(1e-6));
}
