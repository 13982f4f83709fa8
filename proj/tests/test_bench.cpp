#include <catch2/catch.hpp>
#include <random>

#include "multileg/bench.hpp"

using namespace multileg;

TEST_CASE("disk_robot layout") {
  SECTION("hips are equally spaced") {
    const auto disk = disk_robot(3);
    CHECK(disk.hip_angles[0] == Approx(0.0));
    CHECK(disk.hip_angles[1] == Approx(2.0 * M_PI / 3.0));
    CHECK(disk.hip_angles[2] == Approx(4.0 * M_PI / 3.0));
  }
  SECTION("wedges are pairwise disjoint for any leg count") {
    for (std::size_t n : {3u, 7u, 25u, 50u}) {
      const auto disk = disk_robot(n);
      const double sector = 2.0 * M_PI / static_cast<double>(n);
      CHECK(2.0 * disk.wedge_half_angle < sector);
    }
  }
  SECTION("random frames stay inside their wedges") {
    const auto disk = disk_robot(50);
    std::mt19937_64 rng(7);
    for (int i = 0; i < 20; ++i) {
      const auto frame = random_disk_frame(disk, rng);
      for (std::size_t j = 0; j < 50; ++j) {
        const double ang = std::atan2(frame.q[j].y, frame.q[j].x);
        double delta = ang - disk.hip_angles[j];
        while (delta > M_PI) delta -= 2.0 * M_PI;
        while (delta < -M_PI) delta += 2.0 * M_PI;
        CHECK(std::abs(delta) <= disk.wedge_half_angle + 1e-12);
        CHECK(frame.q[j].z >= -0.6);
        CHECK(frame.q[j].z <= -0.4);
      }
    }
  }
  SECTION("fewer than three legs is rejected") {
    CHECK_THROWS_AS(disk_robot(2), Error);
  }
}

TEST_CASE("scaling benchmark output structure and determinism") {
  const std::vector<std::size_t> range{3, 6, 10};
  const auto a = scaling_benchmark(range, 40, 123, 5);
  const auto b = scaling_benchmark(range, 40, 123, 5);
  REQUIRE(a.rows.size() == 3);
  CHECK(a.rows[0].n_legs == 3);
  // 3-leg median normalizes to one by construction
  CHECK(a.rows[0].normalized.p50 == Approx(1.0));
  for (const auto& row : a.rows) {
    CHECK(row.median_seconds > 0.0);
    CHECK(row.normalized.p2_5 <= row.normalized.p25);
    CHECK(row.normalized.p25 <= row.normalized.p50);
    CHECK(row.normalized.p50 <= row.normalized.p75);
    CHECK(row.normalized.p75 <= row.normalized.p97_5);
  }
  // identical seeds give identical solver outputs, timings aside
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(a.rows[i].output_checksum == b.rows[i].output_checksum);
}

TEST_CASE("parallel benchmark composes identical poses at every thread count") {
  const auto report = parallel_benchmark(400, 4, 11, 3, 0.01);
  REQUIRE(report.rows.size() == 4);
  CHECK(report.rows[0].threads == 1);
  const Pose2 ref = report.rows[0].final_pose;
  for (const auto& row : report.rows) {
    CHECK(row.final_pose.p.x == ref.p.x);
    CHECK(row.final_pose.p.y == ref.p.y);
    CHECK(row.final_pose.theta == ref.theta);
    CHECK(row.overhead.p50 > 0.0);
  }
  // single-thread overhead is one by definition of the normalization
  CHECK(report.rows[0].overhead.p50 == Approx(1.0).margin(0.35));
}

TEST_CASE("prefix_compose equals the sequential fold") {
  SECTION("identities compose to the identity") {
    const std::vector<Pose2> steps(17, Pose2::identity());
    const Pose2 out = prefix_compose(steps);
    CHECK(out.p.norm() == 0.0);
    CHECK(out.theta == 0.0);
  }
  SECTION("pure translations sum") {
    std::vector<Pose2> steps;
    for (int i = 0; i < 10; ++i) steps.push_back({{0.1, -0.2}, 0.0});
    const Pose2 out = prefix_compose(steps);
    CHECK(out.p.x == Approx(1.0).margin(1e-12));
    CHECK(out.p.y == Approx(-2.0).margin(1e-12));
  }
  SECTION("1000 random displacements match within 1e-12") {
    std::mt19937_64 rng(31);
    std::vector<Pose2> steps;
    for (int i = 0; i < 1000; ++i)
      steps.push_back({{uniform(rng, -0.01, 0.01), uniform(rng, -0.01, 0.01)},
                       uniform(rng, -0.02, 0.02)});
    Pose2 seq = Pose2::identity();
    for (const auto& s : steps) seq = seq.compose(s);
    const Pose2 tree = prefix_compose(steps);
    CHECK(tree.p.x == Approx(seq.p.x).margin(1e-12));
    CHECK(tree.p.y == Approx(seq.p.y).margin(1e-12));
    CHECK(tree.theta == Approx(seq.theta).margin(1e-12));
  }
  SECTION("empty input is the identity") {
    const Pose2 out = prefix_compose({});
    CHECK(out.theta == 0.0);
  }
}
