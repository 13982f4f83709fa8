#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <random>
#include <thread>
#include <vector>

#if defined(__x86_64__) || defined(__i386__)
#include <x86intrin.h>
#endif

#include "multileg/frame_solve.hpp"
#include "multileg/gait.hpp"
#include "multileg/math.hpp"

// Runtime scaling and parallelization measurements on a synthetic disk robot.
// Solver outputs are seed-deterministic and independent of timing or thread
// count; only the clock readings vary run to run.

namespace multileg {

// Disk robot: N legs on the rim of a unit disk, each foot confined to its own
// non-overlapping wedge of the annulus around the rim.
struct DiskRobot {
  RobotModel model;
  std::vector<double> hip_angles;
  double wedge_half_angle = 0.0;  // radians, strictly inside the sector
  double radius_min = 0.7;
  double radius_max = 1.3;
};

inline DiskRobot disk_robot(std::size_t n_legs) {
  if (n_legs < 3) raise(errc::invalid_argument, "disk robot needs >= 3 legs");
  DiskRobot disk{uniform_robot(n_legs, 1.0, 1.0), {}, 0.0};
  disk.hip_angles.reserve(n_legs);
  for (std::size_t j = 0; j < n_legs; ++j)
    disk.hip_angles.push_back(2.0 * M_PI * static_cast<double>(j) /
                              static_cast<double>(n_legs));
  // 0.9 of the sector keeps wedges disjoint; the extra cap keeps the largest
  // angular gap between feet under pi, so small-N draws can never topple
  disk.wedge_half_angle =
      std::min(0.9 * M_PI / static_cast<double>(n_legs), 0.43);
  return disk;
}

// Uniform random pose/velocity inside each leg's wedge workspace.
template <class Rng>
ShapeFrame random_disk_frame(const DiskRobot& disk, Rng& rng) {
  ShapeFrame frame;
  const std::size_t n = disk.hip_angles.size();
  frame.q.reserve(n);
  frame.qdot.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double ang = disk.hip_angles[j] +
                       uniform(rng, -disk.wedge_half_angle, disk.wedge_half_angle);
    const double rad = uniform(rng, disk.radius_min, disk.radius_max);
    const double z = uniform(rng, -0.6, -0.4);
    frame.q.push_back({rad * std::cos(ang), rad * std::sin(ang), z});
    frame.qdot.push_back({uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0),
                          uniform(rng, -1.0, 1.0)});
  }
  return frame;
}

namespace detail {

// Cycle counter for sub-microsecond regions; the steady clock's ~30 ns
// resolution is too coarse for per-frame medians at small leg counts.
// Normalized percentiles only use tick ratios, so the unit cancels.
inline std::uint64_t timer_ticks() {
#if defined(__x86_64__) || defined(__i386__)
  return __rdtsc();
#else
  return static_cast<std::uint64_t>(
      std::chrono::steady_clock::now().time_since_epoch().count());
#endif
}

inline double ticks_per_second() {
  static const double rate = [] {
    const auto w0 = std::chrono::steady_clock::now();
    const std::uint64_t t0 = timer_ticks();
    while (std::chrono::steady_clock::now() - w0 < std::chrono::milliseconds(20)) {
    }
    const std::uint64_t t1 = timer_ticks();
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - w0).count();
    return static_cast<double>(t1 - t0) / secs;
  }();
  return rate;
}

}  // namespace detail

struct Percentiles {
  double p2_5 = 0.0;
  double p25 = 0.0;
  double p50 = 0.0;
  double p75 = 0.0;
  double p97_5 = 0.0;
};

inline double percentile(std::vector<double> sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double idx = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(idx);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = idx - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

inline Percentiles percentiles(std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  return {percentile(samples, 0.025), percentile(samples, 0.25),
          percentile(samples, 0.5), percentile(samples, 0.75),
          percentile(samples, 0.975)};
}

struct ScalingRow {
  std::size_t n_legs = 0;
  Percentiles normalized;    // per-frame solve time over the 3-leg median
  double median_seconds = 0.0;
  double output_checksum = 0.0;  // deterministic digest of solver outputs
};

struct ScalingReport {
  std::vector<ScalingRow> rows;
};

// Time full_frame_solve on `trials` random wedge poses per leg count.
// Two noise controls, both order-of-measurement only (outputs are untouched):
// each pose is solved three times and keeps its fastest repeat, and the leg
// counts are interleaved in rounds so host slowdowns spread over every N
// instead of poisoning whole blocks.
inline ScalingReport scaling_benchmark(const std::vector<std::size_t>& n_range,
                                       int trials = 1000, std::uint64_t seed = 1,
                                       int warmup = 50) {
  struct Block {
    DiskRobot disk;
    std::vector<ShapeFrame> frames;
    std::vector<double> ticks;
    double checksum = 0.0;
  };
  std::vector<Block> blocks;
  blocks.reserve(n_range.size());
  for (std::size_t n : n_range) {
    Block b{disk_robot(n), {}, {}, 0.0};
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(n));
    b.frames.reserve(static_cast<std::size_t>(trials + warmup));
    for (int i = 0; i < trials + warmup; ++i)
      b.frames.push_back(random_disk_frame(b.disk, rng));
    b.ticks.reserve(static_cast<std::size_t>(trials));
    blocks.push_back(std::move(b));
  }

  const int rounds = 10;
  for (int round = 0; round < rounds; ++round) {
    for (Block& b : blocks) {
      const int total = trials + warmup;
      const int lo = total * round / rounds;
      const int hi = total * (round + 1) / rounds;
      for (int i = lo; i < hi; ++i) {
        std::uint64_t best = ~std::uint64_t{0};
        for (int rep = 0; rep < 3; ++rep) {
          const std::uint64_t t0 = detail::timer_ticks();
          const FullFrameResult res = full_frame_solve(b.disk.model, b.frames[i]);
          const std::uint64_t t1 = detail::timer_ticks();
          best = std::min(best, t1 - t0);
          if (rep == 0)
            b.checksum += res.planar.vel.v_xy.x + res.planar.vel.v_xy.y +
                          res.planar.vel.omega + res.support.state.z0;
        }
        if (i >= warmup) b.ticks.push_back(static_cast<double>(best));
      }
    }
  }

  ScalingReport report;
  double base_median = 0.0;
  for (Block& b : blocks) {
    ScalingRow row;
    row.n_legs = b.disk.hip_angles.size();
    row.output_checksum = b.checksum;
    std::vector<double> sorted = b.ticks;
    std::sort(sorted.begin(), sorted.end());
    row.median_seconds = percentile(sorted, 0.5) / detail::ticks_per_second();
    if (report.rows.empty()) base_median = percentile(sorted, 0.5);
    for (double& t : b.ticks) t /= base_median;
    row.normalized = percentiles(b.ticks);
    report.rows.push_back(row);
  }
  return report;
}

struct ParallelRow {
  int threads = 0;
  Percentiles overhead;  // wall * M / single-thread median wall
  Pose2 final_pose;      // must match across thread counts
};

struct ParallelReport {
  std::vector<ParallelRow> rows;
};

// Solve hexapod frames split across M workers, then compose the resulting
// per-frame displacements in one sequential pass. Deterministic output: each
// frame's twist lands in its own slot regardless of scheduling.
inline ParallelReport parallel_benchmark(int n_frames = 10000,
                                         int max_threads = 4,
                                         std::uint64_t seed = 1, int reps = 15,
                                         double dt = 0.01) {
  const DiskRobot disk = disk_robot(6);
  std::mt19937_64 rng(seed);
  std::vector<ShapeFrame> frames;
  frames.reserve(static_cast<std::size_t>(n_frames));
  for (int i = 0; i < n_frames; ++i) frames.push_back(random_disk_frame(disk, rng));

  using clock = std::chrono::steady_clock;
  auto run_once = [&](int workers, std::vector<Pose2>& steps) {
    const auto t0 = clock::now();
    auto work = [&](int w) {
      const int lo = static_cast<int>(static_cast<std::int64_t>(n_frames) * w / workers);
      const int hi =
          static_cast<int>(static_cast<std::int64_t>(n_frames) * (w + 1) / workers);
      for (int i = lo; i < hi; ++i) {
        const FullFrameResult res = full_frame_solve(disk.model, frames[i]);
        const Vec2 u = res.planar.vel.v_xy;  // theta = 0 here: world == body
        steps[i] = se2_exp(u, res.planar.vel.omega, dt);
      }
    };
    if (workers == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(static_cast<std::size_t>(workers));
      for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
      for (auto& th : pool) th.join();
    }
    Pose2 pose = Pose2::identity();
    for (const Pose2& s : steps) pose = pose.compose(s);
    const auto t1 = clock::now();
    return std::pair<double, Pose2>(std::chrono::duration<double>(t1 - t0).count(),
                                    pose);
  };

  ParallelReport report;
  double single_median = 0.0;
  std::vector<Pose2> steps(static_cast<std::size_t>(n_frames));
  for (int m = 1; m <= max_threads; ++m) {
    std::vector<double> walls;
    Pose2 final_pose = Pose2::identity();
    run_once(m, steps);  // warmup
    for (int rep = 0; rep < reps; ++rep) {
      auto [wall, pose] = run_once(m, steps);
      walls.push_back(wall);
      final_pose = pose;
    }
    std::vector<double> sorted = walls;
    std::sort(sorted.begin(), sorted.end());
    if (m == 1) single_median = percentile(sorted, 0.5);
    for (double& w : walls) w = w * static_cast<double>(m) / single_median;
    ParallelRow row;
    row.threads = m;
    row.overhead = percentiles(walls);
    row.final_pose = final_pose;
    report.rows.push_back(row);
  }
  return report;
}

// Associative pairwise composition of planar displacements.
inline Pose2 prefix_compose(const std::vector<Pose2>& steps) {
  if (steps.empty()) return Pose2::identity();
  std::vector<Pose2> level = steps;
  while (level.size() > 1) {
    std::vector<Pose2> next;
    next.reserve((level.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < level.size(); i += 2)
      next.push_back(level[i].compose(level[i + 1]));
    if (level.size() % 2 == 1) next.push_back(level.back());
    level = std::move(next);
  }
  return level.front();
}

}  // namespace multileg
