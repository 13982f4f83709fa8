// Command-line front end: solve single frames, simulate trajectories,
// generate gaits, fit parameters from logs, run the benchmarks, and emit the
// friction comparison map. Exit codes: 0 ok, 2 input error, 3 insufficient
// data, 4 solver non-convergence.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include "multileg/config.hpp"
#include "multileg/multileg.hpp"

namespace {

using namespace multileg;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitData = 3;
constexpr int kExitSolver = 4;

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case errc::insufficient_data:
    case errc::degenerate_fit:
      return kExitData;
    case errc::no_convergence:
      return kExitSolver;
    default:
      return kExitInput;
  }
}

int max_threads_from_env(int requested) {
  if (const char* env = std::getenv("MULTILEG_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) return std::min(requested, cap);
  }
  return requested;
}

FrictionModel model_from_flag(const std::string& name, const RobotConfig& cfg) {
  if (name == "viscous") return FrictionModel::viscous_coulomb();
  if (name == "coulomb") return FrictionModel::smoothed_coulomb(cfg.solver.homotopy.eps0);
  if (name.empty()) return cfg.solver.model;
  raise(errc::invalid_argument, "unknown model '" + name + "' (viscous|coulomb)");
}

void print_frame_solution(const RobotModel& robot, const FullFrameResult& res,
                          bool csv) {
  if (csv) {
    std::cout << "vx,vy,omega,z0,alpha_x,alpha_y\n"
              << io::fmt(res.planar.vel.v_xy.x) << "," << io::fmt(res.planar.vel.v_xy.y)
              << "," << io::fmt(res.planar.vel.omega) << ","
              << io::fmt(res.support.state.z0) << ","
              << io::fmt(res.support.state.alpha_x) << ","
              << io::fmt(res.support.state.alpha_y) << "\n";
    std::cout << "leg,contact,Fz,Fx,Fy\n";
    for (std::size_t j = 0; j < robot.leg_count(); ++j) {
      const bool c = res.support.normal_forces[j] > 0.0;
      std::cout << j << "," << (c ? 1 : 0) << ","
                << io::fmt(res.support.normal_forces[j]) << ","
                << io::fmt(res.planar.foot_forces[j].x) << ","
                << io::fmt(res.planar.foot_forces[j].y) << "\n";
    }
    return;
  }
  std::cout << "body velocity: vx=" << res.planar.vel.v_xy.x
            << " vy=" << res.planar.vel.v_xy.y << " omega=" << res.planar.vel.omega
            << "\n";
  std::cout << "support state: z0=" << res.support.state.z0
            << " alpha_x=" << res.support.state.alpha_x
            << " alpha_y=" << res.support.state.alpha_y << "\n";
  std::cout << "contacts:";
  for (std::size_t j : res.support.contacts) std::cout << " " << j;
  std::cout << "\nper-leg forces (Fz, Fx, Fy):\n";
  for (std::size_t j = 0; j < robot.leg_count(); ++j)
    std::cout << "  leg " << j << ": " << res.support.normal_forces[j] << ", "
              << res.planar.foot_forces[j].x << ", " << res.planar.foot_forces[j].y
              << "\n";
}

std::vector<MeasuredFrame> measured_from_run(const ShapeTrajectory& traj,
                                             const TrajectoryLog& log) {
  std::vector<MeasuredFrame> out;
  out.reserve(traj.frames.size());
  for (std::size_t i = 0; i < traj.frames.size(); ++i) {
    MeasuredFrame m;
    m.shape = traj.frames[i];
    m.theta = log.frames[i].pose.theta;
    m.normal_forces = log.frames[i].normal_forces;
    m.planar_forces = log.frames[i].foot_forces;
    m.foot_velocities.assign(log.leg_count, Vec2{0, 0});
    const Mat2 Rinv = Mat2::rotation(-log.frames[i].pose.theta);
    const Mat2 R = Mat2::rotation(log.frames[i].pose.theta);
    const Vec2 u = Rinv * log.frames[i].vel.v_xy;
    for (std::size_t j : log.frames[i].contacts) {
      const Vec2 vb = u + log.frames[i].vel.omega * perp(traj.frames[i].q[j].xy()) +
                      traj.frames[i].qdot[j].xy();
      m.foot_velocities[j] = R * vb;
    }
    out.push_back(std::move(m));
  }
  return out;
}

int cmd_solve_frame(const std::string& config_path, const std::string& frame_path,
                    const std::string& model_flag, std::size_t row, bool csv) {
  const RobotConfig cfg = load_config(config_path);
  const RobotModel robot = cfg.model();
  const ShapeTrajectory traj = read_shape_csv(frame_path);
  if (traj.frames.empty()) raise(errc::invalid_argument, "no frames in input");
  if (row >= traj.frames.size())
    raise(errc::invalid_argument, "row out of range");
  const FrictionModel model = model_from_flag(model_flag, cfg);
  const auto res = full_frame_solve(robot, traj.frames[row], 0.0, model,
                                    cfg.solver.homotopy);
  print_frame_solution(robot, res, csv);
  return kExitOk;
}

int cmd_simulate(const std::string& config_path, const std::string& traj_path,
                 const std::string& model_flag, const std::string& out_path,
                 bool compare, bool fit_log) {
  const RobotConfig cfg = load_config(config_path);
  const RobotModel robot = cfg.model();
  const ShapeTrajectory traj = read_shape_csv(traj_path);
  if (traj.frames.empty()) raise(errc::invalid_argument, "no frames in trajectory");

  const FrictionModel model = model_from_flag(model_flag, cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const TrajectoryLog log = simulate(robot, traj, model, {}, cfg.solver.homotopy);
  const auto t1 = std::chrono::steady_clock::now();
  const double ms_per_frame =
      std::chrono::duration<double, std::milli>(t1 - t0).count() /
      static_cast<double>(traj.frames.size());

  if (!out_path.empty()) {
    if (fit_log) {
      const auto measured = measured_from_run(traj, log);
      write_log_csv(out_path, log, &traj, &measured);
    } else {
      write_log_csv(out_path, log);
    }
  }

  const Vec2 displacement = log.frames.back().pose.p_xy;
  std::cout << "frames: " << log.frames.size() << "\n"
            << "displacement: " << displacement.norm() << " (x=" << displacement.x
            << ", y=" << displacement.y << ")\n"
            << "failed frames: " << log.solver_failures << "\n"
            << "ms/frame: " << ms_per_frame << "\n";

  if (compare) {
    const FrictionModel other =
        (model.kind == FrictionKind::SmoothedCoulomb)
            ? FrictionModel::viscous_coulomb()
            : FrictionModel::smoothed_coulomb(cfg.solver.homotopy.eps0);
    const TrajectoryLog log2 = simulate(robot, traj, other, {}, cfg.solver.homotopy);
    const auto st = error_stats(log, log2);
    std::cout << "model comparison RMSE: heading=" << st.v_heading
              << " side=" << st.v_side << " turning=" << st.omega << "\n";
    if (!out_path.empty()) write_log_csv(out_path + ".other.csv", log2);
  }
  return kExitOk;
}

int cmd_gait(const std::string& config_path, const std::string& kind, double cycles,
             double dt, const std::string& out_path) {
  const RobotConfig cfg = load_config(config_path);
  GaitSpec spec = cfg.gait;
  if (kind == "tripod") {
    spec.kind = GaitKind::BuehlerTripod;
  } else if (kind == "metachronal") {
    spec.kind = GaitKind::MetachronalCubic;
    spec.duty = 2.0 / 3.0;
  } else if (!kind.empty()) {
    raise(errc::invalid_argument, "unknown gait kind '" + kind + "'");
  }
  const auto traj = gait_trajectory(spec, cfg.leg_geometry(), cycles, dt);
  if (traj.frames.empty()) raise(errc::invalid_argument, "gait produced no frames");
  if (out_path.empty())
    write_shape_csv(std::cout, traj);
  else
    write_shape_csv(out_path, traj);
  std::cerr << "frames: " << traj.frames.size() << "\n";
  return kExitOk;
}

int cmd_fit(const std::string& config_path, const std::string& log_path,
            const std::string& what, const std::string& out_path) {
  const RobotConfig cfg = load_config(config_path);
  const RobotModel robot = cfg.model();
  const auto measured = read_fit_log_csv(log_path, robot.leg_count());
  RobotConfig fitted = cfg;
  if (what == "stiffness") {
    const auto fit = fit_stiffness(robot, measured);
    std::cout << "cost: " << fit.initial_cost << " -> " << fit.final_cost << "\n";
    for (std::size_t j = 0; j < robot.leg_count(); ++j) {
      fitted.legs[j].stiffness = fit.stiffness[j];
      std::cout << "  K" << j << " = " << fit.stiffness[j]
                << (fit.identifiable[j] ? "" : "  (unidentifiable, kept)") << "\n";
    }
  } else if (what == "friction") {
    const auto fits = fit_friction(robot, measured);
    for (std::size_t j = 0; j < robot.leg_count(); ++j) {
      fitted.legs[j].mu = fits[j].mu;
      fitted.legs[j].traction_dir = fits[j].w;
      std::cout << "  mu" << j << " = " << fits[j].mu << "  w = (" << fits[j].w.x
                << ", " << fits[j].w.y << ")  samples = " << fits[j].samples << "\n";
    }
  } else {
    raise(errc::invalid_argument, "--what must be stiffness or friction");
  }
  if (!out_path.empty()) {
    save_config(out_path, fitted);
    std::cout << "wrote " << out_path << "\n";
  }
  return kExitOk;
}

int cmd_bench(bool scaling, bool parallel, std::uint64_t seed, int trials,
              int frames, const std::string& out_path) {
  if (!scaling && !parallel)
    raise(errc::invalid_argument, "pick --scaling or --parallel");
  if (scaling) {
    std::vector<std::size_t> range;
    for (std::size_t n = 3; n <= 50; ++n) range.push_back(n);
    const auto report = scaling_benchmark(range, trials, seed);
    std::ofstream os(out_path.empty() ? "scaling.csv" : out_path);
    write_scaling_csv(os, report);
    double checksum = 0.0;
    for (const auto& row : report.rows) checksum += row.output_checksum;
    std::cout << "scaling: 50-leg median over 3-leg median = "
              << report.rows.back().normalized.p50 << "\n"
              << "output checksum: " << io::fmt(checksum) << "\n";
  }
  if (parallel) {
    const int max_m = max_threads_from_env(4);
    const auto report = parallel_benchmark(frames, max_m, seed);
    std::ofstream os(out_path.empty() ? "parallel.csv" : out_path);
    write_parallel_csv(os, report);
    std::cout << "parallel overhead medians:";
    for (const auto& row : report.rows)
      std::cout << " M" << row.threads << "=" << row.overhead.p50;
    std::cout << "\n";
    const Pose2 ref = report.rows.front().final_pose;
    bool identical = true;
    for (const auto& row : report.rows)
      identical = identical && row.final_pose.p.x == ref.p.x &&
                  row.final_pose.p.y == ref.p.y && row.final_pose.theta == ref.theta;
    std::cout << "composed poses identical across thread counts: "
              << (identical ? "yes" : "NO") << "\n";
  }
  return kExitOk;
}

int cmd_friction_map(const std::string& out_path, double radius, double step) {
  const auto grid = relative_error_map(radius, step);
  if (out_path.empty()) {
    write_friction_map_csv(std::cout, grid);
  } else {
    std::ofstream os(out_path);
    if (!os) raise(errc::invalid_argument, "cannot open " + out_path);
    write_friction_map_csv(os, grid);
  }
  double worst = 0.0;
  for (const auto& p : grid) {
    const double dx = p.vx - 1.0, dy = p.vy;
    if (dx * dx + dy * dy <= 0.2 * 0.2 + 1e-12) worst = std::max(worst, p.rel_err);
  }
  std::cerr << "rows: " << grid.size() << ", max rel_err inside |dv|<=0.2: " << worst
            << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quasi-static multi-legged locomotion solver"};
  app.require_subcommand(1);

  std::string config_path, input_path, out_path, model_flag, kind, what;
  std::size_t row = 0;
  bool csv = false, compare = false, fit_log = false;
  double cycles = 1.0, dt = 0.01, radius = 0.6, step = 0.01;
  bool scaling = false, parallel = false;
  std::uint64_t seed = 1;
  int trials = 1000, frames = 10000;

  auto* solve = app.add_subcommand("solve-frame", "solve one shape frame");
  solve->add_option("config", config_path)->required();
  solve->add_option("frame", input_path, "shape trajectory CSV")->required();
  solve->add_option("--model", model_flag, "viscous|coulomb");
  solve->add_option("--row", row, "frame row to solve (default 0)");
  solve->add_flag("--csv", csv, "machine-readable output");

  auto* sim = app.add_subcommand("simulate", "simulate a shape trajectory");
  sim->add_option("config", config_path)->required();
  sim->add_option("trajectory", input_path)->required();
  sim->add_option("--model", model_flag, "viscous|coulomb");
  sim->add_option("--out", out_path, "trajectory log CSV");
  sim->add_flag("--compare", compare, "also run the other friction model");
  sim->add_flag("--fit-log", fit_log, "append measured + shape columns for fitting");

  auto* gait = app.add_subcommand("gait", "emit a gait shape trajectory");
  gait->add_option("config", config_path)->required();
  gait->add_option("--kind", kind, "tripod|metachronal");
  gait->add_option("--cycles", cycles, "number of gait cycles");
  gait->add_option("--dt", dt, "sample period [s]");
  gait->add_option("--out", out_path, "output CSV (stdout if omitted)");

  auto* fit = app.add_subcommand("fit", "fit parameters from a measured log");
  fit->add_option("config", config_path)->required();
  fit->add_option("log", input_path, "log CSV with measured/shape columns")->required();
  fit->add_option("--what", what, "stiffness|friction")->required();
  fit->add_option("--out", out_path, "write fitted config JSON");

  auto* bench = app.add_subcommand("bench", "runtime benchmarks");
  bench->add_flag("--scaling", scaling, "leg-count scaling benchmark");
  bench->add_flag("--parallel", parallel, "thread overhead benchmark");
  bench->add_option("--seed", seed);
  bench->add_option("--trials", trials, "frames per leg count (scaling)");
  bench->add_option("--frames", frames, "frames (parallel)");
  bench->add_option("--out", out_path, "report CSV");

  auto* fmap = app.add_subcommand("friction-map", "viscous vs Coulomb error grid");
  fmap->add_option("--out", out_path, "output CSV (stdout if omitted)");
  fmap->add_option("--radius", radius, "half-width of the grid around (1,0)");
  fmap->add_option("--step", step, "grid spacing");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed())
      return cmd_solve_frame(config_path, input_path, model_flag, row, csv);
    if (sim->parsed())
      return cmd_simulate(config_path, input_path, model_flag, out_path, compare,
                          fit_log);
    if (gait->parsed()) return cmd_gait(config_path, kind, cycles, dt, out_path);
    if (fit->parsed()) return cmd_fit(config_path, input_path, what, out_path);
    if (bench->parsed())
      return cmd_bench(scaling, parallel, seed, trials, frames, out_path);
    if (fmap->parsed()) return cmd_friction_map(out_path, radius, step);
  } catch (const multileg::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
