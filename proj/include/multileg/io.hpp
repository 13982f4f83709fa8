#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "multileg/bench.hpp"
#include "multileg/fitting.hpp"
#include "multileg/friction.hpp"
#include "multileg/trajectory.hpp"

// CSV readers/writers. All files are UTF-8 comma-separated with one header
// row; floats are written with 17 significant digits so they round-trip.

namespace multileg {

namespace io {

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    // trim spaces
    std::size_t b = cell.find_first_not_of(" \t\r");
    std::size_t e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string()
                                         : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

inline double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) raise(errc::invalid_argument, "trailing junk in " + what);
    return v;
  } catch (const Error&) {
    throw;
  } catch (...) {
    raise(errc::invalid_argument, "cannot parse '" + s + "' as " + what);
  }
}

}  // namespace io

// --- Shape trajectory ---------------------------------------------------------
// Columns: t, then per leg j: q{j}x, q{j}y, q{j}z, qd{j}x, qd{j}y, qd{j}z.

inline void write_shape_csv(std::ostream& os, const ShapeTrajectory& traj) {
  const std::size_t n = traj.frames.empty() ? 0 : traj.frames.front().q.size();
  os << "t";
  for (std::size_t j = 0; j < n; ++j) {
    const std::string J = std::to_string(j);
    os << ",q" << J << "x,q" << J << "y,q" << J << "z,qd" << J << "x,qd" << J
       << "y,qd" << J << "z";
  }
  os << "\n";
  for (const auto& f : traj.frames) {
    os << io::fmt(f.time);
    for (std::size_t j = 0; j < n; ++j)
      os << "," << io::fmt(f.q[j].x) << "," << io::fmt(f.q[j].y) << ","
         << io::fmt(f.q[j].z) << "," << io::fmt(f.qdot[j].x) << ","
         << io::fmt(f.qdot[j].y) << "," << io::fmt(f.qdot[j].z);
    os << "\n";
  }
}

inline void write_shape_csv(const std::string& path, const ShapeTrajectory& traj) {
  std::ofstream os(path);
  if (!os) raise(errc::invalid_argument, "cannot open " + path + " for writing");
  write_shape_csv(os, traj);
}

inline ShapeTrajectory read_shape_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line))
    raise(errc::invalid_argument, "empty trajectory file");
  const auto header = io::split_csv_line(line);
  if (header.empty() || header[0] != "t")
    raise(errc::invalid_argument, "trajectory header must start with t");
  if ((header.size() - 1) % 6 != 0)
    raise(errc::invalid_argument, "trajectory header is not t + 6 columns per leg");
  const std::size_t n = (header.size() - 1) / 6;

  ShapeTrajectory traj;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = io::split_csv_line(line);
    if (cells.size() != header.size())
      raise(errc::invalid_argument, "trajectory row width mismatch");
    ShapeFrame f;
    f.time = io::parse_double(cells[0], "t");
    f.q.resize(n);
    f.qdot.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t base = 1 + 6 * j;
      f.q[j] = {io::parse_double(cells[base + 0], "q"),
                io::parse_double(cells[base + 1], "q"),
                io::parse_double(cells[base + 2], "q")};
      f.qdot[j] = {io::parse_double(cells[base + 3], "qd"),
                   io::parse_double(cells[base + 4], "qd"),
                   io::parse_double(cells[base + 5], "qd")};
    }
    traj.frames.push_back(std::move(f));
  }
  if (traj.frames.size() >= 2) {
    traj.dt = traj.frames[1].time - traj.frames[0].time;
    if (!(traj.dt > 0.0))
      raise(errc::invalid_argument, "trajectory times must increase");
    for (std::size_t i = 1; i < traj.frames.size(); ++i) {
      const double gap = traj.frames[i].time - traj.frames[i - 1].time;
      if (std::abs(gap - traj.dt) > 1e-9 * std::max(1.0, traj.dt))
        raise(errc::invalid_argument, "trajectory sampling must be uniform");
    }
  }
  return traj;
}

inline ShapeTrajectory read_shape_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) raise(errc::invalid_argument, "cannot open " + path);
  return read_shape_csv(is);
}

// --- Trajectory log -----------------------------------------------------------
// Columns: t, x, y, theta, z, alpha_x, alpha_y, vx, vy, omega,
//          Fz{j}..., Fx{j}..., Fy{j}..., contact{j}..., failed
// With `measured`, appends mFz{j}, mFx{j}, mFy{j}, pvx{j}, pvy{j} and the
// shape columns q/qd so a log is self-contained for parameter fitting.

inline void write_log_csv(std::ostream& os, const TrajectoryLog& log,
                          const ShapeTrajectory* shape = nullptr,
                          const std::vector<MeasuredFrame>* measured = nullptr) {
  const std::size_t n = log.leg_count;
  auto legcols = [&](const char* stem) {
    std::string s;
    for (std::size_t j = 0; j < n; ++j) s += "," + std::string(stem) + std::to_string(j);
    return s;
  };
  os << "t,x,y,theta,z,alpha_x,alpha_y,vx,vy,omega" << legcols("Fz")
     << legcols("Fx") << legcols("Fy") << legcols("contact") << ",failed";
  if (measured) os << legcols("mFz") << legcols("mFx") << legcols("mFy")
                   << legcols("pvx") << legcols("pvy");
  if (shape) {
    for (std::size_t j = 0; j < n; ++j) {
      const std::string J = std::to_string(j);
      os << ",q" << J << "x,q" << J << "y,q" << J << "z,qd" << J << "x,qd" << J
         << "y,qd" << J << "z";
    }
  }
  os << "\n";
  for (std::size_t i = 0; i < log.frames.size(); ++i) {
    const FrameLog& f = log.frames[i];
    const double t = static_cast<double>(i) * log.dt;
    os << io::fmt(t) << "," << io::fmt(f.pose.p_xy.x) << ","
       << io::fmt(f.pose.p_xy.y) << "," << io::fmt(f.pose.theta) << ","
       << io::fmt(f.pose.z0) << "," << io::fmt(f.pose.alpha_x) << ","
       << io::fmt(f.pose.alpha_y) << "," << io::fmt(f.vel.v_xy.x) << ","
       << io::fmt(f.vel.v_xy.y) << "," << io::fmt(f.vel.omega);
    for (std::size_t j = 0; j < n; ++j) os << "," << io::fmt(f.normal_forces[j]);
    for (std::size_t j = 0; j < n; ++j) os << "," << io::fmt(f.foot_forces[j].x);
    for (std::size_t j = 0; j < n; ++j) os << "," << io::fmt(f.foot_forces[j].y);
    std::vector<char> mask(n, 0);
    for (std::size_t j : f.contacts) mask[j] = 1;
    for (std::size_t j = 0; j < n; ++j) os << "," << (mask[j] ? 1 : 0);
    os << "," << (f.failed ? 1 : 0);
    if (measured) {
      const MeasuredFrame& m = (*measured)[i];
      for (std::size_t j = 0; j < n; ++j) os << "," << io::fmt(m.normal_forces[j]);
      for (std::size_t j = 0; j < n; ++j) os << "," << io::fmt(m.planar_forces[j].x);
      for (std::size_t j = 0; j < n; ++j) os << "," << io::fmt(m.planar_forces[j].y);
      for (std::size_t j = 0; j < n; ++j) os << "," << io::fmt(m.foot_velocities[j].x);
      for (std::size_t j = 0; j < n; ++j) os << "," << io::fmt(m.foot_velocities[j].y);
    }
    if (shape) {
      const ShapeFrame& sf = shape->frames[i];
      for (std::size_t j = 0; j < n; ++j)
        os << "," << io::fmt(sf.q[j].x) << "," << io::fmt(sf.q[j].y) << ","
           << io::fmt(sf.q[j].z) << "," << io::fmt(sf.qdot[j].x) << ","
           << io::fmt(sf.qdot[j].y) << "," << io::fmt(sf.qdot[j].z);
    }
    os << "\n";
  }
}

inline void write_log_csv(const std::string& path, const TrajectoryLog& log,
                          const ShapeTrajectory* shape = nullptr,
                          const std::vector<MeasuredFrame>* measured = nullptr) {
  std::ofstream os(path);
  if (!os) raise(errc::invalid_argument, "cannot open " + path + " for writing");
  write_log_csv(os, log, shape, measured);
}

// Parse a measured log (written with shape + measured columns) back into the
// frames the fitting module consumes.
inline std::vector<MeasuredFrame> read_fit_log_csv(std::istream& is,
                                                   std::size_t n_legs) {
  std::string line;
  if (!std::getline(is, line)) raise(errc::invalid_argument, "empty log file");
  const auto header = io::split_csv_line(line);
  auto find = [&](const std::string& name) -> std::ptrdiff_t {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<std::ptrdiff_t>(i);
    return -1;
  };
  const std::ptrdiff_t theta_col = find("theta");
  if (theta_col < 0) raise(errc::invalid_argument, "log lacks theta column");
  if (find("mFz0") < 0 || find("pvx0") < 0 || find("q0x") < 0)
    raise(errc::invalid_argument,
          "log lacks measured-force/shape columns needed for fitting");

  std::vector<std::ptrdiff_t> mfz(n_legs), mfx(n_legs), mfy(n_legs), pvx(n_legs),
      pvy(n_legs), qx(n_legs), qy(n_legs), qz(n_legs), qdx(n_legs), qdy(n_legs),
      qdz(n_legs);
  for (std::size_t j = 0; j < n_legs; ++j) {
    const std::string J = std::to_string(j);
    mfz[j] = find("mFz" + J); mfx[j] = find("mFx" + J); mfy[j] = find("mFy" + J);
    pvx[j] = find("pvx" + J); pvy[j] = find("pvy" + J);
    qx[j] = find("q" + J + "x"); qy[j] = find("q" + J + "y"); qz[j] = find("q" + J + "z");
    qdx[j] = find("qd" + J + "x"); qdy[j] = find("qd" + J + "y");
    qdz[j] = find("qd" + J + "z");
    if (mfz[j] < 0 || mfx[j] < 0 || mfy[j] < 0 || pvx[j] < 0 || pvy[j] < 0 ||
        qx[j] < 0 || qy[j] < 0 || qz[j] < 0 || qdx[j] < 0 || qdy[j] < 0 || qdz[j] < 0)
      raise(errc::invalid_argument,
            "log is missing fitting columns for leg " + J);
  }

  std::vector<MeasuredFrame> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = io::split_csv_line(line);
    if (cells.size() != header.size())
      raise(errc::invalid_argument, "log row width mismatch");
    auto at = [&](std::ptrdiff_t c) {
      return io::parse_double(cells[static_cast<std::size_t>(c)], "log value");
    };
    MeasuredFrame m;
    m.theta = at(theta_col);
    m.shape.q.resize(n_legs);
    m.shape.qdot.resize(n_legs);
    m.normal_forces.resize(n_legs);
    m.planar_forces.resize(n_legs);
    m.foot_velocities.resize(n_legs);
    for (std::size_t j = 0; j < n_legs; ++j) {
      m.shape.q[j] = {at(qx[j]), at(qy[j]), at(qz[j])};
      m.shape.qdot[j] = {at(qdx[j]), at(qdy[j]), at(qdz[j])};
      m.normal_forces[j] = at(mfz[j]);
      m.planar_forces[j] = {at(mfx[j]), at(mfy[j])};
      m.foot_velocities[j] = {at(pvx[j]), at(pvy[j])};
    }
    out.push_back(std::move(m));
  }
  return out;
}

inline std::vector<MeasuredFrame> read_fit_log_csv(const std::string& path,
                                                   std::size_t n_legs) {
  std::ifstream is(path);
  if (!is) raise(errc::invalid_argument, "cannot open " + path);
  return read_fit_log_csv(is, n_legs);
}

// --- Reports ------------------------------------------------------------------

inline void write_scaling_csv(std::ostream& os, const ScalingReport& report) {
  os << "n_legs,p2.5,p25,p50,p75,p97.5\n";
  for (const auto& row : report.rows)
    os << row.n_legs << "," << io::fmt(row.normalized.p2_5) << ","
       << io::fmt(row.normalized.p25) << "," << io::fmt(row.normalized.p50) << ","
       << io::fmt(row.normalized.p75) << "," << io::fmt(row.normalized.p97_5)
       << "\n";
}

inline void write_parallel_csv(std::ostream& os, const ParallelReport& report) {
  os << "threads,overhead_p25,overhead_p50,overhead_p75\n";
  for (const auto& row : report.rows)
    os << row.threads << "," << io::fmt(row.overhead.p25) << ","
       << io::fmt(row.overhead.p50) << "," << io::fmt(row.overhead.p75) << "\n";
}

inline void write_friction_map_csv(std::ostream& os,
                                   const std::vector<FrictionMapPoint>& grid) {
  os << "vx,vy,rel_err\n";
  for (const auto& p : grid)
    os << io::fmt(p.vx) << "," << io::fmt(p.vy) << "," << io::fmt(p.rel_err) << "\n";
}

}  // namespace multileg
