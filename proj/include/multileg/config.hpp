#pragma once

#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "multileg/coulomb.hpp"
#include "multileg/friction.hpp"
#include "multileg/gait.hpp"
#include "multileg/model.hpp"

// JSON robot configuration: weight, per-leg parameters, gait spec, solver
// options, and leg geometry for the crank kinematics. Unknown keys are
// rejected so typos fail loudly.

namespace multileg {

struct SolverOptions {
  FrictionModel model = FrictionModel::viscous_coulomb();
  HomotopySchedule homotopy = default_schedule();
};

struct RobotConfig {
  double weight = 1.0;
  std::vector<LegParam> legs;
  GaitSpec gait;
  SolverOptions solver;
  std::vector<LegGeometry> geometry;  // empty = default hexapod layout when 6 legs

  RobotModel model() const { return RobotModel(legs, weight); }
  std::vector<LegGeometry> leg_geometry() const {
    if (!geometry.empty()) return geometry;
    if (legs.size() == 6) return hexapod_geometry();
    raise(errc::invalid_argument,
          "config has no geometry section and is not a 6-leg default hexapod");
  }
};

namespace detail {

inline void check_keys(const nlohmann::json& obj, const std::set<std::string>& allowed,
                       const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      raise(errc::invalid_argument, "unknown key '" + it.key() + "' in " + where);
}

inline double require_number(const nlohmann::json& obj, const std::string& key,
                             const std::string& where) {
  if (!obj.contains(key) || !obj[key].is_number())
    raise(errc::invalid_argument, where + " needs numeric '" + key + "'");
  return obj[key].get<double>();
}

}  // namespace detail

inline RobotConfig parse_config(const nlohmann::json& j) {
  detail::check_keys(j, {"weight", "legs", "gait", "solver", "geometry"}, "config");
  RobotConfig cfg;
  cfg.weight = detail::require_number(j, "weight", "config");
  if (!j.contains("legs") || !j["legs"].is_array() || j["legs"].empty())
    raise(errc::invalid_argument, "config needs a non-empty 'legs' array");
  for (const auto& lj : j["legs"]) {
    detail::check_keys(lj, {"stiffness", "mu", "traction_dir"}, "legs[]");
    LegParam leg;
    leg.stiffness = detail::require_number(lj, "stiffness", "legs[]");
    leg.mu = detail::require_number(lj, "mu", "legs[]");
    if (lj.contains("traction_dir")) {
      const auto& w = lj["traction_dir"];
      if (!w.is_array() || w.size() != 2)
        raise(errc::invalid_argument, "traction_dir must be a 2-array");
      leg.traction_dir = {w[0].get<double>(), w[1].get<double>()};
    }
    cfg.legs.push_back(leg);
  }

  if (j.contains("gait")) {
    const auto& g = j["gait"];
    detail::check_keys(
        g, {"kind", "frequency", "duty", "stance_sweep", "phase_offsets"}, "gait");
    if (g.contains("kind")) {
      const std::string kind = g["kind"].get<std::string>();
      if (kind == "buehler_tripod") cfg.gait.kind = GaitKind::BuehlerTripod;
      else if (kind == "metachronal_cubic") cfg.gait.kind = GaitKind::MetachronalCubic;
      else if (kind == "custom") cfg.gait.kind = GaitKind::Custom;
      else raise(errc::invalid_argument, "unknown gait kind '" + kind + "'");
    }
    if (g.contains("frequency")) cfg.gait.frequency = g["frequency"].get<double>();
    if (g.contains("duty")) cfg.gait.duty = g["duty"].get<double>();
    if (g.contains("stance_sweep")) cfg.gait.stance_sweep = g["stance_sweep"].get<double>();
    if (g.contains("phase_offsets")) {
      if (!g["phase_offsets"].is_array())
        raise(errc::invalid_argument, "phase_offsets must be an array");
      for (const auto& v : g["phase_offsets"])
        cfg.gait.phase_offsets.push_back(v.get<double>());
    }
    if (cfg.gait.kind == GaitKind::MetachronalCubic && !g.contains("duty"))
      cfg.gait.duty = 2.0 / 3.0;
  }

  if (j.contains("solver")) {
    const auto& s = j["solver"];
    detail::check_keys(s, {"model", "epsilon", "homotopy"}, "solver");
    if (s.contains("model")) {
      const std::string m = s["model"].get<std::string>();
      if (m == "viscous") cfg.solver.model = FrictionModel::viscous_coulomb();
      else if (m == "coulomb")
        cfg.solver.model = FrictionModel::smoothed_coulomb(
            s.contains("epsilon") ? s["epsilon"].get<double>() : 1e-5);
      else raise(errc::invalid_argument, "unknown solver model '" + m + "'");
    }
    if (s.contains("homotopy")) {
      const auto& h = s["homotopy"];
      detail::check_keys(h, {"eps0", "shrink", "rel_tol", "max_stages"}, "homotopy");
      if (h.contains("eps0")) cfg.solver.homotopy.eps0 = h["eps0"].get<double>();
      if (h.contains("shrink")) cfg.solver.homotopy.shrink = h["shrink"].get<double>();
      if (h.contains("rel_tol")) cfg.solver.homotopy.rel_tol = h["rel_tol"].get<double>();
      if (h.contains("max_stages")) cfg.solver.homotopy.max_stages = h["max_stages"].get<int>();
    }
  }

  if (j.contains("geometry")) {
    const auto& g = j["geometry"];
    detail::check_keys(g, {"hips", "crank_radius"}, "geometry");
    const double radius = g.contains("crank_radius") ? g["crank_radius"].get<double>() : 0.25;
    if (!g.contains("hips") || !g["hips"].is_array())
      raise(errc::invalid_argument, "geometry needs a 'hips' array");
    for (const auto& h : g["hips"]) {
      if (!h.is_array() || h.size() != 3)
        raise(errc::invalid_argument, "each hip must be a 3-array");
      cfg.geometry.push_back(
          {{h[0].get<double>(), h[1].get<double>(), h[2].get<double>()}, radius});
    }
    if (cfg.geometry.size() != cfg.legs.size())
      raise(errc::invalid_argument, "geometry hip count does not match legs");
  }

  cfg.model();  // validate leg parameters and weight
  return cfg;
}

inline RobotConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) raise(errc::invalid_argument, "cannot open config " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    raise(errc::invalid_argument, std::string("config JSON parse error: ") + e.what());
  }
  return parse_config(j);
}

inline nlohmann::json config_json(const RobotConfig& cfg) {
  nlohmann::json j;
  j["weight"] = cfg.weight;
  j["legs"] = nlohmann::json::array();
  for (const auto& leg : cfg.legs)
    j["legs"].push_back({{"stiffness", leg.stiffness},
                         {"mu", leg.mu},
                         {"traction_dir", {leg.traction_dir.x, leg.traction_dir.y}}});
  j["gait"] = {
      {"kind", cfg.gait.kind == GaitKind::BuehlerTripod ? "buehler_tripod"
               : cfg.gait.kind == GaitKind::MetachronalCubic ? "metachronal_cubic"
                                                             : "custom"},
      {"frequency", cfg.gait.frequency},
      {"duty", cfg.gait.duty},
      {"stance_sweep", cfg.gait.stance_sweep}};
  if (!cfg.gait.phase_offsets.empty())
    j["gait"]["phase_offsets"] = cfg.gait.phase_offsets;
  j["solver"] = {
      {"model",
       cfg.solver.model.kind == FrictionKind::SmoothedCoulomb ? "coulomb" : "viscous"},
      {"homotopy",
       {{"eps0", cfg.solver.homotopy.eps0},
        {"shrink", cfg.solver.homotopy.shrink},
        {"rel_tol", cfg.solver.homotopy.rel_tol},
        {"max_stages", cfg.solver.homotopy.max_stages}}}};
  if (!cfg.geometry.empty()) {
    nlohmann::json hips = nlohmann::json::array();
    for (const auto& g : cfg.geometry)
      hips.push_back({g.hip.x, g.hip.y, g.hip.z});
    j["geometry"] = {{"hips", hips}, {"crank_radius", cfg.geometry.front().radius}};
  }
  return j;
}

inline void save_config(const std::string& path, const RobotConfig& cfg) {
  std::ofstream os(path);
  if (!os) raise(errc::invalid_argument, "cannot open " + path + " for writing");
  os << config_json(cfg).dump(2) << "\n";
}

}  // namespace multileg
