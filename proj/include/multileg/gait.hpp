#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "multileg/error.hpp"
#include "multileg/math.hpp"
#include "multileg/model.hpp"

// Shaft-angle gait generators and a crank leg model mapping shaft angle to a
// body-frame foot position. The crank is a deliberately simple stand-in for
// robot-specific linkages: the foot rides a circle of radius r about the hip
// in the hip's sagittal plane, lowest at angle zero.

namespace multileg {

enum class GaitKind { BuehlerTripod, MetachronalCubic, Custom };

struct GaitSpec {
  GaitKind kind = GaitKind::BuehlerTripod;
  double frequency = 0.1;          // Hz
  double duty = 0.5;               // stance fraction of the cycle
  double stance_sweep = 1.0;       // radians swept while in stance
  std::vector<double> phase_offsets;  // per leg, radians

  void validate(std::size_t n_legs) const {
    if (!(frequency > 0.0)) raise(errc::invalid_argument, "gait frequency must be > 0");
    if (!(duty > 0.0 && duty < 1.0)) raise(errc::invalid_argument, "duty must be in (0,1)");
    if (!phase_offsets.empty() && phase_offsets.size() != n_legs)
      raise(errc::invalid_argument, "phase offset count does not match legs");
  }
};

inline std::vector<double> tripod_offsets(std::size_t n_legs) {
  std::vector<double> off(n_legs, 0.0);
  for (std::size_t j = 0; j < n_legs; ++j) off[j] = (j % 2 == 0) ? 0.0 : M_PI;
  return off;
}

// Evenly staggered wave offsets. For an even leg count (lefts then rights)
// the wave alternates sides, so the two swing legs are never on one side.
inline std::vector<double> metachronal_offsets(std::size_t n_legs) {
  std::vector<double> off(n_legs, 0.0);
  for (std::size_t j = 0; j < n_legs; ++j) {
    std::size_t rank = j;
    if (n_legs % 2 == 0) {
      const std::size_t half = n_legs / 2;
      rank = 2 * (j % half) + (j < half ? 0 : 1);
    }
    off[j] = 2.0 * M_PI * static_cast<double>(rank) / static_cast<double>(n_legs);
  }
  return off;
}

namespace detail {

inline double wrap01(double x) {
  double f = x - std::floor(x);
  if (f >= 1.0) f = 0.0;  // guard against floating-point wrap
  return f;
}

}  // namespace detail

struct ShaftSample {
  double angle;   // radians
  double rate;    // radians per second
  bool stance;    // ground-contact phase of the clock
};

// Buehler clock: sweep stance_sweep radians slowly over the duty fraction of
// the cycle, then complete the remaining 2pi - sweep quickly. Continuous and
// 2pi-periodic; angle is -sweep/2 at stance start, +sweep/2 at stance end.
inline ShaftSample buehler_clock_leg(const GaitSpec& spec, double t, double offset) {
  const double phase = detail::wrap01(spec.frequency * t + offset / (2.0 * M_PI));
  const double sweep = spec.stance_sweep;
  if (phase < spec.duty) {
    const double s = phase / spec.duty;
    return {-sweep / 2.0 + sweep * s, sweep * spec.frequency / spec.duty, true};
  }
  const double s = (phase - spec.duty) / (1.0 - spec.duty);
  return {sweep / 2.0 + (2.0 * M_PI - sweep) * s,
          (2.0 * M_PI - sweep) * spec.frequency / (1.0 - spec.duty), false};
}

inline std::vector<ShaftSample> buehler_clock(const GaitSpec& spec, double t,
                                              std::size_t n_legs) {
  spec.validate(n_legs);
  const auto offsets =
      spec.phase_offsets.empty() ? tripod_offsets(n_legs) : spec.phase_offsets;
  std::vector<ShaftSample> out(n_legs);
  for (std::size_t j = 0; j < n_legs; ++j)
    out[j] = buehler_clock_leg(spec, t, offsets[j]);
  return out;
}

// Metachronal gait with duty 2/3: shaft angle is a monotone cubic in stance
// time, continuous with the linear swing segment. The cubic's non-constant
// rate gives contacting feet deliberately incompatible velocities.
inline ShaftSample metachronal_cubic_leg(const GaitSpec& spec, double t,
                                         double offset) {
  const double phase = detail::wrap01(spec.frequency * t + offset / (2.0 * M_PI));
  const double sweep = spec.stance_sweep;
  const double duty = spec.duty;
  if (phase < duty) {
    const double s = phase / duty;                   // normalized stance time
    const double sdot = spec.frequency / duty;
    const double poly = 2.0 * s * s * s - 3.0 * s * s + 2.0 * s;  // 0 -> 1
    const double dpoly = 6.0 * s * s - 6.0 * s + 2.0;             // > 0 always
    return {-sweep / 2.0 + sweep * poly, sweep * dpoly * sdot, true};
  }
  const double s = (phase - duty) / (1.0 - duty);
  return {sweep / 2.0 + (2.0 * M_PI - sweep) * s,
          (2.0 * M_PI - sweep) * spec.frequency / (1.0 - duty), false};
}

inline std::vector<ShaftSample> metachronal_cubic(const GaitSpec& spec, double t,
                                                  std::size_t n_legs) {
  spec.validate(n_legs);
  if (std::abs(spec.duty - 2.0 / 3.0) > 1e-9)
    raise(errc::invalid_argument, "metachronal gait requires duty 2/3");
  const auto offsets =
      spec.phase_offsets.empty() ? metachronal_offsets(n_legs) : spec.phase_offsets;
  std::vector<ShaftSample> out(n_legs);
  for (std::size_t j = 0; j < n_legs; ++j)
    out[j] = metachronal_cubic_leg(spec, t, offsets[j]);
  return out;
}

// Crank leg: hip position plus a circle of radius r in the hip's x-z plane.
// Stance sweep around angle zero moves the foot backwards along -x so the
// body walks towards +x.
struct LegGeometry {
  Vec3 hip{0.0, 0.0, 0.1};
  double radius = 0.25;
};

inline Vec3 leg_forward_kinematics(const LegGeometry& geom, double shaft_angle) {
  return {geom.hip.x - geom.radius * std::sin(shaft_angle), geom.hip.y,
          geom.hip.z - geom.radius * std::cos(shaft_angle)};
}

inline Vec3 leg_forward_velocity(const LegGeometry& geom, double shaft_angle,
                                 double shaft_rate) {
  return {-geom.radius * std::cos(shaft_angle) * shaft_rate, 0.0,
          geom.radius * std::sin(shaft_angle) * shaft_rate};
}

// Hexapod layout: legs ordered FL, ML, HL, FR, MR, HR.
inline std::vector<LegGeometry> hexapod_geometry(double body_half_length = 0.5,
                                                 double body_half_width = 0.4,
                                                 double hip_height = 0.1,
                                                 double crank_radius = 0.25) {
  std::vector<LegGeometry> legs;
  for (double side : {+1.0, -1.0})
    for (double x : {body_half_length, 0.0, -body_half_length})
      legs.push_back({{x, side * body_half_width, hip_height}, crank_radius});
  return legs;
}

inline RobotModel uniform_robot(std::size_t n_legs, double stiffness, double mu,
                                double weight = 1.0) {
  std::vector<LegParam> legs(n_legs, LegParam{stiffness, mu, {0.0, 0.0}});
  return RobotModel(std::move(legs), weight);
}

}  // namespace multileg
