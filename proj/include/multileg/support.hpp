#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "multileg/error.hpp"
#include "multileg/kinematics.hpp"
#include "multileg/model.hpp"

// Spring support model: each leg is a vertical linear spring hanging from a
// rigid body plane. Given foot positions, find the pitch/roll/height state,
// the set of contacting legs, and the per-leg normal forces so that
// F_z = Mg and M_x = M_y = 0.

namespace multileg {

// A leg counts as contacting when its height is below -kContactTol; exact
// zeros during a search step go to the new state.
inline constexpr double kContactTol = 1e-12;

struct SupportState {
  double alpha_x = 0.0;
  double alpha_y = 0.0;
  double z0 = 0.0;

  Vec3 as_vec() const { return {alpha_x, alpha_y, z0}; }
  static SupportState from_vec(Vec3 v) { return {v.x, v.y, v.z}; }
};

inline double foot_height(const SupportState& s, Vec3 q) {
  return foot_height(s.alpha_x, s.alpha_y, s.z0, q);
}

struct SupportSolution {
  SupportState state;
  std::vector<std::size_t> contacts;   // ascending leg indices
  std::vector<double> normal_forces;   // per leg, zero off contact
  int iterations = 0;                  // contact-change events
};

namespace detail {

inline bool in_contact(double height) { return height < -kContactTol; }

inline std::vector<double> contact_forces(const RobotModel& robot,
                                          const ShapeFrame& frame,
                                          const SupportState& s,
                                          const std::vector<std::size_t>& contacts) {
  std::vector<double> f(robot.leg_count(), 0.0);
  for (std::size_t j : contacts)
    f[j] = -robot.leg(j).stiffness * foot_height(s, frame.q[j]);
  return f;
}

}  // namespace detail

// Height-only scan at alpha = 0, walking feet in from the lowest up. The
// total spring force F(z) = sum K_j max(0, -q_z_j - z) is convex, decreasing,
// and piecewise linear, so its unique crossing of Mg is found by iterating
// the per-segment linear solve: starting from the all-feet segment (which
// lies at or below the crossing), each step jumps to its segment's balance
// point, adding at most the remaining higher feet. No ordering is needed;
// the active set at any z is just every foot with q_z + z < 0.
inline std::pair<double, std::vector<std::size_t>> initial_height_scan(
    const RobotModel& robot, const ShapeFrame& frame) {
  check_frame(robot, frame);
  const std::size_t n = robot.leg_count();

  double sum_k = 0.0;
  double sum_kq = 0.0;  // sum K_j * (-q_z_j) over the active set
  for (std::size_t j = 0; j < n; ++j) {
    sum_k += robot.leg(j).stiffness;
    sum_kq += robot.leg(j).stiffness * (-frame.q[j].z);
  }
  double z = (sum_kq - robot.weight()) / sum_k;
  for (std::size_t round = 0; round <= n; ++round) {
    sum_k = 0.0;
    sum_kq = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      // branchless: membership is data-dependent and mispredicts otherwise
      const double active = (frame.q[j].z + z < 0.0) ? 1.0 : 0.0;
      const double k = active * robot.leg(j).stiffness;
      sum_k += k;
      sum_kq -= k * frame.q[j].z;
    }
    if (sum_k == 0.0) raise(errc::no_support, "no foot below the balance height");
    const double next = (sum_kq - robot.weight()) / sum_k;
    if (next <= z) {  // fixed point of the segment map: balance reached
      z = next;
      break;
    }
    z = next;
    if (round == n)
      raise(errc::no_support, "height scan never reached force balance");
  }

  std::vector<std::size_t> contacts;
  for (std::size_t j = 0; j < n; ++j)
    if (detail::in_contact(frame.q[j].z + z)) contacts.push_back(j);
  return {z, contacts};
}

// Solve F_z = Mg, M_x = M_y = 0 for (alpha_x, alpha_y, z0) with a fixed
// contact set. Needs >= 3 non-collinear contacts.
inline SupportState balance_step(const RobotModel& robot, const ShapeFrame& frame,
                                 const std::vector<std::size_t>& contacts) {
  if (contacts.size() < 3)
    raise(errc::invalid_argument, "balance_step needs at least 3 contacts");
  Mat3 A = Mat3::zero();
  Vec3 b{robot.weight(), 0.0, 0.0};
  for (std::size_t j : contacts) {
    const double K = robot.leg(j).stiffness;
    const Vec3 q = frame.q[j];
    // F_z,j = K (alpha_x q_x - alpha_y q_y - q_z - z0)
    A(0, 0) += K * q.x;       A(0, 1) += -K * q.y;      A(0, 2) += -K;
    A(1, 0) += -K * q.x * q.y; A(1, 1) += K * q.y * q.y; A(1, 2) += K * q.y;
    A(2, 0) += K * q.x * q.x;  A(2, 1) += -K * q.x * q.y; A(2, 2) += -K * q.x;
    b.x += K * q.z;
    b.y += -K * q.y * q.z;
    b.z += K * q.x * q.z;
  }
  const auto sol = solve3(A, b);
  if (!sol)
    raise(errc::singular_support, "contact geometry is collinear (rank < 3)");
  return SupportState::from_vec(*sol);
}

// First leg whose height crosses zero strictly inside the move s0 -> s1.
// t_j is the zero of the affine height along the segment.
inline std::optional<std::pair<double, std::size_t>> line_search_contact_change(
    const RobotModel& robot, const ShapeFrame& frame, const SupportState& s0,
    const SupportState& s1) {
  std::optional<std::pair<double, std::size_t>> best;
  for (std::size_t j = 0; j < robot.leg_count(); ++j) {
    const double h0 = foot_height(s0, frame.q[j]);
    const double h1 = foot_height(s1, frame.q[j]);
    if ((h0 < 0.0) == (h1 < 0.0)) continue;
    const double t = h0 / (h0 - h1);
    if (t < 0.0 || t >= 1.0) continue;
    if (!best || t < best->first) best = {{t, j}};
  }
  return best;
}

// Tilt direction for a single contact: rotate about the contact point in the
// vertical plane through the COM, dropping the COM. The height-map neutral
// line passes through the contact, so its compression is preserved.
inline Vec3 tilt_one_contact(const RobotModel& robot, const ShapeFrame& frame,
                             const SupportState&, std::size_t leg) {
  (void)robot;
  const Vec2 c = frame.q[leg].xy();
  if (c.squared_norm() < kContactTol * kContactTol)
    raise(errc::degenerate_tilt, "contact point under the COM");
  return {-c.x, c.y, -c.squared_norm()};
}

// Tilt direction for two contacts: rotate about the line through them, in the
// sense that lowers the COM. Both contact heights are preserved.
inline Vec3 tilt_two_contacts(const RobotModel& robot, const ShapeFrame& frame,
                              const SupportState&,
                              std::pair<std::size_t, std::size_t> legs) {
  (void)robot;
  const Vec2 p1 = frame.q[legs.first].xy();
  const Vec2 p2 = frame.q[legs.second].xy();
  const double a = p1.y - p2.y;
  const double b = p2.x - p1.x;
  const double c = p1.y * p2.x - p2.y * p1.x;
  const double len = std::hypot(a, b);
  if (len < kContactTol)
    raise(errc::degenerate_tilt, "coincident contact points");
  if (std::abs(c) < kContactTol * std::max(1.0, len))
    raise(errc::degenerate_tilt, "COM on the contact line");
  const double sign_c = (c > 0.0) ? 1.0 : -1.0;
  return {-sign_c * a / len, sign_c * b / len, -std::abs(c) / len};
}

namespace detail {

// Running sum of the fixed-contact-set balance system. Contact flips touch a
// single leg, so the 3x3 system is maintained by adding or subtracting that
// leg's contribution instead of reassembling the whole sum every event.
struct BalanceAccumulator {
  Mat3 A = Mat3::zero();
  Vec3 b{0, 0, 0};

  void apply(const RobotModel& robot, const ShapeFrame& frame, std::size_t j,
             double sign) {
    const double K = sign * robot.leg(j).stiffness;
    const Vec3 q = frame.q[j];
    A(0, 0) += K * q.x;        A(0, 1) += -K * q.y;       A(0, 2) += -K;
    A(1, 0) += -K * q.x * q.y; A(1, 1) += K * q.y * q.y;  A(1, 2) += K * q.y;
    A(2, 0) += K * q.x * q.x;  A(2, 1) += -K * q.x * q.y; A(2, 2) += -K * q.x;
    b.x += K * q.z;
    b.y += -K * q.y * q.z;
    b.z += K * q.x * q.z;
  }

  std::optional<SupportState> solve(double weight) const {
    Vec3 rhs = b;
    rhs.x += weight;
    const auto sol = solve3(A, rhs);
    if (!sol) return std::nullopt;
    return SupportState::from_vec(*sol);
  }
};

// Mask-aware variant used by the search loop: a leg crosses when its height
// side at the end of the move disagrees with its tracked contact state. The
// crossing time is the affine zero when the start agreed, and zero when the
// start already disagreed (boundary fuzz from an exact touchdown); either way
// the mask is set to the end side, never blindly toggled.
struct MaskedCrossing {
  double t;
  std::size_t leg;
  bool lands;  // new tracked state
};

inline std::optional<MaskedCrossing> masked_line_search(
    const RobotModel& robot, const ShapeFrame& frame, const SupportState& s0,
    const SupportState& s1, const std::vector<char>& mask) {
  std::optional<MaskedCrossing> best;
  for (std::size_t j = 0; j < robot.leg_count(); ++j) {
    const double h0 = foot_height(s0, frame.q[j]);
    const double h1 = foot_height(s1, frame.q[j]);
    const bool tracked = mask[j];
    const bool end_in = h1 < 0.0;
    if (end_in == tracked) continue;
    double t = 0.0;
    if ((h0 < 0.0) == tracked) {
      if (h0 == h1) continue;
      t = h0 / (h0 - h1);
      if (t < 0.0 || t >= 1.0) continue;
    }
    if (!best || t < best->t) best = {{t, j, end_in}};
  }
  return best;
}

// Advance along an (unbounded) tilt ray to the first touchdown of a
// non-contacting leg. Contact legs ride the neutral line and never flip.
inline std::pair<double, std::size_t> first_touchdown(
    const RobotModel& robot, const ShapeFrame& frame, const SupportState& s,
    Vec3 dir, const std::vector<char>& contact_mask) {
  std::optional<std::pair<double, std::size_t>> best;
  for (std::size_t j = 0; j < robot.leg_count(); ++j) {
    if (contact_mask[j]) continue;
    const double h = foot_height(s, frame.q[j]);
    const double rate = -dir.x * frame.q[j].x + dir.y * frame.q[j].y + dir.z;
    if (rate >= -1e-300) continue;  // leg never descends along this ray
    const double t = std::max(0.0, -h / rate);
    if (!best || t < best->first) best = {{t, j}};
  }
  if (!best)
    raise(errc::no_support, "tilting finds no next contact (toppling)");
  return *best;
}

}  // namespace detail

// Full contact-state search. Scan for the initial height, then alternate
// balance solves truncated at contact changes with gravity-driven tilts while
// under-supported, until a balance solution keeps its own contact set.
inline SupportSolution solve_support(const RobotModel& robot,
                                     const ShapeFrame& frame) {
  const std::size_t n = robot.leg_count();
  auto [z0, contact_list] = initial_height_scan(robot, frame);
  SupportState s{0.0, 0.0, z0};
  std::vector<char> mask(n, 0);
  detail::BalanceAccumulator acc;
  std::size_t in_contact = contact_list.size();
  for (std::size_t j : contact_list) {
    mask[j] = 1;
    acc.apply(robot, frame, j, +1.0);
  }

  const int cap = 4 * static_cast<int>(n) + 8;
  int events = 0;
  while (true) {
    if (in_contact >= 3) {
      const auto target = acc.solve(robot.weight());
      if (!target)
        raise(errc::singular_support, "contact geometry is collinear (rank < 3)");
      const auto crossing = detail::masked_line_search(robot, frame, s, *target, mask);
      if (!crossing) {
        SupportSolution out;
        out.state = *target;
        out.contacts.reserve(in_contact);
        for (std::size_t j = 0; j < n; ++j)
          if (mask[j]) out.contacts.push_back(j);
        out.normal_forces =
            detail::contact_forces(robot, frame, *target, out.contacts);
        out.iterations = events;
        return out;
      }
      const Vec3 v0 = s.as_vec();
      const Vec3 v1 = target->as_vec();
      s = SupportState::from_vec(v0 + crossing->t * (v1 - v0));
      mask[crossing->leg] = crossing->lands;
      acc.apply(robot, frame, crossing->leg, crossing->lands ? +1.0 : -1.0);
      in_contact += crossing->lands ? 1 : -1;
    } else {
      std::size_t legs[2] = {0, 0};
      std::size_t found = 0;
      for (std::size_t j = 0; j < n && found < 2; ++j)
        if (mask[j]) legs[found++] = j;
      Vec3 dir;
      if (in_contact == 2)
        dir = tilt_two_contacts(robot, frame, s, {legs[0], legs[1]});
      else if (in_contact == 1)
        dir = tilt_one_contact(robot, frame, s, legs[0]);
      else
        raise(errc::no_support, "no contacting legs");  // scan guarantees >= 1
      const auto [t, leg] = detail::first_touchdown(robot, frame, s, dir, mask);
      s = SupportState::from_vec(s.as_vec() + t * dir);
      mask[leg] = 1;
      acc.apply(robot, frame, leg, +1.0);
      ++in_contact;
    }

    if (++events > cap)
      raise(errc::no_convergence,
            "contact search exceeded " + std::to_string(cap) + " events");
  }
}

}  // namespace multileg
