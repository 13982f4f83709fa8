#pragma once

#include <cmath>
#include <vector>

#include "multileg/error.hpp"
#include "multileg/math.hpp"

// Friction coefficient models H_k mapping slip velocity to traction force,
// F_xy = H pdot_xy. The viscous-Coulomb model is the exact eps->infinity
// limit, H = -mu Fz, which is what makes the planar balance linear; the
// smoothed model interpolates towards Coulomb as eps -> 0.

namespace multileg {

enum class FrictionKind {
  ViscousCoulomb,
  SmoothedCoulomb,
  AnisotropicViscousCoulomb,
};

struct FrictionModel {
  FrictionKind kind = FrictionKind::ViscousCoulomb;
  double epsilon = 0.0;  // SmoothedCoulomb only

  static FrictionModel viscous_coulomb() { return {FrictionKind::ViscousCoulomb, 0.0}; }
  static FrictionModel smoothed_coulomb(double eps) {
    if (!(eps > 0.0)) raise(errc::invalid_argument, "epsilon must be positive");
    return {FrictionKind::SmoothedCoulomb, eps};
  }
  static FrictionModel anisotropic() {
    return {FrictionKind::AnisotropicViscousCoulomb, 0.0};
  }
};

// Symmetric negative semidefinite 2x2 traction matrix.
struct TractionMatrix {
  Mat2 H;
};

// Scalar smoothed-Coulomb coefficient, -mu Fz (eps + v) / (eps + v^2).
// Finite at v = 0 for any eps > 0; -> -mu Fz / v as eps -> 0.
inline double h_scalar(double mu, double Fz, double speed, double epsilon) {
  return -mu * Fz * (epsilon + speed) / (epsilon + speed * speed);
}

inline double h_viscous(double mu, double Fz) { return -mu * Fz; }

// Anisotropic viscous-Coulomb traction: -mu Fz R (I + w w^T) R^-1, with w the
// enhanced traction direction in body coordinates. w = 0 is isotropic.
inline TractionMatrix h_anisotropic(double mu, Vec2 w, double Fz, double theta) {
  const Mat2 body = (Mat2::identity() + Mat2::outer(w)) * (-mu * Fz);
  const Mat2 R = Mat2::rotation(theta);
  return {R * body * R.transpose()};
}

// Body-frame variant (no rotation conjugation); used by the balance solvers
// that work in body coordinates throughout.
inline Mat2 h_anisotropic_body(double mu, Vec2 w, double Fz) {
  return (Mat2::identity() + Mat2::outer(w)) * (-mu * Fz);
}

inline Vec2 friction_force(const TractionMatrix& H, Vec2 pdot) {
  return H.H * pdot;
}

// Exact Coulomb traction, undefined at rest.
inline Vec2 coulomb_force_exact(double mu, double Fz, Vec2 pdot) {
  const double v = pdot.norm();
  if (v == 0.0) raise(errc::zero_velocity, "Coulomb force undefined at zero slip");
  return pdot * (-mu * Fz / v);
}

// One sample of the viscous-vs-Coulomb comparison map.
struct FrictionMapPoint {
  double vx;
  double vy;
  double rel_err;
};

// Error between the viscous-Coulomb force prediction calibrated at v = (1,0)
// and the exact Coulomb force, at velocity u: with F_v(u) = -mu Fz u and
// F_c(u) = -mu Fz u/|u|, rel_err = 0.5 |F_v - F_c|^2 / |F_c|^2
//                               = 0.5 (|u| - 1)^2.
// Quadratic in the speed perturbation: below 2% for |u - (1,0)| <= 0.2.
inline double viscous_vs_coulomb_error(Vec2 u) {
  const double d = u.norm() - 1.0;
  return 0.5 * d * d;
}

// Grid of the error map around the calibration velocity (1, 0); the origin
// (where Coulomb is undefined) is excluded.
inline std::vector<FrictionMapPoint> relative_error_map(double radius = 0.6,
                                                        double step = 0.01) {
  std::vector<FrictionMapPoint> grid;
  const int half = static_cast<int>(std::llround(radius / step));
  grid.reserve(static_cast<std::size_t>(2 * half + 1) *
               static_cast<std::size_t>(2 * half + 1));
  for (int i = -half; i <= half; ++i) {
    for (int j = -half; j <= half; ++j) {
      const Vec2 u{1.0 + i * step, j * step};
      if (u.squared_norm() < 1e-12) continue;
      grid.push_back({u.x, u.y, viscous_vs_coulomb_error(u)});
    }
  }
  return grid;
}

}  // namespace multileg
