#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "multileg/error.hpp"
#include "multileg/friction.hpp"
#include "multileg/support.hpp"
#include "multileg/trajectory.hpp"

// Parameter estimation from logged runs: per-leg spring constants from the
// normal-force distribution, per-leg (mu, w) from slip velocities and planar
// forces. Both ride on a small damped-least-squares minimizer.

namespace multileg {

struct FitConfig {
  double cov_penalty_weight = 0.1;  // stiffness fit regularization
  int max_iterations = 200;
  double tolerance = 1e-10;         // step/gradient stop
  bool absolute_forces = false;     // stiffness fit: raw forces vs per-frame shares
  double slip_threshold = 1e-3;     // friction fit sample gate
};

using ResidualFn = std::function<std::vector<double>(const std::vector<double>&)>;

struct FitResult {
  std::vector<double> params;
  double cost = 0.0;  // 0.5 * ||r||^2
  int iterations = 0;
  bool converged = false;
};

// Damped Gauss-Newton (Levenberg style) on 0.5 ||r(p)||^2 with a
// forward-difference Jacobian. Cost never increases between accepted steps.
inline FitResult least_squares(const ResidualFn& residual_fn,
                               std::vector<double> params,
                               const FitConfig& config = {}) {
  const double fd_rel = 1e-6;
  std::vector<double> r = residual_fn(params);
  const std::size_t m = r.size();
  const std::size_t np = params.size();
  for (double v : r)
    if (!std::isfinite(v))
      raise(errc::invalid_argument, "residual not finite at initial parameters");

  auto cost_of = [](const std::vector<double>& res) {
    double c = 0.0;
    for (double v : res) c += v * v;
    return 0.5 * c;
  };

  FitResult out;
  out.params = params;
  double cost = cost_of(r);
  double lambda = 1e-3;
  bool converged = false;

  std::vector<double> J(m * np);
  for (int it = 0; it < config.max_iterations && !converged; ++it) {
    out.iterations = it + 1;
    // Jacobian by forward differences.
    for (std::size_t p = 0; p < np; ++p) {
      const double h = fd_rel * std::max(1.0, std::abs(params[p]));
      std::vector<double> pp = params;
      pp[p] += h;
      const std::vector<double> rp = residual_fn(pp);
      for (std::size_t i = 0; i < m; ++i) J[i * np + p] = (rp[i] - r[i]) / h;
    }

    std::vector<double> JtJ(np * np, 0.0), g(np, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t a = 0; a < np; ++a) {
        g[a] += J[i * np + a] * r[i];
        for (std::size_t b = a; b < np; ++b)
          JtJ[a * np + b] += J[i * np + a] * J[i * np + b];
      }
    for (std::size_t a = 0; a < np; ++a)
      for (std::size_t b = 0; b < a; ++b) JtJ[a * np + b] = JtJ[b * np + a];

    double gnorm = 0.0;
    for (double v : g) gnorm = std::max(gnorm, std::abs(v));
    if (gnorm < config.tolerance) {
      converged = true;
      break;
    }

    bool accepted = false;
    for (int tries = 0; tries < 30 && !accepted; ++tries) {
      // (JtJ + lambda diag) delta = -g via Cholesky-free Gaussian elimination
      std::vector<double> M = JtJ;
      for (std::size_t d = 0; d < np; ++d)
        M[d * np + d] += lambda * std::max(JtJ[d * np + d], 1e-12);
      std::vector<double> delta(g.begin(), g.end());
      for (double& v : delta) v = -v;
      bool singular = false;
      for (std::size_t col = 0; col < np && !singular; ++col) {
        std::size_t piv = col;
        for (std::size_t rr = col + 1; rr < np; ++rr)
          if (std::abs(M[rr * np + col]) > std::abs(M[piv * np + col])) piv = rr;
        if (std::abs(M[piv * np + col]) < 1e-300) { singular = true; break; }
        if (piv != col) {
          for (std::size_t c = 0; c < np; ++c) std::swap(M[piv * np + c], M[col * np + c]);
          std::swap(delta[piv], delta[col]);
        }
        for (std::size_t rr = col + 1; rr < np; ++rr) {
          const double f = M[rr * np + col] / M[col * np + col];
          for (std::size_t c = col; c < np; ++c) M[rr * np + c] -= f * M[col * np + c];
          delta[rr] -= f * delta[col];
        }
      }
      if (!singular) {
        for (std::size_t col = np; col-- > 0;) {
          for (std::size_t c = col + 1; c < np; ++c)
            delta[col] -= M[col * np + c] * delta[c];
          delta[col] /= M[col * np + col];
        }
        std::vector<double> trial = params;
        double step = 0.0;
        for (std::size_t p = 0; p < np; ++p) {
          trial[p] += delta[p];
          step = std::max(step, std::abs(delta[p]));
        }
        std::vector<double> rt = residual_fn(trial);
        bool finite = true;
        for (double v : rt) finite = finite && std::isfinite(v);
        const double ct = finite ? cost_of(rt) : std::numeric_limits<double>::infinity();
        if (ct < cost) {
          double pscale = 1.0;
          for (double p : params) pscale = std::max(pscale, std::abs(p));
          const double drop = cost - ct;
          params = std::move(trial);
          r = std::move(rt);
          cost = ct;
          lambda = std::max(lambda / 3.0, 1e-12);
          accepted = true;
          if (step < config.tolerance * pscale) converged = true;
          if (drop <= config.tolerance * std::max(cost, 1e-300)) converged = true;
          break;
        }
      }
      lambda *= 10.0;
      if (lambda > 1e14) break;
    }
    if (!accepted) converged = true;  // no descent direction left: stationary
  }
  out.params = params;
  out.cost = cost;
  out.converged = converged;
  if (!converged)
    raise(errc::no_convergence, "least_squares hit the iteration cap");
  return out;
}

// --- Stiffness fit -----------------------------------------------------------

struct MeasuredFrame {
  ShapeFrame shape;
  std::vector<double> normal_forces;   // measured Fz per leg
  std::vector<Vec2> planar_forces;     // measured Fxy per leg (world)
  std::vector<Vec2> foot_velocities;   // measured world slip velocity per leg
  double theta = 0.0;
};

struct StiffnessFit {
  std::vector<double> stiffness;       // per leg
  std::vector<bool> identifiable;      // false for never-loaded legs
  double initial_cost = 0.0;
  double final_cost = 0.0;
};

namespace detail {

inline double cov(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  if (mean == 0.0) return 0.0;
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= v.size();
  return std::sqrt(var) / mean;
}

}  // namespace detail

// Fit per-leg spring constants to the measured normal-force distribution.
// Legs that never carry measured load are reported unidentifiable and keep
// their initial stiffness.
inline StiffnessFit fit_stiffness(const RobotModel& robot,
                                  const std::vector<MeasuredFrame>& logs,
                                  const FitConfig& config = {}) {
  const std::size_t n = robot.leg_count();
  if (logs.empty()) raise(errc::insufficient_data, "no frames");
  std::vector<bool> loaded(n, false);
  std::size_t usable_frames = 0;
  for (const auto& f : logs) {
    if (f.normal_forces.size() != n)
      raise(errc::invalid_argument, "measured force count does not match legs");
    std::size_t m = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (f.normal_forces[j] > 0.0) {
        loaded[j] = true;
        ++m;
      }
    if (m >= 3) ++usable_frames;
  }
  if (usable_frames == 0)
    raise(errc::insufficient_data, "no frame with >= 3 loaded legs");

  std::vector<std::size_t> active;  // legs being fit
  for (std::size_t j = 0; j < n; ++j)
    if (loaded[j]) active.push_back(j);
  if (active.size() < 1) raise(errc::insufficient_data, "no loaded legs at all");

  const double weight = robot.weight();
  auto residual = [&](const std::vector<double>& params) {
    std::vector<double> K(n);
    for (std::size_t j = 0; j < n; ++j) K[j] = robot.leg(j).stiffness;
    for (std::size_t a = 0; a < active.size(); ++a) K[active[a]] = params[a];
    std::vector<double> r;
    r.reserve(logs.size() * n + 1);
    for (double k : K)
      if (!(k > 0.0)) {  // positivity guard: reject the trial step
        r.assign(logs.size() * n + 1, 1e6);
        return r;
      }
    std::vector<LegParam> legs = robot.legs();
    for (std::size_t j = 0; j < n; ++j) legs[j].stiffness = K[j];
    const RobotModel candidate(legs, weight);
    for (const auto& f : logs) {
      double meas_total = 0.0;
      for (double v : f.normal_forces) meas_total += v;
      std::vector<double> model(n, 0.0);
      double model_total = 0.0;
      try {
        const SupportSolution sol = solve_support(candidate, f.shape);
        model = sol.normal_forces;
        for (double v : model) model_total += v;
      } catch (const Error&) {
        for (std::size_t j = 0; j < n; ++j) r.push_back(1e3);
        continue;
      }
      const double ms = config.absolute_forces ? 1.0
                        : (model_total > 0.0 ? 1.0 / model_total : 0.0);
      const double gs = config.absolute_forces ? 1.0
                        : (meas_total > 0.0 ? 1.0 / meas_total : 0.0);
      for (std::size_t j = 0; j < n; ++j)
        r.push_back(model[j] * ms - f.normal_forces[j] * gs);
    }
    std::vector<double> k_active;
    for (std::size_t a = 0; a < active.size(); ++a) k_active.push_back(params[a]);
    r.push_back(std::sqrt(config.cov_penalty_weight) * detail::cov(k_active));
    return r;
  };

  std::vector<double> init;
  for (std::size_t j : active) init.push_back(robot.leg(j).stiffness);
  const auto r0 = residual(init);
  double c0 = 0.0;
  for (double v : r0) c0 += 0.5 * v * v;

  const FitResult res = least_squares(residual, init, config);

  StiffnessFit out;
  out.stiffness.resize(n);
  out.identifiable.assign(n, false);
  for (std::size_t j = 0; j < n; ++j) out.stiffness[j] = robot.leg(j).stiffness;
  for (std::size_t a = 0; a < active.size(); ++a) {
    out.stiffness[active[a]] = res.params[a];
    out.identifiable[active[a]] = true;
  }
  out.initial_cost = c0;
  out.final_cost = res.cost;
  return out;
}

// --- Friction fit ------------------------------------------------------------

struct FrictionFitLeg {
  double mu = 0.0;
  Vec2 w{0.0, 0.0};
  std::size_t samples = 0;
};

// Per-leg (mu, w) from measured planar forces, normal forces, and slip
// velocities, under the anisotropic viscous-Coulomb model. Only samples with
// slip above the threshold carry directional information.
//
// The cost is linear in the symmetric matrix M = mu (I + w w^T): with
// body-frame samples, F = -Fz M pdot. Solving the 3-parameter normal
// equations for M exactly and eigen-splitting it back into (mu, w) avoids the
// saddle the (mu, w) parameterization has at w = 0.
inline std::vector<FrictionFitLeg> fit_friction(
    const RobotModel& robot, const std::vector<MeasuredFrame>& logs,
    const FitConfig& config = {}) {
  const std::size_t n = robot.leg_count();
  std::vector<FrictionFitLeg> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    // normal equations for params (a, b, c) of M = [[a, c], [c, b]]
    Mat3 AtA = Mat3::zero();
    Vec3 Atb{0, 0, 0};
    std::size_t count = 0;
    for (const auto& f : logs) {
      if (f.planar_forces.size() != n || f.foot_velocities.size() != n ||
          f.normal_forces.size() != n)
        raise(errc::invalid_argument, "measured columns do not match legs");
      if (f.normal_forces[j] <= 0.0) continue;
      if (f.foot_velocities[j].norm() <= config.slip_threshold) continue;
      ++count;
      const Mat2 Rinv = Mat2::rotation(-f.theta);
      const Vec2 v = Rinv * f.foot_velocities[j];   // body frame slip
      const Vec2 g = Rinv * f.planar_forces[j];     // body frame force
      const double fz = f.normal_forces[j];
      // row x: -fz (a v.x + c v.y) = g.x ; row y: -fz (b v.y + c v.x) = g.y
      const double rx[3] = {-fz * v.x, 0.0, -fz * v.y};
      const double ry[3] = {0.0, -fz * v.y, -fz * v.x};
      for (int p = 0; p < 3; ++p)
        for (int q = 0; q < 3; ++q)
          AtA(p, q) += rx[p] * rx[q] + ry[p] * ry[q];
      Atb += Vec3{rx[0] * g.x + ry[0] * g.y, rx[1] * g.x + ry[1] * g.y,
                  rx[2] * g.x + ry[2] * g.y};
    }
    if (count < 3)
      raise(errc::insufficient_data,
            "leg " + std::to_string(j) + " has no slipping loaded samples");
    const auto abc = solve3(AtA, Atb, 1e-12);
    if (!abc)
      raise(errc::insufficient_data,
            "leg " + std::to_string(j) + " slip directions are degenerate");

    // eigen-split M: mu is the small eigenvalue, w points along the large one
    const double a = abc->x, b = abc->y, c = abc->z;
    const double mean = 0.5 * (a + b);
    const double spread = std::hypot(0.5 * (a - b), c);
    const double lmin = mean - spread;
    const double lmax = mean + spread;
    FrictionFitLeg leg;
    leg.mu = lmin;
    leg.samples = count;
    if (spread > 1e-12 && lmin > 0.0) {
      Vec2 dir{c, lmax - a};
      if (dir.norm() < 1e-15) dir = {lmax - b, c};
      if (dir.norm() < 1e-15) dir = {1.0, 0.0};
      dir = dir * (1.0 / dir.norm());
      leg.w = dir * std::sqrt(lmax / lmin - 1.0);
    } else {
      leg.w = {0.0, 0.0};
    }
    // w and -w give the same H; report the non-negative-x representative
    if (leg.w.x < 0.0 || (leg.w.x == 0.0 && leg.w.y < 0.0)) leg.w = -leg.w;
    out[j] = leg;
  }
  return out;
}

}  // namespace multileg
