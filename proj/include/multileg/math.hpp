#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>

// Small fixed-size linear algebra for planar rigid-body work. Everything is
// value-semantic and allocation-free; the solvers in this library never need
// anything bigger than a 3x3 system.

namespace multileg {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2() = default;
  constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  constexpr double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double norm() const { return std::hypot(x, y); }
  constexpr double squared_norm() const { return x * x + y * y; }
};

constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }

// 90-degree rotation generator: S v rotates v a quarter turn CCW.
constexpr Vec2 perp(Vec2 v) { return {-v.y, v.x}; }

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3() = default;
  constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  constexpr Vec2 xy() const { return {x, y}; }
  constexpr Vec3 operator+(Vec3 o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(Vec3 o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator-() const { return {-x, -y, -z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3& operator+=(Vec3 o) { x += o.x; y += o.y; z += o.z; return *this; }
  constexpr double dot(Vec3 o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  constexpr double squared_norm() const { return x * x + y * y + z * z; }
};

constexpr Vec3 operator*(double s, Vec3 v) { return v * s; }

struct Mat2 {
  // Row-major: [[a00, a01], [a10, a11]].
  double a00 = 0.0, a01 = 0.0, a10 = 0.0, a11 = 0.0;

  static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static Mat2 rotation(double theta) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return {c, -s, s, c};
  }
  // w w^T rank-one outer product.
  static constexpr Mat2 outer(Vec2 w) {
    return {w.x * w.x, w.x * w.y, w.y * w.x, w.y * w.y};
  }

  constexpr Vec2 operator*(Vec2 v) const {
    return {a00 * v.x + a01 * v.y, a10 * v.x + a11 * v.y};
  }
  constexpr Mat2 operator*(Mat2 o) const {
    return {a00 * o.a00 + a01 * o.a10, a00 * o.a01 + a01 * o.a11,
            a10 * o.a00 + a11 * o.a10, a10 * o.a01 + a11 * o.a11};
  }
  constexpr Mat2 operator*(double s) const { return {a00 * s, a01 * s, a10 * s, a11 * s}; }
  constexpr Mat2 operator+(Mat2 o) const {
    return {a00 + o.a00, a01 + o.a01, a10 + o.a10, a11 + o.a11};
  }
  constexpr Mat2 transpose() const { return {a00, a10, a01, a11}; }
};

struct Mat3 {
  std::array<std::array<double, 3>, 3> m{};

  static constexpr Mat3 zero() { return {}; }
  double& operator()(int r, int c) { return m[r][c]; }
  double operator()(int r, int c) const { return m[r][c]; }

  Vec3 operator*(Vec3 v) const {
    return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
  }

  double max_abs() const {
    double a = 0.0;
    for (const auto& row : m)
      for (double v : row) a = std::max(a, std::abs(v));
    return a;
  }
};

struct Mat4 {
  std::array<std::array<double, 4>, 4> m{};

  static Mat4 identity() {
    Mat4 r;
    for (int i = 0; i < 4; ++i) r.m[i][i] = 1.0;
    return r;
  }
  double& operator()(int r, int c) { return m[r][c]; }
  double operator()(int r, int c) const { return m[r][c]; }
};

// Gaussian elimination with partial pivoting on a 3x3 system. Returns nullopt
// when the matrix is rank-deficient: any pivot below rel_tol times the
// max-norm of A counts as zero.
inline std::optional<Vec3> solve3(const Mat3& A, const Vec3& b,
                                  double rel_tol = 1e-12) {
  double a[3][4] = {{A(0, 0), A(0, 1), A(0, 2), b.x},
                    {A(1, 0), A(1, 1), A(1, 2), b.y},
                    {A(2, 0), A(2, 1), A(2, 2), b.z}};
  const double threshold = rel_tol * std::max(A.max_abs(), 1e-300);
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    if (std::abs(a[pivot][col]) < threshold) return std::nullopt;
    if (pivot != col)
      for (int c = col; c < 4; ++c) std::swap(a[pivot][c], a[col][c]);
    for (int r = col + 1; r < 3; ++r) {
      const double f = a[r][col] / a[col][col];
      for (int c = col; c < 4; ++c) a[r][c] -= f * a[col][c];
    }
  }
  Vec3 x;
  x.z = a[2][3] / a[2][2];
  x.y = (a[1][3] - a[1][2] * x.z) / a[1][1];
  x.x = (a[0][3] - a[0][1] * x.y - a[0][2] * x.z) / a[0][0];
  return x;
}

// Inverse via three pivoted solves; nullopt on rank deficiency.
inline std::optional<Mat3> inverse3(const Mat3& A, double rel_tol = 1e-12) {
  Mat3 inv;
  const Vec3 e[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (int c = 0; c < 3; ++c) {
    auto col = solve3(A, e[c], rel_tol);
    if (!col) return std::nullopt;
    inv(0, c) = col->x;
    inv(1, c) = col->y;
    inv(2, c) = col->z;
  }
  return inv;
}

// --- Planar rigid transforms -------------------------------------------------

// SE(2) element stored as heading plus translation.
struct Pose2 {
  Vec2 p;
  double theta = 0.0;

  static constexpr Pose2 identity() { return {}; }

  Pose2 compose(const Pose2& o) const {
    const Mat2 R = Mat2::rotation(theta);
    return {p + R * o.p, theta + o.theta};
  }
};

// Exact exponential of a constant body-frame twist (u, omega) over dt.
inline Pose2 se2_exp(Vec2 u, double omega, double dt) {
  const double phi = omega * dt;
  double s_over, one_minus_c_over;
  if (std::abs(phi) < 1e-8) {
    // series expansion keeps the small-rotation limit exact to double precision
    s_over = 1.0 - phi * phi / 6.0;
    one_minus_c_over = phi / 2.0 - phi * phi * phi / 24.0;
  } else {
    s_over = std::sin(phi) / phi;
    one_minus_c_over = (1.0 - std::cos(phi)) / phi;
  }
  const Mat2 V{s_over, -one_minus_c_over, one_minus_c_over, s_over};
  return {V * (u * dt), phi};
}

// Deterministic uniform double in [0, 1) from a raw 64-bit generator draw.
// Unlike std::uniform_real_distribution this is identical on every platform.
template <class Rng>
double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <class Rng>
double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

}  // namespace multileg
