#pragma once

#include <array>
#include <cmath>

namespace neuralshell {

// Minimal fixed-size linear algebra used throughout the library.  The
// simulator only ever needs 3-vectors, 2x2 metric blocks and unit
// quaternions, so a few inline helpers beat a heavyweight dependency.

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  double& operator[](int i) { return (&x)[i]; }
  double operator[](int i) const { return (&x)[i]; }

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline Vec3 lerp(const Vec3& a, const Vec3& b, double t) { return a + (b - a) * t; }

// Symmetric 2x2 matrix stored as (m11, m12, m22); used for the surface
// metric and curvature blocks where index symmetry is structural.
struct Sym2 {
  double m11 = 0.0, m12 = 0.0, m22 = 0.0;

  double operator()(int a, int b) const { return (a == 0) ? (b == 0 ? m11 : m12) : (b == 0 ? m12 : m22); }
  double det() const { return m11 * m22 - m12 * m12; }
  Sym2 inverse() const {
    const double d = det();
    return {m22 / d, -m12 / d, m11 / d};
  }
};

// Unit quaternion; enough API for rigid reference-pose edits (compose,
// rotate, normalized linear-angle interpolation).
struct Quat {
  double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

  static Quat identity() { return {}; }
  static Quat from_axis_angle(const Vec3& axis, double angle) {
    const double n = norm(axis);
    if (n == 0.0) return identity();
    const double h = 0.5 * angle, s = std::sin(h) / n;
    return {std::cos(h), axis.x * s, axis.y * s, axis.z * s};
  }

  Vec3 rotate(const Vec3& v) const {
    // q v q* expanded for unit quaternions.
    const Vec3 u{x, y, z};
    const Vec3 t = 2.0 * cross(u, v);
    return v + w * t + cross(u, t);
  }
};

inline Quat slerp(const Quat& a, const Quat& b, double t) {
  double c = a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z;
  Quat bb = b;
  if (c < 0.0) { c = -c; bb = {-b.w, -b.x, -b.y, -b.z}; }
  double wa, wb;
  if (c > 1.0 - 1e-10) {
    wa = 1.0 - t;  // nearly parallel: fall back to lerp
    wb = t;
  } else {
    const double th = std::acos(c), s = std::sin(th);
    wa = std::sin((1.0 - t) * th) / s;
    wb = std::sin(t * th) / s;
  }
  Quat q{wa * a.w + wb * bb.w, wa * a.x + wb * bb.x, wa * a.y + wb * bb.y, wa * a.z + wb * bb.z};
  const double n = std::sqrt(q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z);
  return {q.w / n, q.x / n, q.y / n, q.z / n};
}

}  // namespace neuralshell
