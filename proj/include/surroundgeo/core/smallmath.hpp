#pragma once

#include <Eigen/Core>

#include "surroundgeo/core/jet.hpp"

namespace surroundgeo {

// Fixed-size 3-vector / 3x3-matrix math usable with double or Jet scalars.
// Kept deliberately tiny; Eigen stays the workhorse for plain doubles.

template <typename T>
struct V3 {
  T x{}, y{}, z{};

  V3() = default;
  V3(T a, T b, T c) : x(a), y(b), z(c) {}
  explicit V3(const Eigen::Vector3d& v) : x(v.x()), y(v.y()), z(v.z()) {}

  V3 operator+(const V3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  V3 operator-(const V3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  V3 operator-() const { return {-x, -y, -z}; }
  V3 operator*(const T& s) const { return {x * s, y * s, z * s}; }

  T dot(const V3& o) const { return x * o.x + y * o.y + z * o.z; }
  V3 cross(const V3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  T squared_norm() const { return dot(*this); }
  T norm() const { return sqrt(squared_norm()); }
  V3 normalized() const {
    const T inv = T(1.0) / norm();
    return {x * inv, y * inv, z * inv};
  }
  Eigen::Vector3d values() const {
    return {value_of(x), value_of(y), value_of(z)};
  }
};

template <typename T>
inline V3<T> operator*(const T& s, const V3<T>& v) { return v * s; }

template <typename T>
struct M3 {
  T m[3][3] = {};

  M3() = default;
  explicit M3(const Eigen::Matrix3d& R) {
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) m[r][c] = T(R(r, c));
  }
  static M3 identity() {
    M3 I;
    I.m[0][0] = I.m[1][1] = I.m[2][2] = T(1.0);
    return I;
  }

  V3<T> operator*(const V3<T>& v) const {
    return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
  }

  M3 operator*(const M3& o) const {
    M3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        r.m[i][j] = m[i][0] * o.m[0][j] + m[i][1] * o.m[1][j] + m[i][2] * o.m[2][j];
    return r;
  }

  M3 transpose() const {
    M3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r.m[i][j] = m[j][i];
    return r;
  }

  V3<T> col(int j) const { return {m[0][j], m[1][j], m[2][j]}; }
};

// Rodrigues exponential, valid for small and large increments.
template <typename T>
M3<T> exp_so3_t(const V3<T>& w) {
  const T theta2 = w.squared_norm();
  T a, b;
  if (value_of(theta2) < 1e-16) {
    a = T(1.0) - theta2 / T(6.0);
    b = T(0.5) - theta2 / T(24.0);
  } else {
    const T theta = sqrt(theta2);
    a = sin(theta) / theta;
    b = (T(1.0) - cos(theta)) / theta2;
  }
  M3<T> R = M3<T>::identity();
  // I + a*[w]x + b*[w]x^2
  const T wx = w.x, wy = w.y, wz = w.z;
  R.m[0][0] += b * (-wz * wz - wy * wy);
  R.m[0][1] += -a * wz + b * wx * wy;
  R.m[0][2] += a * wy + b * wx * wz;
  R.m[1][0] += a * wz + b * wx * wy;
  R.m[1][1] += b * (-wx * wx - wz * wz);
  R.m[1][2] += -a * wx + b * wy * wz;
  R.m[2][0] += -a * wy + b * wx * wz;
  R.m[2][1] += a * wx + b * wy * wz;
  R.m[2][2] += b * (-wx * wx - wy * wy);
  return R;
}

// Rotation matrix of a (not necessarily unit) quaternion (x, y, z, w).
template <typename T>
M3<T> quat_to_rotation(const T& qx, const T& qy, const T& qz, const T& qw) {
  const T n = qx * qx + qy * qy + qz * qz + qw * qw;
  const T s = T(2.0) / n;
  M3<T> R;
  const T xx = qx * qx * s, yy = qy * qy * s, zz = qz * qz * s;
  const T xy = qx * qy * s, xz = qx * qz * s, yz = qy * qz * s;
  const T wx = qw * qx * s, wy = qw * qy * s, wz = qw * qz * s;
  R.m[0][0] = T(1.0) - (yy + zz);
  R.m[0][1] = xy - wz;
  R.m[0][2] = xz + wy;
  R.m[1][0] = xy + wz;
  R.m[1][1] = T(1.0) - (xx + zz);
  R.m[1][2] = yz - wx;
  R.m[2][0] = xz - wy;
  R.m[2][1] = yz + wx;
  R.m[2][2] = T(1.0) - (xx + yy);
  return R;
}

}  // namespace surroundgeo
