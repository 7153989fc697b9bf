#pragma once

#include <Eigen/Core>

namespace surroundgeo {

// Rotations are kept as plain 3x3 matrices at rest. Minimal 3-DoF
// parametrizations appear only as local increments inside optimizers.
using Rotation = Eigen::Matrix3d;

bool is_rotation(const Rotation& R, double tol = 1e-9);

Rotation rotation_about_x(double angle);
Rotation rotation_about_y(double angle);
Rotation rotation_about_z(double angle);

// Rodrigues exponential of an angle-scaled axis vector.
Rotation exp_so3(const Eigen::Vector3d& w);

// Inverse of exp_so3; returns axis*angle with angle in [0, pi].
Eigen::Vector3d log_so3(const Rotation& R);

// Rotation about +z by 2*atan(z); rational in z, exact on SO(3).
Rotation cayley_z_to_rotation(double z);

struct AxisAngle {
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
  double angle = 0.0;       // in [0, pi]
  bool axis_defined = true; // false below the angle resolution floor
};

// Decomposes R into axis/angle. For angles under 1e-9 rad the axis is
// reported undefined and must not be used by the caller.
AxisAngle rotation_to_axis_angle(const Rotation& R);

// ||R - I||_F == 2*sqrt(2)*|sin(theta/2)|; monotone in the rotation angle.
double frobenius_rotation_gap(const Rotation& R);

// Geodesic angle of R in [0, pi].
double rotation_angle(const Rotation& R);

// Nearest rotation matrix in the Frobenius sense (SVD projection).
Rotation project_to_rotation(const Eigen::Matrix3d& M);

// Angle between two rotations, in radians.
double rotation_distance(const Rotation& A, const Rotation& B);

inline Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d S;
  S << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return S;
}

}  // namespace surroundgeo
