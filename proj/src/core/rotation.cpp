#include "surroundgeo/core/rotation.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace surroundgeo {

bool is_rotation(const Rotation& R, double tol) {
  if (!R.allFinite()) return false;
  const double ortho = (R.transpose() * R - Eigen::Matrix3d::Identity()).norm();
  return ortho < tol && std::abs(R.determinant() - 1.0) < tol;
}

Rotation rotation_about_x(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Rotation R;
  R << 1, 0, 0, 0, c, -s, 0, s, c;
  return R;
}

Rotation rotation_about_y(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Rotation R;
  R << c, 0, s, 0, 1, 0, -s, 0, c;
  return R;
}

Rotation rotation_about_z(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Rotation R;
  R << c, -s, 0, s, c, 0, 0, 0, 1;
  return R;
}

Rotation exp_so3(const Eigen::Vector3d& w) {
  const double theta2 = w.squaredNorm();
  const double theta = std::sqrt(theta2);
  double a, b;
  if (theta < 1e-8) {
    a = 1.0 - theta2 / 6.0;
    b = 0.5 - theta2 / 24.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta2;
  }
  const Eigen::Matrix3d S = skew(w);
  return Eigen::Matrix3d::Identity() + a * S + b * S * S;
}

Eigen::Vector3d log_so3(const Rotation& R) {
  const AxisAngle aa = rotation_to_axis_angle(R);
  if (!aa.axis_defined) return Eigen::Vector3d::Zero();
  return aa.axis * aa.angle;
}

Rotation cayley_z_to_rotation(double z) {
  // Rational form of Rz(2*atan(z)): cos = (1-z^2)/(1+z^2), sin = 2z/(1+z^2).
  const double d = 1.0 + z * z;
  const double c = (1.0 - z * z) / d;
  const double s = 2.0 * z / d;
  Rotation R;
  R << c, -s, 0, s, c, 0, 0, 0, 1;
  return R;
}

AxisAngle rotation_to_axis_angle(const Rotation& R) {
  AxisAngle out;
  const Eigen::Vector3d w(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0),
                          R(1, 0) - R(0, 1));
  const double wn = w.norm();           // 2*sin(theta)
  const double tr = R.trace() - 1.0;    // 2*cos(theta)
  out.angle = std::atan2(wn, tr);
  if (out.angle < 1e-9) {
    out.axis_defined = false;
    out.angle = 0.0;
    return out;
  }
  if (out.angle < M_PI - 1e-4) {
    out.axis = w / wn;
    return out;
  }
  // Near pi the skew part cancels. The symmetric part of (R+I)/2 equals
  // ((1+cos)I + (1-cos)*axis*axis^T)/2; subtracting the isotropic term
  // leaves a clean outer product whose largest-diagonal column is the axis.
  const double cos_theta = 0.5 * tr;
  const Eigen::Matrix3d A =
      0.25 * (R + R.transpose()) -
      0.5 * cos_theta * Eigen::Matrix3d::Identity();
  int j = 0;
  A.diagonal().maxCoeff(&j);
  Eigen::Vector3d axis = A.col(j).normalized();
  // Keep the sign consistent with the (vanishing) skew part when available.
  if (wn > 1e-12 && axis.dot(w) < 0.0) axis = -axis;
  out.axis = axis;
  return out;
}

double frobenius_rotation_gap(const Rotation& R) {
  return (R - Eigen::Matrix3d::Identity()).norm();
}

double rotation_angle(const Rotation& R) {
  return rotation_to_axis_angle(R).angle;
}

Rotation project_to_rotation(const Eigen::Matrix3d& M) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d UVt = svd.matrixU() * svd.matrixV().transpose();
  Eigen::Vector3d d(1, 1, UVt.determinant() < 0 ? -1 : 1);
  return svd.matrixU() * d.asDiagonal() * svd.matrixV().transpose();
}

double rotation_distance(const Rotation& A, const Rotation& B) {
  return rotation_angle(Rotation(A.transpose() * B));
}

}  // namespace surroundgeo
