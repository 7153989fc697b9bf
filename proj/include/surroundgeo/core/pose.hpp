#pragma once

#include <Eigen/Core>

#include "surroundgeo/core/rotation.hpp"

namespace surroundgeo {

// Rigid transform x_out = R * x_in + t.
struct Pose {
  Rotation R = Rotation::Identity();
  Eigen::Vector3d t = Eigen::Vector3d::Zero();

  static Pose Identity() { return Pose{}; }

  Pose inverse() const { return Pose{R.transpose(), -(R.transpose() * t)}; }

  Pose operator*(const Pose& other) const {
    return Pose{R * other.R, R * other.t + t};
  }

  Eigen::Vector3d operator*(const Eigen::Vector3d& x) const {
    return R * x + t;
  }
};

// T_ij = T_i^-1 * T_j: maps points from frame j to frame i.
inline Pose relative_pose(const Pose& Ti, const Pose& Tj) {
  return Ti.inverse() * Tj;
}

inline double pose_translation_distance(const Pose& a, const Pose& b) {
  return (a.t - b.t).norm();
}

}  // namespace surroundgeo
