#pragma once

#include <Eigen/Core>
#include <vector>

#include "surroundgeo/core/error.hpp"
#include "surroundgeo/core/pose.hpp"

namespace surroundgeo {

// Central projective camera. No distortion model.
struct CameraModel {
  Eigen::Vector2d focal = Eigen::Vector2d(250.0, 250.0);      // px
  Eigen::Vector2d principal = Eigen::Vector2d(250.0, 250.0);  // px
  Eigen::Vector2d image_size = Eigen::Vector2d(500.0, 500.0); // px (w, h)

  static CameraModel from_fov(double fov_x_rad, double width, double height);
};

// Pinhole projection; requires positive depth.
bool try_project(const CameraModel& cam, const Eigen::Vector3d& x,
                 Eigen::Vector2d* u);
Eigen::Vector2d project(const CameraModel& cam, const Eigen::Vector3d& x);

// Unit bearing through pixel u; never fails.
Eigen::Vector3d backproject(const CameraModel& cam, const Eigen::Vector2d& u);

bool in_image(const CameraModel& cam, const Eigen::Vector2d& u,
              double margin = 0.0);

// One physical camera of the rig: intrinsics plus the vehicle-to-camera
// extrinsic transform x_c = R_cv * x_v + t_cv.
struct RigCamera {
  CameraModel model;
  Rotation R_cv = Rotation::Identity();
  Eigen::Vector3d t_cv = Eigen::Vector3d::Zero();

  Rotation R_vc() const { return R_cv.transpose(); }
  // Camera center expressed in the vehicle frame.
  Eigen::Vector3d center_in_vehicle() const { return -(R_cv.transpose() * t_cv); }
  Pose cam_from_vehicle() const { return Pose{R_cv, t_cv}; }
  Pose vehicle_from_cam() const { return cam_from_vehicle().inverse(); }
};

struct CameraRig {
  std::vector<RigCamera> cameras;

  int size() const { return static_cast<int>(cameras.size()); }
  const RigCamera& at(int l) const { return cameras.at(static_cast<size_t>(l)); }
};

void validate_rig(const CameraRig& rig);

}  // namespace surroundgeo
