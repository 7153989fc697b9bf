#include "surroundgeo/core/camera.hpp"

#include <cmath>

namespace surroundgeo {

CameraModel CameraModel::from_fov(double fov_x_rad, double width,
                                  double height) {
  CameraModel cam;
  const double f = 0.5 * width / std::tan(0.5 * fov_x_rad);
  cam.focal = Eigen::Vector2d(f, f);
  cam.principal = Eigen::Vector2d(0.5 * width, 0.5 * height);
  cam.image_size = Eigen::Vector2d(width, height);
  return cam;
}

bool try_project(const CameraModel& cam, const Eigen::Vector3d& x,
                 Eigen::Vector2d* u) {
  if (!(x.z() > 1e-12)) return false;
  const double inv_z = 1.0 / x.z();
  (*u)(0) = cam.focal.x() * x.x() * inv_z + cam.principal.x();
  (*u)(1) = cam.focal.y() * x.y() * inv_z + cam.principal.y();
  return true;
}

Eigen::Vector2d project(const CameraModel& cam, const Eigen::Vector3d& x) {
  Eigen::Vector2d u;
  if (!try_project(cam, x, &u))
    fail(ErrorCode::DomainError, "project: point has non-positive depth");
  return u;
}

Eigen::Vector3d backproject(const CameraModel& cam, const Eigen::Vector2d& u) {
  Eigen::Vector3d f((u.x() - cam.principal.x()) / cam.focal.x(),
                    (u.y() - cam.principal.y()) / cam.focal.y(), 1.0);
  return f.normalized();
}

bool in_image(const CameraModel& cam, const Eigen::Vector2d& u, double margin) {
  return u.x() >= margin && u.y() >= margin &&
         u.x() <= cam.image_size.x() - margin &&
         u.y() <= cam.image_size.y() - margin;
}

void validate_rig(const CameraRig& rig) {
  if (rig.cameras.empty())
    fail(ErrorCode::DomainError, "rig must contain at least one camera");
  for (size_t l = 0; l < rig.cameras.size(); ++l) {
    if (!is_rotation(rig.cameras[l].R_cv))
      fail(ErrorCode::DomainError,
           "rig camera " + std::to_string(l) + " has an invalid R_cv");
  }
}

}  // namespace surroundgeo
