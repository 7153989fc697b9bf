#pragma once

#include "surroundgeo/core/camera.hpp"
#include "surroundgeo/pminit/types.hpp"

namespace surroundgeo::pminit {

// Epipolar plane normal in the body frame:
//   n = (R_vc f_i) x (R^v R_vc f_j).
// For a true correspondence n is orthogonal to the camera translation
// expressed in the vehicle frame. Zero-parallax pairs give |n| ~ 0.
Eigen::Vector3d epipolar_normal(const Eigen::Vector3d& fi,
                                const Eigen::Vector3d& fj,
                                const Rotation& R_vc, const Rotation& R_v);

// Sum over cameras of the squared smallest eigenvalue of the stacked
// normal outer products. Zero at the true yaw for noise-free data.
double algebraic_objective(const BearingCorrespondenceSet& corrs,
                           const CameraRig& rig, double z);

// Same with each outer product normalized by |n|^2: the sum of squared
// object-space (skew ray distance) residuals minimized over the per-camera
// translation direction.
double objective_object_space(const BearingCorrespondenceSet& corrs,
                              const CameraRig& rig, double z,
                              double zero_parallax_guard = 1e-12);

// Grid sampling of z = tan(theta/2) followed by a damped 1-D Newton descent
// on the object-space objective.
double solve_rotation(const BearingCorrespondenceSet& corrs,
                      const CameraRig& rig, const PlanarSolveConfig& config);

// Per-camera translation directions at a solved z: the eigenvector of the
// reweighted normal matrix for the smallest eigenvalue. Sign fixed to a
// non-negative forward (y) component unless the reverse prior is set.
// Cameras with fewer than two usable correspondences are flagged invalid.
void translation_directions(const BearingCorrespondenceSet& corrs,
                            const CameraRig& rig, double z,
                            const PlanarSolveConfig& config,
                            std::vector<Eigen::Vector3d>* dirs,
                            std::vector<bool>* valid);

// Recovers per-camera scales and the metric vehicle translation from the
// stacked hand-eye constraints  lambda_l*dir_l - t^v = (R^v - I) t_vc_l.
// Scale is flagged unobservable for (near-)identity rotation or a
// rank-deficient stacked system; the direction is still returned.
struct TranslationRecovery {
  std::vector<double> scales;
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  bool scale_observable = false;
};
TranslationRecovery recover_translation(
    const std::vector<Eigen::Vector3d>& dirs, const std::vector<bool>& valid,
    const CameraRig& rig, const Rotation& R_v);

// Full per-pair estimate without robustification.
PlanarMotionEstimate solve_planar_motion(const BearingCorrespondenceSet& corrs,
                                         const CameraRig& rig,
                                         const PlanarSolveConfig& config);

// Robust consensus wrapper: minimal subsets of sample_per_camera
// correspondences per populated camera, scored by the normalized
// object-space distance, final refit on the inlier set.
PlanarMotionEstimate ransac_solve(const BearingCorrespondenceSet& corrs,
                                  const CameraRig& rig,
                                  const PlanarSolveConfig& config);

}  // namespace surroundgeo::pminit
