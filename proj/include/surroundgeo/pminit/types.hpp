#pragma once

#include <Eigen/Core>
#include <vector>

#include "surroundgeo/core/pose.hpp"

namespace surroundgeo::pminit {

// One matched pair of unit bearings seen from viewpoints i and j.
struct BearingPair {
  Eigen::Vector3d fi = Eigen::Vector3d::UnitZ();
  Eigen::Vector3d fj = Eigen::Vector3d::UnitZ();
};

// Per-camera bearing correspondences between two rig viewpoints.
struct BearingCorrespondenceSet {
  std::vector<std::vector<BearingPair>> per_camera;

  int num_cameras() const { return static_cast<int>(per_camera.size()); }
  int total() const {
    int n = 0;
    for (const auto& c : per_camera) n += static_cast<int>(c.size());
    return n;
  }
};

struct PlanarMotionEstimate {
  double z = 0.0;                       // Cayley parameter, yaw = 2*atan(z)
  Rotation rotation = Rotation::Identity();  // R^v of the step
  std::vector<Eigen::Vector3d> translation_dirs;  // per camera, vehicle frame
  std::vector<bool> direction_valid;              // per camera
  std::vector<double> scales;           // per camera, meters; valid iff
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();  // t^v, meters
  bool scale_observable = false;
  std::vector<std::vector<bool>> inlier_mask;  // per camera per correspondence
};

// Consensus scoring metric: the object-space skew-ray distance, or the
// angular deviation of the first bearing from the epipolar plane of the
// second (insensitive to per-correspondence parallax).
enum class InlierMetric { ObjectSpace, EpipolarAngle };

struct PlanarSolveConfig {
  double grid_half_range_deg = 60.0;
  double grid_step_deg = 2.5;
  double newton_tol_z = 1e-10;
  int max_newton_iterations = 50;
  int min_total_correspondences = 3;
  double zero_parallax_guard = 1e-12;   // skip pairs with |n|^2 below this
  bool reverse_prior = false;           // flip direction sign convention
  // robust consensus
  InlierMetric inlier_metric = InlierMetric::ObjectSpace;
  double inlier_threshold = 1e-3;       // in the metric's units (radians for
                                        // EpipolarAngle)
  int max_ransac_iterations = 200;
  double confidence = 0.99;
  double min_inlier_ratio = 0.2;
  int sample_per_camera = 2;
  uint64_t seed = 0;
};

}  // namespace surroundgeo::pminit
