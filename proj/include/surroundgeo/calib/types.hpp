#pragma once

#include <Eigen/Core>
#include <array>
#include <vector>

#include "surroundgeo/core/rotation.hpp"
#include "surroundgeo/pminit/types.hpp"

namespace surroundgeo::calib {

enum class MotionClass { Straight, Turning, Ambiguous };

// A pair of views of one camera with matched bearings and an upstream
// relative-pose measurement (used for classification and the direction
// constraints; the joint objective re-derives the rotation internally).
struct PairObservation {
  int camera = 0;
  int frame_i = 0;
  int frame_j = 0;
  std::vector<pminit::BearingPair> bearings;
  Rotation rotation_meas = Rotation::Identity();   // R^c_ij
  Eigen::Vector3d t_dir_meas = Eigen::Vector3d::UnitZ();  // unit norm
};

struct VerticalLineObservation {
  int camera = 0;
  int frame = 0;
  Eigen::Vector3d normal = Eigen::Vector3d::UnitX();  // interpretation plane
};

struct CalibrationConfig {
  // Classification thresholds in Frobenius-gap units; defaults are the gaps
  // of 0.5 and 2 degrees.
  double tau1 = 0.012336;
  double tau2 = 0.049342;
  bool dynamic_weights = true;
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double lambda3 = 1.0;
  bool use_rotation_axis = true;   // false disables the axis term (lambda2=0)
  bool use_vertical_lines = true;
  double huber_mad_factor = 1.345; // robust scale = factor * residual MAD
  int max_iterations = 100;
  double relative_decrease_tol = 1e-9;
  bool fix_gauge = true;           // pin the first vehicle orientation
  Rotation first_orientation = Rotation::Identity();  // the pinned gauge
  // Prior direction of vehicle-up expressed in each camera frame, used only
  // to resolve the sign of axis/line vertical estimates at initialization.
  Eigen::Vector3d up_prior_in_camera = Eigen::Vector3d(0, -1, 0);
};

struct CalibrationProblem {
  int num_cameras = 0;
  int num_frames = 0;
  std::vector<PairObservation> pairs;
  std::vector<VerticalLineObservation> lines;
  CalibrationConfig config;
};

struct EnergyBreakdown {
  double e0 = 0.0;
  double e1 = 0.0;
  double e2 = 0.0;
  double e3 = 0.0;
  double total() const { return e0 + e1 + e2 + e3; }  // with weights applied
};

struct CalibrationResult {
  std::vector<Rotation> R_cv;                  // per camera, x_c = R_cv x_v
  std::vector<Rotation> vehicle_orientations;  // R^v_i per frame
  EnergyBreakdown energies;               // weighted, at the final state
  bool converged = false;
  int iterations = 0;
  // Per accepted iteration: {iteration, E0, E1, E2, E3, total}.
  std::vector<std::array<double, 6>> convergence_log;
};

}  // namespace surroundgeo::calib
