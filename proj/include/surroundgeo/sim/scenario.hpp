#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "surroundgeo/backend/graph.hpp"
#include "surroundgeo/core/camera.hpp"
#include "surroundgeo/core/pose.hpp"
#include "surroundgeo/pipeline/tracks.hpp"
#include "surroundgeo/pminit/types.hpp"

namespace surroundgeo::sim {

enum class Scenario { Calibration, MotionInit, Backend, Pipeline };

const char* scenario_name(Scenario s);
Scenario scenario_from_name(const std::string& name);

enum class BackendPath { Straight, SCurve };

struct ScenarioConfig {
  Scenario scenario = Scenario::MotionInit;
  uint64_t seed = 0;
  double noise_px = 0.0;          // uniform half-width (Calibration) or
                                  // Gaussian std (other scenarios)
  double outlier_fraction = 0.0;
  double min_parallax_deg = 2.0;  // rejection floor when sampling landmarks

  // motion-init protocol: viewpoints connected by arc steps whose yaw
  // increment grows linearly, omega_i = 0.04*k*i + omega0.
  double v_per_frame = 0.1;       // m
  double omega0_deg = 0.2;
  double ackermann_k = 0.0;
  int num_viewpoints = 7;
  double fov_deg = 120.0;
  int points_per_camera = 20;
  double depth_min = 3.0;
  double depth_max = 15.0;
  // When >= 0 the protocol is replaced by a single two-view step of this
  // yaw (degrees) over step_length meters.
  double direct_yaw_deg = -1.0;
  double step_length = 0.5;
  bool single_camera = false;     // keep only the forward camera

  // calibration protocol: two side cameras, straight then turning.
  int calib_frames = 60;
  double calib_spacing = 0.3;     // m between consecutive frames
  int calib_straight_frames = 20;
  double calib_turn_deg_per_frame = 3.0;
  int calib_points_per_pair = 50;
  int calib_lines_per_frame = 5;
  double calib_depth_min = 4.0;
  double calib_depth_max = 20.0;

  // backend protocol
  BackendPath backend_path = BackendPath::SCurve;
  int backend_frames = 60;
  double backend_rate_hz = 10.0;
  double backend_speed = 6.0;     // m/s
  int local_connectivity = 40;    // sampled image points per view
  int global_connectivity = 3;    // observation cap per landmark
  double backend_depth_min = 6.0;
  double backend_depth_max = 30.0;
  double init_yaw_walk_deg = 0.25;  // per-frame random-walk perturbation
  double init_pos_walk = 0.03;      // m

  // pipeline protocol
  double pipeline_rate_hz = 10.0;
  double pipeline_speed = 5.0;    // m/s
  double stop_duration = 6.0;     // s
  double reverse_duration = 4.0;  // s
  double gps_rate_hz = 1.0;
  double gps_sigma = 2.0;         // m
  int gps_jump_count = 3;
  double gps_jump_magnitude = 60.0;  // m
  int max_tracks_per_frame = 50;
  double pipeline_fov_deg = 100.0;
};

struct TimedPose {
  double t = 0.0;
  Pose pose;  // vehicle-to-world
};

struct PixelPair {
  Eigen::Vector2d ui, uj;
};

struct CalibPairMeasurements {
  int camera = 0;
  int frame_i = 0;
  int frame_j = 0;
  std::vector<PixelPair> clean;
  std::vector<PixelPair> noisy;
};

struct LineMeasurements {
  int camera = 0;
  int frame = 0;
  std::vector<Eigen::Vector2d> clean;
  std::vector<Eigen::Vector2d> noisy;
  Eigen::Vector3d true_normal = Eigen::Vector3d::UnitX();  // camera frame
};

struct GroundTruthBundle {
  ScenarioConfig config;
  CameraRig rig;
  std::vector<TimedPose> poses;
  std::vector<Eigen::Vector3d> landmarks;

  // calibration scenario
  std::vector<CalibPairMeasurements> calib_pairs;
  std::vector<LineMeasurements> calib_lines;

  // motion-init scenario (between the first and last viewpoint)
  pminit::BearingCorrespondenceSet clean_corrs;
  pminit::BearingCorrespondenceSet noisy_corrs;
  std::vector<std::vector<bool>> outlier_labels;  // true = outlier
  Pose true_step;                                 // T^v_ij

  // backend scenario
  backend::ObservationGraph graph;        // noisy, perturbed initialization
  backend::ObservationGraph clean_graph;  // exact, truth initialization

  // pipeline scenario
  pipeline::TrackStore tracks;
  std::vector<backend::GpsFix> gps_clean;
  std::vector<backend::GpsFix> gps_noisy;
  std::vector<int> gps_jump_indices;
  std::vector<int> motion_signs;  // per frame, +1 forward / -1 reverse
};

// Rig builders shared by scenarios and tests.
CameraRig two_side_camera_rig(double baseline = 0.1);
CameraRig surround_rig(double fov_deg, bool single_camera = false);

GroundTruthBundle gen_calibration_scene(const ScenarioConfig& config);
GroundTruthBundle gen_motion_scene(const ScenarioConfig& config);
GroundTruthBundle gen_backend_scene(const ScenarioConfig& config);
GroundTruthBundle gen_pipeline_scene(const ScenarioConfig& config);

GroundTruthBundle generate(const ScenarioConfig& config);

}  // namespace surroundgeo::sim
