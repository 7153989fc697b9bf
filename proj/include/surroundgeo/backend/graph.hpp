#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "surroundgeo/core/camera.hpp"
#include "surroundgeo/core/pose.hpp"

namespace surroundgeo::backend {

struct Frame {
  double t = 0.0;     // seconds, on the compressed timeline
  Pose pose;          // vehicle-to-world, initial value
  int motion_sign = 1;  // +1 forward, -1 reverse, from the front end
};

struct Measurement {
  int camera = 0;
  int landmark = 0;
  int frame = 0;
  Eigen::Vector2d pixel = Eigen::Vector2d::Zero();
};

struct GpsFix {
  double t = 0.0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  double sigma = 1.0;  // meters
};

struct ObservationGraph {
  CameraRig rig;
  std::vector<Frame> frames;
  std::vector<Eigen::Vector3d> landmarks;  // initial values, world frame
  std::vector<Measurement> measurements;
  std::vector<GpsFix> gps;

  void validate() const;
};

// Graph JSON round trip ({frames, landmarks, measurements, gps, rig}).
ObservationGraph load_graph(const std::string& path);
void save_graph(const ObservationGraph& graph, const std::string& path);

}  // namespace surroundgeo::backend
