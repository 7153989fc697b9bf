#pragma once

#include <Eigen/Core>
#include <map>
#include <string>
#include <vector>

namespace surroundgeo::pipeline {

struct TrackPoint {
  int frame = 0;
  Eigen::Vector2d pixel = Eigen::Vector2d::Zero();
};

// Pre-extracted feature tracks: per camera, track id -> time-ordered pixels.
// Track ids are globally unique across cameras (a physical landmark seen by
// two cameras appears as two tracks).
struct TrackStore {
  std::vector<std::map<int, std::vector<TrackPoint>>> per_camera;
  std::vector<double> frame_times;  // seconds, index = frame id

  int num_cameras() const { return static_cast<int>(per_camera.size()); }
  int num_frames() const { return static_cast<int>(frame_times.size()); }
};

// Track file: CSV rows (camera_id, track_id, frame_id, u, v).
TrackStore load_tracks(const std::string& path,
                       const std::vector<double>& frame_times);
void save_tracks(const TrackStore& tracks, const std::string& path);

}  // namespace surroundgeo::pipeline
