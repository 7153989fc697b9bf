#include "surroundgeo/pipeline/tracks.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "surroundgeo/core/error.hpp"

namespace surroundgeo::pipeline {

void save_tracks(const TrackStore& tracks, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) fail(ErrorCode::IoError, "cannot write " + path);
  std::fprintf(f, "camera_id,track_id,frame_id,u,v\n");
  for (size_t l = 0; l < tracks.per_camera.size(); ++l) {
    for (const auto& [track_id, points] : tracks.per_camera[l]) {
      for (const TrackPoint& p : points)
        std::fprintf(f, "%zu,%d,%d,%.17g,%.17g\n", l, track_id, p.frame,
                     p.pixel.x(), p.pixel.y());
    }
  }
  std::fclose(f);
}

TrackStore load_tracks(const std::string& path,
                       const std::vector<double>& frame_times) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);
  TrackStore tracks;
  tracks.frame_times = frame_times;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (line.find("camera_id") != std::string::npos) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<double> vals;
    while (std::getline(ss, field, ',')) vals.push_back(std::stod(field));
    if (vals.size() != 5)
      fail(ErrorCode::IoError, "track row needs 5 fields: " + line);
    const int cam = static_cast<int>(vals[0]);
    if (static_cast<int>(tracks.per_camera.size()) <= cam)
      tracks.per_camera.resize(cam + 1);
    tracks.per_camera[cam][static_cast<int>(vals[1])].push_back(
        {static_cast<int>(vals[2]), {vals[3], vals[4]}});
  }
  for (auto& cam : tracks.per_camera)
    for (auto& [id, points] : cam)
      std::sort(points.begin(), points.end(),
                [](const TrackPoint& a, const TrackPoint& b) {
                  return a.frame < b.frame;
                });
  return tracks;
}

}  // namespace surroundgeo::pipeline
