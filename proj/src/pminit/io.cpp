#include "surroundgeo/pminit/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "surroundgeo/core/error.hpp"

namespace surroundgeo::pminit {

void save_correspondences(const BearingCorrespondenceSet& corrs,
                          const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) fail(ErrorCode::IoError, "cannot write " + path);
  std::fprintf(f, "camera_id,k,fx_i,fy_i,fz_i,fx_j,fy_j,fz_j\n");
  for (size_t l = 0; l < corrs.per_camera.size(); ++l) {
    for (size_t k = 0; k < corrs.per_camera[l].size(); ++k) {
      const BearingPair& bp = corrs.per_camera[l][k];
      std::fprintf(f, "%zu,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", l, k,
                   bp.fi.x(), bp.fi.y(), bp.fi.z(), bp.fj.x(), bp.fj.y(),
                   bp.fj.z());
    }
  }
  std::fclose(f);
}

BearingCorrespondenceSet load_correspondences(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);
  BearingCorrespondenceSet corrs;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (first && line.find("camera_id") != std::string::npos) {
      first = false;
      continue;
    }
    first = false;
    std::stringstream ss(line);
    std::string field;
    std::vector<double> vals;
    while (std::getline(ss, field, ',')) vals.push_back(std::stod(field));
    if (vals.size() != 8)
      fail(ErrorCode::IoError, "correspondence row needs 8 fields: " + line);
    const int cam = static_cast<int>(vals[0]);
    if (cam < 0) fail(ErrorCode::IoError, "negative camera id");
    if (static_cast<int>(corrs.per_camera.size()) <= cam)
      corrs.per_camera.resize(cam + 1);
    BearingPair bp;
    bp.fi = Eigen::Vector3d(vals[2], vals[3], vals[4]).normalized();
    bp.fj = Eigen::Vector3d(vals[5], vals[6], vals[7]).normalized();
    corrs.per_camera[cam].push_back(bp);
  }
  return corrs;
}

std::string estimate_to_json(const PlanarMotionEstimate& est) {
  nlohmann::json j;
  j["z"] = est.z;
  j["yaw_rad"] = 2.0 * std::atan(est.z);
  std::vector<double> rot;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) rot.push_back(est.rotation(r, c));
  j["rotation"] = rot;  // row-major
  j["translation"] = {est.translation.x(), est.translation.y(),
                      est.translation.z()};
  j["scale_observable"] = est.scale_observable;
  j["scales"] = est.scales;
  nlohmann::json dirs = nlohmann::json::array();
  for (size_t l = 0; l < est.translation_dirs.size(); ++l) {
    dirs.push_back({{"camera", l},
                    {"valid", est.direction_valid[l]},
                    {"dir",
                     {est.translation_dirs[l].x(), est.translation_dirs[l].y(),
                      est.translation_dirs[l].z()}}});
  }
  j["translation_directions"] = dirs;
  nlohmann::json inliers = nlohmann::json::array();
  for (const auto& cam_mask : est.inlier_mask) {
    nlohmann::json m = nlohmann::json::array();
    for (bool b : cam_mask) m.push_back(b);
    inliers.push_back(m);
  }
  j["inlier_mask"] = inliers;
  return j.dump(2);
}

void save_estimate(const PlanarMotionEstimate& est, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path);
  out << estimate_to_json(est) << "\n";
}

}  // namespace surroundgeo::pminit
