#include "surroundgeo/sim/calib_problem.hpp"

#include "surroundgeo/calib/calibration.hpp"
#include "surroundgeo/pminit/eight_point.hpp"

namespace surroundgeo::sim {

calib::CalibrationProblem build_calibration_problem(
    const GroundTruthBundle& bundle, const calib::CalibrationConfig& config,
    bool use_noisy) {
  calib::CalibrationProblem problem;
  problem.config = config;
  problem.num_cameras = bundle.rig.size();
  problem.num_frames = static_cast<int>(bundle.poses.size());

  for (const CalibPairMeasurements& meas : bundle.calib_pairs) {
    const auto& pixels = use_noisy ? meas.noisy : meas.clean;
    if (pixels.size() < 8) continue;
    const CameraModel& model = bundle.rig.at(meas.camera).model;
    calib::PairObservation obs;
    obs.camera = meas.camera;
    obs.frame_i = meas.frame_i;
    obs.frame_j = meas.frame_j;
    obs.bearings.reserve(pixels.size());
    for (const PixelPair& pp : pixels)
      obs.bearings.push_back(
          {backproject(model, pp.ui), backproject(model, pp.uj)});
    try {
      const pminit::RelativePose rel = pminit::eight_point_baseline(obs.bearings);
      obs.rotation_meas = rel.rotation;
      obs.t_dir_meas = rel.t_dir;
    } catch (const Error&) {
      continue;  // degenerate pair: drop it rather than feed garbage
    }
    problem.pairs.push_back(std::move(obs));
  }

  for (const LineMeasurements& line : bundle.calib_lines) {
    const auto& pixels = use_noisy ? line.noisy : line.clean;
    if (pixels.size() < 2) continue;
    calib::VerticalLineObservation obs;
    obs.camera = line.camera;
    obs.frame = line.frame;
    try {
      obs.normal =
          calib::line_plane_normal(pixels, bundle.rig.at(line.camera).model);
    } catch (const Error&) {
      continue;
    }
    problem.lines.push_back(obs);
  }
  return problem;
}

}  // namespace surroundgeo::sim
