#pragma once

#include "surroundgeo/calib/types.hpp"
#include "surroundgeo/sim/scenario.hpp"

namespace surroundgeo::sim {

// Assembles a calibration problem from a calibration scene: bearings from
// (noisy) pixels, per-pair relative poses from the essential-matrix
// baseline, line normals from the sampled line points.
calib::CalibrationProblem build_calibration_problem(
    const GroundTruthBundle& bundle, const calib::CalibrationConfig& config,
    bool use_noisy = true);

}  // namespace surroundgeo::sim
