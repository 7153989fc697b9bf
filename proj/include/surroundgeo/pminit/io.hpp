#pragma once

#include <string>

#include "surroundgeo/pminit/types.hpp"

namespace surroundgeo::pminit {

// Correspondence file: CSV rows
//   camera_id, k, fx_i, fy_i, fz_i, fx_j, fy_j, fz_j
void save_correspondences(const BearingCorrespondenceSet& corrs,
                          const std::string& path);
BearingCorrespondenceSet load_correspondences(const std::string& path);

std::string estimate_to_json(const PlanarMotionEstimate& est);
void save_estimate(const PlanarMotionEstimate& est, const std::string& path);

}  // namespace surroundgeo::pminit
