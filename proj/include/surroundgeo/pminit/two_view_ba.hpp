#pragma once

#include "surroundgeo/pminit/types.hpp"

namespace surroundgeo::pminit {

struct TwoViewBaResult {
  Rotation rotation = Rotation::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  std::vector<Eigen::Vector3d> points;  // frame-i coordinates
  double final_cost = 0.0;
  int iterations = 0;
};

// Single-camera two-view bundle adjustment over rotation, translation and
// structure, on unit-sphere (tangent-plane) reprojection residuals. Serves
// as the accuracy/runtime baseline for the univariate planar refinement.
TwoViewBaResult two_view_ba(const std::vector<BearingPair>& pairs,
                            const Rotation& R0, const Eigen::Vector3d& t0,
                            int max_iterations = 50, double tol = 1e-12);

}  // namespace surroundgeo::pminit
