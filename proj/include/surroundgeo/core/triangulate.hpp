#pragma once

#include <Eigen/Core>
#include <vector>

namespace surroundgeo {

struct Ray {
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  Eigen::Vector3d dir = Eigen::Vector3d::UnitZ();  // unit norm
};

struct TriangulationResult {
  Eigen::Vector3d point = Eigen::Vector3d::Zero();
  bool ok = false;            // false when the rays are (near-)parallel
  double max_parallax = 0.0;  // radians, largest pairwise ray angle
};

// Point minimizing the sum of squared orthogonal distances to the rays.
// For two rays this is the midpoint of the common perpendicular segment.
TriangulationResult triangulate_rays(const std::vector<Ray>& rays);

}  // namespace surroundgeo
