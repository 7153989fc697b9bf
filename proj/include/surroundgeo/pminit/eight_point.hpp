#pragma once

#include "surroundgeo/pminit/types.hpp"

namespace surroundgeo::pminit {

struct RelativePose {
  Rotation rotation = Rotation::Identity();        // R_ij: x_i = R x_j + t
  Eigen::Vector3d t_dir = Eigen::Vector3d::UnitY();  // unit norm
};

// Classic essential-matrix solve on >= 8 bearing pairs with cheirality
// disambiguation. Raises Degenerate when the stacked constraint matrix has
// more than a one-dimensional nullspace (e.g. coplanar points).
RelativePose eight_point_baseline(const std::vector<BearingPair>& pairs);

// Midpoint of the common perpendicular of two rays (o1 + s*d1, o2 + u*d2).
// Used for cheirality voting; near-parallel rays return a far point.
Eigen::Vector3d ray_midpoint(const Eigen::Vector3d& o1,
                             const Eigen::Vector3d& d1,
                             const Eigen::Vector3d& o2,
                             const Eigen::Vector3d& d2);

}  // namespace surroundgeo::pminit
