#pragma once

#include <Eigen/Core>

namespace surroundgeo {

struct EigPair {
  double value = 0.0;
  Eigen::Vector3d vector = Eigen::Vector3d::UnitZ();
};

// Smallest eigenvalue and a unit eigenvector of a symmetric 3x3 matrix,
// computed from the trigonometric closed form of the characteristic cubic.
// No iteration; safe to call in inner solver loops. For eigenvalues with
// multiplicity > 1 any unit vector of the eigenspace is returned.
EigPair min_eig_sym3(const Eigen::Matrix3d& M);

// Same for the 2x2 case; eigenvector in the plane coordinates.
struct EigPair2 {
  double value = 0.0;
  Eigen::Vector2d vector = Eigen::Vector2d::UnitX();
};
EigPair2 min_eig_sym2(const Eigen::Matrix2d& M);

}  // namespace surroundgeo
