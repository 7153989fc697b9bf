#include "surroundgeo/core/triangulate.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace surroundgeo {

TriangulationResult triangulate_rays(const std::vector<Ray>& rays) {
  TriangulationResult out;
  if (rays.size() < 2) return out;

  Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
  Eigen::Vector3d b = Eigen::Vector3d::Zero();
  for (const Ray& ray : rays) {
    const Eigen::Matrix3d P =
        Eigen::Matrix3d::Identity() - ray.dir * ray.dir.transpose();
    A += P;
    b += P * ray.origin;
  }

  for (size_t i = 0; i < rays.size(); ++i)
    for (size_t j = i + 1; j < rays.size(); ++j) {
      const double c = std::clamp(rays[i].dir.dot(rays[j].dir), -1.0, 1.0);
      out.max_parallax = std::max(out.max_parallax, std::acos(std::abs(c)));
    }

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(A);
  if (eig.eigenvalues()(0) < 1e-9 * std::max(1.0, eig.eigenvalues()(2))) {
    out.ok = false;  // all rays parallel: depth unobservable
    return out;
  }
  out.point = A.ldlt().solve(b);
  out.ok = true;
  return out;
}

}  // namespace surroundgeo
