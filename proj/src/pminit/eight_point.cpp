#include "surroundgeo/pminit/eight_point.hpp"

#include <Eigen/Dense>

#include "surroundgeo/core/error.hpp"

namespace surroundgeo::pminit {

Eigen::Vector3d ray_midpoint(const Eigen::Vector3d& o1,
                             const Eigen::Vector3d& d1,
                             const Eigen::Vector3d& o2,
                             const Eigen::Vector3d& d2) {
  // Minimize |o1 + s*d1 - (o2 + u*d2)|^2 over (s, u).
  const double a = d1.dot(d1), b = d1.dot(d2), c = d2.dot(d2);
  const Eigen::Vector3d w = o2 - o1;
  const double det = a * c - b * b;
  double s, u;
  if (det < 1e-12 * a * c) {
    s = u = 1e9;  // near-parallel rays: report a far point
  } else {
    s = (c * d1.dot(w) - b * d2.dot(w)) / det;
    u = (b * d1.dot(w) - a * d2.dot(w)) / det;
  }
  return 0.5 * (o1 + s * d1 + o2 + u * d2);
}

RelativePose eight_point_baseline(const std::vector<BearingPair>& pairs) {
  const int n = static_cast<int>(pairs.size());
  if (n < 8)
    fail(ErrorCode::InsufficientData,
         "eight_point_baseline: need at least 8 correspondences");

  Eigen::MatrixXd A(n, 9);
  for (int k = 0; k < n; ++k) {
    const Eigen::Vector3d& fi = pairs[k].fi;
    const Eigen::Vector3d& fj = pairs[k].fj;
    for (int p = 0; p < 3; ++p)
      for (int q = 0; q < 3; ++q) A(k, 3 * p + q) = fi(p) * fj(q);
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  // A one-dimensional nullspace is expected; more means the configuration
  // does not determine the essential matrix.
  if (sv(7) < 1e-8 * sv(0))
    fail(ErrorCode::DegenerateGeometry,
         "eight_point_baseline: rank-deficient constraint matrix");

  const Eigen::VectorXd e = svd.matrixV().col(svd.matrixV().cols() - 1);
  Eigen::Matrix3d E;
  for (int p = 0; p < 3; ++p)
    for (int q = 0; q < 3; ++q) E(p, q) = e(3 * p + q);

  // Project to the essential manifold.
  Eigen::JacobiSVD<Eigen::Matrix3d> esvd(
      E, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d U = esvd.matrixU();
  Eigen::Matrix3d V = esvd.matrixV();
  if (U.determinant() < 0) U.col(2) *= -1.0;
  if (V.determinant() < 0) V.col(2) *= -1.0;

  Eigen::Matrix3d W;
  W << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  const Rotation Ra = U * W * V.transpose();
  const Rotation Rb = U * W.transpose() * V.transpose();
  const Eigen::Vector3d tu = U.col(2);

  const Rotation rot_candidates[2] = {Ra, Rb};
  const Eigen::Vector3d t_candidates[2] = {tu, -tu};

  int best_votes = -1;
  RelativePose best;
  for (const Rotation& R : rot_candidates) {
    for (const Eigen::Vector3d& t : t_candidates) {
      int votes = 0;
      for (const BearingPair& bp : pairs) {
        // Rays in frame i: camera i at the origin, camera j at t.
        const Eigen::Vector3d X =
            ray_midpoint(Eigen::Vector3d::Zero(), bp.fi, t, R * bp.fj);
        const double depth_i = X.dot(bp.fi);
        const double depth_j = (R.transpose() * (X - t)).dot(bp.fj);
        if (depth_i > 0.0 && depth_j > 0.0) ++votes;
      }
      if (votes > best_votes) {
        best_votes = votes;
        best.rotation = R;
        best.t_dir = t.normalized();
      }
    }
  }
  return best;
}

}  // namespace surroundgeo::pminit
