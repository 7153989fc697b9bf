#include "surroundgeo/core/sym3eig.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace surroundgeo {

namespace {

// Unit vector spanning the eigenspace of (M - lambda*I), taken from the
// largest-norm cross product of its rows. Falls back gracefully when the
// eigenspace has dimension 2 or 3.
Eigen::Vector3d eigenvector_for(const Eigen::Matrix3d& M, double lambda) {
  const Eigen::Matrix3d A = M - lambda * Eigen::Matrix3d::Identity();
  const Eigen::Vector3d r0 = A.row(0), r1 = A.row(1), r2 = A.row(2);
  const Eigen::Vector3d c01 = r0.cross(r1);
  const Eigen::Vector3d c02 = r0.cross(r2);
  const Eigen::Vector3d c12 = r1.cross(r2);
  const double n01 = c01.squaredNorm(), n02 = c02.squaredNorm(),
               n12 = c12.squaredNorm();
  double best = n01;
  Eigen::Vector3d v = c01;
  if (n02 > best) { best = n02; v = c02; }
  if (n12 > best) { best = n12; v = c12; }

  const double scale = std::max(1.0, A.squaredNorm());
  if (best > 1e-24 * scale * scale) return v.normalized();

  // Two-fold degenerate: the row space is a single direction; any unit
  // vector orthogonal to it is an eigenvector.
  double rn = r0.squaredNorm();
  Eigen::Vector3d r = r0;
  if (r1.squaredNorm() > rn) { rn = r1.squaredNorm(); r = r1; }
  if (r2.squaredNorm() > rn) { rn = r2.squaredNorm(); r = r2; }
  if (rn > 1e-24 * scale) {
    const Eigen::Vector3d axis =
        std::abs(r.x()) < 0.9 * r.norm() ? Eigen::Vector3d::UnitX()
                                         : Eigen::Vector3d::UnitY();
    return r.cross(axis).normalized();
  }
  // M is (numerically) lambda*I.
  return Eigen::Vector3d::UnitZ();
}

}  // namespace

EigPair min_eig_sym3(const Eigen::Matrix3d& Min) {
  const Eigen::Matrix3d M = 0.5 * (Min + Min.transpose());
  EigPair out;

  const double p1 = M(0, 1) * M(0, 1) + M(0, 2) * M(0, 2) + M(1, 2) * M(1, 2);
  if (p1 == 0.0) {
    int idx = 0;
    M.diagonal().minCoeff(&idx);
    out.value = M(idx, idx);
    out.vector = Eigen::Vector3d::Unit(idx);
    return out;
  }

  const double q = M.trace() / 3.0;
  const double p2 = (M(0, 0) - q) * (M(0, 0) - q) +
                    (M(1, 1) - q) * (M(1, 1) - q) +
                    (M(2, 2) - q) * (M(2, 2) - q) + 2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);
  const Eigen::Matrix3d B = (M - q * Eigen::Matrix3d::Identity()) / p;
  const double r = std::clamp(B.determinant() / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;

  // Eigenvalues are q + 2p*cos(phi + 2k*pi/3); k = 1 gives the smallest.
  double lambda = q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);

  // One guarded Newton polish on the characteristic polynomial removes the
  // acos rounding without introducing a loop.
  const double c2 = -M.trace();
  const double c1 = 0.5 * (M.trace() * M.trace() -
                           (M * M).trace());
  const double c0 = -M.determinant();
  const double f = ((lambda + c2) * lambda + c1) * lambda + c0;
  const double df = (3.0 * lambda + 2.0 * c2) * lambda + c1;
  if (std::abs(df) > 1e-12 * std::max(1.0, p2)) {
    const double step = f / df;
    if (std::abs(step) < 1e-3 * std::max(1.0, std::abs(lambda)))
      lambda -= step;
  }

  out.value = lambda;
  out.vector = eigenvector_for(M, lambda);
  return out;
}

EigPair2 min_eig_sym2(const Eigen::Matrix2d& M) {
  const double a = M(0, 0), c = M(1, 1);
  const double b = 0.5 * (M(0, 1) + M(1, 0));
  const double mean = 0.5 * (a + c);
  const double disc = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
  EigPair2 out;
  out.value = mean - disc;
  // Eigenvector of [[a-l, b],[b, c-l]]; pick the better-conditioned row.
  const Eigen::Vector2d v1(-b, a - out.value);
  const Eigen::Vector2d v2(c - out.value, -b);
  out.vector = (v1.squaredNorm() > v2.squaredNorm() ? v1 : v2);
  const double n = out.vector.norm();
  if (n > 1e-150) {
    out.vector /= n;
  } else {
    out.vector = Eigen::Vector2d::UnitX();  // M is a multiple of I
  }
  return out;
}

}  // namespace surroundgeo
