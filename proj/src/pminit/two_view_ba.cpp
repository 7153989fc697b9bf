#include "surroundgeo/pminit/two_view_ba.hpp"

#include <Eigen/Dense>

#include "surroundgeo/core/error.hpp"
#include "surroundgeo/core/jet.hpp"
#include "surroundgeo/core/least_squares.hpp"
#include "surroundgeo/core/smallmath.hpp"
#include "surroundgeo/pminit/eight_point.hpp"

namespace surroundgeo::pminit {

namespace {

// Tangent-plane basis orthogonal to a unit bearing.
Eigen::Matrix<double, 2, 3> tangent_basis(const Eigen::Vector3d& f) {
  const Eigen::Vector3d axis =
      std::abs(f.z()) < 0.9 ? Eigen::Vector3d::UnitZ() : Eigen::Vector3d::UnitX();
  const Eigen::Vector3d b1 = f.cross(axis).normalized();
  const Eigen::Vector3d b2 = f.cross(b1).normalized();
  Eigen::Matrix<double, 2, 3> B;
  B.row(0) = b1;
  B.row(1) = b2;
  return B;
}

// Residual of one correspondence against [rot(3 local), t(3), X(3)] packed
// into Jet slots 0..8. Two rows per view.
template <typename T>
void two_view_residual(const Rotation& R0, const V3<T>& drot, const V3<T>& t,
                       const V3<T>& X, const BearingPair& bp,
                       const Eigen::Matrix<double, 2, 3>& Bi,
                       const Eigen::Matrix<double, 2, 3>& Bj, T* r) {
  const M3<T> R = M3<T>(R0) * exp_so3_t(drot);
  const V3<T> xi = X;  // frame i
  const V3<T> xj = R.transpose() * (X - t);
  const V3<T> ni = xi.normalized();
  const V3<T> nj = xj.normalized();
  for (int row = 0; row < 2; ++row) {
    r[row] = T(Bi(row, 0)) * ni.x + T(Bi(row, 1)) * ni.y + T(Bi(row, 2)) * ni.z -
             T(Bi(row, 0) * bp.fi.x() + Bi(row, 1) * bp.fi.y() +
               Bi(row, 2) * bp.fi.z());
    r[2 + row] =
        T(Bj(row, 0)) * nj.x + T(Bj(row, 1)) * nj.y + T(Bj(row, 2)) * nj.z -
        T(Bj(row, 0) * bp.fj.x() + Bj(row, 1) * bp.fj.y() +
          Bj(row, 2) * bp.fj.z());
  }
}

}  // namespace

TwoViewBaResult two_view_ba(const std::vector<BearingPair>& pairs,
                            const Rotation& R0, const Eigen::Vector3d& t0,
                            int max_iterations, double tol) {
  if (pairs.size() < 3)
    fail(ErrorCode::InsufficientData, "two_view_ba: too few correspondences");

  LeastSquaresProblem problem;
  const int rot_block =
      problem.add_parameter_block(rotation_to_vec9(R0), 3, rotation_plus());
  const int t_block = problem.add_parameter_block(t0);

  const int n = static_cast<int>(pairs.size());
  std::vector<int> point_blocks(n);
  std::vector<Eigen::Matrix<double, 2, 3>> Bi(n), Bj(n);
  for (int k = 0; k < n; ++k) {
    const Eigen::Vector3d X = ray_midpoint(Eigen::Vector3d::Zero(),
                                           pairs[k].fi, t0, R0 * pairs[k].fj);
    point_blocks[k] = problem.add_parameter_block(X);
    Bi[k] = tangent_basis(pairs[k].fi);
    Bj[k] = tangent_basis(pairs[k].fj);
  }

  for (int k = 0; k < n; ++k) {
    auto eval = [&pairs, &Bi, &Bj, k](
                    const std::vector<const Eigen::VectorXd*>& p,
                    Eigen::VectorXd& r) {
      const Rotation R = vec9_to_rotation(*p[0]);
      double out[4];
      two_view_residual<double>(R, V3<double>(0, 0, 0),
                                V3<double>(Eigen::Vector3d(*p[1])),
                                V3<double>(Eigen::Vector3d(*p[2])), pairs[k],
                                Bi[k], Bj[k], out);
      for (int i = 0; i < 4; ++i) r(i) = out[i];
      return true;
    };
    auto jac = [&pairs, &Bi, &Bj, k](
                   const std::vector<const Eigen::VectorXd*>& p,
                   std::vector<Eigen::MatrixXd>& jacs) {
      const Rotation R = vec9_to_rotation(*p[0]);
      using J = Jet<9>;
      V3<J> drot(J::variable(0, 0), J::variable(0, 1), J::variable(0, 2));
      V3<J> t(J::variable((*p[1])(0), 3), J::variable((*p[1])(1), 4),
              J::variable((*p[1])(2), 5));
      V3<J> X(J::variable((*p[2])(0), 6), J::variable((*p[2])(1), 7),
              J::variable((*p[2])(2), 8));
      J out[4];
      two_view_residual<J>(R, drot, t, X, pairs[k], Bi[k], Bj[k], out);
      jacs.assign(3, Eigen::MatrixXd());
      jacs[0].resize(4, 3);
      jacs[1].resize(4, 3);
      jacs[2].resize(4, 3);
      for (int row = 0; row < 4; ++row)
        for (int c = 0; c < 3; ++c) {
          jacs[0](row, c) = out[row].v[c];
          jacs[1](row, c) = out[row].v[3 + c];
          jacs[2](row, c) = out[row].v[6 + c];
        }
    };
    problem.add_residual_block({rot_block, t_block, point_blocks[k]}, 4, eval,
                               jac);
  }

  LeastSquaresProblem::Options opts;
  opts.max_iterations = max_iterations;
  opts.relative_decrease_tol = tol;
  const auto summary = problem.solve(opts);

  TwoViewBaResult out;
  out.rotation = vec9_to_rotation(problem.block_value(rot_block));
  out.translation = problem.block_value(t_block);
  out.points.reserve(n);
  for (int k = 0; k < n; ++k)
    out.points.push_back(problem.block_value(point_blocks[k]));
  out.final_cost = summary.final_cost;
  out.iterations = summary.iterations;
  return out;
}

}  // namespace surroundgeo::pminit
