#include <doctest.h>

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <cmath>

#include "surroundgeo/core/camera.hpp"
#include "surroundgeo/core/jet.hpp"
#include "surroundgeo/core/least_squares.hpp"
#include "surroundgeo/core/pose.hpp"
#include "surroundgeo/core/rig_io.hpp"
#include "surroundgeo/core/rng.hpp"
#include "surroundgeo/core/rotation.hpp"
#include "surroundgeo/core/smallmath.hpp"
#include "surroundgeo/core/sym3eig.hpp"

using namespace surroundgeo;

namespace {
constexpr double kDeg = M_PI / 180.0;

Rotation random_rotation(Rng& rng) {
  return exp_so3(rng.unit_vector() * rng.uniform(0.0, M_PI * 0.999));
}
}  // namespace

TEST_CASE("cayley of zero is the identity") {
  CHECK((cayley_z_to_rotation(0.0) - Rotation::Identity()).norm() ==
        doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("cayley matches the axis-angle exponential") {
  // z = 1 -> 90 degrees about +z.
  const Rotation R = cayley_z_to_rotation(1.0);
  const Rotation oracle =
      Eigen::AngleAxisd(2.0 * std::atan(1.0), Eigen::Vector3d::UnitZ())
          .toRotationMatrix();
  CHECK((R - oracle).cwiseAbs().maxCoeff() < 1e-12);

  // z = tan(15 deg) -> 30 degrees about +z.
  const Rotation R30 = cayley_z_to_rotation(std::tan(15.0 * kDeg));
  const Rotation oracle30 =
      Eigen::AngleAxisd(30.0 * kDeg, Eigen::Vector3d::UnitZ())
          .toRotationMatrix();
  CHECK((R30 - oracle30).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("cayley round trip recovers 2*atan(z) over a wide range") {
  for (double z = -10.0; z <= 10.0; z += 0.37) {
    const AxisAngle aa = rotation_to_axis_angle(cayley_z_to_rotation(z));
    const double expected = std::abs(2.0 * std::atan(z));
    CHECK(std::abs(aa.angle - expected) < 1e-10);
    if (std::abs(z) > 1e-6) {
      CHECK(aa.axis_defined);
      CHECK(aa.axis.z() * z > 0.0);
    }
  }
}

TEST_CASE("axis angle of the identity is flagged undefined") {
  const AxisAngle aa = rotation_to_axis_angle(Rotation::Identity());
  CHECK(aa.angle == 0.0);
  CHECK_FALSE(aa.axis_defined);
}

TEST_CASE("axis angle sign convention survives re-exponentiation") {
  const AxisAngle pos = rotation_to_axis_angle(rotation_about_z(30.0 * kDeg));
  CHECK(pos.angle == doctest::Approx(30.0 * kDeg));
  CHECK((pos.axis - Eigen::Vector3d::UnitZ()).norm() < 1e-12);

  const AxisAngle neg = rotation_to_axis_angle(rotation_about_z(-30.0 * kDeg));
  CHECK(neg.angle == doctest::Approx(30.0 * kDeg));
  CHECK((neg.axis + Eigen::Vector3d::UnitZ()).norm() < 1e-12);

  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const Rotation R = random_rotation(rng);
    const AxisAngle aa = rotation_to_axis_angle(R);
    CHECK((exp_so3(aa.axis * aa.angle) - R).norm() < 1e-9);
    CHECK(aa.angle >= 0.0);
    CHECK(aa.angle <= M_PI);
  }
}

TEST_CASE("axis angle is stable near pi") {
  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Vector3d axis = rng.unit_vector();
    const double angle = M_PI - rng.uniform(0.0, 1e-5);
    const Rotation R = exp_so3(axis * angle);
    const AxisAngle aa = rotation_to_axis_angle(R);
    CHECK((exp_so3(aa.axis * aa.angle) - R).norm() < 1e-9);
  }
}

TEST_CASE("frobenius gap against direct matrix subtraction") {
  CHECK(frobenius_rotation_gap(Rotation::Identity()) == 0.0);
  const Rotation R30 = rotation_about_z(30.0 * kDeg);
  CHECK(frobenius_rotation_gap(R30) ==
        doctest::Approx((R30 - Rotation::Identity()).norm()).epsilon(1e-14));
  CHECK(frobenius_rotation_gap(R30) ==
        doctest::Approx(2.0 * std::sqrt(2.0) * std::sin(15.0 * kDeg)));
  CHECK(frobenius_rotation_gap(rotation_about_z(M_PI)) ==
        doctest::Approx(2.0 * std::sqrt(2.0)));
}

TEST_CASE("frobenius gap is monotone in the angle") {
  double prev = -1.0;
  for (double theta = 0.0; theta <= M_PI + 1e-12; theta += M_PI / 64.0) {
    const double gap = frobenius_rotation_gap(rotation_about_y(theta));
    CHECK(gap > prev);
    prev = gap;
  }
}

TEST_CASE("min_eig_sym3 on a diagonal matrix") {
  const EigPair e = min_eig_sym3(Eigen::Vector3d(3, 2, 1).asDiagonal());
  CHECK(e.value == doctest::Approx(1.0));
  CHECK(std::abs(e.vector.z()) == doctest::Approx(1.0));
}

TEST_CASE("min_eig_sym3 on a rank-one outer product") {
  const Eigen::Vector3d n = Eigen::Vector3d::UnitX();
  const EigPair e = min_eig_sym3(n * n.transpose());
  CHECK(std::abs(e.value) < 1e-14);
  CHECK(std::abs(e.vector.x()) < 1e-9);  // eigenvector in span{y, z}
  CHECK(e.vector.norm() == doctest::Approx(1.0));
}

TEST_CASE("min_eig_sym3 matches a dense eigensolver on random input") {
  Rng rng(13);
  for (int trial = 0; trial < 500; ++trial) {
    Eigen::Matrix3d A;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) A(r, c) = rng.uniform(-3.0, 3.0);
    const Eigen::Matrix3d M = 0.5 * (A + A.transpose());
    const EigPair e = min_eig_sym3(M);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> oracle(M);
    CHECK(std::abs(e.value - oracle.eigenvalues()(0)) <
          1e-9 * (1.0 + M.norm()));
    CHECK((M * e.vector - e.value * e.vector).norm() < 1e-9 * (1.0 + M.norm()));
  }
}

TEST_CASE("min_eig_sym3 recovers the common normal direction") {
  // Sum of outer products of vectors orthogonal to a fixed t has nullspace t.
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Vector3d t = rng.unit_vector();
    Eigen::Matrix3d M = Eigen::Matrix3d::Zero();
    for (int k = 0; k < 10; ++k) {
      const Eigen::Vector3d n = t.cross(rng.unit_vector()).normalized();
      M += n * n.transpose();
    }
    const EigPair e = min_eig_sym3(M);
    CHECK(e.value <= 1e-12);
    CHECK(e.value >= -1e-10);
    CHECK(std::abs(std::abs(e.vector.dot(t)) - 1.0) < 1e-9);
  }
}

TEST_CASE("projection hits the principal point and the pinhole formula") {
  CameraModel cam;  // f = 250, c = (250, 250)
  CHECK((project(cam, {0, 0, 1}) - Eigen::Vector2d(250, 250)).norm() < 1e-12);
  CHECK((project(cam, {1, 0, 1}) - Eigen::Vector2d(500, 250)).norm() < 1e-12);
  CHECK_THROWS_AS(project(cam, {0, 0, -1}), Error);
  CHECK_THROWS_AS(project(cam, {0, 0, 0}), Error);
}

TEST_CASE("project/backproject round trip over the image domain") {
  CameraModel cam;
  Rng rng(3);
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::Vector2d u = rng.uniform_vec2(0.0, 500.0);
    const double depth = rng.uniform(0.1, 50.0);
    const Eigen::Vector3d x = backproject(cam, u) * depth;
    const Eigen::Vector3d f = backproject(cam, project(cam, x));
    const double angle = std::atan2(f.cross(x.normalized()).norm(),
                                    f.dot(x.normalized()));
    CHECK(angle < 1e-10);
  }
}

TEST_CASE("pose composition and inverse") {
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const Pose Ti{random_rotation(rng), rng.uniform_vec3(-5, 5)};
    const Pose Tj{random_rotation(rng), rng.uniform_vec3(-5, 5)};
    const Pose rel = relative_pose(Ti, Tj);
    const Pose back = Ti * rel;
    CHECK((back.R - Tj.R).norm() < 1e-12);
    CHECK((back.t - Tj.t).norm() < 1e-12);
  }
  const Pose T{rotation_about_z(0.5), {1, 2, 3}};
  const Pose id = T * T.inverse();
  CHECK((id.R - Rotation::Identity()).norm() < 1e-12);
  CHECK(id.t.norm() < 1e-12);
  CHECK((relative_pose(T, T).R - Rotation::Identity()).norm() < 1e-12);
  const Pose rel = relative_pose(Pose::Identity(), T);
  CHECK((rel.R - T.R).norm() == 0.0);
}

TEST_CASE("rig json round trip") {
  CameraRig rig;
  RigCamera cam;
  cam.model.focal = {250, 251};
  cam.model.principal = {249, 250};
  cam.R_cv = rotation_about_y(0.3) * rotation_about_z(-1.1);
  cam.t_cv = {0.1, -0.2, 0.3};
  rig.cameras.push_back(cam);
  rig.cameras.push_back(RigCamera{});

  const CameraRig loaded = rig_from_json(rig_to_json(rig));
  REQUIRE(loaded.size() == 2);
  CHECK((loaded.at(0).R_cv - cam.R_cv).norm() < 1e-15);
  CHECK((loaded.at(0).t_cv - cam.t_cv).norm() < 1e-15);
  CHECK(loaded.at(0).model.focal.y() == 251);
  CHECK_THROWS_AS(rig_from_json("{\"cameras\": [{}]}"), Error);
}

TEST_CASE("jet derivatives match central differences") {
  auto f = [](auto x, auto y) {
    return sin(x) * y + sqrt(x * x + y * y) / atan2(y, x);
  };
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const double x = rng.uniform(0.2, 2.0), y = rng.uniform(0.2, 2.0);
    const auto j = f(Jet<2>::variable(x, 0), Jet<2>::variable(y, 1));
    const double h = 1e-6;
    const double dx = (f(x + h, y) - f(x - h, y)) / (2 * h);
    const double dy = (f(x, y + h) - f(x, y - h)) / (2 * h);
    CHECK(j.a == doctest::Approx(f(x, y)).epsilon(1e-14));
    CHECK(j.v[0] == doctest::Approx(dx).epsilon(1e-7));
    CHECK(j.v[1] == doctest::Approx(dy).epsilon(1e-7));
  }
}

TEST_CASE("smallmath exponential matches the double implementation") {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Vector3d w = rng.uniform_vec3(-2.0, 2.0);
    const M3<double> Rt = exp_so3_t(V3<double>(w));
    const Rotation R = exp_so3(w);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        CHECK(Rt.m[r][c] == doctest::Approx(R(r, c)).epsilon(1e-12));
  }
}

TEST_CASE("quaternion to rotation matches Eigen") {
  Rng rng(19);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::Quaterniond q(rng.gaussian(), rng.gaussian(), rng.gaussian(),
                         rng.gaussian());
    if (q.norm() < 0.1) continue;
    const Eigen::Matrix3d oracle = q.normalized().toRotationMatrix();
    const M3<double> R = quat_to_rotation(q.x(), q.y(), q.z(), q.w());
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        CHECK(R.m[r][c] == doctest::Approx(oracle(r, c)).epsilon(1e-12));
  }
}

TEST_CASE("rng streams are replayable and fork-independent") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng base(42);
  Rng f1 = base.fork(1), f2 = base.fork(2);
  CHECK(f1.next_u64() != f2.next_u64());
  // Uniform noise statistics: mean ~ 0.5, bounds respected.
  Rng c(9);
  double mean = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = c.uniform(-2.0, 2.0);
    CHECK(u >= -2.0);
    CHECK(u < 2.0);
    mean += u;
  }
  CHECK(std::abs(mean / 100000.0) < 0.02);
}

TEST_CASE("least squares solves a small rotation alignment problem") {
  // Recover R from noisy direction pairs b_k ~ R a_k.
  Rng rng(23);
  const Rotation R_true = random_rotation(rng);
  std::vector<Eigen::Vector3d> as, bs;
  for (int k = 0; k < 20; ++k) {
    as.push_back(rng.unit_vector());
    bs.push_back(R_true * as.back());
  }

  LeastSquaresProblem problem;
  const int rb = problem.add_parameter_block(
      rotation_to_vec9(exp_so3(rng.uniform_vec3(-0.2, 0.2)) * R_true), 3,
      rotation_plus());
  for (int k = 0; k < 20; ++k) {
    problem.add_residual_block(
        {rb}, 3,
        [&as, &bs, k](const std::vector<const Eigen::VectorXd*>& p,
                      Eigen::VectorXd& r) {
          r = vec9_to_rotation(*p[0]) * as[k] - bs[k];
          return true;
        });
  }
  LeastSquaresProblem::Options opts;
  const auto summary = problem.solve(opts);
  CHECK(summary.converged);
  CHECK(summary.final_cost < 1e-18);
  CHECK(rotation_distance(vec9_to_rotation(problem.block_value(rb)), R_true) <
        1e-8);
}
