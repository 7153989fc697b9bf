#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "surroundgeo/calib/calibration.hpp"
#include "surroundgeo/calib/io.hpp"
#include "surroundgeo/core/rng.hpp"
#include "surroundgeo/sim/calib_problem.hpp"

using namespace surroundgeo;
using namespace surroundgeo::calib;

namespace {
constexpr double kDeg = M_PI / 180.0;

sim::GroundTruthBundle make_scene(double noise_px, uint64_t seed) {
  sim::ScenarioConfig config;
  config.scenario = sim::Scenario::Calibration;
  config.seed = seed;
  config.noise_px = noise_px;
  return sim::gen_calibration_scene(config);
}

double mean_extrinsic_error(const std::vector<Rotation>& est,
                            const CameraRig& rig) {
  double sum = 0.0;
  for (size_t l = 0; l < est.size(); ++l)
    sum += rotation_distance(est[l], rig.at(static_cast<int>(l)).R_cv);
  return sum / est.size();
}

}  // namespace

TEST_CASE("classify_pair against the frobenius gap formula") {
  CHECK(classify_pair(Rotation::Identity(), 0.02, 0.05) ==
        MotionClass::Straight);
  // gap(10 deg) = 2*sqrt(2)*sin(5 deg) ~ 0.2466 > 0.05.
  CHECK(frobenius_rotation_gap(rotation_about_z(10.0 * kDeg)) ==
        doctest::Approx(0.2466).epsilon(1e-3));
  CHECK(classify_pair(rotation_about_z(10.0 * kDeg), 0.02, 0.05) ==
        MotionClass::Turning);
  // gap(1.2 deg) ~ 0.0296 falls between the thresholds.
  CHECK(frobenius_rotation_gap(rotation_about_z(1.2 * kDeg)) ==
        doctest::Approx(0.0296).epsilon(1e-3));
  CHECK(classify_pair(rotation_about_z(1.2 * kDeg), 0.02, 0.05) ==
        MotionClass::Ambiguous);
  CHECK_THROWS_AS(classify_pair(Rotation::Identity(), 0.05, 0.02), Error);
}

TEST_CASE("line_plane_normal from two pixels") {
  CameraModel cam;  // f = 250, pp = (250, 250)
  const std::vector<Eigen::Vector2d> points = {{250, 250}, {500, 250}};
  const Eigen::Vector3d n = line_plane_normal(points, cam);
  const Eigen::Vector3d oracle =
      backproject(cam, points[0]).cross(backproject(cam, points[1])).normalized();
  CHECK(n.cross(oracle).norm() < 1e-9);

  CHECK_THROWS_AS(line_plane_normal({{250, 250}}, cam), Error);
  CHECK_THROWS_AS(line_plane_normal({{250, 250}, {250, 250}, {250, 250}}, cam),
                  Error);
}

TEST_CASE("line_plane_normal on simulated vertical lines") {
  const auto bundle = make_scene(0.0, 7);
  int checked = 0;
  for (const auto& line : bundle.calib_lines) {
    const CameraModel& cam = bundle.rig.at(line.camera).model;
    const Eigen::Vector3d n = line_plane_normal(line.clean, cam);
    for (const Eigen::Vector2d& u : line.clean)
      CHECK(std::abs(n.dot(backproject(cam, u))) < 1e-10);
    CHECK(std::abs(std::abs(n.dot(line.true_normal)) - 1.0) < 1e-9);
    if (++checked > 100) break;
  }
}

TEST_CASE("line_plane_normal under one pixel of noise stays within a degree") {
  const auto bundle = make_scene(1.0, 11);
  int trials = 0;
  for (const auto& line : bundle.calib_lines) {
    if (line.noisy.size() < 5) continue;
    const CameraModel& cam = bundle.rig.at(line.camera).model;
    const Eigen::Vector3d n = line_plane_normal(line.noisy, cam);
    const double angle =
        std::acos(std::clamp(std::abs(n.dot(line.true_normal)), 0.0, 1.0));
    CHECK(angle < 1.0 * kDeg);
    if (++trials >= 100) break;
  }
  CHECK(trials >= 100);
}

TEST_CASE("e0 residual vanishes at the true parameters") {
  const auto bundle = make_scene(0.0, 13);
  CalibrationConfig config;
  const auto problem = sim::build_calibration_problem(bundle, config, false);
  REQUIRE(problem.pairs.size() > 10);
  for (size_t p = 0; p < 20; ++p) {
    const PairObservation& obs = problem.pairs[p];
    const double e0 = e0_residual(obs, bundle.rig.at(obs.camera).R_cv,
                                  bundle.poses[obs.frame_i].pose.R,
                                  bundle.poses[obs.frame_j].pose.R);
    CHECK(e0 / obs.bearings.size() < 1e-16);

    // A 5-degree perturbation about the optical axis strictly increases it.
    // (A vehicle-z yaw of R_cv leaves E0 unchanged under planar motion; the
    // forward-direction term exists to pin that degree of freedom.)
    const Rotation perturbed =
        rotation_about_z(5.0 * kDeg) * bundle.rig.at(obs.camera).R_cv;
    const double e0_perturbed =
        e0_residual(obs, perturbed, bundle.poses[obs.frame_i].pose.R,
                    bundle.poses[obs.frame_j].pose.R);
    CHECK(e0_perturbed > e0);
    CHECK(e0_perturbed > 1e-10);
    const Rotation yawed =
        bundle.rig.at(obs.camera).R_cv * rotation_about_z(5.0 * kDeg);
    CHECK(e0_residual(obs, yawed, bundle.poses[obs.frame_i].pose.R,
                      bundle.poses[obs.frame_j].pose.R) /
              obs.bearings.size() <
          1e-16);
  }
}

TEST_CASE("e0 residual is zero for zero-parallax pairs") {
  PairObservation obs;
  for (int k = 0; k < 5; ++k) {
    const Eigen::Vector3d f =
        Eigen::Vector3d(0.1 * k, 0.2, 1.0).normalized();
    obs.bearings.push_back({f, f});
  }
  CHECK(e0_residual(obs, Rotation::Identity(), Rotation::Identity(),
                    Rotation::Identity()) == 0.0);
  PairObservation two;
  two.bearings = {obs.bearings[0]};
  CHECK_THROWS_AS(e0_residual(two, Rotation::Identity(), Rotation::Identity(),
                              Rotation::Identity()),
                  Error);
}

TEST_CASE("e1 residual: exact, chord length, and backward motion") {
  const Rotation R_cv = rotation_about_y(0.4) * rotation_about_x(-0.2);
  PairObservation obs;
  obs.t_dir_meas = R_cv.col(1);
  CHECK(e1_residual(obs, R_cv).norm() < 1e-15);

  // One degree off the forward direction gives the chord 2*sin(0.5 deg).
  obs.t_dir_meas = rotation_about_z(1.0 * kDeg) * R_cv.col(1);
  const Rotation R_cv_id = Rotation::Identity();
  PairObservation obs_id;
  obs_id.t_dir_meas = rotation_about_x(1.0 * kDeg) * Eigen::Vector3d::UnitY();
  CHECK(e1_residual(obs_id, R_cv_id).norm() ==
        doctest::Approx(2.0 * std::sin(0.5 * kDeg)).epsilon(1e-9));

  // Backward motion is sign-aligned before differencing.
  obs_id.t_dir_meas = -Eigen::Vector3d::UnitY();
  CHECK(e1_residual(obs_id, R_cv_id).norm() < 1e-15);
}

TEST_CASE("e2 residual: exact, chord length, and both turn directions") {
  const Rotation R_cv = rotation_about_y(-0.3) * rotation_about_z(0.7);
  PairObservation obs;
  obs.rotation_meas =
      R_cv * rotation_about_z(5.0 * kDeg) * R_cv.transpose();
  CHECK(e2_residual(obs, R_cv).norm() < 1e-12);
  // Opposite turn direction maps to the same up axis after alignment.
  obs.rotation_meas =
      R_cv * rotation_about_z(-5.0 * kDeg) * R_cv.transpose();
  CHECK(e2_residual(obs, R_cv).norm() < 1e-12);

  PairObservation tilted;
  tilted.rotation_meas = rotation_about_x(1.0 * kDeg) *
                         rotation_about_z(5.0 * kDeg) *
                         rotation_about_x(-1.0 * kDeg);
  CHECK(e2_residual(tilted, Rotation::Identity()).norm() ==
        doctest::Approx(2.0 * std::sin(0.5 * kDeg)).epsilon(1e-6));

  PairObservation tiny;
  tiny.rotation_meas = Rotation::Identity();
  CHECK_THROWS_AS(e2_residual(tiny, Rotation::Identity()), Error);
}

TEST_CASE("e3 residual basics") {
  VerticalLineObservation line;
  line.normal = Eigen::Vector3d::UnitX();
  CHECK(e3_residual(line, Rotation::Identity()) == 0.0);
  line.normal = Eigen::Vector3d::UnitZ();
  CHECK(e3_residual(line, Rotation::Identity()) == 1.0);

  // Noise-free simulated lines vanish at the true extrinsics.
  const auto bundle = make_scene(0.0, 17);
  CalibrationConfig config;
  const auto problem = sim::build_calibration_problem(bundle, config, false);
  for (size_t q = 0; q < std::min<size_t>(problem.lines.size(), 200); ++q) {
    const auto& obs = problem.lines[q];
    CHECK(std::abs(e3_residual(obs, bundle.rig.at(obs.camera).R_cv)) < 1e-10);
  }
}

TEST_CASE("initialize_extrinsics is exact on clean data and orthonormalizes") {
  const auto bundle = make_scene(0.0, 19);
  CalibrationConfig config;
  const auto problem = sim::build_calibration_problem(bundle, config, false);
  const auto init = initialize_extrinsics(problem);
  CHECK(mean_extrinsic_error(init, bundle.rig) < 1e-9);

  // Forward and up five degrees away from orthogonal still give SO(3).
  CalibrationProblem crafted;
  crafted.num_cameras = 1;
  crafted.num_frames = 2;
  PairObservation straight;
  straight.camera = 0;
  straight.rotation_meas = Rotation::Identity();
  straight.t_dir_meas = Eigen::Vector3d::UnitY();
  PairObservation turning;
  turning.camera = 0;
  turning.rotation_meas =
      exp_so3(rotation_about_y(5.0 * kDeg) * Eigen::Vector3d::UnitZ() * 0.2);
  turning.t_dir_meas = Eigen::Vector3d::UnitY();
  crafted.config.up_prior_in_camera = Eigen::Vector3d::UnitZ();
  crafted.pairs = {straight, turning};
  const auto R = initialize_extrinsics(crafted);
  CHECK((R[0].transpose() * R[0] - Eigen::Matrix3d::Identity()).norm() < 1e-12);
  CHECK(R[0].determinant() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((R[0].col(1) - Eigen::Vector3d::UnitY()).norm() < 1e-12);

  // Missing straight evidence names the camera.
  CalibrationProblem missing = crafted;
  missing.pairs = {turning};
  try {
    initialize_extrinsics(missing);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientExcitation);
    CHECK(std::string(e.what()).find("camera 0") != std::string::npos);
  }
}

TEST_CASE("calibrate recovers the exact extrinsics on noise-free data") {
  const auto bundle = make_scene(0.0, 23);
  CalibrationConfig config;
  const auto problem = sim::build_calibration_problem(bundle, config, false);
  const auto result = calibrate(problem);
  CHECK(result.converged);
  CHECK(mean_extrinsic_error(result.R_cv, bundle.rig) < 1e-6);
  for (const Rotation& R : result.R_cv) CHECK(is_rotation(R, 1e-9));
  // The logged combined energy never increases between accepted steps.
  for (size_t i = 1; i + 1 < result.convergence_log.size(); ++i)
    CHECK(result.convergence_log[i][5] <=
          result.convergence_log[i - 1][5] + 1e-18);
}

TEST_CASE("calibrate improves on the initialization under noise") {
  for (const double noise : {0.5, 1.0}) {
    double init_sum = 0.0, opt_sum = 0.0;
    for (uint64_t seed = 0; seed < 3; ++seed) {
      const auto bundle = make_scene(noise, 100 + seed);
      CalibrationConfig config;
      const auto problem = sim::build_calibration_problem(bundle, config, true);
      const auto init = initialize_extrinsics(problem);
      const auto result = calibrate(problem, init);
      init_sum += mean_extrinsic_error(init, bundle.rig);
      opt_sum += mean_extrinsic_error(result.R_cv, bundle.rig);
    }
    CHECK(opt_sum < init_sum);
  }
}

TEST_CASE("calibrate works with vertical lines only") {
  const auto bundle = make_scene(1.0, 31);
  CalibrationConfig config;
  config.use_rotation_axis = false;  // lambda2 = 0
  const auto problem = sim::build_calibration_problem(bundle, config, true);
  const auto init = initialize_extrinsics(problem);
  const auto result = calibrate(problem, init);
  CHECK(result.converged);
  CHECK(mean_extrinsic_error(result.R_cv, bundle.rig) <
        mean_extrinsic_error(init, bundle.rig));
}

TEST_CASE("calibrate is invariant to the vehicle-frame gauge") {
  const auto bundle = make_scene(0.5, 37);
  CalibrationConfig config;
  auto problem = sim::build_calibration_problem(bundle, config, true);
  const auto a = calibrate(problem);
  problem.config.first_orientation = rotation_about_z(25.0 * kDeg);
  const auto b = calibrate(problem);
  for (int l = 0; l < problem.num_cameras; ++l)
    for (int l2 = 0; l2 < problem.num_cameras; ++l2)
      CHECK(rotation_distance(camera_to_camera(a.R_cv[l], a.R_cv[l2]),
                              camera_to_camera(b.R_cv[l], b.R_cv[l2])) < 1e-8);
}

TEST_CASE("calibrate converges to one minimum from perturbed initializations") {
  const auto bundle = make_scene(0.0, 41);
  CalibrationConfig config;
  const auto problem = sim::build_calibration_problem(bundle, config, false);
  const auto reference = calibrate(problem);
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Rotation> init;
    for (int l = 0; l < problem.num_cameras; ++l)
      init.push_back(exp_so3(rng.unit_vector() * rng.uniform(0.0, 5.0 * kDeg)) *
                     bundle.rig.at(l).R_cv);
    const auto result = calibrate(problem, init);
    for (int l = 0; l < problem.num_cameras; ++l)
      CHECK(rotation_distance(result.R_cv[l], reference.R_cv[l]) < 1e-5);
  }
}

TEST_CASE("calibrate tolerates ten percent outlier pairs") {
  double clean_err = 0.0, outlier_err = 0.0;
  for (uint64_t seed = 0; seed < 3; ++seed) {
    const auto bundle = make_scene(1.0, 200 + seed);
    CalibrationConfig config;
    auto problem = sim::build_calibration_problem(bundle, config, true);
    const auto clean = calibrate(problem);
    clean_err += mean_extrinsic_error(clean.R_cv, bundle.rig);

    Rng rng(300 + seed);
    auto corrupted = problem;
    for (auto& obs : corrupted.pairs) {
      if (rng.uniform() > 0.10) continue;
      obs.rotation_meas = exp_so3(rng.unit_vector() * rng.uniform(0.3, 2.0));
      obs.t_dir_meas = rng.unit_vector();
      for (auto& bp : obs.bearings)
        bp.fj = Eigen::Vector3d(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5),
                                1.0)
                    .normalized();
    }
    const auto robust = calibrate(corrupted);
    outlier_err += mean_extrinsic_error(robust.R_cv, bundle.rig);
  }
  CHECK((outlier_err - clean_err) / 3.0 < 0.5 * kDeg);
}

TEST_CASE("camera_to_camera compositions") {
  const Rotation A = rotation_about_z(0.3) * rotation_about_x(0.1);
  const Rotation B = rotation_about_y(-0.6);
  CHECK((camera_to_camera(A, A) - Rotation::Identity()).norm() < 1e-15);
  CHECK((camera_to_camera(A, B) - A * B.transpose()).norm() < 1e-15);
  CHECK((camera_to_camera(A, B) * camera_to_camera(B, A) -
         Rotation::Identity())
            .norm() < 1e-14);
}

TEST_CASE("calibration problem json round trip") {
  const auto bundle = make_scene(0.5, 43);
  CalibrationConfig config;
  const auto problem = sim::build_calibration_problem(bundle, config, true);
  const std::string path = "/tmp/sg_test_problem.json";
  save_problem(problem, path);
  const auto loaded = load_problem(path);
  REQUIRE(loaded.pairs.size() == problem.pairs.size());
  REQUIRE(loaded.lines.size() == problem.lines.size());
  CHECK(loaded.num_frames == problem.num_frames);
  CHECK((loaded.pairs[3].rotation_meas - problem.pairs[3].rotation_meas).norm() <
        1e-15);
  CHECK(loaded.pairs[3].bearings.size() == problem.pairs[3].bearings.size());
  CHECK((loaded.lines[5].normal - problem.lines[5].normal).norm() < 1e-15);
}
