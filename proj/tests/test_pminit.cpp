#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "surroundgeo/core/rng.hpp"
#include "surroundgeo/core/sym3eig.hpp"
#include "surroundgeo/pminit/eight_point.hpp"
#include "surroundgeo/pminit/io.hpp"
#include "surroundgeo/pminit/planar_solver.hpp"
#include "surroundgeo/pminit/two_view_ba.hpp"
#include "surroundgeo/sim/scenario.hpp"

using namespace surroundgeo;
using namespace surroundgeo::pminit;

namespace {
constexpr double kDeg = M_PI / 180.0;

// True camera translation direction in the vehicle frame for a planar step.
Eigen::Vector3d true_camera_dir(const CameraRig& rig, int l, const Pose& step) {
  const Eigen::Vector3d t_vc = rig.at(l).center_in_vehicle();
  const Eigen::Vector3d t = step.t + (step.R - Eigen::Matrix3d::Identity()) * t_vc;
  return t.normalized();
}

// Minimum of t^T M t over unit vectors by shrinking grid search; independent
// of the closed-form eigen solve.
double brute_force_min(const Eigen::Matrix3d& M) {
  double best = std::numeric_limits<double>::infinity();
  double best_az = 0.0, best_el = 0.0;
  auto value = [&](double az, double el) {
    const Eigen::Vector3d t(std::cos(el) * std::cos(az),
                            std::cos(el) * std::sin(az), std::sin(el));
    return t.dot(M * t);
  };
  for (double az = 0.0; az < 2.0 * M_PI; az += 2.0 * kDeg)
    for (double el = -0.5 * M_PI; el <= 0.5 * M_PI; el += 2.0 * kDeg) {
      const double f = value(az, el);
      if (f < best) {
        best = f;
        best_az = az;
        best_el = el;
      }
    }
  double step = 2.0 * kDeg;
  for (int round = 0; round < 60; ++round) {
    for (int da = -1; da <= 1; ++da)
      for (int de = -1; de <= 1; ++de) {
        const double f = value(best_az + da * step, best_el + de * step);
        if (f < best) {
          best = f;
          best_az += da * step;
          best_el += de * step;
        }
      }
    step *= 0.6;
  }
  return best;
}

sim::ScenarioConfig motion_config(double yaw_deg, uint64_t seed) {
  sim::ScenarioConfig config;
  config.scenario = sim::Scenario::MotionInit;
  config.seed = seed;
  config.direct_yaw_deg = yaw_deg;
  config.step_length = 0.5;
  return config;
}

}  // namespace

TEST_CASE("epipolar normal basic identities") {
  const Eigen::Vector3d n = epipolar_normal(
      Eigen::Vector3d::UnitZ(), Eigen::Vector3d::UnitX(), Rotation::Identity(),
      Rotation::Identity());
  CHECK((n - Eigen::Vector3d::UnitY()).norm() < 1e-15);

  const Eigen::Vector3d zero = epipolar_normal(
      Eigen::Vector3d::UnitZ(), Eigen::Vector3d::UnitZ(), Rotation::Identity(),
      Rotation::Identity());
  CHECK(zero.norm() < 1e-15);
}

TEST_CASE("epipolar normal is orthogonal to the true camera translation") {
  const auto bundle = sim::gen_motion_scene(motion_config(12.0, 5));
  const Rotation R_v = bundle.true_step.R;
  for (int l = 0; l < bundle.rig.size(); ++l) {
    const Eigen::Vector3d t_dir = true_camera_dir(bundle.rig, l, bundle.true_step);
    for (const BearingPair& bp : bundle.clean_corrs.per_camera[l]) {
      const Eigen::Vector3d n =
          epipolar_normal(bp.fi, bp.fj, bundle.rig.at(l).R_vc(), R_v);
      CHECK(std::abs(n.dot(t_dir)) / n.norm() < 1e-12);
    }
  }
}

TEST_CASE("algebraic objective vanishes at the true yaw only") {
  const auto bundle = sim::gen_motion_scene(motion_config(10.0, 11));
  const double z_true = std::tan(5.0 * kDeg);
  CHECK(algebraic_objective(bundle.clean_corrs, bundle.rig, z_true) < 1e-20);
  CHECK(algebraic_objective(bundle.clean_corrs, bundle.rig,
                            std::tan(6.0 * kDeg)) > 1e-12);
}

TEST_CASE("algebraic objective: pure translation and empty cameras") {
  auto config = motion_config(0.0, 13);
  const auto bundle = sim::gen_motion_scene(config);
  CHECK(algebraic_objective(bundle.clean_corrs, bundle.rig, 0.0) < 1e-20);

  // An empty camera contributes nothing.
  BearingCorrespondenceSet one_cam = bundle.clean_corrs;
  for (int l = 1; l < one_cam.num_cameras(); ++l) one_cam.per_camera[l].clear();
  BearingCorrespondenceSet only_first;
  only_first.per_camera.push_back(bundle.clean_corrs.per_camera[0]);
  only_first.per_camera.resize(bundle.rig.size());
  const double a = algebraic_objective(one_cam, bundle.rig, 0.02);
  const double b = algebraic_objective(only_first, bundle.rig, 0.02);
  CHECK(a == doctest::Approx(b).epsilon(1e-14));
}

TEST_CASE("object-space objective vanishes on noise-free data") {
  const auto bundle = sim::gen_motion_scene(motion_config(8.0, 17));
  CHECK(objective_object_space(bundle.clean_corrs, bundle.rig,
                               std::tan(4.0 * kDeg)) < 1e-18);
}

TEST_CASE("object-space objective equals brute force over directions") {
  Rng rng(23);
  for (int instance = 0; instance < 5; ++instance) {
    const auto bundle =
        sim::gen_motion_scene(motion_config(rng.uniform(2.0, 20.0), 100 + instance));
    const double z = std::tan(0.5 * rng.uniform(-0.1, 0.1));
    // Noisy-ish evaluation point away from the optimum.
    double expected = 0.0;
    const Rotation R_v = cayley_z_to_rotation(z);
    for (int l = 0; l < bundle.rig.size(); ++l) {
      Eigen::Matrix3d M = Eigen::Matrix3d::Zero();
      for (const BearingPair& bp : bundle.noisy_corrs.per_camera[l]) {
        const Eigen::Vector3d n =
            epipolar_normal(bp.fi, bp.fj, bundle.rig.at(l).R_vc(), R_v);
        if (n.squaredNorm() < 1e-12) continue;
        M += n * n.transpose() / n.squaredNorm();
      }
      const double lam = brute_force_min(M);
      expected += lam * lam;
    }
    const double got = objective_object_space(bundle.noisy_corrs, bundle.rig, z);
    CHECK(got == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("object-space weights reduce to the algebraic case for unit normals") {
  // Orthogonal bearing pairs at identity rotation give |n| = 1 exactly.
  BearingCorrespondenceSet corrs;
  corrs.per_camera.resize(1);
  corrs.per_camera[0].push_back({Eigen::Vector3d::UnitZ(), Eigen::Vector3d::UnitX()});
  corrs.per_camera[0].push_back({Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitY()});
  corrs.per_camera[0].push_back({Eigen::Vector3d::UnitY(), Eigen::Vector3d::UnitZ()});
  CameraRig rig;
  rig.cameras.push_back(RigCamera{});
  CHECK(objective_object_space(corrs, rig, 0.0) ==
        doctest::Approx(algebraic_objective(corrs, rig, 0.0)).epsilon(1e-14));
}

TEST_CASE("solve_rotation recovers the exact yaw on noise-free data") {
  const auto bundle = sim::gen_motion_scene(motion_config(10.0, 29));
  PlanarSolveConfig config;
  const double z = solve_rotation(bundle.clean_corrs, bundle.rig, config);
  const double yaw_deg = 2.0 * std::atan(z) / kDeg;
  CHECK(std::abs(yaw_deg - 10.0) < 1e-6);
}

TEST_CASE("solve_rotation handles pure translation without degeneracy") {
  const auto bundle = sim::gen_motion_scene(motion_config(0.0, 31));
  PlanarSolveConfig config;
  const double z = solve_rotation(bundle.clean_corrs, bundle.rig, config);
  CHECK(std::abs(2.0 * std::atan(z) / kDeg) < 1e-6);
}

TEST_CASE("solve_rotation needs a minimum number of correspondences") {
  BearingCorrespondenceSet corrs;
  corrs.per_camera.resize(1);
  corrs.per_camera[0].push_back({Eigen::Vector3d::UnitZ(), Eigen::Vector3d::UnitX()});
  CameraRig rig;
  rig.cameras.push_back(RigCamera{});
  CHECK_THROWS_AS(solve_rotation(corrs, rig, PlanarSolveConfig{}), Error);
}

TEST_CASE("rotation estimate is invariant to global scene rescaling") {
  auto config = motion_config(7.0, 37);
  const auto small = sim::gen_motion_scene(config);
  config.step_length *= 10.0;
  config.depth_min *= 10.0;
  config.depth_max *= 10.0;
  const auto large = sim::gen_motion_scene(config);
  PlanarSolveConfig solve_config;
  const double z_small = solve_rotation(small.clean_corrs, small.rig, solve_config);
  const double z_large = solve_rotation(large.clean_corrs, large.rig, solve_config);
  CHECK(std::abs(z_small - z_large) < 1e-10);
}

TEST_CASE("translation directions match ground truth and honor the sign flag") {
  const auto bundle = sim::gen_motion_scene(motion_config(9.0, 41));
  PlanarSolveConfig config;
  const double z = solve_rotation(bundle.clean_corrs, bundle.rig, config);
  std::vector<Eigen::Vector3d> dirs;
  std::vector<bool> valid;
  translation_directions(bundle.clean_corrs, bundle.rig, z, config, &dirs, &valid);
  for (int l = 0; l < bundle.rig.size(); ++l) {
    REQUIRE(valid[l]);
    const Eigen::Vector3d truth = true_camera_dir(bundle.rig, l, bundle.true_step);
    const double angle = std::acos(std::clamp(std::abs(dirs[l].dot(truth)), 0.0, 1.0));
    CHECK(angle < 1e-5);
    CHECK(dirs[l].y() >= 0.0);
  }

  PlanarSolveConfig reverse = config;
  reverse.reverse_prior = true;
  std::vector<Eigen::Vector3d> rdirs;
  translation_directions(bundle.clean_corrs, bundle.rig, z, reverse, &rdirs, &valid);
  for (int l = 0; l < bundle.rig.size(); ++l)
    CHECK((rdirs[l] + dirs[l]).norm() < 1e-12);
}

TEST_CASE("two-correspondence camera direction equals the plane intersection") {
  const auto bundle = sim::gen_motion_scene(motion_config(9.0, 43));
  BearingCorrespondenceSet minimal;
  minimal.per_camera.resize(bundle.rig.size());
  minimal.per_camera[0] = {bundle.clean_corrs.per_camera[0][0],
                           bundle.clean_corrs.per_camera[0][1]};
  PlanarSolveConfig config;
  const double z = std::tan(4.5 * kDeg);
  std::vector<Eigen::Vector3d> dirs;
  std::vector<bool> valid;
  translation_directions(minimal, bundle.rig, z, config, &dirs, &valid);
  REQUIRE(valid[0]);
  const Rotation R_v = cayley_z_to_rotation(z);
  const Rotation R_vc = bundle.rig.at(0).R_vc();
  const Eigen::Vector3d n1 = epipolar_normal(minimal.per_camera[0][0].fi,
                                             minimal.per_camera[0][0].fj, R_vc, R_v);
  const Eigen::Vector3d n2 = epipolar_normal(minimal.per_camera[0][1].fi,
                                             minimal.per_camera[0][1].fj, R_vc, R_v);
  Eigen::Vector3d expected = n1.cross(n2).normalized();
  if (expected.y() < 0) expected = -expected;
  CHECK((dirs[0] - expected).norm() < 1e-9);
}

TEST_CASE("recover_translation: metric scale on a turning step") {
  const auto bundle = sim::gen_motion_scene(motion_config(12.0, 47));
  PlanarSolveConfig config;
  const PlanarMotionEstimate est =
      solve_planar_motion(bundle.clean_corrs, bundle.rig, config);
  REQUIRE(est.scale_observable);
  CHECK((est.translation - bundle.true_step.t).norm() < 1e-8);
  // Hand-eye closure per camera.
  for (int l = 0; l < bundle.rig.size(); ++l) {
    const Eigen::Vector3d t_vc = bundle.rig.at(l).center_in_vehicle();
    const Eigen::Vector3d closure = t_vc +
                                    est.scales[l] * est.translation_dirs[l] -
                                    est.rotation * t_vc;
    CHECK((est.translation - closure).norm() < 1e-9);
  }
}

TEST_CASE("recover_translation flags unobservable scale for identity rotation") {
  const auto bundle = sim::gen_motion_scene(motion_config(0.0, 53));
  PlanarSolveConfig config;
  const PlanarMotionEstimate est =
      solve_planar_motion(bundle.clean_corrs, bundle.rig, config);
  CHECK_FALSE(est.scale_observable);
  const Eigen::Vector3d truth = bundle.true_step.t.normalized();
  CHECK(std::abs(est.translation.dot(truth)) > 1.0 - 1e-9);
}

TEST_CASE("recover_translation: zero baselines give a homogeneous system") {
  CameraRig rig = sim::surround_rig(120.0);
  for (auto& cam : rig.cameras) cam.t_cv.setZero();
  std::vector<Eigen::Vector3d> dirs(4, Eigen::Vector3d::UnitY());
  std::vector<bool> valid(4, true);
  const TranslationRecovery rec =
      recover_translation(dirs, valid, rig, rotation_about_z(0.2));
  CHECK_FALSE(rec.scale_observable);
}

TEST_CASE("ransac with clean data keeps every correspondence") {
  const auto bundle = sim::gen_motion_scene(motion_config(10.0, 59));
  PlanarSolveConfig config;
  config.seed = 7;
  const PlanarMotionEstimate est =
      ransac_solve(bundle.clean_corrs, bundle.rig, config);
  for (int l = 0; l < bundle.rig.size(); ++l)
    for (bool inlier : est.inlier_mask[l]) CHECK(inlier);
  const double direct = solve_rotation(bundle.clean_corrs, bundle.rig, config);
  CHECK(std::abs(est.z - direct) < 1e-9);
}

TEST_CASE("ransac recovers inliers under 30 percent outliers") {
  int recovered = 0, total_true_inliers = 0;
  double err_outliers = 0.0, err_clean = 0.0;
  const int trials = 20;
  for (int trial = 0; trial < trials; ++trial) {
    auto config = motion_config(10.0, 600 + trial);
    config.step_length = 1.0;
    config.fov_deg = 90.0;
    config.depth_min = 2.0;
    config.depth_max = 8.0;
    config.noise_px = 1.0;
    config.outlier_fraction = 0.3;
    const auto bundle = sim::gen_motion_scene(config);
    PlanarSolveConfig solve_config;
    solve_config.seed = 11 + trial;
    solve_config.inlier_metric = InlierMetric::EpipolarAngle;
    solve_config.inlier_threshold = 0.02;  // ~3 sigma at 1 px noise
    const PlanarMotionEstimate est =
        ransac_solve(bundle.noisy_corrs, bundle.rig, solve_config);
    const double yaw = 2.0 * std::atan(est.z) / kDeg;
    err_outliers += std::abs(yaw - 10.0);

    for (int l = 0; l < bundle.rig.size(); ++l)
      for (size_t k = 0; k < bundle.outlier_labels[l].size(); ++k) {
        if (!bundle.outlier_labels[l][k]) {
          ++total_true_inliers;
          if (est.inlier_mask[l][k]) ++recovered;
        }
      }

    auto clean_config = config;
    clean_config.outlier_fraction = 0.0;
    const auto clean_bundle = sim::gen_motion_scene(clean_config);
    const double z_clean =
        solve_rotation(clean_bundle.noisy_corrs, clean_bundle.rig, solve_config);
    err_clean += std::abs(2.0 * std::atan(z_clean) / kDeg - 10.0);
  }
  CHECK(static_cast<double>(recovered) / total_true_inliers >= 0.95);
  CHECK(err_outliers <= 2.0 * err_clean + 0.05 * trials);
}

TEST_CASE("ransac reports no consensus when everything is an outlier") {
  auto config = motion_config(10.0, 61);
  config.outlier_fraction = 1.0;
  const auto bundle = sim::gen_motion_scene(config);
  PlanarSolveConfig solve_config;
  solve_config.seed = 3;
  CHECK_THROWS_AS(ransac_solve(bundle.noisy_corrs, bundle.rig, solve_config),
                  Error);
}

TEST_CASE("ransac is deterministic for a fixed master seed") {
  auto config = motion_config(10.0, 71);
  config.noise_px = 1.0;
  config.outlier_fraction = 0.25;
  const auto bundle = sim::gen_motion_scene(config);
  PlanarSolveConfig solve_config;
  solve_config.seed = 99;
  solve_config.inlier_threshold = 0.025;
  const auto a = ransac_solve(bundle.noisy_corrs, bundle.rig, solve_config);
  const auto b = ransac_solve(bundle.noisy_corrs, bundle.rig, solve_config);
  CHECK(a.z == b.z);
  CHECK(a.inlier_mask == b.inlier_mask);
}

TEST_CASE("eight point recovers a noise-free relative pose") {
  auto config = motion_config(10.0, 73);
  config.single_camera = true;
  config.points_per_camera = 30;
  const auto bundle = sim::gen_motion_scene(config);
  const auto& pairs = bundle.clean_corrs.per_camera[0];
  REQUIRE(pairs.size() >= 8);
  const RelativePose rel = eight_point_baseline(pairs);

  // Camera-frame truth: R^c = R_cv R^v R_vc, t^c parallel to the camera step.
  const RigCamera& cam = bundle.rig.at(0);
  const Pose cam_step = cam.cam_from_vehicle() * bundle.true_step *
                        cam.vehicle_from_cam();
  CHECK(rotation_distance(rel.rotation, cam_step.R) < 1e-8);
  CHECK(std::abs(rel.t_dir.dot(cam_step.t.normalized())) > 1.0 - 1e-8);
  // Cheirality resolves the sign, not just the axis.
  CHECK(rel.t_dir.dot(cam_step.t.normalized()) > 0.0);
}

TEST_CASE("eight point flags degenerate configurations") {
  // All world points on one plane.
  Rng rng(79);
  const Rotation R = rotation_about_z(5.0 * kDeg);
  const Eigen::Vector3d t(0.1, 0.4, 0.0);
  std::vector<BearingPair> pairs;
  for (int k = 0; k < 20; ++k) {
    const Eigen::Vector3d X(rng.uniform(-3, 3), rng.uniform(-3, 3), 8.0);
    BearingPair bp;
    bp.fi = X.normalized();
    bp.fj = (R.transpose() * (X - t)).normalized();
    pairs.push_back(bp);
  }
  CHECK_THROWS_AS(eight_point_baseline(pairs), Error);

  std::vector<BearingPair> few(pairs.begin(), pairs.begin() + 7);
  CHECK_THROWS_AS(eight_point_baseline(few), Error);
}

TEST_CASE("two-view BA is stationary at the truth and converges nearby") {
  auto config = motion_config(9.0, 83);
  config.single_camera = true;
  config.points_per_camera = 25;
  const auto bundle = sim::gen_motion_scene(config);
  const auto& pairs = bundle.clean_corrs.per_camera[0];
  const RigCamera& cam = bundle.rig.at(0);
  const Pose cam_step = cam.cam_from_vehicle() * bundle.true_step *
                        cam.vehicle_from_cam();

  const TwoViewBaResult at_truth = two_view_ba(pairs, cam_step.R, cam_step.t);
  CHECK(at_truth.final_cost < 1e-18);
  CHECK(rotation_distance(at_truth.rotation, cam_step.R) < 1e-8);

  const Rotation R0 = exp_so3(Eigen::Vector3d(0.01, -0.02, 0.015)) * cam_step.R;
  const Eigen::Vector3d t0 = cam_step.t + Eigen::Vector3d(0.02, -0.01, 0.01);
  const TwoViewBaResult refined = two_view_ba(pairs, R0, t0);
  CHECK(refined.final_cost < 1e-16);
  CHECK(rotation_distance(refined.rotation, cam_step.R) < 1e-7);
}

TEST_CASE("correspondence csv round trip") {
  const auto bundle = sim::gen_motion_scene(motion_config(6.0, 89));
  const std::string path = "/tmp/sg_test_corrs.csv";
  save_correspondences(bundle.clean_corrs, path);
  const BearingCorrespondenceSet loaded = load_correspondences(path);
  REQUIRE(loaded.num_cameras() == bundle.clean_corrs.num_cameras());
  for (int l = 0; l < loaded.num_cameras(); ++l) {
    REQUIRE(loaded.per_camera[l].size() == bundle.clean_corrs.per_camera[l].size());
    for (size_t k = 0; k < loaded.per_camera[l].size(); ++k) {
      CHECK((loaded.per_camera[l][k].fi - bundle.clean_corrs.per_camera[l][k].fi)
                .norm() < 1e-15);
      CHECK((loaded.per_camera[l][k].fj - bundle.clean_corrs.per_camera[l][k].fj)
                .norm() < 1e-15);
    }
  }
}
