#include "surroundgeo/sim/scenario.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "surroundgeo/core/error.hpp"
#include "surroundgeo/core/rng.hpp"
#include "surroundgeo/core/triangulate.hpp"

namespace surroundgeo::sim {

namespace {
constexpr double kDeg = M_PI / 180.0;

// Upright camera looking along `dir` (vehicle frame): optical axis = dir,
// image down = vehicle down.
RigCamera make_camera(const Eigen::Vector3d& dir, const Eigen::Vector3d& pos,
                      const CameraModel& model) {
  const Eigen::Vector3d z_c = dir.normalized();
  Eigen::Vector3d y_c = -Eigen::Vector3d::UnitZ();
  y_c = (y_c - y_c.dot(z_c) * z_c).normalized();
  const Eigen::Vector3d x_c = y_c.cross(z_c);
  Eigen::Matrix3d R_vc;
  R_vc.col(0) = x_c;
  R_vc.col(1) = y_c;
  R_vc.col(2) = z_c;
  RigCamera cam;
  cam.model = model;
  cam.R_cv = R_vc.transpose();
  cam.t_cv = -(cam.R_cv * pos);
  return cam;
}

// Planar arc step: heading turns by yaw while traveling signed distance s
// along the arc (negative s = reverse gear, heading preserved).
Pose arc_step(double yaw, double s) {
  Pose step;
  step.R = rotation_about_z(yaw);
  if (std::abs(yaw) < 1e-12) {
    step.t = Eigen::Vector3d(0.0, s, 0.0);
  } else {
    const double r = s / yaw;
    step.t = Eigen::Vector3d(r * (std::cos(yaw) - 1.0), r * std::sin(yaw), 0.0);
  }
  return step;
}

Eigen::Vector2d uniform_pixel(Rng& rng, const CameraModel& cam, double margin) {
  return {rng.uniform(margin, cam.image_size.x() - margin),
          rng.uniform(margin, cam.image_size.y() - margin)};
}

double parallax_at(const Eigen::Vector3d& X, const Eigen::Vector3d& c1,
                   const Eigen::Vector3d& c2) {
  const Eigen::Vector3d r1 = (X - c1).normalized();
  const Eigen::Vector3d r2 = (X - c2).normalized();
  return std::acos(std::clamp(r1.dot(r2), -1.0, 1.0));
}

// Samples a world landmark visible in camera `cam` at both poses with at
// least the configured parallax. Returns false if rejection sampling fails.
bool sample_pair_landmark(Rng& rng, const RigCamera& cam, const Pose& T_wi,
                          const Pose& T_wj, double depth_min, double depth_max,
                          double min_parallax_rad, Eigen::Vector3d* X,
                          Eigen::Vector2d* ui, Eigen::Vector2d* uj) {
  const Pose cam_i = T_wi * cam.vehicle_from_cam();
  const Pose cam_j = T_wj * cam.vehicle_from_cam();
  for (int attempt = 0; attempt < 200; ++attempt) {
    const Eigen::Vector2d u = uniform_pixel(rng, cam.model, 1.0);
    const double depth = rng.uniform(depth_min, depth_max);
    const Eigen::Vector3d x_c = backproject(cam.model, u) * depth;
    const Eigen::Vector3d Xw = cam_i * x_c;
    const Eigen::Vector3d x_cj = cam_j.inverse() * Xw;
    Eigen::Vector2d u_j;
    if (!try_project(cam.model, x_cj, &u_j)) continue;
    if (!in_image(cam.model, u_j, 1.0)) continue;
    if (parallax_at(Xw, cam_i.t, cam_j.t) < min_parallax_rad) continue;
    *X = Xw;
    *ui = project(cam.model, cam_i.inverse() * Xw);
    *uj = u_j;
    return true;
  }
  return false;
}

}  // namespace

const char* scenario_name(Scenario s) {
  switch (s) {
    case Scenario::Calibration: return "calibration";
    case Scenario::MotionInit: return "motion-init";
    case Scenario::Backend: return "backend";
    case Scenario::Pipeline: return "pipeline";
  }
  return "unknown";
}

Scenario scenario_from_name(const std::string& name) {
  if (name == "calibration") return Scenario::Calibration;
  if (name == "motion-init") return Scenario::MotionInit;
  if (name == "backend") return Scenario::Backend;
  if (name == "pipeline") return Scenario::Pipeline;
  fail(ErrorCode::UsageError, "unknown scenario: " + name);
}

CameraRig two_side_camera_rig(double baseline) {
  CameraModel model;  // f = 250 px, 500x500
  CameraRig rig;
  rig.cameras.push_back(make_camera(-Eigen::Vector3d::UnitX(),
                                    {-0.5 * baseline, 0.0, 0.0}, model));
  rig.cameras.push_back(make_camera(Eigen::Vector3d::UnitX(),
                                    {0.5 * baseline, 0.0, 0.0}, model));
  return rig;
}

CameraRig surround_rig(double fov_deg, bool single_camera) {
  const CameraModel model = CameraModel::from_fov(fov_deg * kDeg, 500, 500);
  CameraRig rig;
  rig.cameras.push_back(
      make_camera(Eigen::Vector3d::UnitY(), {0.0, 1.5, 0.0}, model));
  if (single_camera) return rig;
  rig.cameras.push_back(
      make_camera(Eigen::Vector3d::UnitX(), {0.8, 0.0, 0.0}, model));
  rig.cameras.push_back(
      make_camera(-Eigen::Vector3d::UnitY(), {0.0, -1.5, 0.0}, model));
  rig.cameras.push_back(
      make_camera(-Eigen::Vector3d::UnitX(), {-0.8, 0.0, 0.0}, model));
  return rig;
}

GroundTruthBundle gen_calibration_scene(const ScenarioConfig& config) {
  GroundTruthBundle bundle;
  bundle.config = config;
  bundle.rig = two_side_camera_rig(0.1);
  Rng rng = Rng(config.seed).fork(1);

  // Straight segment, then turns to either side. Two straight buffer steps
  // separate the turn directions so that no rotation-free pair straddles
  // the inflection with a bent chord.
  Pose pose;
  const int n = config.calib_frames;
  const int half =
      config.calib_straight_frames + (n - config.calib_straight_frames) / 2;
  for (int i = 0; i < n; ++i) {
    bundle.poses.push_back({0.1 * i, pose});
    double yaw = 0.0;
    if (i >= config.calib_straight_frames && i != half - 1 && i != half)
      yaw = (i < half ? 1.0 : -1.0) * config.calib_turn_deg_per_frame * kDeg;
    pose = pose * arc_step(yaw, config.calib_spacing);
  }

  // Consecutive and skip-one pairs.
  std::vector<std::pair<int, int>> pair_ids;
  for (int i = 0; i + 1 < n; ++i) pair_ids.push_back({i, i + 1});
  for (int i = 0; i + 2 < n; ++i) pair_ids.push_back({i, i + 2});

  const double sigma = config.noise_px;
  for (int l = 0; l < bundle.rig.size(); ++l) {
    const RigCamera& cam = bundle.rig.at(l);
    Rng cam_rng = rng.fork(100 + l);
    for (const auto& [i, j] : pair_ids) {
      CalibPairMeasurements meas;
      meas.camera = l;
      meas.frame_i = i;
      meas.frame_j = j;
      Rng pair_rng = cam_rng.fork(1000 + i * 64 + (j - i));
      for (int k = 0; k < config.calib_points_per_pair; ++k) {
        Eigen::Vector3d X;
        Eigen::Vector2d ui, uj;
        if (!sample_pair_landmark(pair_rng, cam, bundle.poses[i].pose,
                                  bundle.poses[j].pose, config.calib_depth_min,
                                  config.calib_depth_max,
                                  config.min_parallax_deg * kDeg, &X, &ui, &uj))
          continue;
        meas.clean.push_back({ui, uj});
        const Eigen::Vector2d du(pair_rng.uniform(-sigma, sigma),
                                 pair_rng.uniform(-sigma, sigma));
        const Eigen::Vector2d dv(pair_rng.uniform(-sigma, sigma),
                                 pair_rng.uniform(-sigma, sigma));
        meas.noisy.push_back({ui + du, uj + dv});
      }
      bundle.calib_pairs.push_back(std::move(meas));
    }

    // Vertical lines per frame: world-z segments sampled in view.
    for (int i = 0; i < n; ++i) {
      Rng line_rng = cam_rng.fork(500000 + i);
      const Pose cam_pose = bundle.poses[i].pose * cam.vehicle_from_cam();
      for (int k = 0; k < config.calib_lines_per_frame; ++k) {
        LineMeasurements line;
        line.camera = l;
        line.frame = i;
        for (int attempt = 0; attempt < 50 && line.clean.size() < 2; ++attempt) {
          line.clean.clear();
          line.noisy.clear();
          const Eigen::Vector2d u = uniform_pixel(line_rng, cam.model, 10.0);
          // Vertical structures are tall and nearby; keep them close enough
          // for a well-spread projection.
          const double depth = line_rng.uniform(
              config.calib_depth_min,
              std::min(12.0, config.calib_depth_max));
          const Eigen::Vector3d X0 = cam_pose * (backproject(cam.model, u) * depth);
          for (int s = 0; s < 5; ++s) {
            const Eigen::Vector3d X =
                X0 + Eigen::Vector3d(0, 0, -4.0 + s * 2.0);
            const Eigen::Vector3d x_c = cam_pose.inverse() * X;
            Eigen::Vector2d up;
            if (!try_project(cam.model, x_c, &up)) continue;
            if (!in_image(cam.model, up)) continue;
            line.clean.push_back(up);
            line.noisy.push_back(up + Eigen::Vector2d(
                                          line_rng.uniform(-sigma, sigma),
                                          line_rng.uniform(-sigma, sigma)));
          }
          if (line.clean.size() >= 2) {
            const Eigen::Vector3d d_c = cam_pose.R.transpose() *
                                        Eigen::Vector3d::UnitZ();
            const Eigen::Vector3d p_c = cam_pose.inverse() * X0;
            line.true_normal = d_c.cross(p_c).normalized();
          }
        }
        if (line.clean.size() >= 2) bundle.calib_lines.push_back(std::move(line));
      }
    }
  }
  return bundle;
}

GroundTruthBundle gen_motion_scene(const ScenarioConfig& config) {
  GroundTruthBundle bundle;
  bundle.config = config;
  bundle.rig = surround_rig(config.fov_deg, config.single_camera);
  Rng rng = Rng(config.seed).fork(2);

  Pose pose;
  bundle.poses.push_back({0.0, pose});
  if (config.direct_yaw_deg >= 0.0) {
    pose = pose * arc_step(config.direct_yaw_deg * kDeg, config.step_length);
    bundle.poses.push_back({1.0, pose});
  } else {
    for (int i = 1; i < config.num_viewpoints; ++i) {
      const double omega =
          (0.04 * config.ackermann_k * i + config.omega0_deg) * kDeg;
      pose = pose * arc_step(omega, config.v_per_frame);
      bundle.poses.push_back({static_cast<double>(i), pose});
    }
  }

  const Pose& Ti = bundle.poses.front().pose;
  const Pose& Tj = bundle.poses.back().pose;
  bundle.true_step = relative_pose(Ti, Tj);

  const int d = bundle.rig.size();
  bundle.clean_corrs.per_camera.resize(d);
  bundle.noisy_corrs.per_camera.resize(d);
  bundle.outlier_labels.resize(d);

  const double sigma = config.noise_px;
  for (int l = 0; l < d; ++l) {
    const RigCamera& cam = bundle.rig.at(l);
    Rng cam_rng = rng.fork(100 + l);
    for (int k = 0; k < config.points_per_camera; ++k) {
      Eigen::Vector3d X;
      Eigen::Vector2d ui, uj;
      if (!sample_pair_landmark(cam_rng, cam, Ti, Tj, config.depth_min,
                                config.depth_max,
                                config.min_parallax_deg * kDeg, &X, &ui, &uj))
        continue;
      bundle.landmarks.push_back(X);

      pminit::BearingPair clean;
      clean.fi = backproject(cam.model, ui);
      clean.fj = backproject(cam.model, uj);
      bundle.clean_corrs.per_camera[l].push_back(clean);

      const bool outlier = cam_rng.uniform() < config.outlier_fraction;
      pminit::BearingPair noisy;
      Eigen::Vector2d nui = ui, nuj = uj;
      if (sigma > 0.0) {
        nui += Eigen::Vector2d(cam_rng.gaussian(sigma), cam_rng.gaussian(sigma));
        nuj += Eigen::Vector2d(cam_rng.gaussian(sigma), cam_rng.gaussian(sigma));
      }
      if (outlier) nuj = uniform_pixel(cam_rng, cam.model, 1.0);
      noisy.fi = backproject(cam.model, nui);
      noisy.fj = backproject(cam.model, nuj);
      bundle.noisy_corrs.per_camera[l].push_back(noisy);
      bundle.outlier_labels[l].push_back(outlier);
    }
  }
  return bundle;
}

GroundTruthBundle gen_backend_scene(const ScenarioConfig& config) {
  GroundTruthBundle bundle;
  bundle.config = config;
  bundle.rig = CameraRig{};
  {
    const CameraModel model = CameraModel::from_fov(90.0 * kDeg, 640, 480);
    bundle.rig.cameras.push_back(
        make_camera(Eigen::Vector3d::UnitY(), {0.0, 0.5, 1.4}, model));
  }
  Rng rng = Rng(config.seed).fork(3);

  // Smooth planar trajectory; the S-curve uses a sinusoidal yaw rate.
  const double dt = 1.0 / config.backend_rate_hz;
  Pose pose;
  for (int i = 0; i < config.backend_frames; ++i) {
    bundle.poses.push_back({i * dt, pose});
    const int substeps = 20;
    for (int s = 0; s < substeps; ++s) {
      const double t = i * dt + s * dt / substeps;
      double yaw_rate = 0.0;
      if (config.backend_path == BackendPath::SCurve)
        yaw_rate = 12.0 * kDeg * std::sin(2.0 * M_PI * t / 4.0);
      pose = pose * arc_step(yaw_rate * dt / substeps,
                             config.backend_speed * dt / substeps);
    }
  }

  const int n = config.backend_frames;
  const RigCamera& cam = bundle.rig.at(0);
  std::vector<Pose> cam_poses(n);
  for (int i = 0; i < n; ++i)
    cam_poses[i] = bundle.poses[i].pose * cam.vehicle_from_cam();

  backend::ObservationGraph& clean = bundle.clean_graph;
  clean.rig = bundle.rig;
  for (int i = 0; i < n; ++i)
    clean.frames.push_back({bundle.poses[i].t, bundle.poses[i].pose, 1});

  // Landmarks sourced per view with capped re-observation.
  for (int i = 0; i < n; ++i) {
    Rng view_rng = rng.fork(200 + i);
    for (int p = 0; p < config.local_connectivity; ++p) {
      const Eigen::Vector2d u = uniform_pixel(view_rng, cam.model, 1.0);
      const double depth =
          view_rng.uniform(config.backend_depth_min, config.backend_depth_max);
      const Eigen::Vector3d X = cam_poses[i] * (backproject(cam.model, u) * depth);

      std::vector<std::pair<int, Eigen::Vector2d>> obs;
      for (int radius = 0; radius < n && static_cast<int>(obs.size()) <
                                            config.global_connectivity;
           ++radius) {
        for (const int j : {i - radius, i + radius}) {
          if (j < 0 || j >= n) continue;
          if (radius == 0 && j != i) continue;
          if (static_cast<int>(obs.size()) >= config.global_connectivity) break;
          const Eigen::Vector3d x_c = cam_poses[j].inverse() * X;
          Eigen::Vector2d uj;
          if (!try_project(cam.model, x_c, &uj)) continue;
          if (!in_image(cam.model, uj, 1.0)) continue;
          if (x_c.z() < 0.5) continue;
          obs.push_back({j, uj});
          if (radius == 0) break;
        }
      }
      if (static_cast<int>(obs.size()) < 2) continue;

      const int lm = static_cast<int>(clean.landmarks.size());
      clean.landmarks.push_back(X);
      bundle.landmarks.push_back(X);
      for (const auto& [j, uj] : obs)
        clean.measurements.push_back({0, lm, j, uj});
    }
  }

  // Noisy graph: Gaussian pixel noise, random-walk pose perturbation and
  // re-triangulated landmark initialization.
  backend::ObservationGraph& graph = bundle.graph;
  graph.rig = bundle.rig;
  graph.measurements = clean.measurements;
  Rng noise_rng = rng.fork(7000);
  for (auto& m : graph.measurements)
    m.pixel += Eigen::Vector2d(noise_rng.gaussian(config.noise_px),
                               noise_rng.gaussian(config.noise_px));

  Rng walk_rng = rng.fork(8000);
  double yaw_err = 0.0;
  Eigen::Vector3d pos_err = Eigen::Vector3d::Zero();
  for (int i = 0; i < n; ++i) {
    if (i > 0) {
      yaw_err += walk_rng.gaussian(config.init_yaw_walk_deg * kDeg);
      pos_err += walk_rng.gaussian_vec3(config.init_pos_walk);
    }
    Pose noisy = bundle.poses[i].pose;
    noisy.R = rotation_about_z(yaw_err) * noisy.R;
    noisy.t += pos_err;
    graph.frames.push_back({bundle.poses[i].t, noisy, 1});
  }

  // First/last-observation triangulation with the perturbed poses.
  std::vector<std::vector<const backend::Measurement*>> by_landmark(
      clean.landmarks.size());
  for (const auto& m : graph.measurements) by_landmark[m.landmark].push_back(&m);
  graph.landmarks.resize(clean.landmarks.size());
  for (size_t lm = 0; lm < by_landmark.size(); ++lm) {
    std::vector<Ray> rays;
    const auto& obs = by_landmark[lm];
    for (const backend::Measurement* m : {obs.front(), obs.back()}) {
      const Pose cp = graph.frames[m->frame].pose * cam.vehicle_from_cam();
      rays.push_back({cp.t, cp.R * backproject(cam.model, m->pixel)});
    }
    const TriangulationResult tri = triangulate_rays(rays);
    // Parallel-ray fallback: place the point along the first ray at a
    // mid-range depth.
    graph.landmarks[lm] =
        tri.ok ? tri.point
               : rays[0].origin + rays[0].dir * 0.5 *
                                      (config.backend_depth_min +
                                       config.backend_depth_max);
  }
  return bundle;
}

GroundTruthBundle gen_pipeline_scene(const ScenarioConfig& config) {
  GroundTruthBundle bundle;
  bundle.config = config;
  bundle.rig = surround_rig(config.pipeline_fov_deg);
  Rng rng = Rng(config.seed).fork(4);

  const double dt = 1.0 / config.pipeline_rate_hz;
  struct Segment {
    double duration;
    double yaw_rate_deg;
    double speed;  // signed, negative = reverse
  };
  const std::vector<Segment> segments = {
      {8.0, 0.0, config.pipeline_speed},
      {6.0, 15.0, config.pipeline_speed},
      {8.0, 0.0, config.pipeline_speed},
      {config.stop_duration, 0.0, 0.0},
      {config.reverse_duration, 0.0, -0.4 * config.pipeline_speed},
      {6.0, 15.0, config.pipeline_speed},
      {8.0, 0.0, config.pipeline_speed},
  };

  Pose pose;
  double t = 0.0;
  for (const Segment& seg : segments) {
    const int frames = static_cast<int>(std::round(seg.duration / dt));
    for (int f = 0; f < frames; ++f) {
      bundle.poses.push_back({t, pose});
      bundle.motion_signs.push_back(seg.speed < 0.0 ? -1 : 1);
      pose = pose * arc_step(seg.yaw_rate_deg * kDeg * dt, seg.speed * dt);
      t += dt;
    }
  }
  const int n = static_cast<int>(bundle.poses.size());

  // Landmarks flanking the driven path.
  Rng lm_rng = rng.fork(100);
  double travelled = 0.0;
  Eigen::Vector3d last = bundle.poses[0].pose.t;
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d p = bundle.poses[i].pose.t;
    travelled += (p - last).norm();
    last = p;
    if (travelled < 1.5 && i > 0) continue;
    travelled = 0.0;
    const Eigen::Matrix3d R = bundle.poses[i].pose.R;
    for (int side = -1; side <= 1; side += 2)
      for (int k = 0; k < 3; ++k) {
        const double lateral = side * lm_rng.uniform(5.0, 20.0);
        const double along = lm_rng.uniform(-1.0, 1.0);
        const double height = lm_rng.uniform(0.0, 6.0);
        bundle.landmarks.push_back(
            p + R * Eigen::Vector3d(lateral, along, 0.0) +
            Eigen::Vector3d(0, 0, height));
      }
  }

  // Tracks: visible landmarks per camera per frame, deterministic cap.
  const int d = bundle.rig.size();
  bundle.tracks.per_camera.resize(d);
  for (int i = 0; i < n; ++i) bundle.tracks.frame_times.push_back(bundle.poses[i].t);
  Rng noise_rng = rng.fork(200);
  for (int i = 0; i < n; ++i) {
    for (int l = 0; l < d; ++l) {
      const RigCamera& cam = bundle.rig.at(l);
      const Pose cam_pose = bundle.poses[i].pose * cam.vehicle_from_cam();
      const Pose inv = cam_pose.inverse();
      int kept = 0;
      for (size_t lm = 0; lm < bundle.landmarks.size() &&
                          kept < config.max_tracks_per_frame;
           ++lm) {
        const Eigen::Vector3d x_c = inv * bundle.landmarks[lm];
        if (x_c.z() < 1.0 || x_c.z() > 60.0) continue;
        Eigen::Vector2d u;
        if (!try_project(cam.model, x_c, &u)) continue;
        if (!in_image(cam.model, u, 1.0)) continue;
        u += Eigen::Vector2d(noise_rng.gaussian(config.noise_px),
                             noise_rng.gaussian(config.noise_px));
        const int track_id = static_cast<int>(lm);
        bundle.tracks.per_camera[l][track_id].push_back({i, u});
        ++kept;
      }
    }
  }

  // GPS with occasional injected jumps.
  Rng gps_rng = rng.fork(300);
  const double gps_dt = 1.0 / config.gps_rate_hz;
  const double total_time = bundle.poses.back().t;
  int fix_count = static_cast<int>(total_time / gps_dt) + 1;
  std::vector<int> jump_at;
  for (int j = 0; j < config.gps_jump_count; ++j)
    jump_at.push_back(static_cast<int>((j + 0.6) * fix_count /
                                       (config.gps_jump_count + 1.0)));
  for (int g = 0; g < fix_count; ++g) {
    const double tg = g * gps_dt;
    // Position at the nearest frame time (desk-scale interpolation).
    const int idx = std::min(
        n - 1, static_cast<int>(std::round(tg * config.pipeline_rate_hz)));
    backend::GpsFix clean_fix{tg, bundle.poses[idx].pose.t, config.gps_sigma};
    bundle.gps_clean.push_back(clean_fix);
    backend::GpsFix noisy_fix = clean_fix;
    noisy_fix.position += gps_rng.gaussian_vec3(config.gps_sigma);
    for (size_t j = 0; j < jump_at.size(); ++j) {
      if (jump_at[j] == g) {
        const double az = gps_rng.uniform(0.0, 2.0 * M_PI);
        noisy_fix.position += config.gps_jump_magnitude *
                              Eigen::Vector3d(std::cos(az), std::sin(az), 0.0);
        bundle.gps_jump_indices.push_back(g);
      }
    }
    bundle.gps_noisy.push_back(noisy_fix);
  }
  return bundle;
}

GroundTruthBundle generate(const ScenarioConfig& config) {
  switch (config.scenario) {
    case Scenario::Calibration: return gen_calibration_scene(config);
    case Scenario::MotionInit: return gen_motion_scene(config);
    case Scenario::Backend: return gen_backend_scene(config);
    case Scenario::Pipeline: return gen_pipeline_scene(config);
  }
  fail(ErrorCode::UsageError, "unknown scenario");
}

}  // namespace surroundgeo::sim
