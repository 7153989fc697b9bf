#include "surroundgeo/calib/calibration.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "surroundgeo/core/error.hpp"
#include "surroundgeo/core/least_squares.hpp"
#include "surroundgeo/core/sym3eig.hpp"

namespace surroundgeo::calib {

MotionClass classify_pair(const Rotation& R, double tau1, double tau2) {
  if (!(tau1 < tau2))
    fail(ErrorCode::DomainError, "classify_pair requires tau1 < tau2");
  const double gap = frobenius_rotation_gap(R);
  if (gap < tau1) return MotionClass::Straight;
  if (gap > tau2) return MotionClass::Turning;
  return MotionClass::Ambiguous;
}

Eigen::Vector3d line_plane_normal(const std::vector<Eigen::Vector2d>& points,
                                  const CameraModel& cam) {
  if (points.size() < 2)
    fail(ErrorCode::InsufficientData,
         "line_plane_normal: need at least two points");
  Eigen::MatrixXd B(points.size(), 3);
  for (size_t k = 0; k < points.size(); ++k)
    B.row(k) = backproject(cam, points[k]).transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(B, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv(1) < 1e-8 * sv(0))
    fail(ErrorCode::DegenerateGeometry,
         "line_plane_normal: bearings span less than a plane");
  return svd.matrixV().col(2);
}

namespace {

// Shared E0 core: the translation direction that minimizes the reweighted
// epipolar energy over its single horizontal degree of freedom, plus the
// per-correspondence normalized residuals at that direction. The residual
// sum of squares equals the smallest eigenvalue of the 2x2 restriction of
// the normal outer-product matrix.
Eigen::Vector3d e0_best_direction(const PairObservation& obs,
                                  const Rotation& R_cv, const Rotation& R_rel) {
  Eigen::Matrix3d M = Eigen::Matrix3d::Zero();
  for (const pminit::BearingPair& bp : obs.bearings) {
    const Eigen::Vector3d n = bp.fi.cross(R_rel * bp.fj);
    const double n2 = n.squaredNorm();
    if (n2 < 1e-12) continue;  // zero parallax carries no constraint
    M.noalias() += (n * n.transpose()) / n2;
  }
  const Eigen::Matrix<double, 3, 2> B = R_cv.leftCols<2>();
  const Eigen::Matrix2d M2 = B.transpose() * M * B;
  Eigen::Vector2d v = min_eig_sym2(M2).vector;
  // Deterministic sign so finite differences across calls stay coherent.
  const double lead = std::abs(v.x()) >= std::abs(v.y()) ? v.x() : v.y();
  if (lead < 0.0) v = -v;
  return B * v;
}

}  // namespace

double e0_residual(const PairObservation& obs, const Rotation& R_cv,
                   const Rotation& R_v_i, const Rotation& R_v_j) {
  const Eigen::VectorXd r = e0_residual_vector(obs, R_cv, R_v_i, R_v_j);
  return r.squaredNorm();
}

Eigen::VectorXd e0_residual_vector(const PairObservation& obs,
                                   const Rotation& R_cv,
                                   const Rotation& R_v_i,
                                   const Rotation& R_v_j) {
  if (obs.bearings.size() < 2)
    fail(ErrorCode::InsufficientData,
         "e0_residual: need at least two bearing pairs");
  const Rotation R_rel = R_cv * R_v_i.transpose() * R_v_j * R_cv.transpose();
  const Eigen::Vector3d t_dir = e0_best_direction(obs, R_cv, R_rel);
  Eigen::VectorXd r(obs.bearings.size());
  for (size_t k = 0; k < obs.bearings.size(); ++k) {
    const pminit::BearingPair& bp = obs.bearings[k];
    const Eigen::Vector3d n = bp.fi.cross(R_rel * bp.fj);
    const double nn = n.norm();
    r(k) = nn < 1e-6 ? 0.0 : n.dot(t_dir) / nn;
  }
  return r;
}

Eigen::Vector3d e1_residual(const PairObservation& obs, const Rotation& R_cv) {
  const Eigen::Vector3d forward = R_cv.col(1);
  Eigen::Vector3d t = obs.t_dir_meas;
  if (t.dot(forward) < 0.0) t = -t;
  return t - forward;
}

Eigen::Vector3d e2_residual(const PairObservation& obs, const Rotation& R_cv) {
  const AxisAngle aa = rotation_to_axis_angle(obs.rotation_meas);
  if (!aa.axis_defined)
    fail(ErrorCode::DomainError,
         "e2_residual: rotation angle too small for a defined axis");
  const Eigen::Vector3d up = R_cv.col(2);
  Eigen::Vector3d axis = aa.axis;
  if (axis.dot(up) < 0.0) axis = -axis;
  return axis - up;
}

double e3_residual(const VerticalLineObservation& line, const Rotation& R_cv) {
  return line.normal.dot(R_cv.col(2));
}

namespace {

Rotation orthonormal_from_directions(const Eigen::Vector3d& forward,
                                     const Eigen::Vector3d& up) {
  const Eigen::Vector3d y = forward.normalized();
  const Eigen::Vector3d z = (up - up.dot(y) * y).normalized();
  const Eigen::Vector3d x = y.cross(z);
  Rotation R;
  R.col(0) = x;
  R.col(1) = y;
  R.col(2) = z;
  return R;
}

// Chained vehicle orientations from the measured pair rotations expressed
// through the current extrinsic estimates. Consecutive keyframe steps are
// small, so candidates with implausibly large angles are dropped before
// averaging.
std::vector<Rotation> chain_vehicle_orientations(
    const CalibrationProblem& problem, const std::vector<Rotation>& R_cv,
    const Rotation& first) {
  const int m = problem.num_frames;
  constexpr double kMaxStepAngle = 15.0 * M_PI / 180.0;
  std::vector<Eigen::Matrix3d> step_sum(m, Eigen::Matrix3d::Zero());
  for (const PairObservation& obs : problem.pairs) {
    if (obs.frame_j != obs.frame_i + 1) continue;
    const Rotation R_v_ij = R_cv[obs.camera].transpose() * obs.rotation_meas *
                            R_cv[obs.camera];
    if (rotation_angle(R_v_ij) > kMaxStepAngle) continue;
    step_sum[obs.frame_i] += R_v_ij;
  }
  std::vector<Rotation> R_v(m, Rotation::Identity());
  R_v[0] = first;
  for (int i = 0; i + 1 < m; ++i) {
    const Rotation step = step_sum[i].isZero(0.0)
                              ? Rotation::Identity()
                              : project_to_rotation(step_sum[i]);
    R_v[i + 1] = R_v[i] * step;
  }
  return R_v;
}

struct ProblemCounts {
  int n_points = 0;
  int n_dirs = 0;
  int n_lines = 0;
};

// First candidate consistent with the axis-agnostic medoid of all
// candidates; shields the single-pair initialization from corrupted pairs.
Eigen::Vector3d pick_first_consistent(
    const std::vector<Eigen::Vector3d>& candidates, double max_angle) {
  auto dist = [](const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
    return std::acos(std::clamp(std::abs(a.dot(b)), 0.0, 1.0));
  };
  size_t medoid = 0;
  double best = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < candidates.size(); ++i) {
    double sum = 0.0;
    for (size_t j = 0; j < candidates.size(); ++j)
      sum += dist(candidates[i], candidates[j]);
    if (sum < best) {
      best = sum;
      medoid = i;
    }
  }
  for (const Eigen::Vector3d& c : candidates)
    if (dist(c, candidates[medoid]) < max_angle) return c;
  return candidates[medoid];
}

}  // namespace

std::vector<Rotation> initialize_extrinsics(const CalibrationProblem& problem) {
  constexpr double kConsistencyAngle = 30.0 * M_PI / 180.0;
  const auto& config = problem.config;
  std::vector<Rotation> R_cv;
  for (int l = 0; l < problem.num_cameras; ++l) {
    std::vector<Eigen::Vector3d> forward_candidates;
    for (const PairObservation& obs : problem.pairs) {
      if (obs.camera != l) continue;
      if (classify_pair(obs.rotation_meas, config.tau1, config.tau2) ==
          MotionClass::Straight)
        forward_candidates.push_back(obs.t_dir_meas);
    }
    if (forward_candidates.empty())
      fail(ErrorCode::InsufficientExcitation,
           "camera " + std::to_string(l) + ": no straight pair for the forward direction");
    const Eigen::Vector3d forward =
        pick_first_consistent(forward_candidates, kConsistencyAngle);

    bool have_up = false;
    Eigen::Vector3d up = Eigen::Vector3d::Zero();
    if (config.use_rotation_axis) {
      std::vector<Eigen::Vector3d> axis_candidates;
      for (const PairObservation& obs : problem.pairs) {
        if (obs.camera != l) continue;
        if (classify_pair(obs.rotation_meas, config.tau1, config.tau2) !=
            MotionClass::Turning)
          continue;
        const AxisAngle aa = rotation_to_axis_angle(obs.rotation_meas);
        if (!aa.axis_defined) continue;
        axis_candidates.push_back(aa.axis);
      }
      if (!axis_candidates.empty()) {
        up = pick_first_consistent(axis_candidates, kConsistencyAngle);
        have_up = true;
      }
    }
    if (!have_up && config.use_vertical_lines) {
      // Vertical vanishing direction of the first frame carrying two lines:
      // the common direction orthogonal to all interpretation planes.
      for (int frame = 0; !have_up && frame < problem.num_frames; ++frame) {
        std::vector<Eigen::Vector3d> normals;
        for (const VerticalLineObservation& line : problem.lines)
          if (line.camera == l && line.frame == frame)
            normals.push_back(line.normal);
        if (normals.size() < 2) continue;
        Eigen::MatrixXd N(normals.size(), 3);
        for (size_t r = 0; r < normals.size(); ++r) N.row(r) = normals[r];
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(N, Eigen::ComputeFullV);
        if (svd.singularValues()(1) < 1e-6 * svd.singularValues()(0)) continue;
        up = svd.matrixV().col(2);
        have_up = true;
      }
    }
    if (!have_up)
      fail(ErrorCode::InsufficientExcitation,
           "camera " + std::to_string(l) + ": no turning pair or vertical line for the up direction");

    if (up.dot(config.up_prior_in_camera) < 0.0) up = -up;
    R_cv.push_back(orthonormal_from_directions(forward, up));
  }
  return R_cv;
}

CalibrationResult calibrate(const CalibrationProblem& problem) {
  return calibrate(problem, initialize_extrinsics(problem));
}

CalibrationResult calibrate(const CalibrationProblem& problem,
                            const std::vector<Rotation>& init_R_cv) {
  const auto& config = problem.config;
  if (!config.fix_gauge)
    fail(ErrorCode::GaugeNotFixed,
         "calibrate: the first vehicle orientation must be pinned");
  if (problem.num_frames < 2)
    fail(ErrorCode::InsufficientData, "calibrate: need at least two frames");

  const int d = problem.num_cameras;
  const int m = problem.num_frames;
  const Rotation first = config.first_orientation;
  const std::vector<Rotation> init_Rv =
      chain_vehicle_orientations(problem, init_R_cv, first);

  // Classification and dynamic weights.
  ProblemCounts counts;
  std::vector<MotionClass> classes(problem.pairs.size());
  for (size_t p = 0; p < problem.pairs.size(); ++p) {
    classes[p] =
        classify_pair(problem.pairs[p].rotation_meas, config.tau1, config.tau2);
    counts.n_points += static_cast<int>(problem.pairs[p].bearings.size());
    if (classes[p] == MotionClass::Straight) ++counts.n_dirs;
    if (classes[p] == MotionClass::Turning && config.use_rotation_axis)
      ++counts.n_dirs;
  }
  counts.n_lines = config.use_vertical_lines
                       ? static_cast<int>(problem.lines.size())
                       : 0;

  double lambda1 = config.lambda1, lambda2 = config.lambda2,
         lambda3 = config.lambda3;
  if (config.dynamic_weights) {
    const double pts = std::max(counts.n_points, 1);
    lambda1 = lambda2 = pts / std::max(counts.n_dirs, 1);
    lambda3 = pts / std::max(counts.n_lines, 1);
  }
  if (!config.use_rotation_axis) lambda2 = 0.0;

  LeastSquaresProblem lsq;
  std::vector<int> cam_blocks(d), frame_blocks(m, -1);
  for (int l = 0; l < d; ++l)
    cam_blocks[l] =
        lsq.add_parameter_block(rotation_to_vec9(init_R_cv[l]), 3, rotation_plus());
  for (int i = 1; i < m; ++i)
    frame_blocks[i] =
        lsq.add_parameter_block(rotation_to_vec9(init_Rv[i]), 3, rotation_plus());

  // Residual-block bookkeeping for the Huber scales and the energy log.
  std::vector<int> e0_ids, e1_ids, e2_ids, e3_ids;

  for (size_t p = 0; p < problem.pairs.size(); ++p) {
    const PairObservation& obs = problem.pairs[p];
    std::vector<int> deps = {cam_blocks[obs.camera]};
    // Frame 0 is the pinned gauge; only free frames become dependencies.
    int slot_i = -1, slot_j = -1;
    if (obs.frame_i > 0) {
      slot_i = static_cast<int>(deps.size());
      deps.push_back(frame_blocks[obs.frame_i]);
    }
    if (obs.frame_j > 0) {
      slot_j = static_cast<int>(deps.size());
      deps.push_back(frame_blocks[obs.frame_j]);
    }
    const int id = lsq.add_residual_block(
        deps, static_cast<int>(obs.bearings.size()),
        [&problem, p, slot_i, slot_j, first](
            const std::vector<const Eigen::VectorXd*>& params,
            Eigen::VectorXd& r) {
          const Rotation R_cv = vec9_to_rotation(*params[0]);
          const Rotation Ri =
              slot_i < 0 ? first : vec9_to_rotation(*params[slot_i]);
          const Rotation Rj =
              slot_j < 0 ? first : vec9_to_rotation(*params[slot_j]);
          r = e0_residual_vector(problem.pairs[p], R_cv, Ri, Rj);
          return true;
        });
    e0_ids.push_back(id);

    if (classes[p] == MotionClass::Straight) {
      const int eid = lsq.add_residual_block(
          {cam_blocks[obs.camera]}, 3,
          [&problem, p](const std::vector<const Eigen::VectorXd*>& params,
                        Eigen::VectorXd& r) {
            r = e1_residual(problem.pairs[p], vec9_to_rotation(*params[0]));
            return true;
          });
      lsq.set_sqrt_weight(eid, std::sqrt(lambda1));
      e1_ids.push_back(eid);
    } else if (classes[p] == MotionClass::Turning && config.use_rotation_axis) {
      const int eid = lsq.add_residual_block(
          {cam_blocks[obs.camera]}, 3,
          [&problem, p](const std::vector<const Eigen::VectorXd*>& params,
                        Eigen::VectorXd& r) {
            r = e2_residual(problem.pairs[p], vec9_to_rotation(*params[0]));
            return true;
          });
      lsq.set_sqrt_weight(eid, std::sqrt(lambda2));
      e2_ids.push_back(eid);
    }
  }

  if (config.use_vertical_lines) {
    for (size_t q = 0; q < problem.lines.size(); ++q) {
      const VerticalLineObservation& line = problem.lines[q];
      const int eid = lsq.add_residual_block(
          {cam_blocks[line.camera]}, 1,
          [&problem, q](const std::vector<const Eigen::VectorXd*>& params,
                        Eigen::VectorXd& r) {
            r(0) = e3_residual(problem.lines[q], vec9_to_rotation(*params[0]));
            return true;
          });
      lsq.set_sqrt_weight(eid, std::sqrt(lambda3));
      e3_ids.push_back(eid);
    }
  }

  CalibrationResult result;
  auto energies_now = [&]() {
    EnergyBreakdown e;
    for (int id : e0_ids) {
      const Eigen::VectorXd r = lsq.evaluate_block(id);
      e.e0 += r.squaredNorm();
    }
    for (int id : e1_ids) e.e1 += lambda1 * lsq.evaluate_block(id).squaredNorm();
    for (int id : e2_ids) e.e2 += lambda2 * lsq.evaluate_block(id).squaredNorm();
    for (int id : e3_ids) e.e3 += lambda3 * lsq.evaluate_block(id).squaredNorm();
    return e;
  };

  // Huber scales per residual family from the median block magnitude,
  // refreshed at every outer iteration.
  auto refresh_robust = [&](LeastSquaresProblem& p) {
    auto set_family = [&](const std::vector<int>& ids, double weight) {
      if (ids.empty()) return;
      std::vector<double> mags;
      mags.reserve(ids.size());
      for (int id : ids)
        mags.push_back(std::sqrt(weight) * p.evaluate_block(id).norm());
      std::nth_element(mags.begin(), mags.begin() + mags.size() / 2, mags.end());
      const double mad = mags[mags.size() / 2];
      const double delta = config.huber_mad_factor * mad;
      for (int id : ids) p.set_robust_delta(id, mad < 1e-12 ? 0.0 : delta);
    };
    set_family(e0_ids, 1.0);
    set_family(e1_ids, lambda1);
    set_family(e2_ids, lambda2);
    set_family(e3_ids, lambda3);
  };

  LeastSquaresProblem::Options opts;
  opts.max_iterations = config.max_iterations;
  opts.relative_decrease_tol = config.relative_decrease_tol;
  opts.numeric_diff_step = 1e-7;
  opts.outer_hook = [&](LeastSquaresProblem& p) {
    refresh_robust(p);
    const EnergyBreakdown e = energies_now();
    const double it = static_cast<double>(result.convergence_log.size());
    result.convergence_log.push_back({it, e.e0, e.e1, e.e2, e.e3, e.total()});
  };

  const auto summary = lsq.solve(opts);

  result.converged = summary.converged;
  result.iterations = summary.iterations;
  for (int l = 0; l < d; ++l)
    result.R_cv.push_back(vec9_to_rotation(lsq.block_value(cam_blocks[l])));
  result.vehicle_orientations.push_back(first);
  for (int i = 1; i < m; ++i)
    result.vehicle_orientations.push_back(
        vec9_to_rotation(lsq.block_value(frame_blocks[i])));
  result.energies = energies_now();
  {
    const EnergyBreakdown e = result.energies;
    const double it = static_cast<double>(result.convergence_log.size());
    result.convergence_log.push_back({it, e.e0, e.e1, e.e2, e.e3, e.total()});
  }
  return result;
}

Rotation camera_to_camera(const Rotation& R_c1v, const Rotation& R_c2v) {
  return R_c1v * R_c2v.transpose();
}

}  // namespace surroundgeo::calib
