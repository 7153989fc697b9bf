#include "surroundgeo/pminit/planar_solver.hpp"
#include <algorithm>

#include <Eigen/Dense>
#include <cmath>
#include <functional>

#include "surroundgeo/core/error.hpp"
#include "surroundgeo/core/rng.hpp"
#include "surroundgeo/core/sym3eig.hpp"

namespace surroundgeo::pminit {

namespace {
constexpr double kDeg = M_PI / 180.0;

// Bearings rotated into body orientation once per solve; only R^v(z)
// changes along the 1-D search.
struct RotatedSet {
  // per camera: (g_i, h_j) with g = R_vc f_i, h = R_vc f_j
  std::vector<std::vector<std::pair<Eigen::Vector3d, Eigen::Vector3d>>> cams;

  RotatedSet(const BearingCorrespondenceSet& corrs, const CameraRig& rig) {
    cams.resize(corrs.per_camera.size());
    for (size_t l = 0; l < corrs.per_camera.size(); ++l) {
      const Rotation R_vc = rig.at(static_cast<int>(l)).R_vc();
      cams[l].reserve(corrs.per_camera[l].size());
      for (const BearingPair& bp : corrs.per_camera[l])
        cams[l].emplace_back(R_vc * bp.fi, R_vc * bp.fj);
    }
  }

  Eigen::Matrix3d weighted_normal_matrix(
      size_t l, const Rotation& R_v, double guard, int* used,
      const std::vector<double>* weights = nullptr) const {
    Eigen::Matrix3d M = Eigen::Matrix3d::Zero();
    if (used) *used = 0;
    for (size_t k = 0; k < cams[l].size(); ++k) {
      const auto& [g, h] = cams[l][k];
      const Eigen::Vector3d n = g.cross(R_v * h);
      const double n2 = n.squaredNorm();
      if (n2 < guard) continue;
      const double w = weights ? (*weights)[k] : 1.0;
      M.noalias() += (w / n2) * (n * n.transpose());
      if (used) ++(*used);
    }
    return M;
  }
};

// Residual used for consensus scoring. Zero-parallax pairs carry no verdict
// and score as consistent.
double consensus_residual(const BearingPair& bp, const Rotation& R_vc,
                          const Rotation& R_v, const Eigen::Vector3d& dir,
                          InlierMetric metric) {
  const Eigen::Vector3d gi = R_vc * bp.fi;
  const Eigen::Vector3d hj = R_v * (R_vc * bp.fj);
  if (metric == InlierMetric::ObjectSpace) {
    const Eigen::Vector3d n = gi.cross(hj);
    const double nn = n.norm();
    if (nn < 1e-9) return 0.0;
    return std::abs(n.dot(dir)) / nn;
  }
  // Angular deviation of the first bearing from the epipolar plane spanned
  // by the translation direction and the rotated second bearing.
  const Eigen::Vector3d m = dir.cross(hj);
  const double mn = m.norm();
  if (mn < 1e-9) return 0.0;
  return std::asin(std::clamp(std::abs(m.dot(gi)) / mn, 0.0, 1.0));
}

double object_space_value(
    const RotatedSet& set, double z, double guard,
    const std::vector<std::vector<double>>* weights = nullptr) {
  const Rotation R_v = cayley_z_to_rotation(z);
  double total = 0.0;
  for (size_t l = 0; l < set.cams.size(); ++l) {
    if (set.cams[l].empty()) continue;
    const Eigen::Matrix3d M = set.weighted_normal_matrix(
        l, R_v, guard, nullptr, weights ? &(*weights)[l] : nullptr);
    const double lam = min_eig_sym3(M).value;
    total += lam * lam;
  }
  return total;
}

// Damped Newton descent on a scalar objective with finite differences.
double descend_1d(const std::function<double(double)>& f, double z0, double f0,
                  double tol, int max_iterations) {
  double z = z0;
  double mu = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    const double h = 1e-6 * std::max(1.0, std::abs(z));
    const double fp = f(z + h);
    const double fm = f(z - h);
    const double g = (fp - fm) / (2.0 * h);
    double H = (fp - 2.0 * f0 + fm) / (h * h);
    if (!(H > 0.0)) H = std::abs(H) + 1e-12;

    double step = -g / (H + mu);
    bool accepted = false;
    for (int retry = 0; retry < 20; ++retry) {
      const double z_try = z + step;
      const double f_try = f(z_try);
      if (f_try <= f0) {
        z = z_try;
        f0 = f_try;
        accepted = true;
        mu = mu / 4.0;
        break;
      }
      mu = (mu == 0.0) ? H : mu * 4.0;
      step = -g / (H + mu);
    }
    if (!accepted || std::abs(step) < tol) break;
  }
  return z;
}

}  // namespace

Eigen::Vector3d epipolar_normal(const Eigen::Vector3d& fi,
                                const Eigen::Vector3d& fj,
                                const Rotation& R_vc, const Rotation& R_v) {
  return (R_vc * fi).cross(R_v * (R_vc * fj));
}

double algebraic_objective(const BearingCorrespondenceSet& corrs,
                           const CameraRig& rig, double z) {
  const Rotation R_v = cayley_z_to_rotation(z);
  double total = 0.0;
  for (int l = 0; l < corrs.num_cameras(); ++l) {
    if (corrs.per_camera[l].empty()) continue;
    const Rotation R_vc = rig.at(l).R_vc();
    Eigen::Matrix3d M = Eigen::Matrix3d::Zero();
    for (const BearingPair& bp : corrs.per_camera[l]) {
      const Eigen::Vector3d n = epipolar_normal(bp.fi, bp.fj, R_vc, R_v);
      M.noalias() += n * n.transpose();
    }
    const double lam = min_eig_sym3(M).value;
    total += lam * lam;
  }
  return total;
}

double objective_object_space(const BearingCorrespondenceSet& corrs,
                              const CameraRig& rig, double z,
                              double zero_parallax_guard) {
  return object_space_value(RotatedSet(corrs, rig), z, zero_parallax_guard);
}

double solve_rotation(const BearingCorrespondenceSet& corrs,
                      const CameraRig& rig, const PlanarSolveConfig& config) {
  if (corrs.total() < config.min_total_correspondences)
    fail(ErrorCode::InsufficientData,
         "solve_rotation: need at least " +
             std::to_string(config.min_total_correspondences) +
             " correspondences");

  const RotatedSet set(corrs, rig);
  const double guard = config.zero_parallax_guard;

  // Grid over theta = 2*atan(z).
  double best_z = 0.0;
  double best_f = std::numeric_limits<double>::infinity();
  const double half = config.grid_half_range_deg;
  for (double theta = -half; theta <= half + 1e-9;
       theta += config.grid_step_deg) {
    const double z = std::tan(0.5 * theta * kDeg);
    const double f = object_space_value(set, z, guard);
    if (f < best_f) {
      best_f = f;
      best_z = z;
    }
  }
  if (!std::isfinite(best_f))
    fail(ErrorCode::NumericFailure, "solve_rotation: objective not finite");

  // Local refinement; the extra evaluations are cheap next to the grid.
  return descend_1d(
      [&](double zz) { return object_space_value(set, zz, guard); }, best_z,
      best_f, config.newton_tol_z, config.max_newton_iterations);
}

void translation_directions(const BearingCorrespondenceSet& corrs,
                            const CameraRig& rig, double z,
                            const PlanarSolveConfig& config,
                            std::vector<Eigen::Vector3d>* dirs,
                            std::vector<bool>* valid) {
  const RotatedSet set(corrs, rig);
  const Rotation R_v = cayley_z_to_rotation(z);
  const int d = corrs.num_cameras();
  dirs->assign(d, Eigen::Vector3d::Zero());
  valid->assign(d, false);
  for (int l = 0; l < d; ++l) {
    int used = 0;
    const Eigen::Matrix3d M =
        set.weighted_normal_matrix(l, R_v, config.zero_parallax_guard, &used);
    if (used < 2) continue;
    Eigen::Vector3d dir = min_eig_sym3(M).vector;
    const double forward = config.reverse_prior ? -dir.y() : dir.y();
    if (forward < 0.0) dir = -dir;
    (*dirs)[l] = dir;
    (*valid)[l] = true;
  }
}

TranslationRecovery recover_translation(
    const std::vector<Eigen::Vector3d>& dirs, const std::vector<bool>& valid,
    const CameraRig& rig, const Rotation& R_v) {
  TranslationRecovery out;
  const int d = static_cast<int>(dirs.size());
  out.scales.assign(d, 0.0);

  std::vector<int> active;
  for (int l = 0; l < d; ++l)
    if (valid[l]) active.push_back(l);
  if (active.empty())
    fail(ErrorCode::InsufficientData,
         "recover_translation: no camera direction available");

  const int rows = 3 * static_cast<int>(active.size());
  const int cols = static_cast<int>(active.size()) + 3;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows, cols);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(rows);
  for (size_t k = 0; k < active.size(); ++k) {
    const int l = active[k];
    const Eigen::Vector3d t_vc = rig.at(l).center_in_vehicle();
    A.block<3, 1>(3 * k, k) = dirs[l];
    A.block<3, 3>(3 * k, cols - 3) = -Eigen::Matrix3d::Identity();
    b.segment<3>(3 * k) = (R_v - Eigen::Matrix3d::Identity()) * t_vc;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double smin = svd.singularValues()(svd.singularValues().size() - 1);
  const double smax = svd.singularValues()(0);

  const bool identity_rotation = rotation_angle(R_v) < 1e-6;
  const bool rank_deficient = rows < cols || smin < 1e-8 * smax;
  const bool homogeneous = b.norm() < 1e-12;

  if (identity_rotation || rank_deficient || homogeneous) {
    out.scale_observable = false;
    // Direction-only output: the cameras share the translation direction up
    // to the baseline-induced part, which vanishes in these conditions.
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (int l : active) mean += dirs[l];
    out.translation =
        mean.norm() > 1e-12 ? mean.normalized() : Eigen::Vector3d::Zero();
    return out;
  }

  const Eigen::VectorXd x = svd.solve(b);
  for (size_t k = 0; k < active.size(); ++k) out.scales[active[k]] = x(k);
  out.translation = x.segment<3>(cols - 3);
  out.scale_observable = true;
  return out;
}

PlanarMotionEstimate solve_planar_motion(const BearingCorrespondenceSet& corrs,
                                         const CameraRig& rig,
                                         const PlanarSolveConfig& config) {
  PlanarMotionEstimate est;
  est.z = solve_rotation(corrs, rig, config);
  est.rotation = cayley_z_to_rotation(est.z);
  translation_directions(corrs, rig, est.z, config, &est.translation_dirs,
                         &est.direction_valid);
  const TranslationRecovery rec = recover_translation(
      est.translation_dirs, est.direction_valid, rig, est.rotation);
  est.scales = rec.scales;
  est.translation = rec.translation;
  est.scale_observable = rec.scale_observable;
  est.inlier_mask.resize(corrs.per_camera.size());
  for (size_t l = 0; l < corrs.per_camera.size(); ++l)
    est.inlier_mask[l].assign(corrs.per_camera[l].size(), true);
  return est;
}

PlanarMotionEstimate ransac_solve(const BearingCorrespondenceSet& corrs,
                                  const CameraRig& rig,
                                  const PlanarSolveConfig& config) {
  const int d = corrs.num_cameras();
  std::vector<int> populated;
  for (int l = 0; l < d; ++l)
    if (static_cast<int>(corrs.per_camera[l].size()) >= config.sample_per_camera)
      populated.push_back(l);
  if (populated.empty() || corrs.total() < config.min_total_correspondences)
    fail(ErrorCode::InsufficientData, "ransac_solve: not enough correspondences");

  const int total = corrs.total();
  int sample_size = 0;
  for (int l : populated) {
    (void)l;
    sample_size += config.sample_per_camera;
  }

  Rng master(config.seed);
  const uint64_t sampling_key = master.fork(0x5a).next_u64();

  int best_inliers = -1;
  std::vector<std::vector<bool>> best_mask;
  double best_z = 0.0;

  PlanarSolveConfig hyp_config = config;
  hyp_config.min_total_correspondences = 2;

  int max_iters = config.max_ransac_iterations;
  for (int iter = 0; iter < max_iters; ++iter) {
    // Per-iteration stream so hypothesis evaluation order is irrelevant.
    Rng rng(Rng::mix(sampling_key, static_cast<uint64_t>(iter)));

    BearingCorrespondenceSet sample;
    sample.per_camera.resize(d);
    for (int l : populated) {
      const int n = static_cast<int>(corrs.per_camera[l].size());
      std::vector<int> picked;
      while (static_cast<int>(picked.size()) < config.sample_per_camera) {
        const int c = static_cast<int>(rng.below(n));
        bool dup = false;
        for (int p : picked) dup |= (p == c);
        if (!dup) picked.push_back(c);
      }
      for (int c : picked) sample.per_camera[l].push_back(corrs.per_camera[l][c]);
    }

    double z = 0.0;
    try {
      z = solve_rotation(sample, rig, hyp_config);
    } catch (const Error&) {
      continue;
    }
    std::vector<Eigen::Vector3d> dirs;
    std::vector<bool> valid;
    translation_directions(sample, rig, z, hyp_config, &dirs, &valid);

    // Consensus over all correspondences.
    const Rotation R_v = cayley_z_to_rotation(z);
    int inliers = 0;
    std::vector<std::vector<bool>> mask(d);
    for (int l = 0; l < d; ++l) {
      mask[l].assign(corrs.per_camera[l].size(), false);
      if (l >= static_cast<int>(valid.size()) || !valid[l]) continue;
      const Rotation R_vc = rig.at(l).R_vc();
      for (size_t k = 0; k < corrs.per_camera[l].size(); ++k) {
        const double r = consensus_residual(corrs.per_camera[l][k], R_vc, R_v,
                                            dirs[l], config.inlier_metric);
        if (r < config.inlier_threshold) {
          mask[l][k] = true;
          ++inliers;
        }
      }
    }

    if (inliers > best_inliers) {
      best_inliers = inliers;
      best_mask = mask;
      best_z = z;
      // Adaptive iteration bound from the inlier ratio.
      const double w = static_cast<double>(inliers) / total;
      if (w > 0.0 && w < 1.0) {
        const double denom = std::log(1.0 - std::pow(w, sample_size));
        if (denom < 0.0) {
          const int needed = static_cast<int>(
              std::ceil(std::log(1.0 - config.confidence) / denom));
          max_iters = std::min(max_iters, std::max(iter + 1, needed));
        }
      } else if (w >= 1.0) {
        max_iters = iter + 1;
      }
    }
  }

  if (best_inliers <= 0 ||
      static_cast<double>(best_inliers) / total < config.min_inlier_ratio)
    fail(ErrorCode::NoConsensus,
         "ransac_solve: inlier ratio below the configured minimum");

  auto gather = [&](const std::vector<std::vector<bool>>& mask) {
    BearingCorrespondenceSet set;
    set.per_camera.resize(d);
    for (int l = 0; l < d; ++l)
      for (size_t k = 0; k < corrs.per_camera[l].size(); ++k)
        if (mask[l][k]) set.per_camera[l].push_back(corrs.per_camera[l][k]);
    return set;
  };
  auto rescore = [&](double z, const std::vector<Eigen::Vector3d>& dirs,
                     const std::vector<bool>& valid) {
    const Rotation R_v = cayley_z_to_rotation(z);
    std::vector<std::vector<bool>> mask(d);
    for (int l = 0; l < d; ++l) {
      mask[l].assign(corrs.per_camera[l].size(), false);
      if (l >= static_cast<int>(valid.size()) || !valid[l]) continue;
      const Rotation R_vc = rig.at(l).R_vc();
      for (size_t k = 0; k < corrs.per_camera[l].size(); ++k)
        mask[l][k] = consensus_residual(corrs.per_camera[l][k], R_vc, R_v,
                                        dirs[l], config.inlier_metric) <
                     config.inlier_threshold;
    }
    return mask;
  };

  // Local optimization: alternate refits on the consensus set with
  // re-scoring under the refined model.
  PlanarSolveConfig refit = config;
  refit.min_total_correspondences =
      std::min(config.min_total_correspondences, best_inliers);
  std::vector<std::vector<bool>> mask = best_mask;
  PlanarMotionEstimate est;
  for (int round = 0; round < 3; ++round) {
    est = solve_planar_motion(gather(mask), rig, refit);
    mask = rescore(est.z, est.translation_dirs, est.direction_valid);
    int count = 0;
    for (const auto& cam_mask : mask)
      for (bool b : cam_mask) count += b;
    if (static_cast<double>(count) / total < config.min_inlier_ratio)
      fail(ErrorCode::NoConsensus,
           "ransac_solve: refined inlier ratio below the configured minimum");
  }

  // The returned mask is the classification at the configured threshold.
  // The concluding refit reweights the consensus set with Cauchy weights so
  // that threshold-passing outliers cannot bias the quadratic fit.
  {
    const BearingCorrespondenceSet in_set = gather(mask);
    const RotatedSet rset(in_set, rig);
    std::vector<std::vector<double>> weights(d);
    for (int l = 0; l < d; ++l)
      weights[l].assign(in_set.per_camera[l].size(), 1.0);

    double z = est.z;
    for (int round = 0; round < 4; ++round) {
      const double f0 =
          object_space_value(rset, z, config.zero_parallax_guard, &weights);
      z = descend_1d(
          [&](double zz) {
            return object_space_value(rset, zz, config.zero_parallax_guard,
                                      &weights);
          },
          z, f0, config.newton_tol_z, config.max_newton_iterations);

      const Rotation R_v = cayley_z_to_rotation(z);
      std::vector<double> all;
      std::vector<std::vector<double>> res(d);
      for (int l = 0; l < d; ++l) {
        res[l].assign(in_set.per_camera[l].size(), 0.0);
        if (in_set.per_camera[l].size() < 2) continue;
        const Eigen::Matrix3d M = rset.weighted_normal_matrix(
            l, R_v, config.zero_parallax_guard, nullptr, &weights[l]);
        Eigen::Vector3d dir = min_eig_sym3(M).vector;
        const Rotation R_vc = rig.at(l).R_vc();
        for (size_t k = 0; k < in_set.per_camera[l].size(); ++k) {
          res[l][k] = consensus_residual(in_set.per_camera[l][k], R_vc, R_v,
                                         dir, config.inlier_metric);
          all.push_back(res[l][k]);
        }
      }
      if (all.size() < 8) break;
      std::nth_element(all.begin(), all.begin() + all.size() / 2, all.end());
      const double sigma =
          std::max(1.4826 * all[all.size() / 2], 0.05 * config.inlier_threshold);
      for (int l = 0; l < d; ++l)
        for (size_t k = 0; k < res[l].size(); ++k) {
          const double r = res[l][k] / (2.0 * sigma);
          weights[l][k] = 1.0 / (1.0 + r * r);
        }
    }

    PlanarSolveConfig final_config = refit;
    est.z = z;
    est.rotation = cayley_z_to_rotation(z);
    est.translation_dirs.assign(d, Eigen::Vector3d::Zero());
    est.direction_valid.assign(d, false);
    for (int l = 0; l < d; ++l) {
      int used = 0;
      const Eigen::Matrix3d M = rset.weighted_normal_matrix(
          l, est.rotation, config.zero_parallax_guard, &used, &weights[l]);
      if (used < 2) continue;
      Eigen::Vector3d dir = min_eig_sym3(M).vector;
      const double forward = final_config.reverse_prior ? -dir.y() : dir.y();
      if (forward < 0.0) dir = -dir;
      est.translation_dirs[l] = dir;
      est.direction_valid[l] = true;
    }
    const TranslationRecovery rec = recover_translation(
        est.translation_dirs, est.direction_valid, rig, est.rotation);
    est.scales = rec.scales;
    est.translation = rec.translation;
    est.scale_observable = rec.scale_observable;
  }

  (void)best_z;
  est.inlier_mask = mask;
  return est;
}

}  // namespace surroundgeo::pminit
