#pragma once

#include "surroundgeo/calib/types.hpp"
#include "surroundgeo/core/camera.hpp"

namespace surroundgeo::calib {

// Straight / Turning / Ambiguous from the Frobenius gap of the measured
// relative rotation against the two thresholds.
MotionClass classify_pair(const Rotation& R, double tau1, double tau2);

// Interpretation-plane normal of a (vertical) line from >= 2 pixel
// measurements: the smallest right singular direction of the stacked
// bearings. Parallel bearings raise DegenerateGeometry.
Eigen::Vector3d line_plane_normal(const std::vector<Eigen::Vector2d>& points,
                                  const CameraModel& cam);

// Sum of squared object-space epipolar residuals of one pair, with the
// translation direction internally minimized over its single horizontal
// degree of freedom (the smallest eigenvalue of the 2x2 restriction of the
// reweighted normal outer-product matrix to the plane orthogonal to the
// vehicle-up column of R_cv).
double e0_residual(const PairObservation& obs, const Rotation& R_cv,
                   const Rotation& R_v_i, const Rotation& R_v_j);

// Per-correspondence residuals at the internally optimal direction;
// e0_residual is their sum of squares.
Eigen::VectorXd e0_residual_vector(const PairObservation& obs,
                                   const Rotation& R_cv,
                                   const Rotation& R_v_i,
                                   const Rotation& R_v_j);

// Forward-direction residual of a Straight pair: t_dir - column2(R_cv),
// after sign-aligning t_dir with the current forward estimate.
Eigen::Vector3d e1_residual(const PairObservation& obs, const Rotation& R_cv);

// Rotation-axis residual of a Turning pair: axis - column3(R_cv), after
// sign-aligning the axis with the current up estimate.
Eigen::Vector3d e2_residual(const PairObservation& obs, const Rotation& R_cv);

// Vertical-line residual: normal . column3(R_cv).
double e3_residual(const VerticalLineObservation& line, const Rotation& R_cv);

// Single-pair initialization: forward from the first Straight pair, up from
// the first Turning pair (or the vertical lines of one frame), followed by
// Gram-Schmidt re-orthonormalization with x = y x z.
std::vector<Rotation> initialize_extrinsics(const CalibrationProblem& problem);

// Joint optimization of {R_cv} and {R^v_i} over the combined objective
// E0 + l1*E1 + l2*E2 + l3*E3 with per-block Huber robustification.
CalibrationResult calibrate(const CalibrationProblem& problem);
CalibrationResult calibrate(const CalibrationProblem& problem,
                            const std::vector<Rotation>& init_R_cv);

// Camera-to-camera rotation as a by-product: R_c1v * R_c2v^T.
Rotation camera_to_camera(const Rotation& R_c1v, const Rotation& R_c2v);

}  // namespace surroundgeo::calib
