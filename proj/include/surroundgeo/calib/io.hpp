#pragma once

#include <string>

#include "surroundgeo/calib/types.hpp"

namespace surroundgeo::calib {

// Problem file: JSON {num_cameras, num_frames, pairs: [...], lines: [...],
// config: {...}}.
void save_problem(const CalibrationProblem& problem, const std::string& path);
CalibrationProblem load_problem(const std::string& path);

// Convergence log: CSV rows (iteration, E0, E1, E2, E3, total).
void save_convergence_log(const CalibrationResult& result,
                          const std::string& path);

}  // namespace surroundgeo::calib
