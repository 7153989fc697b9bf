#include "surroundgeo/calib/io.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "surroundgeo/core/error.hpp"

namespace surroundgeo::calib {

using nlohmann::json;

namespace {

json rot_to_json(const Rotation& R) {
  json a = json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) a.push_back(R(r, c));
  return a;
}

Rotation rot_from_json(const json& a) {
  Rotation R;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) R(r, c) = a[3 * r + c].get<double>();
  return R;
}

}  // namespace

void save_problem(const CalibrationProblem& problem, const std::string& path) {
  json root;
  root["num_cameras"] = problem.num_cameras;
  root["num_frames"] = problem.num_frames;
  json pairs = json::array();
  for (const PairObservation& obs : problem.pairs) {
    json jp;
    jp["camera"] = obs.camera;
    jp["i"] = obs.frame_i;
    jp["j"] = obs.frame_j;
    jp["R"] = rot_to_json(obs.rotation_meas);
    jp["t_dir"] = {obs.t_dir_meas.x(), obs.t_dir_meas.y(), obs.t_dir_meas.z()};
    json bearings = json::array();
    for (const auto& bp : obs.bearings)
      bearings.push_back({bp.fi.x(), bp.fi.y(), bp.fi.z(), bp.fj.x(),
                          bp.fj.y(), bp.fj.z()});
    jp["bearings"] = bearings;
    pairs.push_back(jp);
  }
  root["pairs"] = pairs;
  json lines = json::array();
  for (const VerticalLineObservation& line : problem.lines)
    lines.push_back({{"camera", line.camera},
                     {"frame", line.frame},
                     {"normal", {line.normal.x(), line.normal.y(), line.normal.z()}}});
  root["lines"] = lines;
  json cfg;
  cfg["tau1"] = problem.config.tau1;
  cfg["tau2"] = problem.config.tau2;
  cfg["dynamic_weights"] = problem.config.dynamic_weights;
  cfg["lambda1"] = problem.config.lambda1;
  cfg["lambda2"] = problem.config.lambda2;
  cfg["lambda3"] = problem.config.lambda3;
  cfg["use_rotation_axis"] = problem.config.use_rotation_axis;
  cfg["use_vertical_lines"] = problem.config.use_vertical_lines;
  cfg["huber_mad_factor"] = problem.config.huber_mad_factor;
  cfg["max_iterations"] = problem.config.max_iterations;
  cfg["relative_decrease_tol"] = problem.config.relative_decrease_tol;
  cfg["up_prior_in_camera"] = {problem.config.up_prior_in_camera.x(),
                               problem.config.up_prior_in_camera.y(),
                               problem.config.up_prior_in_camera.z()};
  root["config"] = cfg;

  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write problem file " + path);
  out << root.dump() << "\n";
}

CalibrationProblem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open problem file " + path);
  json root;
  try {
    in >> root;
  } catch (const json::exception& e) {
    fail(ErrorCode::IoError, std::string("problem JSON parse failure: ") + e.what());
  }
  CalibrationProblem problem;
  try {
    problem.num_cameras = root.at("num_cameras").get<int>();
    problem.num_frames = root.at("num_frames").get<int>();
    for (const json& jp : root.at("pairs")) {
      PairObservation obs;
      obs.camera = jp.at("camera").get<int>();
      obs.frame_i = jp.at("i").get<int>();
      obs.frame_j = jp.at("j").get<int>();
      obs.rotation_meas = rot_from_json(jp.at("R"));
      obs.t_dir_meas = {jp.at("t_dir")[0].get<double>(),
                        jp.at("t_dir")[1].get<double>(),
                        jp.at("t_dir")[2].get<double>()};
      for (const json& jb : jp.at("bearings")) {
        pminit::BearingPair bp;
        bp.fi = Eigen::Vector3d(jb[0].get<double>(), jb[1].get<double>(),
                                jb[2].get<double>())
                    .normalized();
        bp.fj = Eigen::Vector3d(jb[3].get<double>(), jb[4].get<double>(),
                                jb[5].get<double>())
                    .normalized();
        obs.bearings.push_back(bp);
      }
      problem.pairs.push_back(std::move(obs));
    }
    for (const json& jl : root.at("lines")) {
      VerticalLineObservation line;
      line.camera = jl.at("camera").get<int>();
      line.frame = jl.at("frame").get<int>();
      line.normal = Eigen::Vector3d(jl.at("normal")[0].get<double>(),
                                    jl.at("normal")[1].get<double>(),
                                    jl.at("normal")[2].get<double>())
                        .normalized();
      problem.lines.push_back(line);
    }
    if (root.contains("config")) {
      const json& cfg = root.at("config");
      CalibrationConfig& c = problem.config;
      c.tau1 = cfg.value("tau1", c.tau1);
      c.tau2 = cfg.value("tau2", c.tau2);
      c.dynamic_weights = cfg.value("dynamic_weights", c.dynamic_weights);
      c.lambda1 = cfg.value("lambda1", c.lambda1);
      c.lambda2 = cfg.value("lambda2", c.lambda2);
      c.lambda3 = cfg.value("lambda3", c.lambda3);
      c.use_rotation_axis = cfg.value("use_rotation_axis", c.use_rotation_axis);
      c.use_vertical_lines =
          cfg.value("use_vertical_lines", c.use_vertical_lines);
      c.huber_mad_factor = cfg.value("huber_mad_factor", c.huber_mad_factor);
      c.max_iterations = cfg.value("max_iterations", c.max_iterations);
      c.relative_decrease_tol =
          cfg.value("relative_decrease_tol", c.relative_decrease_tol);
      if (cfg.contains("up_prior_in_camera"))
        c.up_prior_in_camera = {cfg["up_prior_in_camera"][0].get<double>(),
                                cfg["up_prior_in_camera"][1].get<double>(),
                                cfg["up_prior_in_camera"][2].get<double>()};
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::IoError, std::string("problem JSON missing field: ") + e.what());
  }
  return problem;
}

void save_convergence_log(const CalibrationResult& result,
                          const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) fail(ErrorCode::IoError, "cannot write " + path);
  std::fprintf(f, "iteration,E0,E1,E2,E3,total\n");
  for (const auto& row : result.convergence_log)
    std::fprintf(f, "%.0f,%.17g,%.17g,%.17g,%.17g,%.17g\n", row[0], row[1],
                 row[2], row[3], row[4], row[5]);
  std::fclose(f);
}

}  // namespace surroundgeo::calib
