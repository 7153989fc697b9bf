#include "surroundgeo/core/rig_io.hpp"

#include <fstream>

#include <json.hpp>

namespace surroundgeo {

using nlohmann::json;

namespace {

json matrix_to_json(const Eigen::Matrix3d& R) {
  json a = json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) a.push_back(R(r, c));
  return a;
}

Eigen::Matrix3d matrix_from_json(const json& a) {
  if (!a.is_array() || a.size() != 9)
    fail(ErrorCode::IoError, "R_cv must hold 9 row-major floats");
  Eigen::Matrix3d R;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) R(r, c) = a[3 * r + c].get<double>();
  return R;
}

}  // namespace

std::string rig_to_json(const CameraRig& rig) {
  json root;
  root["cameras"] = json::array();
  for (const RigCamera& cam : rig.cameras) {
    json c;
    c["focal"] = {cam.model.focal.x(), cam.model.focal.y()};
    c["principal_point"] = {cam.model.principal.x(), cam.model.principal.y()};
    c["image_size"] = {cam.model.image_size.x(), cam.model.image_size.y()};
    c["R_cv"] = matrix_to_json(cam.R_cv);
    c["t_cv"] = {cam.t_cv.x(), cam.t_cv.y(), cam.t_cv.z()};
    root["cameras"].push_back(c);
  }
  return root.dump(2);
}

CameraRig rig_from_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::IoError, std::string("rig JSON parse failure: ") + e.what());
  }
  CameraRig rig;
  try {
    for (const json& c : root.at("cameras")) {
      RigCamera cam;
      cam.model.focal = {c.at("focal")[0].get<double>(),
                         c.at("focal")[1].get<double>()};
      cam.model.principal = {c.at("principal_point")[0].get<double>(),
                             c.at("principal_point")[1].get<double>()};
      cam.model.image_size = {c.at("image_size")[0].get<double>(),
                              c.at("image_size")[1].get<double>()};
      cam.R_cv = matrix_from_json(c.at("R_cv"));
      cam.t_cv = {c.at("t_cv")[0].get<double>(), c.at("t_cv")[1].get<double>(),
                  c.at("t_cv")[2].get<double>()};
      rig.cameras.push_back(cam);
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::IoError, std::string("rig JSON missing field: ") + e.what());
  }
  validate_rig(rig);
  return rig;
}

CameraRig load_rig(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open rig file " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return rig_from_json(text);
}

void save_rig(const CameraRig& rig, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write rig file " + path);
  out << rig_to_json(rig) << "\n";
}

}  // namespace surroundgeo
