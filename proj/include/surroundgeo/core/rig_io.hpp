#pragma once

#include <string>

#include "surroundgeo/core/camera.hpp"

namespace surroundgeo {

// Rig file: JSON array of cameras, each with focal, principal_point,
// image_size, R_cv (row-major 9 floats) and t_cv (3 floats, meters).
CameraRig load_rig(const std::string& path);
void save_rig(const CameraRig& rig, const std::string& path);

std::string rig_to_json(const CameraRig& rig);
CameraRig rig_from_json(const std::string& text);

}  // namespace surroundgeo
