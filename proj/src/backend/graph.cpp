#include "surroundgeo/backend/graph.hpp"

#include <fstream>

#include <json.hpp>

#include "surroundgeo/core/error.hpp"
#include "surroundgeo/core/rig_io.hpp"

namespace surroundgeo::backend {

using nlohmann::json;

void ObservationGraph::validate() const {
  validate_rig(rig);
  std::vector<int> obs_count(landmarks.size(), 0);
  for (const Measurement& m : measurements) {
    if (m.camera < 0 || m.camera >= rig.size())
      fail(ErrorCode::DomainError, "measurement references missing camera");
    if (m.frame < 0 || m.frame >= static_cast<int>(frames.size()))
      fail(ErrorCode::DomainError, "measurement references missing frame");
    if (m.landmark < 0 || m.landmark >= static_cast<int>(landmarks.size()))
      fail(ErrorCode::DomainError, "measurement references missing landmark");
    ++obs_count[m.landmark];
  }
  for (size_t k = 0; k < obs_count.size(); ++k)
    if (obs_count[k] < 2)
      fail(ErrorCode::DomainError,
           "landmark " + std::to_string(k) + " observed fewer than 2 times");
}

namespace {

json pose_to_json(const Pose& p) {
  json j;
  std::vector<double> R;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) R.push_back(p.R(r, c));
  j["R"] = R;
  j["p"] = {p.t.x(), p.t.y(), p.t.z()};
  return j;
}

Pose pose_from_json(const json& j) {
  Pose p;
  const auto& R = j.at("R");
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) p.R(r, c) = R[3 * r + c].get<double>();
  p.t = {j.at("p")[0].get<double>(), j.at("p")[1].get<double>(),
         j.at("p")[2].get<double>()};
  return p;
}

}  // namespace

void save_graph(const ObservationGraph& graph, const std::string& path) {
  json root;
  root["rig"] = json::parse(rig_to_json(graph.rig));
  root["frames"] = json::array();
  for (const Frame& f : graph.frames) {
    json jf = pose_to_json(f.pose);
    jf["t"] = f.t;
    jf["motion_sign"] = f.motion_sign;
    root["frames"].push_back(jf);
  }
  root["landmarks"] = json::array();
  for (const auto& x : graph.landmarks)
    root["landmarks"].push_back({x.x(), x.y(), x.z()});
  root["measurements"] = json::array();
  for (const Measurement& m : graph.measurements)
    root["measurements"].push_back(
        {m.camera, m.landmark, m.frame, m.pixel.x(), m.pixel.y()});
  root["gps"] = json::array();
  for (const GpsFix& g : graph.gps)
    root["gps"].push_back(
        {g.t, g.position.x(), g.position.y(), g.position.z(), g.sigma});

  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write graph file " + path);
  out << root.dump() << "\n";
}

ObservationGraph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open graph file " + path);
  json root;
  try {
    in >> root;
  } catch (const json::exception& e) {
    fail(ErrorCode::IoError, std::string("graph JSON parse failure: ") + e.what());
  }

  ObservationGraph graph;
  try {
    graph.rig = rig_from_json(root.at("rig").dump());
    for (const json& jf : root.at("frames")) {
      Frame f;
      f.pose = pose_from_json(jf);
      f.t = jf.at("t").get<double>();
      f.motion_sign = jf.value("motion_sign", 1);
      graph.frames.push_back(f);
    }
    for (const json& jx : root.at("landmarks"))
      graph.landmarks.push_back(
          {jx[0].get<double>(), jx[1].get<double>(), jx[2].get<double>()});
    for (const json& jm : root.at("measurements")) {
      Measurement m;
      m.camera = jm[0].get<int>();
      m.landmark = jm[1].get<int>();
      m.frame = jm[2].get<int>();
      m.pixel = {jm[3].get<double>(), jm[4].get<double>()};
      graph.measurements.push_back(m);
    }
    if (root.contains("gps")) {
      for (const json& jg : root.at("gps")) {
        GpsFix g;
        g.t = jg[0].get<double>();
        g.position = {jg[1].get<double>(), jg[2].get<double>(),
                      jg[3].get<double>()};
        g.sigma = jg[4].get<double>();
        graph.gps.push_back(g);
      }
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::IoError, std::string("graph JSON missing field: ") + e.what());
  }
  graph.validate();
  return graph;
}

}  // namespace surroundgeo::backend
