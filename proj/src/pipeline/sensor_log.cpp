// SPDX-License-Identifier: Apache-2.0
#include "usdrecon/pipeline/sensor_log.hpp"

#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "usdrecon/error.hpp"
#include "usdrecon/geometry/ply_io.hpp"

namespace usdrecon {

namespace {

using nlohmann::json;

json pose_to_json(const Pose& p) {
  const auto q = p.quat_xyzw();
  return {{"xyz", {p.translation.x(), p.translation.y(), p.translation.z()}},
          {"quat", {q[0], q[1], q[2], q[3]}}};
}

Pose pose_from_json(const json& j) {
  const auto xyz = j.at("xyz").get<std::vector<double>>();
  const auto quat = j.at("quat").get<std::vector<double>>();
  if (xyz.size() != 3 || quat.size() != 4) {
    throw Error(ErrorCode::kSchema, "pose needs xyz[3] and quat[4]");
  }
  return Pose::from_xyzw({xyz[0], xyz[1], xyz[2]}, {quat[0], quat[1], quat[2], quat[3]});
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string camera_to_json(const CameraModel& c) {
  json j = {{"fx", c.fx},         {"fy", c.fy},         {"cx", c.cx},
            {"cy", c.cy},         {"width", c.width},   {"height", c.height},
            {"extrinsic", pose_to_json(c.extrinsic)}};
  return j.dump(2);
}

CameraModel camera_from_json(std::string_view text) {
  try {
    const json j = json::parse(text.begin(), text.end());
    CameraModel c;
    c.fx = j.at("fx").get<double>();
    c.fy = j.at("fy").get<double>();
    c.cx = j.at("cx").get<double>();
    c.cy = j.at("cy").get<double>();
    c.width = j.at("width").get<int>();
    c.height = j.at("height").get<int>();
    if (j.contains("extrinsic")) c.extrinsic = pose_from_json(j.at("extrinsic"));
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("camera.json: ") + e.what());
  }
}

SensorLog read_sensor_log(const std::filesystem::path& dir) {
  SensorLog log;
  if (std::filesystem::exists(dir / "camera.json")) {
    log.camera = camera_from_json(read_text(dir / "camera.json"));
  }
  std::ifstream in(dir / "frames.jsonl");
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + (dir / "frames.jsonl").string());

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "frames.jsonl line " + std::to_string(line_no);
    SensorFrame frame;
    try {
      const json j = json::parse(line);
      frame.timestamp = j.at("t").get<double>();
      frame.robot_pose = pose_from_json(j.at("pose"));
      frame.cloud_path = j.at("cloud").get<std::string>();
      const std::size_t frame_id = log.frames.size();
      for (const json& d : j.value("detections", json::array())) {
        Detection det;
        det.frame_id = frame_id;
        det.label = d.at("label").get<std::string>();
        det.confidence = d.value("confidence", 1.0);
        for (const json& uv : d.at("mask")) {
          const auto p = uv.get<std::vector<double>>();
          if (p.size() != 2) throw Error(ErrorCode::kSchema, "mask vertices are [u, v]");
          det.mask.emplace_back(p[0], p[1]);
        }
        det.embedding = d.at("embedding").get<std::vector<double>>();
        frame.detections.push_back(std::move(det));
      }
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kSchema, where + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.code(), where + ": " + e.what());
    }
    if (!log.frames.empty() && !(frame.timestamp > log.frames.back().timestamp)) {
      throw Error(ErrorCode::kInvalidInput, where + ": timestamps must strictly increase");
    }
    frame.cloud = read_ply(dir / frame.cloud_path);
    log.frames.push_back(std::move(frame));
  }
  return log;
}

void write_sensor_log(const std::filesystem::path& dir, const SensorLog& log) {
  std::filesystem::create_directories(dir / "frames");
  {
    std::ofstream cam(dir / "camera.json");
    if (!cam) throw Error(ErrorCode::kIo, "cannot write camera.json in " + dir.string());
    cam << camera_to_json(log.camera) << "\n";
  }
  std::ofstream out(dir / "frames.jsonl");
  if (!out) throw Error(ErrorCode::kIo, "cannot write frames.jsonl in " + dir.string());
  for (std::size_t i = 0; i < log.frames.size(); ++i) {
    const SensorFrame& f = log.frames[i];
    std::string cloud_path = f.cloud_path;
    if (cloud_path.empty()) {
      char name[32];
      std::snprintf(name, sizeof(name), "frames/%06zu.ply", i);
      cloud_path = name;
    }
    write_ply(dir / cloud_path, f.cloud);
    json dets = json::array();
    for (const Detection& d : f.detections) {
      json mask = json::array();
      for (const Vec2& p : d.mask) mask.push_back({p.x(), p.y()});
      dets.push_back({{"label", d.label},
                      {"confidence", d.confidence},
                      {"mask", mask},
                      {"embedding", d.embedding}});
    }
    const json j = {{"t", f.timestamp},
                    {"pose", pose_to_json(f.robot_pose)},
                    {"cloud", cloud_path},
                    {"detections", dets}};
    out << j.dump() << "\n";
  }
}

}  // namespace usdrecon
