// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "usdrecon/registration/camera.hpp"

namespace usdrecon {

struct SensorFrame {
  double timestamp = 0.0;  ///< seconds
  Pose robot_pose;         ///< body in world, from odometry
  std::string cloud_path;  ///< relative to the log directory
  std::vector<Detection> detections;
  PointCloud cloud;        ///< world-frame LiDAR returns (loaded with the log)
};

/// A log directory holds camera.json, frames.jsonl (one frame per line) and
/// the per-frame world-frame PLY clouds.
struct SensorLog {
  CameraModel camera;
  std::vector<SensorFrame> frames;
};

/// Throws kSchema (with the line number) on malformed frames, kInvalidInput
/// when timestamps do not strictly increase, kIo on missing files.
SensorLog read_sensor_log(const std::filesystem::path& dir);
void write_sensor_log(const std::filesystem::path& dir, const SensorLog& log);

std::string camera_to_json(const CameraModel& camera);
CameraModel camera_from_json(std::string_view text);

}  // namespace usdrecon
