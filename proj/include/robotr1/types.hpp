#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "robotr1/error.hpp"

namespace robotr1 {

/// Cartesian end-effector position in meters. This is the reduced robot
/// state used by every dataset and reward in the toolkit.
struct Position3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }

  double operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
  double& operator[](int axis) { return axis == 0 ? x : (axis == 1 ? y : z); }

  friend Position3 operator-(const Position3& a, const Position3& b) {
    return {a.x - b.x, a.y - b.y, a.z - b.z};
  }
  friend Position3 operator+(const Position3& a, const Position3& b) {
    return {a.x + b.x, a.y + b.y, a.z + b.z};
  }
  friend bool operator==(const Position3& a, const Position3& b) {
    return a.x == b.x && a.y == b.y && a.z == b.z;
  }
};

inline double l2_norm(const Position3& p) { return std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z); }

inline double l2_distance(const Position3& a, const Position3& b) { return l2_norm(a - b); }

inline double l1_distance(const Position3& a, const Position3& b) {
  return std::abs(a.x - b.x) + std::abs(a.y - b.y) + std::abs(a.z - b.z);
}

/// Full 7-D state: position (m), orientation (rad), binary gripper.
struct RobotState7 {
  Position3 position;
  std::array<double, 3> orientation_rpy{0.0, 0.0, 0.0};
  bool gripper_open = true;

  bool finite() const {
    return position.finite() && std::isfinite(orientation_rpy[0]) &&
           std::isfinite(orientation_rpy[1]) && std::isfinite(orientation_rpy[2]);
  }
};

struct Frame {
  int index = 0;
  std::string image_ref;  // opaque path, never decoded here
  RobotState7 state;
};

/// One expert demonstration: task label, ordered frames, extracted keypoints.
/// Keypoint indices are strictly increasing and empty until extraction runs.
struct Demonstration {
  std::string task_id;
  std::string episode_id;
  std::string instruction;
  int variation = 0;  // recorded verbatim from the archive, no semantics attached
  std::vector<Frame> frames;
  std::vector<int> keypoints;

  int frame_count() const { return static_cast<int>(frames.size()); }

  const Position3& position(int frame_index) const {
    return frames.at(static_cast<std::size_t>(frame_index)).state.position;
  }
};

/// Axis-aligned box, the valid state space distractors are drawn from.
struct Box3 {
  Position3 min;
  Position3 max;

  bool valid() const { return min.x <= max.x && min.y <= max.y && min.z <= max.z; }
  bool contains(const Position3& p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y && p.z >= min.z &&
           p.z <= max.z;
  }
};

/// Scene context rendered into every question prompt: coordinate
/// conventions, a world origin and a reference object for scale.
struct EnvironmentMetadata {
  Position3 world_origin;
  std::array<std::string, 3> axis_conventions;  // semantic direction of +x, +y, +z
  std::string reference_object_name;
  Position3 reference_object_dims;  // strictly positive
  std::map<std::string, Position3> reference_points;
  std::string task_description;

  void validate() const {
    if (reference_object_dims.x <= 0 || reference_object_dims.y <= 0 ||
        reference_object_dims.z <= 0) {
      fail(ErrorKind::InvalidInput, "reference object dimensions must be strictly positive");
    }
    for (const auto& axis : axis_conventions) {
      if (axis.empty()) fail(ErrorKind::InvalidInput, "axis conventions must be non-empty");
    }
  }
};

/// Table-top defaults matching the Franka / front-view convention used by
/// the stock prompt templates.
inline EnvironmentMetadata default_environment_metadata(std::string task_description) {
  EnvironmentMetadata meta;
  meta.world_origin = {0.25, 0.0, 0.752};
  meta.axis_conventions = {
      "Front of table (positive) to back of table (negative)",
      "Left (negative) to right (positive)",
      "Down toward floor (negative) to up toward ceiling (positive)",
  };
  meta.reference_object_name = "Gripper";
  meta.reference_object_dims = {0.06, 0.2, 0.09};
  meta.reference_points["table_center"] = meta.world_origin;
  meta.task_description = std::move(task_description);
  return meta;
}

}  // namespace robotr1
