#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "robotr1/error.hpp"
#include "robotr1/jsonl.hpp"
#include "robotr1/types.hpp"

namespace robotr1 {

namespace detail {

inline std::string frame_image_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06d.png", index);
  return buf;
}

inline Position3 parse_vec3(const Json& value, const std::string& where) {
  if (!value.is_array() || value.size() != 3) {
    fail(ErrorKind::MalformedRecord, where + ": expected an array of 3 numbers");
  }
  for (const auto& component : value) {
    if (!component.is_number()) {
      fail(ErrorKind::MalformedRecord, where + ": expected an array of 3 numbers");
    }
  }
  Position3 p{value[0].get<double>(), value[1].get<double>(), value[2].get<double>()};
  if (!p.finite()) fail(ErrorKind::MalformedRecord, where + ": non-finite value");
  return p;
}

}  // namespace detail

/// Loads one episode directory:
///   <root>/<task_id>/<episode_id>/meta.json
///   <root>/<task_id>/<episode_id>/states.jsonl
///   <root>/<task_id>/<episode_id>/frames/%06d.png
/// Frames come back sorted by index with keypoints left empty.
inline Demonstration load_demonstration(const std::filesystem::path& root,
                                        const std::string& task_id,
                                        const std::string& episode_id) {
  namespace fs = std::filesystem;
  const fs::path episode_dir = root / task_id / episode_id;
  const fs::path meta_path = episode_dir / "meta.json";
  const fs::path states_path = episode_dir / "states.jsonl";
  const fs::path frames_dir = episode_dir / "frames";

  std::ifstream meta_in(meta_path);
  if (!meta_in) fail(ErrorKind::MissingFile, "cannot open " + meta_path.string());
  Json meta = Json::parse(meta_in, nullptr, false);
  if (meta.is_discarded() || !meta.is_object()) {
    fail(ErrorKind::MalformedRecord, meta_path.string() + ": invalid JSON object");
  }
  for (const char* key : {"task_id", "instruction"}) {
    if (!meta.contains(key) || !meta[key].is_string()) {
      fail(ErrorKind::MalformedRecord, meta_path.string() + ": missing string key '" +
                                           std::string(key) + "'");
    }
  }

  Demonstration demo;
  demo.task_id = meta["task_id"].get<std::string>();
  demo.episode_id = episode_id;
  demo.instruction = meta["instruction"].get<std::string>();
  if (meta.contains("variation")) {
    if (!meta["variation"].is_number_integer()) {
      fail(ErrorKind::MalformedRecord, meta_path.string() + ": 'variation' must be an integer");
    }
    demo.variation = meta["variation"].get<int>();
  }

  std::ifstream states_in(states_path);
  if (!states_in) fail(ErrorKind::MissingFile, "cannot open " + states_path.string());
  std::string line;
  int line_number = 0;
  while (std::getline(states_in, line)) {
    ++line_number;
    if (line.empty()) continue;
    const std::string where = states_path.string() + ":" + std::to_string(line_number);
    Json record = Json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object()) {
      fail(ErrorKind::MalformedRecord, where + ": invalid JSON object");
    }
    for (const char* key : {"i", "pos", "rpy", "gripper_open"}) {
      if (!record.contains(key)) {
        fail(ErrorKind::MalformedRecord, where + ": missing key '" + std::string(key) + "'");
      }
    }
    if (!record["i"].is_number_integer() || !record["gripper_open"].is_boolean()) {
      fail(ErrorKind::MalformedRecord, where + ": bad field types");
    }
    Frame frame;
    frame.index = record["i"].get<int>();
    frame.state.position = detail::parse_vec3(record["pos"], where + " pos");
    const Position3 rpy = detail::parse_vec3(record["rpy"], where + " rpy");
    frame.state.orientation_rpy = {rpy.x, rpy.y, rpy.z};
    frame.state.gripper_open = record["gripper_open"].get<bool>();
    demo.frames.push_back(std::move(frame));
  }

  std::sort(demo.frames.begin(), demo.frames.end(),
            [](const Frame& a, const Frame& b) { return a.index < b.index; });
  for (std::size_t i = 0; i < demo.frames.size(); ++i) {
    if (demo.frames[i].index != static_cast<int>(i)) {
      fail(ErrorKind::MalformedRecord,
           states_path.string() + ": frame indices must be 0..N-1 contiguous");
    }
    demo.frames[i].image_ref = (frames_dir / detail::frame_image_name(static_cast<int>(i))).string();
  }
  if (demo.frames.size() < 2) {
    fail(ErrorKind::TooFewFrames, episode_dir.string() + ": need at least 2 frames");
  }

  std::size_t image_count = 0;
  if (fs::is_directory(frames_dir)) {
    for (const auto& entry : fs::directory_iterator(frames_dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".png") ++image_count;
    }
  }
  if (image_count != demo.frames.size()) {
    fail(ErrorKind::FrameCountMismatch,
         episode_dir.string() + ": " + std::to_string(demo.frames.size()) + " states vs " +
             std::to_string(image_count) + " images");
  }
  for (const Frame& frame : demo.frames) {
    if (!fs::is_regular_file(frame.image_ref)) {
      fail(ErrorKind::FrameCountMismatch, "missing image " + frame.image_ref);
    }
  }
  return demo;
}

/// Lists <task_id>/<episode_id> pairs under a dataset root, sorted so that
/// ingestion order never depends on directory enumeration order.
inline std::vector<std::pair<std::string, std::string>> list_episodes(
    const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) fail(ErrorKind::MissingFile, "not a directory: " + root.string());
  std::vector<std::pair<std::string, std::string>> episodes;
  for (const auto& task_entry : fs::directory_iterator(root)) {
    if (!task_entry.is_directory()) continue;
    for (const auto& episode_entry : fs::directory_iterator(task_entry.path())) {
      if (!episode_entry.is_directory()) continue;
      if (!fs::exists(episode_entry.path() / "meta.json")) continue;
      episodes.emplace_back(task_entry.path().filename().string(),
                            episode_entry.path().filename().string());
    }
  }
  std::sort(episodes.begin(), episodes.end());
  return episodes;
}

/// Component-wise min/max over every frame position, expanded by `margin`
/// on each side. This box is the distractor sampling region.
inline Box3 workspace_bounds(const std::vector<Demonstration>& demos, double margin) {
  if (margin < 0) fail(ErrorKind::ConfigInvalid, "margin must be >= 0");
  Box3 box;
  bool any = false;
  for (const Demonstration& demo : demos) {
    for (const Frame& frame : demo.frames) {
      const Position3& p = frame.state.position;
      if (!any) {
        box.min = box.max = p;
        any = true;
        continue;
      }
      for (int axis = 0; axis < 3; ++axis) {
        box.min[axis] = std::min(box.min[axis], p[axis]);
        box.max[axis] = std::max(box.max[axis], p[axis]);
      }
    }
  }
  if (!any) fail(ErrorKind::EmptyInput, "workspace_bounds needs at least one frame");
  for (int axis = 0; axis < 3; ++axis) {
    box.min[axis] -= margin;
    box.max[axis] += margin;
  }
  return box;
}

/// keypoints.json sits beside states.jsonl and holds a sorted index array.
inline void save_keypoints(const std::filesystem::path& episode_dir,
                           const std::vector<int>& keypoints) {
  std::ofstream out(episode_dir / "keypoints.json", std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::MissingFile, "cannot write keypoints.json in " + episode_dir.string());
  out << Json(keypoints).dump() << "\n";
}

inline std::vector<int> load_keypoints(const std::filesystem::path& episode_dir) {
  const std::filesystem::path path = episode_dir / "keypoints.json";
  std::ifstream in(path);
  if (!in) fail(ErrorKind::MissingFile, "cannot open " + path.string());
  Json parsed = Json::parse(in, nullptr, false);
  if (parsed.is_discarded() || !parsed.is_array()) {
    fail(ErrorKind::MalformedRecord, path.string() + ": expected a JSON array of integers");
  }
  std::vector<int> keypoints;
  for (const auto& value : parsed) {
    if (!value.is_number_integer()) {
      fail(ErrorKind::MalformedRecord, path.string() + ": expected a JSON array of integers");
    }
    keypoints.push_back(value.get<int>());
  }
  if (!std::is_sorted(keypoints.begin(), keypoints.end())) {
    fail(ErrorKind::MalformedRecord, path.string() + ": keypoints must be sorted");
  }
  return keypoints;
}

}  // namespace robotr1
