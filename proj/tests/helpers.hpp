#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>

#include "robotr1/demo_io.hpp"
#include "robotr1/jsonl.hpp"
#include "robotr1/types.hpp"

namespace testutil {

/// Unique scratch directory, removed on scope exit.
class TempDir {
 public:
  TempDir() {
    static std::atomic<unsigned> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("robotr1-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// 30 frames of steady linear motion with one gripper flip at frame 12.
/// Speeds stay far above the keypoint epsilon, so the extracted keypoints
/// are exactly {12, 29}.
inline robotr1::Demonstration thirty_frame_demo() {
  robotr1::Demonstration demo;
  demo.task_id = "push_button";
  demo.episode_id = "episode0";
  demo.instruction = "push the red button";
  demo.frames.reserve(30);
  for (int i = 0; i < 30; ++i) {
    robotr1::Frame frame;
    frame.index = i;
    frame.state.position = {0.10 + 0.010 * i, -0.050 + 0.005 * i, 0.800 + 0.002 * i};
    frame.state.orientation_rpy = {0.0, 0.0, 3.1};
    frame.state.gripper_open = i < 12;
    demo.frames.push_back(frame);
  }
  return demo;
}

/// 6 frames, no gripper flips, steady motion: the only keypoint is the
/// forced last frame, {5}.
inline robotr1::Demonstration six_frame_demo() {
  robotr1::Demonstration demo;
  demo.task_id = "close_drawer";
  demo.episode_id = "episode0";
  demo.instruction = "close the drawer";
  demo.frames.reserve(6);
  for (int i = 0; i < 6; ++i) {
    robotr1::Frame frame;
    frame.index = i;
    frame.state.position = {0.20 + 0.010 * i, 0.050, 0.900};
    frame.state.orientation_rpy = {0.0, 0.0, 0.0};
    frame.state.gripper_open = false;
    demo.frames.push_back(frame);
  }
  return demo;
}

/// Writes the on-disk episode layout the loader expects. Frame images are
/// stub PNGs (signature bytes only); nothing ever decodes them.
inline void write_demo_archive(const std::filesystem::path& root,
                               const robotr1::Demonstration& demo) {
  namespace fs = std::filesystem;
  const fs::path dir = root / demo.task_id / demo.episode_id;
  fs::create_directories(dir / "frames");

  robotr1::Json meta;
  meta["task_id"] = demo.task_id;
  meta["instruction"] = demo.instruction;
  meta["variation"] = demo.variation;
  std::ofstream meta_out(dir / "meta.json", std::ios::binary);
  meta_out << meta.dump(2) << "\n";

  std::ofstream states_out(dir / "states.jsonl", std::ios::binary);
  for (const robotr1::Frame& frame : demo.frames) {
    robotr1::Json record;
    record["i"] = frame.index;
    record["pos"] = robotr1::Json::array(
        {frame.state.position.x, frame.state.position.y, frame.state.position.z});
    record["rpy"] = robotr1::Json::array({frame.state.orientation_rpy[0],
                                          frame.state.orientation_rpy[1],
                                          frame.state.orientation_rpy[2]});
    record["gripper_open"] = frame.state.gripper_open;
    states_out << record.dump() << "\n";
  }

  static constexpr unsigned char kPngSignature[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
  for (std::size_t i = 0; i < demo.frames.size(); ++i) {
    std::ofstream png(dir / "frames" / robotr1::detail::frame_image_name(static_cast<int>(i)),
                      std::ios::binary);
    png.write(reinterpret_cast<const char*>(kPngSignature), sizeof(kPngSignature));
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return text;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

}  // namespace testutil
