#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "robotr1/error.hpp"
#include "robotr1/types.hpp"

namespace robotr1 {

struct KeypointParams {
  double speed_epsilon = 1e-3;  // meters/frame; must be > 0
  bool always_include_last = true;

  void validate() const {
    if (!(speed_epsilon > 0)) fail(ErrorKind::ConfigInvalid, "speed_epsilon must be > 0");
  }
};

/// Per-frame speed in meters/frame: central difference ||p[i+1]-p[i-1]||/2,
/// one-sided at both ends.
inline std::vector<double> frame_speeds(const Demonstration& demo) {
  const int n = demo.frame_count();
  if (n < 2) fail(ErrorKind::TooFewFrames, "speed profile needs at least 2 frames");
  std::vector<double> speeds(static_cast<std::size_t>(n));
  speeds[0] = l2_distance(demo.position(1), demo.position(0));
  speeds[static_cast<std::size_t>(n - 1)] = l2_distance(demo.position(n - 1), demo.position(n - 2));
  for (int i = 1; i < n - 1; ++i) {
    speeds[static_cast<std::size_t>(i)] = l2_distance(demo.position(i + 1), demo.position(i - 1)) / 2.0;
  }
  return speeds;
}

/// Frame i (i >= 1) is a keypoint iff the gripper flips relative to frame
/// i-1, or the speed profile has a sub-epsilon local minimum there. Equal
/// speeds form a plateau; a plateau is a minimum iff every neighbor outside
/// it is strictly greater, and only its earliest index is kept. Frame 0 is
/// never a keypoint. With always_include_last, frame N-1 always is.
inline std::vector<int> extract_keypoints(const Demonstration& demo,
                                          const KeypointParams& params = {}) {
  params.validate();
  const std::vector<double> speeds = frame_speeds(demo);
  const int n = demo.frame_count();

  std::vector<bool> keep(static_cast<std::size_t>(n), false);
  for (int i = 1; i < n; ++i) {
    if (demo.frames[static_cast<std::size_t>(i)].state.gripper_open !=
        demo.frames[static_cast<std::size_t>(i - 1)].state.gripper_open) {
      keep[static_cast<std::size_t>(i)] = true;
    }
  }

  int start = 0;
  while (start < n) {
    int end = start;  // plateau of equal speed [start, end]
    while (end + 1 < n && speeds[static_cast<std::size_t>(end + 1)] ==
                              speeds[static_cast<std::size_t>(start)]) {
      ++end;
    }
    const double v = speeds[static_cast<std::size_t>(start)];
    const bool left_ok = start == 0 || speeds[static_cast<std::size_t>(start - 1)] > v;
    const bool right_ok = end == n - 1 || speeds[static_cast<std::size_t>(end + 1)] > v;
    if (left_ok && right_ok && v < params.speed_epsilon && start >= 1) {
      keep[static_cast<std::size_t>(start)] = true;
    }
    start = end + 1;
  }

  if (params.always_include_last) keep[static_cast<std::size_t>(n - 1)] = true;

  std::vector<int> keypoints;
  for (int i = 1; i < n; ++i) {
    if (keep[static_cast<std::size_t>(i)]) keypoints.push_back(i);
  }
  return keypoints;
}

/// Smallest keypoint strictly greater than t, or nullopt when exhausted.
inline std::optional<int> next_keypoint(const std::vector<int>& keypoints, int t) {
  auto it = std::upper_bound(keypoints.begin(), keypoints.end(), t);
  if (it == keypoints.end()) return std::nullopt;
  return *it;
}

}  // namespace robotr1
