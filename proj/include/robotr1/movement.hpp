#pragma once

#include <array>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

#include "robotr1/error.hpp"
#include "robotr1/rng.hpp"
#include "robotr1/types.hpp"

namespace robotr1 {

/// Ordered directional commands, at most one per axis, axis order x, y, z.
/// Empty only for (near-)zero displacement.
struct MovementLabel {
  std::vector<std::string> commands;

  bool empty() const { return commands.empty(); }
  friend bool operator==(const MovementLabel& a, const MovementLabel& b) {
    return a.commands == b.commands;
  }
  friend bool operator!=(const MovementLabel& a, const MovementLabel& b) { return !(a == b); }
};

/// Displacements at or below this magnitude count as zero. Keeps float
/// noise from emitting spurious commands.
inline constexpr double kMovementDeadZone = 1e-4;

namespace detail {

// [axis][0]=positive direction, [axis][1]=negative direction.
inline constexpr const char* kAxisCommands[3][2] = {
    {"move forward", "move backward"},
    {"move right", "move left"},
    {"move up", "move down"},
};

}  // namespace detail

/// Rule-based label for the displacement s_next - s_t. Per axis with
/// |delta| above the dead zone, emit the directional command for its sign;
/// prefix "slightly " iff |delta| <= max_axis|delta| / 2 (ties inclusive).
inline MovementLabel movement_label(const Position3& s_t, const Position3& s_next,
                                    double dead_zone = kMovementDeadZone) {
  if (!s_t.finite() || !s_next.finite()) {
    fail(ErrorKind::InvalidInput, "movement_label requires finite states");
  }
  const Position3 delta = s_next - s_t;
  double largest = 0.0;
  for (int axis = 0; axis < 3; ++axis) largest = std::max(largest, std::abs(delta[axis]));

  MovementLabel label;
  for (int axis = 0; axis < 3; ++axis) {
    const double d = delta[axis];
    if (std::abs(d) <= dead_zone) continue;
    std::string command = detail::kAxisCommands[axis][d > 0 ? 0 : 1];
    if (std::abs(d) <= largest / 2.0) command.insert(0, "slightly ");
    label.commands.push_back(std::move(command));
  }
  return label;
}

/// Per-axis code: 0 none, 1 positive, 2 slightly positive, 3 negative,
/// 4 slightly negative. The all-zero code triple is the empty label.
inline MovementLabel movement_label_from_codes(const std::array<int, 3>& codes) {
  MovementLabel label;
  for (int axis = 0; axis < 3; ++axis) {
    const int code = codes[axis];
    if (code == 0) continue;
    std::string command = detail::kAxisCommands[axis][code >= 3 ? 1 : 0];
    if (code == 2 || code == 4) command.insert(0, "slightly ");
    label.commands.push_back(std::move(command));
  }
  return label;
}

/// All 5^3 - 1 = 124 non-empty labels, in fixed code order.
inline std::vector<MovementLabel> enumerate_movement_labels() {
  std::vector<MovementLabel> labels;
  labels.reserve(124);
  for (int cx = 0; cx < 5; ++cx) {
    for (int cy = 0; cy < 5; ++cy) {
      for (int cz = 0; cz < 5; ++cz) {
        if (cx == 0 && cy == 0 && cz == 0) continue;
        labels.push_back(movement_label_from_codes({cx, cy, cz}));
      }
    }
  }
  return labels;
}

/// Joins commands into the option/answer sentence fragment:
/// one command alone, two joined by "and", three in list form with a
/// serial comma. The empty label reads "no movement".
inline std::string movement_to_string(const MovementLabel& label) {
  const auto& c = label.commands;
  switch (c.size()) {
    case 0:
      return "no movement";
    case 1:
      return c[0];
    case 2:
      return c[0] + " and " + c[1];
    default:
      return c[0] + ", " + c[1] + ", and " + c[2];
  }
}

/// Inverse of movement_to_string; nullopt when the text is not a rendering
/// of any label.
inline std::optional<MovementLabel> parse_movement(const std::string& text) {
  if (text == "no movement") return MovementLabel{};
  std::vector<std::string> parts;
  std::string_view rest = text;
  if (auto comma = rest.find(", "); comma != std::string_view::npos) {
    parts.emplace_back(rest.substr(0, comma));
    rest.remove_prefix(comma + 2);
    comma = rest.find(", and ");
    if (comma == std::string_view::npos) return std::nullopt;
    parts.emplace_back(rest.substr(0, comma));
    parts.emplace_back(rest.substr(comma + 6));
  } else if (auto conj = rest.find(" and "); conj != std::string_view::npos) {
    parts.emplace_back(rest.substr(0, conj));
    parts.emplace_back(rest.substr(conj + 5));
  } else {
    parts.emplace_back(rest);
  }

  MovementLabel label;
  int last_axis = -1;
  for (const std::string& part : parts) {
    bool matched = false;
    for (int axis = 0; axis < 3 && !matched; ++axis) {
      for (int sign = 0; sign < 2 && !matched; ++sign) {
        const std::string plain = detail::kAxisCommands[axis][sign];
        if (part == plain || part == "slightly " + plain) {
          if (axis <= last_axis) return std::nullopt;  // axis order violated or duplicated
          last_axis = axis;
          label.commands.push_back(part);
          matched = true;
        }
      }
    }
    if (!matched) return std::nullopt;
  }
  return label;
}

/// n labels without replacement from the full label lattice minus truth.
inline std::vector<MovementLabel> sample_movement_distractors(std::uint64_t seed,
                                                              const MovementLabel& truth, int n) {
  if (n < 1) fail(ErrorKind::ConfigInvalid, "distractor count must be >= 1");
  std::vector<MovementLabel> pool = enumerate_movement_labels();
  std::erase(pool, truth);
  if (static_cast<std::size_t>(n) > pool.size()) {
    fail(ErrorKind::SamplingExhausted, "movement label space too small");
  }
  Rng rng(seed);
  std::vector<MovementLabel> picked;
  picked.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const std::size_t j = static_cast<std::size_t>(i) +
                          static_cast<std::size_t>(rng.uniform_int(
                              static_cast<std::uint64_t>(pool.size() - static_cast<std::size_t>(i))));
    std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
    picked.push_back(pool[static_cast<std::size_t>(i)]);
  }
  return picked;
}

}  // namespace robotr1
