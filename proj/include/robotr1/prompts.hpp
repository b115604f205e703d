#pragma once

#include <array>
#include <string>

#include "robotr1/error.hpp"
#include "robotr1/movement.hpp"
#include "robotr1/state_format.hpp"
#include "robotr1/types.hpp"

namespace robotr1 {

enum class QaType { waypoint, state, movement };

inline std::string_view qa_type_name(QaType type) {
  switch (type) {
    case QaType::waypoint: return "waypoint";
    case QaType::state: return "state";
    case QaType::movement: return "movement";
  }
  return "waypoint";
}

namespace detail {

inline void require_field(bool present, const std::string& field) {
  if (!present) fail(ErrorKind::TemplateFieldMissing, "template field missing: " + field);
}

inline void require_options(const std::array<std::string, 4>& options) {
  for (const std::string& option : options) require_field(!option.empty(), "option");
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      if (options[static_cast<std::size_t>(i)] == options[static_cast<std::size_t>(j)]) {
        fail(ErrorKind::TemplateFieldMissing, "options must be pairwise distinct");
      }
    }
  }
}

inline std::string role_block(const EnvironmentMetadata& meta, bool robot_task_heading) {
  require_field(!meta.task_description.empty(), "task_description");
  std::string text = "# You are Franka Robot Assistant: Task Planning and Execution System\n\n";
  text += robot_task_heading ? "## Robot Task description\n" : "## Task description\n";
  text += meta.task_description + "\n\n";
  text +=
      "## Visual Input\n"
      "\n"
      "You will receive a single combined image for scene understanding:\n"
      "- <image>: front view of the workspace\n\n";
  return text;
}

/// The full coordinate block names the wrist-view caveat and the world
/// origin; the reduced one (movement questions) has neither.
inline std::string coordinate_block(const EnvironmentMetadata& meta, bool full) {
  meta.validate();
  std::string text =
      "## Coordinate System\n"
      "\n"
      "The world coordinate frame follows these conventions:\n";
  text += full ? "- This is based on the front view. (Wrist view has the Y-axis (left and right) opposite)\n"
               : "- This is based on the front view.\n";
  text += "- X-axis: " + meta.axis_conventions[0] + "\n";
  text += "- Y-axis: " + meta.axis_conventions[1] + "\n";
  text += "- Z-axis: " + meta.axis_conventions[2] + "\n";
  if (full) {
    text += "- World origin " + format_state_compact(meta.world_origin) +
            " is at the center of the table surface\n";
  }
  text += "\n";
  return text;
}

inline std::string robot_spec_block(const EnvironmentMetadata& meta) {
  const Position3& d = meta.reference_object_dims;
  return "## Robot Specifications\n- " + meta.reference_object_name + " dimensions: " +
         format_compact(d.x) + "m width (x-direction) × " + format_compact(d.y) +
         " length (y-direction) × " + format_compact(d.z) +
         " height (z-direction), with fingers 0.04 in length\n\n";
}

inline std::string current_state_block(const Position3& s_t) {
  return "## Current Robot State\nPosition: " + format_state(s_t) + "\n\n";
}

inline std::string option_block(const std::array<std::string, 4>& options) {
  return "[[A]] " + options[0] + "\n[[B]] " + options[1] + "\n[[C]] " + options[2] + "\n[[D]] " +
         options[3] + "\n\n";
}

inline std::string output_format_block() {
  return
      "## Output Format\n"
      "\n"
      "You FIRST think about the reasoning process as an internal monologue and then provide the final answer.\n"
      "The reasoning process MUST BE enclosed within <think> </think> tags.\n"
      "The final answer MUST BE enclosed within <answer> </answer> tags.\n"
      "\n"
      "Example output format:\n"
      "\n"
      "<think>\n"
      "[detailed reasoning process]\n"
      "</think>\n"
      "<answer>\n"
      "[[A]]\n"
      "</answer>";
}

}  // namespace detail

inline std::string render_waypoint_prompt(const EnvironmentMetadata& meta, const Position3& s_t,
                                          const std::array<std::string, 4>& options) {
  detail::require_options(options);
  std::string text = detail::role_block(meta, false);
  text += detail::coordinate_block(meta, true);
  text += detail::robot_spec_block(meta);
  text += detail::current_state_block(s_t);
  text +=
      "### Choice Question\n"
      "Based on the provided image and current robot state, predict the next waypoint position "
      "[x, y, z] Choose the most accurate option:\n\n";
  text += detail::option_block(options);
  text += detail::output_format_block();
  return text;
}

inline std::string render_state_prompt(const EnvironmentMetadata& meta,
                                       const std::array<std::string, 4>& options) {
  detail::require_options(options);
  std::string text = detail::role_block(meta, true);
  text += detail::coordinate_block(meta, true);
  text += detail::robot_spec_block(meta);
  text +=
      "### Choice Question\n"
      "Let's predict the current robot state base on image\n\n";
  text += detail::option_block(options);
  text += detail::output_format_block();
  return text;
}

inline std::string render_movement_prompt(const EnvironmentMetadata& meta, const Position3& s_t,
                                          const std::array<std::string, 4>& options) {
  detail::require_options(options);
  std::string text = detail::role_block(meta, false);
  text += detail::coordinate_block(meta, false);
  text += detail::current_state_block(s_t);
  text +=
      "### Choice Question\n"
      "What movements are needed to get to the next keypoint to perform the task?\n\n";
  text += detail::option_block(options);
  text += detail::output_format_block();
  return text;
}

/// Instruction-tuning prompt for waypoint prediction: same preamble as the
/// waypoint question but free-form, no options and no output-format rules.
inline std::string render_sft_waypoint_prompt(const EnvironmentMetadata& meta,
                                              const Position3& s_t) {
  std::string text = detail::role_block(meta, false);
  text += detail::coordinate_block(meta, true);
  text += detail::robot_spec_block(meta);
  text += detail::current_state_block(s_t);
  text += "Let's determine the next robot state to execute task";
  return text;
}

inline std::string render_sft_state_prompt(const EnvironmentMetadata& meta) {
  std::string text = detail::role_block(meta, false);
  text += detail::coordinate_block(meta, true);
  text += detail::robot_spec_block(meta);
  text += "Let's predict the current robot state base on image";
  return text;
}

inline std::string render_direct_target(const Position3& answer) { return format_state(answer); }

/// Four labeled reasoning lines ending in the waypoint answer. The Move
/// line gets a closing period; an empty movement reads "no movement".
inline std::string render_cot_target(const std::string& plan, const std::string& subtask,
                                     const MovementLabel& move, const Position3& answer) {
  detail::require_field(!plan.empty(), "plan");
  detail::require_field(!subtask.empty(), "subtask");
  return "Plan: " + plan + "\nSubtask: " + subtask + "\nMove: " + movement_to_string(move) +
         ".\nAnswer: " + format_state(answer);
}

}  // namespace robotr1
