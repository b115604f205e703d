#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "robotr1/demo_io.hpp"
#include "robotr1/jsonl.hpp"
#include "robotr1/keypoints.hpp"
#include "robotr1/movement.hpp"
#include "robotr1/prompts.hpp"
#include "robotr1/rng.hpp"
#include "robotr1/state_format.hpp"
#include "robotr1/types.hpp"

namespace robotr1 {

struct GenConfig {
  int frame_interval = 10;
  int distractors_per_item = 3;
  double min_distractor_separation = 0.05;  // meters, L2
  double bounds_margin = 0.05;              // meters added around observed positions
  std::uint64_t seed = 0;

  void validate() const {
    if (frame_interval < 1) fail(ErrorKind::ConfigInvalid, "frame_interval must be >= 1");
    if (distractors_per_item < 1) fail(ErrorKind::ConfigInvalid, "distractors_per_item must be >= 1");
    if (min_distractor_separation < 0) {
      fail(ErrorKind::ConfigInvalid, "min_distractor_separation must be >= 0");
    }
    if (bounds_margin < 0) fail(ErrorKind::ConfigInvalid, "bounds_margin must be >= 0");
  }
};

struct McqaItem {
  std::string id;
  std::string task_id;
  QaType qa_type = QaType::waypoint;
  std::string image_ref;
  std::string prompt_text;
  std::array<std::string, 4> options;
  int answer_index = 0;  // 0..3
  Position3 truth_state;          // waypoint/state payload
  MovementLabel truth_movement;   // movement payload
  std::optional<Position3> current_state;  // absent for qa_type=state
  std::uint64_t seed = 0;

  char answer_letter() const { return static_cast<char>('A' + answer_index); }
};

enum class SftStyle { direct, cot };

inline std::string_view sft_style_name(SftStyle style) {
  return style == SftStyle::direct ? "direct" : "cot";
}

struct SftItem {
  std::string id;
  SftStyle style = SftStyle::direct;
  std::string image_ref;
  std::string prompt_text;
  std::string target_text;
};

/// Plan/subtask text for CoT targets, keyed by "{task_id}:{t}".
struct CotAnnotation {
  std::string plan;
  std::string subtask;
};
using AnnotationMap = std::map<std::string, CotAnnotation>;

inline constexpr int kDistractorAttemptCap = 1000;

/// n positions uniform in bounds, every pair (and the answer) separated by
/// at least min_sep in L2 and distinct from each other and the answer once
/// rendered at display precision. Rejection sampling, capped per slot.
inline std::vector<Position3> sample_state_distractors(std::uint64_t rng_seed, const Box3& bounds,
                                                       const Position3& answer, int n,
                                                       double min_sep) {
  if (!bounds.valid()) fail(ErrorKind::ConfigInvalid, "invalid sampling bounds");
  if (n < 1) fail(ErrorKind::ConfigInvalid, "distractor count must be >= 1");
  Rng rng(rng_seed);
  std::vector<Position3> picked;
  std::vector<std::string> rendered{format_state(answer)};
  picked.reserve(static_cast<std::size_t>(n));
  for (int slot = 0; slot < n; ++slot) {
    bool accepted = false;
    for (int attempt = 0; attempt < kDistractorAttemptCap; ++attempt) {
      Position3 candidate{rng.uniform(bounds.min.x, bounds.max.x),
                          rng.uniform(bounds.min.y, bounds.max.y),
                          rng.uniform(bounds.min.z, bounds.max.z)};
      bool ok = l2_distance(candidate, answer) >= min_sep;
      for (const Position3& other : picked) {
        ok = ok && l2_distance(candidate, other) >= min_sep;
      }
      std::string text = format_state(candidate);
      for (const std::string& other : rendered) {
        ok = ok && text != other;
      }
      if (ok) {
        picked.push_back(candidate);
        rendered.push_back(std::move(text));
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      fail(ErrorKind::SamplingExhausted,
           "no admissible distractor after " + std::to_string(kDistractorAttemptCap) + " attempts");
    }
  }
  return picked;
}

namespace detail {

inline std::string item_id(const Demonstration& demo, int t, std::string_view kind) {
  return demo.task_id + ":" + demo.episode_id + ":" + std::to_string(t) + ":" + std::string(kind);
}

/// Places the truth among the distractor renderings with a seeded uniform
/// shuffle and records where it landed.
inline void shuffle_options(Rng& rng, const std::string& truth,
                            const std::vector<std::string>& distractors,
                            std::array<std::string, 4>& options, int& answer_index) {
  std::vector<std::string> all{truth};
  all.insert(all.end(), distractors.begin(), distractors.end());
  rng.shuffle(all);
  answer_index = -1;
  for (int i = 0; i < 4; ++i) {
    options[static_cast<std::size_t>(i)] = all[static_cast<std::size_t>(i)];
    if (all[static_cast<std::size_t>(i)] == truth) answer_index = i;
  }
}

inline const EnvironmentMetadata& metadata_for(
    const std::map<std::string, EnvironmentMetadata>& meta_per_task, const std::string& task_id) {
  auto it = meta_per_task.find(task_id);
  if (it == meta_per_task.end()) {
    fail(ErrorKind::TemplateFieldMissing, "no environment metadata for task " + task_id);
  }
  return it->second;
}

}  // namespace detail

/// Emits one waypoint, one current-state and one movement question per
/// (demo, t) with t stepping by frame_interval from 0 while a later
/// keypoint exists. Bytes depend only on (inputs, cfg.seed).
inline std::vector<McqaItem> build_mcqa_dataset(
    const std::vector<Demonstration>& demos,
    const std::map<std::string, EnvironmentMetadata>& meta_per_task, const GenConfig& cfg) {
  cfg.validate();
  if (demos.empty()) fail(ErrorKind::EmptyInput, "no demonstrations");
  const Box3 bounds = workspace_bounds(demos, cfg.bounds_margin);

  std::vector<McqaItem> items;
  for (const Demonstration& demo : demos) {
    const EnvironmentMetadata& meta = detail::metadata_for(meta_per_task, demo.task_id);
    for (int t = 0; t < demo.frame_count(); t += cfg.frame_interval) {
      const std::optional<int> k = next_keypoint(demo.keypoints, t);
      if (!k) break;  // keypoints are sorted, later t cannot have one either
      const Position3& s_t = demo.position(t);
      const Position3& s_next = demo.position(*k);
      const std::string& image_ref = demo.frames[static_cast<std::size_t>(t)].image_ref;

      for (QaType type : {QaType::waypoint, QaType::state, QaType::movement}) {
        McqaItem item;
        item.task_id = demo.task_id;
        item.qa_type = type;
        item.image_ref = image_ref;
        item.id = detail::item_id(demo, t, qa_type_name(type));
        item.seed = mix_seed(cfg.seed, fnv1a64(item.id));

        std::string truth_text;
        std::vector<std::string> distractor_texts;
        if (type == QaType::movement) {
          item.truth_movement = movement_label(s_t, s_next);
          truth_text = movement_to_string(item.truth_movement);
          for (const MovementLabel& label :
               sample_movement_distractors(mix_seed(item.seed, 1), item.truth_movement,
                                           cfg.distractors_per_item)) {
            distractor_texts.push_back(movement_to_string(label));
          }
        } else {
          item.truth_state = type == QaType::waypoint ? s_next : s_t;
          truth_text = format_state(item.truth_state);
          for (const Position3& state :
               sample_state_distractors(mix_seed(item.seed, 1), bounds, item.truth_state,
                                        cfg.distractors_per_item,
                                        cfg.min_distractor_separation)) {
            distractor_texts.push_back(format_state(state));
          }
        }

        Rng shuffle_rng(mix_seed(item.seed, 2));
        detail::shuffle_options(shuffle_rng, truth_text, distractor_texts, item.options,
                                item.answer_index);

        switch (type) {
          case QaType::waypoint:
            item.current_state = s_t;
            item.prompt_text = render_waypoint_prompt(meta, s_t, item.options);
            break;
          case QaType::state:
            item.prompt_text = render_state_prompt(meta, item.options);
            break;
          case QaType::movement:
            item.current_state = s_t;
            item.prompt_text = render_movement_prompt(meta, s_t, item.options);
            break;
        }
        items.push_back(std::move(item));
      }
    }
  }
  return items;
}

/// Waypoint-prediction SFT items. Direct targets are the bare next-keypoint
/// state; CoT targets add plan/subtask lines from the annotation map and
/// the movement description.
inline std::vector<SftItem> build_sft_dataset(
    const std::vector<Demonstration>& demos,
    const std::map<std::string, EnvironmentMetadata>& meta_per_task, const GenConfig& cfg,
    SftStyle style, const AnnotationMap& annotations = {}) {
  cfg.validate();
  if (demos.empty()) fail(ErrorKind::EmptyInput, "no demonstrations");

  std::vector<SftItem> items;
  for (const Demonstration& demo : demos) {
    const EnvironmentMetadata& meta = detail::metadata_for(meta_per_task, demo.task_id);
    for (int t = 0; t < demo.frame_count(); t += cfg.frame_interval) {
      const std::optional<int> k = next_keypoint(demo.keypoints, t);
      if (!k) break;
      const Position3& s_t = demo.position(t);
      const Position3& s_next = demo.position(*k);

      SftItem item;
      item.style = style;
      item.image_ref = demo.frames[static_cast<std::size_t>(t)].image_ref;
      item.id = detail::item_id(demo, t, style == SftStyle::direct ? "sft_direct" : "sft_cot");
      item.prompt_text = render_sft_waypoint_prompt(meta, s_t);
      if (style == SftStyle::direct) {
        item.target_text = render_direct_target(s_next);
      } else {
        const std::string key = demo.task_id + ":" + std::to_string(t);
        auto note = annotations.find(key);
        if (note == annotations.end()) {
          fail(ErrorKind::MissingAnnotation, "no plan/subtask annotation for " + key);
        }
        item.target_text = render_cot_target(note->second.plan, note->second.subtask,
                                             movement_label(s_t, s_next), s_next);
      }
      items.push_back(std::move(item));
    }
  }
  return items;
}

// ---- JSON Lines serialization ----

inline Json mcqa_to_json(const McqaItem& item) {
  Json record;
  record["id"] = item.id;
  record["task_id"] = item.task_id;
  record["qa_type"] = std::string(qa_type_name(item.qa_type));
  record["image"] = item.image_ref;
  record["prompt"] = item.prompt_text;
  record["options"] = item.options;
  record["answer"] = std::string(1, item.answer_letter());
  if (item.qa_type == QaType::movement) {
    record["truth"] = item.truth_movement.commands;
  } else {
    record["truth"] = {item.truth_state.x, item.truth_state.y, item.truth_state.z};
  }
  if (item.current_state) {
    record["current_state"] = {item.current_state->x, item.current_state->y, item.current_state->z};
  }
  record["seed"] = item.seed;
  return record;
}

inline McqaItem mcqa_from_json(const Json& record) {
  McqaItem item;
  item.id = record.at("id").get<std::string>();
  item.task_id = record.at("task_id").get<std::string>();
  const std::string type = record.at("qa_type").get<std::string>();
  if (type == "waypoint") {
    item.qa_type = QaType::waypoint;
  } else if (type == "state") {
    item.qa_type = QaType::state;
  } else if (type == "movement") {
    item.qa_type = QaType::movement;
  } else {
    fail(ErrorKind::MalformedRecord, "unknown qa_type " + type);
  }
  item.image_ref = record.at("image").get<std::string>();
  item.prompt_text = record.at("prompt").get<std::string>();
  const auto& options = record.at("options");
  if (!options.is_array() || options.size() != 4) {
    fail(ErrorKind::MalformedRecord, "options must be an array of 4");
  }
  for (std::size_t i = 0; i < 4; ++i) item.options[i] = options[i].get<std::string>();
  const std::string answer = record.at("answer").get<std::string>();
  if (answer.size() != 1 || answer[0] < 'A' || answer[0] > 'D') {
    fail(ErrorKind::MalformedRecord, "answer must be A..D");
  }
  item.answer_index = answer[0] - 'A';
  if (item.qa_type == QaType::movement) {
    item.truth_movement.commands = record.at("truth").get<std::vector<std::string>>();
  } else {
    const auto& truth = record.at("truth");
    item.truth_state = {truth.at(0).get<double>(), truth.at(1).get<double>(),
                        truth.at(2).get<double>()};
  }
  if (record.contains("current_state")) {
    const auto& cs = record["current_state"];
    item.current_state = Position3{cs.at(0).get<double>(), cs.at(1).get<double>(),
                                   cs.at(2).get<double>()};
  }
  item.seed = record.at("seed").get<std::uint64_t>();
  return item;
}

inline Json sft_to_json(const SftItem& item) {
  Json record;
  record["id"] = item.id;
  record["style"] = std::string(sft_style_name(item.style));
  record["image"] = item.image_ref;
  record["prompt"] = item.prompt_text;
  record["target"] = item.target_text;
  return record;
}

inline AnnotationMap load_annotations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::MissingFile, "cannot open " + path.string());
  Json parsed = Json::parse(in, nullptr, false);
  if (parsed.is_discarded() || !parsed.is_object()) {
    fail(ErrorKind::MalformedRecord, path.string() + ": expected a JSON object");
  }
  AnnotationMap annotations;
  for (const auto& [key, value] : parsed.items()) {
    if (!value.is_object() || !value.contains("plan") || !value.contains("subtask")) {
      fail(ErrorKind::MalformedRecord, path.string() + ": entry '" + key +
                                           "' needs plan and subtask strings");
    }
    annotations[key] = {value["plan"].get<std::string>(), value["subtask"].get<std::string>()};
  }
  return annotations;
}

}  // namespace robotr1
