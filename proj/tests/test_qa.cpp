#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <string>
#include <vector>

#include "robotr1/movement.hpp"
#include "robotr1/prompts.hpp"
#include "robotr1/qa_gen.hpp"
#include "robotr1/rewards.hpp"
#include "robotr1/rng.hpp"

#include "helpers.hpp"
#include "oracles.hpp"

using namespace robotr1;

namespace {

EnvironmentMetadata test_meta() { return default_environment_metadata("push the red button"); }

const std::array<std::string, 4> kOptions{"first option", "second option", "third option",
                                          "fourth option"};

}  // namespace

// ---- movement labeling ----

TEST_CASE("movement_label worked examples") {
  const Position3 origin{0.0, 0.0, 0.0};
  CHECK(movement_label(origin, {0.1, 0.0, -0.2}).commands ==
        std::vector<std::string>{"slightly move forward", "move down"});
  CHECK(movement_label(origin, {-0.3, 0.05, 0.0}).commands ==
        std::vector<std::string>{"move backward", "slightly move right"});
  CHECK(movement_label(origin, origin).commands.empty());
  CHECK(movement_to_string(movement_label(origin, origin)) == "no movement");
}

TEST_CASE("movement_label dead zone is strict") {
  const Position3 origin{0.0, 0.0, 0.0};
  CHECK(movement_label(origin, {1e-4, 0.0, 0.0}).empty());
  CHECK(movement_label(origin, {1.01e-4, 0.0, 0.0}).commands ==
        std::vector<std::string>{"move forward"});
  CHECK(movement_label(origin, {0.05, 0.0, 0.0}, 0.1).empty());
  CHECK_THROWS_AS(movement_label(origin, {std::nan(""), 0.0, 0.0}), Error);
}

TEST_CASE("slightly splits at half the largest axis, ties slight") {
  const Position3 origin{0.0, 0.0, 0.0};
  CHECK(movement_label(origin, {0.1, 0.05, 0.0}).commands ==
        std::vector<std::string>{"move forward", "slightly move right"});
  CHECK(movement_label(origin, {0.1, 0.0501, 0.0}).commands ==
        std::vector<std::string>{"move forward", "move right"});
  // a single active axis is never "slightly": |d| > |d|/2
  CHECK(movement_label(origin, {0.0, 0.0, 0.001}).commands ==
        std::vector<std::string>{"move up"});
}

TEST_CASE("label lattice enumerates 124 distinct renderings") {
  const std::vector<MovementLabel> labels = enumerate_movement_labels();
  REQUIRE(labels.size() == 124);
  std::set<std::string> renderings;
  for (const MovementLabel& label : labels) {
    CHECK_FALSE(label.empty());
    renderings.insert(movement_to_string(label));
  }
  CHECK(renderings.size() == 124);
}

TEST_CASE("movement strings join with and / serial comma") {
  CHECK(movement_to_string(movement_label_from_codes({1, 0, 0})) == "move forward");
  CHECK(movement_to_string(movement_label_from_codes({1, 3, 0})) ==
        "move forward and move left");
  CHECK(movement_to_string(movement_label_from_codes({2, 1, 4})) ==
        "slightly move forward, move right, and slightly move down");
  CHECK(movement_to_string(movement_label_from_codes({0, 0, 0})) == "no movement");
}

TEST_CASE("parse_movement inverts movement_to_string everywhere") {
  for (const MovementLabel& label : enumerate_movement_labels()) {
    const auto parsed = parse_movement(movement_to_string(label));
    REQUIRE(parsed.has_value());
    CHECK(*parsed == label);
  }
  const auto none = parse_movement("no movement");
  REQUIRE(none.has_value());
  CHECK(none->empty());
}

TEST_CASE("parse_movement rejects non-renderings") {
  CHECK_FALSE(parse_movement("move sideways").has_value());
  CHECK_FALSE(parse_movement("move up and move forward").has_value());    // axis order
  CHECK_FALSE(parse_movement("move forward and move backward").has_value());  // same axis twice
  CHECK_FALSE(parse_movement("move forward, move right").has_value());    // bad join
  CHECK_FALSE(parse_movement("slightly").has_value());
  CHECK_FALSE(parse_movement("").has_value());
  CHECK_FALSE(parse_movement("Move forward").has_value());  // case-sensitive
}

TEST_CASE("movement distractors exclude the truth and repeat per seed") {
  const MovementLabel truth = movement_label_from_codes({1, 0, 0});
  const auto a = sample_movement_distractors(99, truth, 3);
  const auto b = sample_movement_distractors(99, truth, 3);
  const auto c = sample_movement_distractors(100, truth, 3);
  REQUIRE(a.size() == 3);
  CHECK(a == b);
  CHECK(a != c);
  std::set<std::string> unique;
  for (const MovementLabel& label : a) {
    CHECK(label != truth);
    unique.insert(movement_to_string(label));
  }
  CHECK(unique.size() == 3);

  CHECK_NOTHROW(sample_movement_distractors(1, truth, 123));
  CHECK_THROWS_AS(sample_movement_distractors(1, truth, 124), Error);
}

TEST_CASE("movement_label agrees with the brute-force oracle") {
  Rng rng(77001);
  for (int trial = 0; trial < 2000; ++trial) {
    const Position3 a{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(0.5, 1.5)};
    // mix of large moves, near-ties, and sub-dead-zone jitter
    const double scale = trial % 3 == 0 ? 5e-5 : (trial % 3 == 1 ? 0.01 : 0.3);
    const Position3 b{a.x + scale * rng.uniform(-1, 1), a.y + scale * rng.uniform(-1, 1),
                      a.z + scale * rng.uniform(-1, 1)};
    CHECK(movement_label(a, b).commands == oracle::movement_commands(a, b, kMovementDeadZone));
  }
}

// ---- prompt templates ----

TEST_CASE("waypoint prompt carries every standing anchor line") {
  const std::string prompt =
      render_waypoint_prompt(test_meta(), {0.2651234, -0.11191, 1.15402}, kOptions);
  for (const char* anchor : {
           "# You are Franka Robot Assistant: Task Planning and Execution System",
           "## Task description\npush the red button",
           "You will receive a single combined image for scene understanding:",
           "- <image>: front view of the workspace",
           "## Coordinate System",
           "- This is based on the front view. (Wrist view has the Y-axis (left and right) "
           "opposite)",
           "- X-axis: Front of table (positive) to back of table (negative)",
           "- Y-axis: Left (negative) to right (positive)",
           "- World origin [0.25, 0, 0.752] is at the center of the table surface",
           "## Robot Specifications",
           "Gripper dimensions: 0.06m width (x-direction)",
           "with fingers 0.04 in length",
           "## Current Robot State\nPosition: [0.265, -0.112, 1.154]",
           "### Choice Question",
           "predict the next waypoint position [x, y, z] Choose the most accurate option:",
           "[[A]] first option\n[[B]] second option\n[[C]] third option\n[[D]] fourth option",
           "## Output Format",
           "You FIRST think about the reasoning process as an internal monologue and then "
           "provide the final answer.",
           "The reasoning process MUST BE enclosed within <think> </think> tags.",
           "The final answer MUST BE enclosed within <answer> </answer> tags.",
           "<think>\n[detailed reasoning process]\n</think>\n<answer>\n[[A]]\n</answer>",
       }) {
    INFO(anchor);
    CHECK(prompt.find(anchor) != std::string::npos);
  }
  CHECK(prompt.rfind("</answer>") == prompt.size() - 9);
}

TEST_CASE("state prompt asks for the current state without revealing it") {
  const std::string prompt = render_state_prompt(test_meta(), kOptions);
  CHECK(prompt.find("## Robot Task description") != std::string::npos);
  CHECK(prompt.find("Let's predict the current robot state base on image") != std::string::npos);
  CHECK(prompt.find("## Current Robot State") == std::string::npos);
  CHECK(prompt.find("World origin [0.25, 0, 0.752]") != std::string::npos);
}

TEST_CASE("movement prompt uses the reduced coordinate block") {
  const std::string prompt = render_movement_prompt(test_meta(), {0.2, 0.0, 0.9}, kOptions);
  CHECK(prompt.find("What movements are needed to get to the next keypoint to perform the "
                    "task?") != std::string::npos);
  CHECK(prompt.find("- This is based on the front view.\n- X-axis:") != std::string::npos);
  CHECK(prompt.find("Wrist view") == std::string::npos);
  CHECK(prompt.find("World origin") == std::string::npos);
  CHECK(prompt.find("## Robot Specifications") == std::string::npos);
  CHECK(prompt.find("## Current Robot State\nPosition: [0.200, 0.000, 0.900]") !=
        std::string::npos);
}

TEST_CASE("prompt rendering validates its inputs") {
  EnvironmentMetadata meta = test_meta();
  std::array<std::string, 4> duplicated{"a", "b", "a", "d"};
  CHECK_THROWS_AS(render_waypoint_prompt(meta, {0, 0, 0}, duplicated), Error);
  std::array<std::string, 4> with_empty{"a", "b", "", "d"};
  CHECK_THROWS_AS(render_waypoint_prompt(meta, {0, 0, 0}, with_empty), Error);

  meta.task_description.clear();
  CHECK_THROWS_AS(render_waypoint_prompt(meta, {0, 0, 0}, kOptions), Error);

  EnvironmentMetadata bad_dims = test_meta();
  bad_dims.reference_object_dims = {0.0, 0.2, 0.09};
  CHECK_THROWS_AS(bad_dims.validate(), Error);
}

TEST_CASE("sft prompts are free-form") {
  const std::string waypoint = render_sft_waypoint_prompt(test_meta(), {0.2, 0.0, 0.9});
  CHECK(waypoint.rfind("Let's determine the next robot state to execute task") ==
        waypoint.size() - std::string("Let's determine the next robot state to execute task").size());
  CHECK(waypoint.find("[[A]]") == std::string::npos);
  CHECK(waypoint.find("## Output Format") == std::string::npos);
  CHECK(waypoint.find("## Current Robot State\nPosition: [0.200, 0.000, 0.900]") !=
        std::string::npos);

  const std::string state = render_sft_state_prompt(test_meta());
  CHECK(state.rfind("Let's predict the current robot state base on image") ==
        state.size() - std::string("Let's predict the current robot state base on image").size());
  CHECK(state.find("## Current Robot State") == std::string::npos);
}

TEST_CASE("targets render exactly") {
  CHECK(render_direct_target({0.2651234, -0.11191, 1.15402}) == "[0.265, -0.112, 1.154]");

  const MovementLabel move = movement_label({0.0, 0.0, 0.0}, {0.1, 0.0, -0.2});
  CHECK(render_cot_target("grab the handle then pull", "reach the handle", move,
                          {0.31, -0.02, 0.9}) ==
        "Plan: grab the handle then pull\n"
        "Subtask: reach the handle\n"
        "Move: slightly move forward and move down.\n"
        "Answer: [0.310, -0.020, 0.900]");
  CHECK(render_cot_target("p", "s", MovementLabel{}, {0, 0, 0}) ==
        "Plan: p\nSubtask: s\nMove: no movement.\nAnswer: [0.000, 0.000, 0.000]");
  CHECK_THROWS_AS(render_cot_target("", "s", move, {0, 0, 0}), Error);
  CHECK_THROWS_AS(render_cot_target("p", "", move, {0, 0, 0}), Error);
}

// ---- dataset generation ----

TEST_CASE("state distractors respect separation and display uniqueness") {
  Box3 bounds;
  bounds.min = {0.0, -0.3, 0.7};
  bounds.max = {0.5, 0.3, 1.5};
  const Position3 answer{0.25, 0.0, 1.0};

  const auto a = sample_state_distractors(5, bounds, answer, 3, 0.05);
  const auto b = sample_state_distractors(5, bounds, answer, 3, 0.05);
  REQUIRE(a.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(a[i].x == b[i].x);
    CHECK(bounds.contains(a[i]));
    CHECK(l2_distance(a[i], answer) >= 0.05);
    CHECK(format_state(a[i]) != format_state(answer));
    for (std::size_t j = i + 1; j < 3; ++j) {
      CHECK(l2_distance(a[i], a[j]) >= 0.05);
      CHECK(format_state(a[i]) != format_state(a[j]));
    }
  }

  Box3 dot;
  dot.min = dot.max = answer;
  CHECK_THROWS_AS(sample_state_distractors(5, dot, answer, 3, 0.05), Error);
}

TEST_CASE("mcqa dataset on the fixtures") {
  std::vector<Demonstration> demos{testutil::thirty_frame_demo()};
  demos[0].keypoints = extract_keypoints(demos[0]);
  REQUIRE(demos[0].keypoints == std::vector<int>{12, 29});
  std::map<std::string, EnvironmentMetadata> meta;
  meta["push_button"] = default_environment_metadata(demos[0].instruction);

  GenConfig cfg;
  cfg.seed = 7;
  const std::vector<McqaItem> items = build_mcqa_dataset(demos, meta, cfg);
  REQUIRE(items.size() == 9);

  SECTION("ids walk t by the frame interval, three question kinds per t") {
    CHECK(items[0].id == "push_button:episode0:0:waypoint");
    CHECK(items[1].id == "push_button:episode0:0:state");
    CHECK(items[2].id == "push_button:episode0:0:movement");
    CHECK(items[3].id == "push_button:episode0:10:waypoint");
    CHECK(items[6].id == "push_button:episode0:20:waypoint");
    CHECK(items[8].id == "push_button:episode0:20:movement");
  }

  SECTION("truths follow the next keypoint") {
    CHECK(items[0].truth_state.x == demos[0].position(12).x);   // t=0 -> k=12
    CHECK(items[3].truth_state.x == demos[0].position(12).x);   // t=10 -> k=12
    CHECK(items[6].truth_state.x == demos[0].position(29).x);   // t=20 -> k=29
    CHECK(items[1].truth_state.x == demos[0].position(0).x);    // state question: s_t
    CHECK(items[2].truth_movement ==
          movement_label(demos[0].position(0), demos[0].position(12)));
  }

  SECTION("current_state rides along except for state questions") {
    REQUIRE(items[0].current_state.has_value());
    CHECK(items[0].current_state->x == demos[0].position(0).x);
    CHECK_FALSE(items[1].current_state.has_value());
    REQUIRE(items[2].current_state.has_value());
  }

  SECTION("answer key is sound on every item") {
    for (const McqaItem& item : items) {
      const std::string truth_text = item.qa_type == QaType::movement
                                         ? movement_to_string(item.truth_movement)
                                         : format_state(item.truth_state);
      int matches = 0;
      for (const std::string& option : item.options) {
        if (option == truth_text) ++matches;
      }
      CHECK(matches == 1);
      CHECK(item.options[static_cast<std::size_t>(item.answer_index)] == truth_text);
      CHECK(item.answer_letter() == static_cast<char>('A' + item.answer_index));
    }
  }

  SECTION("prompts match the renderers byte for byte") {
    CHECK(items[0].prompt_text ==
          render_waypoint_prompt(meta["push_button"], demos[0].position(0), items[0].options));
    CHECK(items[1].prompt_text == render_state_prompt(meta["push_button"], items[1].options));
    CHECK(items[2].prompt_text ==
          render_movement_prompt(meta["push_button"], demos[0].position(0), items[2].options));
    CHECK(items[0].image_ref == demos[0].frames[0].image_ref);
    CHECK(items[3].image_ref == demos[0].frames[10].image_ref);
  }

  SECTION("regeneration is byte-identical, reseeding is not") {
    const std::vector<McqaItem> again = build_mcqa_dataset(demos, meta, cfg);
    REQUIRE(again.size() == items.size());
    bool identical = true;
    for (std::size_t i = 0; i < items.size(); ++i) {
      identical = identical && mcqa_to_json(items[i]).dump() == mcqa_to_json(again[i]).dump();
    }
    CHECK(identical);

    GenConfig reseeded = cfg;
    reseeded.seed = 8;
    const std::vector<McqaItem> other = build_mcqa_dataset(demos, meta, reseeded);
    bool any_difference = false;
    for (std::size_t i = 0; i < items.size(); ++i) {
      any_difference =
          any_difference || mcqa_to_json(items[i]).dump() != mcqa_to_json(other[i]).dump();
    }
    CHECK(any_difference);
  }

  SECTION("short fixture yields one stride of three") {
    std::vector<Demonstration> short_demos{testutil::six_frame_demo()};
    short_demos[0].keypoints = extract_keypoints(short_demos[0]);
    REQUIRE(short_demos[0].keypoints == std::vector<int>{5});
    std::map<std::string, EnvironmentMetadata> short_meta;
    short_meta["close_drawer"] = default_environment_metadata(short_demos[0].instruction);
    CHECK(build_mcqa_dataset(short_demos, short_meta, cfg).size() == 3);
  }

  SECTION("missing metadata is a template error") {
    std::map<std::string, EnvironmentMetadata> empty_meta;
    CHECK_THROWS_AS(build_mcqa_dataset(demos, empty_meta, cfg), Error);
  }
}

TEST_CASE("correct option position is uniform") {
  // Many single-stride demos; each contributes 9 items with independent
  // per-item shuffle seeds.
  Rng rng(31337);
  std::vector<Demonstration> demos;
  for (int d = 0; d < 240; ++d) {
    Demonstration demo;
    demo.task_id = "push_button";
    demo.episode_id = "e" + std::to_string(d);
    demo.instruction = "push the red button";
    Position3 p{rng.uniform(0.1, 0.4), rng.uniform(-0.2, 0.2), rng.uniform(0.8, 1.2)};
    for (int i = 0; i < 25; ++i) {
      Frame frame;
      frame.index = i;
      p.x += rng.uniform(-0.02, 0.02);
      p.y += rng.uniform(-0.02, 0.02);
      p.z += rng.uniform(-0.02, 0.02);
      frame.state.position = p;
      frame.state.gripper_open = i < 12;
      demo.frames.push_back(frame);
    }
    demo.keypoints = extract_keypoints(demo);
    demos.push_back(std::move(demo));
  }
  std::map<std::string, EnvironmentMetadata> meta;
  meta["push_button"] = default_environment_metadata("push the red button");

  GenConfig cfg;
  cfg.seed = 99;
  const std::vector<McqaItem> items = build_mcqa_dataset(demos, meta, cfg);
  REQUIRE(items.size() >= 2000);

  std::array<double, 4> counts{0, 0, 0, 0};
  for (const McqaItem& item : items) counts[static_cast<std::size_t>(item.answer_index)] += 1;
  const double expected = static_cast<double>(items.size()) / 4.0;
  double chi_square = 0.0;
  for (double count : counts) {
    chi_square += (count - expected) * (count - expected) / expected;
  }
  INFO("chi_square=" << chi_square);
  CHECK(chi_square < 16.266);  // df=3 critical value at significance 0.001
}

TEST_CASE("sft dataset direct and cot styles") {
  std::vector<Demonstration> demos{testutil::thirty_frame_demo()};
  demos[0].keypoints = extract_keypoints(demos[0]);
  std::map<std::string, EnvironmentMetadata> meta;
  meta["push_button"] = default_environment_metadata(demos[0].instruction);
  GenConfig cfg;
  cfg.seed = 7;

  const std::vector<SftItem> direct = build_sft_dataset(demos, meta, cfg, SftStyle::direct);
  REQUIRE(direct.size() == 3);
  CHECK(direct[0].id == "push_button:episode0:0:sft_direct");
  CHECK(direct[0].target_text == format_state(demos[0].position(12)));
  CHECK(direct[2].target_text == format_state(demos[0].position(29)));
  CHECK(direct[0].prompt_text ==
        render_sft_waypoint_prompt(meta["push_button"], demos[0].position(0)));

  AnnotationMap annotations;
  annotations["push_button:0"] = {"press the button", "approach the button"};
  annotations["push_button:10"] = {"press the button", "line up above it"};
  annotations["push_button:20"] = {"press the button", "push down"};
  const std::vector<SftItem> cot =
      build_sft_dataset(demos, meta, cfg, SftStyle::cot, annotations);
  REQUIRE(cot.size() == 3);
  CHECK(cot[0].id == "push_button:episode0:0:sft_cot");
  CHECK(cot[0].target_text.rfind("Plan: press the button\nSubtask: approach the button\nMove: ",
                                 0) == 0);
  CHECK(cot[0].target_text.find("Answer: " + format_state(demos[0].position(12))) !=
        std::string::npos);

  annotations.erase("push_button:10");
  try {
    build_sft_dataset(demos, meta, cfg, SftStyle::cot, annotations);
    FAIL();
  } catch (const Error& error) {
    CHECK(error.kind() == ErrorKind::MissingAnnotation);
    CHECK(error.message().find("push_button:10") != std::string::npos);
  }
}

TEST_CASE("mcqa json roundtrip") {
  std::vector<Demonstration> demos{testutil::thirty_frame_demo()};
  demos[0].keypoints = extract_keypoints(demos[0]);
  std::map<std::string, EnvironmentMetadata> meta;
  meta["push_button"] = default_environment_metadata(demos[0].instruction);
  GenConfig cfg;
  cfg.seed = 7;
  const std::vector<McqaItem> items = build_mcqa_dataset(demos, meta, cfg);

  for (const McqaItem& item : items) {
    const Json record = mcqa_to_json(item);
    CHECK(record["qa_type"] == qa_type_name(item.qa_type));
    CHECK((item.qa_type == QaType::state) == !record.contains("current_state"));
    const McqaItem back = mcqa_from_json(record);
    CHECK(back.id == item.id);
    CHECK(back.answer_index == item.answer_index);
    CHECK(back.options == item.options);
    CHECK(back.seed == item.seed);
    if (item.qa_type == QaType::movement) {
      CHECK(back.truth_movement == item.truth_movement);
    } else {
      CHECK(back.truth_state.x == item.truth_state.x);
    }
    CHECK(mcqa_to_json(back).dump() == record.dump());
  }

  Json bad = mcqa_to_json(items[0]);
  bad["answer"] = "E";
  CHECK_THROWS_AS(mcqa_from_json(bad), Error);
  bad = mcqa_to_json(items[0]);
  bad["options"] = Json::array({"a", "b", "c"});
  CHECK_THROWS_AS(mcqa_from_json(bad), Error);
  bad = mcqa_to_json(items[0]);
  bad["qa_type"] = "riddle";
  CHECK_THROWS_AS(mcqa_from_json(bad), Error);
}

TEST_CASE("annotation files") {
  testutil::TempDir tmp;
  testutil::write_file(tmp.path() / "notes.json",
                       "{\"push_button:0\": {\"plan\": \"p\", \"subtask\": \"s\"}}");
  const AnnotationMap notes = load_annotations(tmp.path() / "notes.json");
  REQUIRE(notes.count("push_button:0") == 1);
  CHECK(notes.at("push_button:0").plan == "p");
  CHECK(notes.at("push_button:0").subtask == "s");

  testutil::write_file(tmp.path() / "bad.json", "{\"k\": {\"plan\": \"p\"}}");
  CHECK_THROWS_AS(load_annotations(tmp.path() / "bad.json"), Error);
  CHECK_THROWS_AS(load_annotations(tmp.path() / "absent.json"), Error);
}

// ---- rewards ----

TEST_CASE("response grammar corpus") {
  struct Case {
    const char* text;
    double r_f;
    double r_a;
  };
  // answer key for all cases: C
  const Case cases[20] = {
      {"<think>reasoning</think><answer>[[C]]</answer>", 1, 1},
      {"  <think>reasoning</think>\n<answer>[[C]]</answer>\n", 1, 1},
      {"<think>r</think><answer>C</answer>", 1, 1},
      {"<think>\nlines\nof\nthought\n</think>\n<answer>\n[[C]]\n</answer>", 1, 1},
      {"<think></think><answer>[[C]]</answer>", 1, 1},
      {"<think>r</think><answer>[[A]]</answer>", 1, 0},
      {"<think>r</think><answer>c</answer>", 1, 0},
      {"<think>r</think><answer>[[C]] final</answer>", 1, 0},
      {"<think>r</think><answer>answer C</answer>", 1, 0},
      {"<think>r</think><answer>  </answer>", 1, 0},
      {"<answer>[[C]]</answer>", 0, 0},
      {"<think>r</think>", 0, 0},
      {"<think><think>r</think><answer>[[C]]</answer>", 0, 0},
      {"<think>r</think><answer>[[C]]</answer><answer>[[C]]</answer>", 0, 0},
      {"<answer>[[C]]</answer><think>r</think>", 0, 0},
      {"preamble <think>r</think><answer>[[C]]</answer>", 0, 0},
      {"<think>r</think><answer>[[C]]</answer> trailing", 0, 0},
      {"<think>r</think> between <answer>[[C]]</answer>", 0, 0},
      {"<think>r<answer>[[C]]</answer>", 0, 0},
      {"[[C]]", 0, 0},
  };
  for (const Case& c : cases) {
    INFO(c.text);
    const RewardBreakdown reward = score_mcqa_response(c.text, 'C');
    CHECK(reward.r_format == c.r_f);
    CHECK(reward.r_answer == c.r_a);
    CHECK(reward.total == c.r_f + c.r_a);
  }
}

TEST_CASE("parse_response trims inner text") {
  const ParsedResponse parsed =
      parse_response("<think>\n  deep thought \n</think><answer>\n [[B]] \n</answer>");
  REQUIRE(parsed.valid_format);
  CHECK(parsed.think == "deep thought");
  CHECK(parsed.answer == "[[B]]");
}

TEST_CASE("reward weights scale the components") {
  const RewardBreakdown reward =
      score_mcqa_response("<think>r</think><answer>[[C]]</answer>", 'C', 0.5, 2.0);
  CHECK(reward.r_format == 0.5);
  CHECK(reward.r_answer == 2.0);
  CHECK(reward.total == 2.5);
}

TEST_CASE("open-ended reward is clip(1 - L1, 0, 1)") {
  const Position3 truth{0.25, -0.1, 0.9};
  CHECK(score_open_ended_response("<think>r</think><answer>[0.250, -0.100, 0.900]</answer>",
                                  truth)
            .r_answer == 1.0);
  CHECK_THAT(score_open_ended_response("<think>r</think><answer>[0.441, -0.100, 0.900]</answer>",
                                       truth)
                 .r_answer,
             Catch::Matchers::WithinAbs(0.809, 1e-9));  // L1 = 0.191
  CHECK(score_open_ended_response("<think>r</think><answer>[5, 5, 5]</answer>", truth).r_answer ==
        0.0);
  CHECK(score_open_ended_response("<think>r</think><answer>not a vector</answer>", truth)
            .r_answer == 0.0);
  CHECK(score_open_ended_response("[0.250, -0.100, 0.900]", truth).r_answer == 0.0);
  CHECK(score_open_ended_response(
            "<think>r</think><answer>[0.250, -0.100, 0.900] is the target</answer>", truth)
            .r_answer == 1.0);

  const RewardBreakdown invalid = score_open_ended_response("<answer>[0,0,0]</answer>", truth);
  CHECK(invalid.r_format == 0.0);
  CHECK(invalid.total == 0.0);
}
