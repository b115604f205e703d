// robotr1: reproducible pipeline commands over one flat config file.
// Exit codes: 0 success, 2 config error, 3 data error, 4 backend error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "robotr1/backend.hpp"
#include "robotr1/bench.hpp"
#include "robotr1/config.hpp"
#include "robotr1/demo_io.hpp"
#include "robotr1/http_backend.hpp"
#include "robotr1/jsonl.hpp"
#include "robotr1/keypoints.hpp"
#include "robotr1/policy.hpp"
#include "robotr1/qa_gen.hpp"
#include "robotr1/train.hpp"

namespace {

namespace fs = std::filesystem;
using robotr1::ConfigMap;
using robotr1::Demonstration;
using robotr1::ErrorKind;
using robotr1::Json;

struct SharedFlags {
  std::string config_path;
  long long seed = 0;
  std::string out_dir;
  std::string backend_url;
  int max_in_flight = 0;
  std::string algorithm;
  std::string sft_style;
};

struct Context {
  ConfigMap config;
  fs::path out_dir;
  std::string hash;
  std::uint64_t seed = 0;

  std::string comment(const std::string& command) const {
    return "robotr1 " + command + " config=" + hash + " seed=" + std::to_string(seed);
  }
};

void print_summary(const Json& summary) { std::cout << summary.dump() << "\n"; }

fs::path require_path(const ConfigMap& config, const std::string& key) {
  const std::string value = config.get_string(key);
  if (value.empty()) robotr1::fail(ErrorKind::ConfigInvalid, key + " is not set");
  return value;
}

fs::path require_existing_file(const ConfigMap& config, const std::string& key) {
  const fs::path path = require_path(config, key);
  if (!fs::is_regular_file(path)) {
    robotr1::fail(ErrorKind::MissingFile, key + " does not exist: " + path.string());
  }
  return path;
}

fs::path require_existing_dir(const ConfigMap& config, const std::string& key) {
  const fs::path path = require_path(config, key);
  if (!fs::is_directory(path)) {
    robotr1::fail(ErrorKind::ConfigInvalid, key + " is not a directory: " + path.string());
  }
  return path;
}

/// Episodes with a stored keypoints.json keep it; the rest get keypoints
/// extracted with the configured parameters.
std::vector<Demonstration> load_demos(const Context& ctx) {
  const fs::path root = require_existing_dir(ctx.config, "data.demo_root");
  const auto episodes = robotr1::list_episodes(root);
  if (episodes.empty()) robotr1::fail(ErrorKind::EmptyInput, "no episodes under " + root.string());
  const robotr1::KeypointParams params = robotr1::keypoint_params_from(ctx.config);
  std::vector<Demonstration> demos;
  demos.reserve(episodes.size());
  for (const auto& [task_id, episode_id] : episodes) {
    Demonstration demo = robotr1::load_demonstration(root, task_id, episode_id);
    const fs::path episode_dir = root / task_id / episode_id;
    if (fs::exists(episode_dir / "keypoints.json")) {
      demo.keypoints = robotr1::load_keypoints(episode_dir);
    } else {
      demo.keypoints = robotr1::extract_keypoints(demo, params);
    }
    demos.push_back(std::move(demo));
  }
  return demos;
}

std::map<std::string, robotr1::EnvironmentMetadata> metadata_per_task(
    const std::vector<Demonstration>& demos) {
  std::map<std::string, robotr1::EnvironmentMetadata> meta;
  for (const Demonstration& demo : demos) {
    meta.emplace(demo.task_id, robotr1::default_environment_metadata(demo.instruction));
  }
  return meta;
}

std::shared_ptr<robotr1::Backend> make_backend(const Context& ctx) {
  const robotr1::BackendEnv env = robotr1::backend_env();
  std::string url = ctx.config.get_string("backend.url");
  if (url.empty()) url = env.url;
  if (url.empty()) {
    robotr1::fail(ErrorKind::ConfigInvalid,
                  "no backend url (set backend.url, --backend-url, or R1_BACKEND_URL)");
  }
  std::string key = ctx.config.get_string("backend.key");
  if (key.empty()) key = env.key;
  robotr1::RetryPolicy retry;
  retry.max_attempts = static_cast<int>(ctx.config.get_int("backend.retry_attempts", 3));
  retry.base_delay_ms = ctx.config.get_double("backend.retry_base_ms", 100.0);
  retry.max_delay_ms = ctx.config.get_double("backend.retry_max_ms", 2000.0);
  retry.jitter_seed = robotr1::mix_seed(ctx.seed, 0xb2c55ull);
  const double timeout = ctx.config.get_double("backend.timeout_seconds", 30.0);
  auto http = std::make_shared<robotr1::HttpBackend>(url, key, retry, timeout);
  return std::make_shared<robotr1::CachingBackend>(std::move(http));
}

int resolve_max_in_flight(const Context& ctx) {
  const robotr1::BackendEnv env = robotr1::backend_env();
  const int value =
      static_cast<int>(ctx.config.get_int("backend.max_in_flight", env.max_in_flight));
  if (value < 1) robotr1::fail(ErrorKind::ConfigInvalid, "backend.max_in_flight must be >= 1");
  return value;
}

// ---- commands ----

void cmd_ingest(const Context& ctx) {
  const std::vector<Demonstration> demos = load_demos(ctx);
  const robotr1::GenConfig gen = robotr1::gen_config_from(ctx.config);
  const robotr1::Box3 bounds = robotr1::workspace_bounds(demos, gen.bounds_margin);

  std::vector<Json> records;
  std::map<std::string, int> tasks;
  long long frames = 0;
  for (const Demonstration& demo : demos) {
    Json record;
    record["task_id"] = demo.task_id;
    record["episode_id"] = demo.episode_id;
    record["instruction"] = demo.instruction;
    record["variation"] = demo.variation;
    record["frames"] = demo.frame_count();
    records.push_back(std::move(record));
    tasks[demo.task_id] += 1;
    frames += demo.frame_count();
  }
  const fs::path out = ctx.out_dir / "episodes.jsonl";
  robotr1::write_jsonl(out, robotr1::make_header_record("ingest", ctx.hash, ctx.seed), records);

  Json summary;
  summary["command"] = "ingest";
  summary["tasks"] = tasks.size();
  summary["episodes"] = demos.size();
  summary["frames"] = frames;
  summary["bounds_min"] = Json::array({bounds.min.x, bounds.min.y, bounds.min.z});
  summary["bounds_max"] = Json::array({bounds.max.x, bounds.max.y, bounds.max.z});
  summary["out"] = out.string();
  print_summary(summary);
}

void cmd_keypoints(const Context& ctx) {
  const std::vector<Demonstration> demos = load_demos(ctx);
  std::vector<Json> records;
  std::size_t total = 0;
  for (const Demonstration& demo : demos) {
    Json record;
    record["task_id"] = demo.task_id;
    record["episode_id"] = demo.episode_id;
    record["keypoints"] = demo.keypoints;
    records.push_back(std::move(record));
    total += demo.keypoints.size();
  }
  const fs::path out = ctx.out_dir / "keypoints.jsonl";
  robotr1::write_jsonl(out, robotr1::make_header_record("keypoints", ctx.hash, ctx.seed), records);

  Json summary;
  summary["command"] = "keypoints";
  summary["episodes"] = demos.size();
  summary["keypoints"] = total;
  summary["out"] = out.string();
  print_summary(summary);
}

void cmd_genqa(const Context& ctx) {
  const std::vector<Demonstration> demos = load_demos(ctx);
  const robotr1::GenConfig gen = robotr1::gen_config_from(ctx.config);
  const auto meta = metadata_per_task(demos);
  const std::vector<robotr1::McqaItem> items = robotr1::build_mcqa_dataset(demos, meta, gen);

  std::vector<Json> records;
  records.reserve(items.size());
  for (const robotr1::McqaItem& item : items) records.push_back(robotr1::mcqa_to_json(item));
  const fs::path out = ctx.out_dir / "mcqa.jsonl";
  robotr1::write_jsonl(out, robotr1::make_header_record("genqa", ctx.hash, ctx.seed), records);

  Json summary;
  summary["command"] = "genqa";
  summary["items"] = items.size();
  summary["out"] = out.string();
  print_summary(summary);
}

void cmd_gensft(const Context& ctx, const std::string& style_flag) {
  std::string style_name = style_flag;
  if (style_name.empty()) style_name = ctx.config.get_string("data.sft_style", "direct");
  robotr1::SftStyle style;
  if (style_name == "direct") {
    style = robotr1::SftStyle::direct;
  } else if (style_name == "cot") {
    style = robotr1::SftStyle::cot;
  } else {
    robotr1::fail(ErrorKind::ConfigInvalid, "sft style must be direct or cot, got " + style_name);
  }

  robotr1::AnnotationMap annotations;
  if (style == robotr1::SftStyle::cot) {
    annotations =
        robotr1::load_annotations(require_existing_file(ctx.config, "data.annotations"));
  }

  const std::vector<Demonstration> demos = load_demos(ctx);
  const robotr1::GenConfig gen = robotr1::gen_config_from(ctx.config);
  const auto meta = metadata_per_task(demos);
  const std::vector<robotr1::SftItem> items =
      robotr1::build_sft_dataset(demos, meta, gen, style, annotations);

  std::vector<Json> records;
  records.reserve(items.size());
  for (const robotr1::SftItem& item : items) records.push_back(robotr1::sft_to_json(item));
  const fs::path out = ctx.out_dir / "sft.jsonl";
  robotr1::write_jsonl(out, robotr1::make_header_record("gensft", ctx.hash, ctx.seed), records);

  Json summary;
  summary["command"] = "gensft";
  summary["style"] = style_name;
  summary["items"] = items.size();
  summary["out"] = out.string();
  print_summary(summary);
}

void cmd_train_toy(const Context& ctx) {
  const robotr1::TrainConfig train = robotr1::train_config_from(ctx.config, true);
  const int contexts = static_cast<int>(ctx.config.get_int("train.contexts", 64));
  const std::vector<robotr1::McqaItem> dataset = robotr1::make_bandit_dataset(contexts, train.seed);
  robotr1::ToyCategoricalPolicy policy = robotr1::make_bandit_policy(dataset);

  const std::vector<robotr1::StepMetrics> history =
      robotr1::train(dataset, policy, robotr1::mcqa_reward_fn, train);

  const fs::path metrics = ctx.out_dir / "metrics.csv";
  robotr1::write_metrics_csv(metrics, history, ctx.comment("train-toy"));

  Json policy_record;
  policy_record["record"] = "policy";
  policy_record["kind"] = "categorical";
  policy_record["weights"] = robotr1::matrix_to_json(policy.weights);
  const fs::path policy_out = ctx.out_dir / "policy.jsonl";
  robotr1::write_jsonl(policy_out, robotr1::make_header_record("train-toy", ctx.hash, ctx.seed),
                       {policy_record});

  const double accuracy = robotr1::greedy_accuracy(policy, dataset);
  Json summary;
  summary["command"] = "train-toy";
  summary["contexts"] = contexts;
  summary["steps"] = history.size();
  summary["mean_reward_last"] = history.empty() ? 0.0 : history.back().mean_reward;
  summary["final_greedy_accuracy"] = accuracy;
  summary["metrics"] = metrics.string();
  summary["policy"] = policy_out.string();
  print_summary(summary);
}

void cmd_export_advantages(const Context& ctx) {
  const fs::path input = require_existing_file(ctx.config, "data.rollouts");
  const robotr1::TrainConfig train = robotr1::train_config_from(ctx.config, false);
  const fs::path out = ctx.out_dir / "advantages.jsonl";
  robotr1::export_advantages(input, out, train, ctx.hash);

  Json summary;
  summary["command"] = "export-advantages";
  summary["algorithm"] = robotr1::algorithm_name(train.algorithm);
  summary["out"] = out.string();
  print_summary(summary);
}

void cmd_bench_sample(const Context& ctx) {
  const std::vector<robotr1::BenchQuestion> bank =
      robotr1::read_question_bank(require_existing_file(ctx.config, "data.question_bank"));
  robotr1::BenchOptions options = robotr1::bench_options_from(ctx.config);
  options.max_in_flight = resolve_max_in_flight(ctx);
  const auto backend = make_backend(ctx);

  const std::vector<robotr1::SampledAnswer> answers =
      robotr1::sample_answers(*backend, bank, options);

  std::vector<Json> records;
  std::size_t answered = 0;
  for (const robotr1::SampledAnswer& answer : answers) {
    records.push_back(robotr1::sampled_answer_to_json(answer));
    if (answer.answered) ++answered;
  }
  const fs::path out = ctx.out_dir / "answers.jsonl";
  robotr1::write_jsonl(out, robotr1::make_header_record("bench-sample", ctx.hash, ctx.seed),
                       records);

  Json summary;
  summary["command"] = "bench-sample";
  summary["questions"] = bank.size();
  summary["answered"] = answered;
  summary["out"] = out.string();
  print_summary(summary);
}

std::vector<robotr1::SampledAnswer> read_answers_for(
    const Context& ctx, const std::vector<robotr1::BenchQuestion>& bank) {
  fs::path path = ctx.config.get_string("data.answers");
  if (path.empty()) path = ctx.out_dir / "answers.jsonl";
  std::map<std::string, robotr1::SampledAnswer> by_id;
  for (const Json& record : robotr1::read_jsonl(path)) {
    robotr1::SampledAnswer answer = robotr1::sampled_answer_from_json(record);
    by_id[answer.question_id] = std::move(answer);
  }
  std::vector<robotr1::SampledAnswer> aligned;
  aligned.reserve(bank.size());
  for (const robotr1::BenchQuestion& question : bank) {
    auto it = by_id.find(question.id);
    if (it == by_id.end()) {
      robotr1::fail(ErrorKind::InvalidInput, "no sampled answer for question " + question.id);
    }
    aligned.push_back(it->second);
  }
  return aligned;
}

void cmd_bench_judge(const Context& ctx) {
  const std::vector<robotr1::BenchQuestion> bank =
      robotr1::read_question_bank(require_existing_file(ctx.config, "data.question_bank"));
  const std::vector<robotr1::SampledAnswer> answers = read_answers_for(ctx, bank);
  robotr1::BenchOptions options = robotr1::bench_options_from(ctx.config);
  options.max_in_flight = resolve_max_in_flight(ctx);
  const auto backend = make_backend(ctx);

  const std::vector<robotr1::JudgeRecord> verdicts =
      robotr1::judge(*backend, bank, answers, options);

  std::vector<Json> records;
  std::size_t parsed = 0;
  for (const robotr1::JudgeRecord& verdict : verdicts) {
    records.push_back(robotr1::judge_record_to_json(verdict));
    if (verdict.ok) ++parsed;
  }
  const fs::path out = ctx.out_dir / "verdicts.jsonl";
  robotr1::write_jsonl(out, robotr1::make_header_record("bench-judge", ctx.hash, ctx.seed),
                       records);

  Json summary;
  summary["command"] = "bench-judge";
  summary["questions"] = bank.size();
  summary["parsed"] = parsed;
  summary["out"] = out.string();
  print_summary(summary);
}

void cmd_bench_report(const Context& ctx) {
  const std::vector<robotr1::BenchQuestion> bank =
      robotr1::read_question_bank(require_existing_file(ctx.config, "data.question_bank"));
  fs::path verdicts_path = ctx.config.get_string("data.verdicts");
  if (verdicts_path.empty()) verdicts_path = ctx.out_dir / "verdicts.jsonl";

  std::map<std::string, robotr1::JudgeRecord> by_id;
  for (const Json& record : robotr1::read_jsonl(verdicts_path)) {
    robotr1::JudgeRecord verdict = robotr1::judge_record_from_json(record);
    by_id[verdict.question_id] = std::move(verdict);
  }
  std::vector<robotr1::JudgeRecord> aligned;
  aligned.reserve(bank.size());
  for (const robotr1::BenchQuestion& question : bank) {
    auto it = by_id.find(question.id);
    if (it == by_id.end()) {
      robotr1::fail(ErrorKind::InvalidInput, "no verdict for question " + question.id);
    }
    aligned.push_back(it->second);
  }

  const robotr1::BenchReport report = robotr1::aggregate(bank, aligned);
  const fs::path out = ctx.out_dir / "report.csv";
  robotr1::write_report_csv(out, report, ctx.comment("bench-report"));

  Json summary;
  summary["command"] = "bench-report";
  summary["questions"] = bank.size();
  summary["overall_mean"] = report.overall.count == 0 ? 0.0 : report.overall.mean();
  summary["out"] = out.string();
  print_summary(summary);
}

void cmd_validate_judge(const Context& ctx) {
  const std::vector<robotr1::JudgeValidationRecord> records =
      robotr1::read_validation_records(require_existing_file(ctx.config, "data.validation"));
  const auto correlations = robotr1::validate_judge(records);
  const fs::path out = ctx.out_dir / "validation.csv";
  robotr1::write_validation_csv(out, correlations, ctx.comment("validate-judge"));

  Json summary;
  summary["command"] = "validate-judge";
  summary["questions"] = records.size();
  for (robotr1::ReasoningType type : robotr1::kReasoningTypes) {
    const auto& value = correlations[static_cast<std::size_t>(type)];
    const std::string name = "pearson_" + std::string(robotr1::reasoning_type_name(type));
    if (value) {
      summary[name] = *value;
    } else {
      summary[name] = nullptr;
    }
  }
  summary["out"] = out.string();
  print_summary(summary);
}

int emit_error(ErrorKind kind, const std::string& message, int exit_code) {
  Json error;
  error["error"] = std::string(robotr1::error_kind_name(kind));
  error["message"] = message;
  error["exit_code"] = exit_code;
  std::cerr << error.dump() << "\n";
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robot-R1 pipeline: demos -> keypoints -> datasets -> RL -> bench"};
  app.require_subcommand(1);

  SharedFlags flags;
  auto add_shared = [&flags](CLI::App* sub) {
    sub->add_option("--config", flags.config_path, "flat key=value config file");
    sub->add_option("--seed", flags.seed, "override the config seed");
    sub->add_option("--out", flags.out_dir, "output directory (overrides data.out_dir)");
    sub->add_option("--backend-url", flags.backend_url, "generation backend base URL");
    sub->add_option("--max-in-flight", flags.max_in_flight, "max concurrent backend requests");
    sub->add_option("--algorithm", flags.algorithm, "grpo, rloo, or reinforcepp");
  };

  add_shared(app.add_subcommand("ingest", "validate a demonstration archive"));
  add_shared(app.add_subcommand("keypoints", "extract keypoint indices per episode"));
  add_shared(app.add_subcommand("genqa", "generate the MCQA dataset"));
  CLI::App* gensft = app.add_subcommand("gensft", "generate the SFT dataset");
  add_shared(gensft);
  gensft->add_option("--style", flags.sft_style, "direct or cot");
  add_shared(app.add_subcommand("train-toy", "train the toy policy on a synthetic bandit"));
  add_shared(app.add_subcommand("export-advantages", "fill advantages in a rollout file"));
  add_shared(app.add_subcommand("bench-sample", "sample model answers for the question bank"));
  add_shared(app.add_subcommand("bench-judge", "judge sampled answers"));
  add_shared(app.add_subcommand("bench-report", "aggregate verdicts into the report table"));
  add_shared(app.add_subcommand("validate-judge", "correlate judge scores with human scores"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& help) {
    return app.exit(help);
  } catch (const CLI::ParseError& parse_error) {
    return emit_error(ErrorKind::ConfigInvalid, parse_error.what(),
                      robotr1::kExitConfigError);
  }

  const CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();

  try {
    Context ctx;
    if (!flags.config_path.empty()) ctx.config = ConfigMap::parse_file(flags.config_path);
    if (sub->count("--seed")) ctx.config.set("seed", std::to_string(flags.seed));
    if (sub->count("--out")) ctx.config.set("data.out_dir", flags.out_dir);
    if (sub->count("--backend-url")) ctx.config.set("backend.url", flags.backend_url);
    if (sub->count("--max-in-flight")) {
      ctx.config.set("backend.max_in_flight", std::to_string(flags.max_in_flight));
    }
    if (sub->count("--algorithm")) {
      robotr1::parse_algorithm(flags.algorithm);  // reject unknown names up front
      ctx.config.set("train.algorithm", flags.algorithm);
    }
    ctx.out_dir = ctx.config.get_string("data.out_dir", "out");
    ctx.hash = ctx.config.hash();
    ctx.seed = ctx.config.get_u64("seed", 0);

    if (command == "ingest") {
      cmd_ingest(ctx);
    } else if (command == "keypoints") {
      cmd_keypoints(ctx);
    } else if (command == "genqa") {
      cmd_genqa(ctx);
    } else if (command == "gensft") {
      cmd_gensft(ctx, sub->count("--style") ? flags.sft_style : std::string());
    } else if (command == "train-toy") {
      cmd_train_toy(ctx);
    } else if (command == "export-advantages") {
      cmd_export_advantages(ctx);
    } else if (command == "bench-sample") {
      cmd_bench_sample(ctx);
    } else if (command == "bench-judge") {
      cmd_bench_judge(ctx);
    } else if (command == "bench-report") {
      cmd_bench_report(ctx);
    } else if (command == "validate-judge") {
      cmd_validate_judge(ctx);
    }
    return robotr1::kExitOk;
  } catch (const robotr1::Error& error) {
    return emit_error(error.kind(), error.message(), error.exit_code());
  } catch (const std::exception& unexpected) {
    return emit_error(ErrorKind::InvalidInput, unexpected.what(),
                      robotr1::kExitDataError);
  }
}
