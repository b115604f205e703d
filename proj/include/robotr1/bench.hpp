#pragma once

#include <array>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "robotr1/backend.hpp"
#include "robotr1/error.hpp"
#include "robotr1/jsonl.hpp"
#include "robotr1/rewards.hpp"
#include "robotr1/state_format.hpp"
#include "robotr1/stats.hpp"

namespace robotr1 {

enum class ReasoningType : int { planning = 0, high_level_action = 1, movement = 2, spatial = 3 };

inline constexpr std::array<ReasoningType, 4> kReasoningTypes = {
    ReasoningType::planning, ReasoningType::high_level_action, ReasoningType::movement,
    ReasoningType::spatial};

inline std::string_view reasoning_type_name(ReasoningType type) {
  switch (type) {
    case ReasoningType::planning: return "planning";
    case ReasoningType::high_level_action: return "high_level_action";
    case ReasoningType::movement: return "movement";
    case ReasoningType::spatial: return "spatial";
  }
  return "planning";
}

inline ReasoningType parse_reasoning_type(std::string_view name) {
  for (ReasoningType type : kReasoningTypes) {
    if (name == reasoning_type_name(type)) return type;
  }
  fail(ErrorKind::MalformedRecord, "unknown reasoning type '" + std::string(name) + "'");
}

enum class Split { in_dist, out_dist };

inline std::string_view split_name(Split split) {
  return split == Split::in_dist ? "in" : "out";
}

inline Split parse_split(std::string_view name) {
  if (name == "in") return Split::in_dist;
  if (name == "out") return Split::out_dist;
  fail(ErrorKind::MalformedRecord, "split must be \"in\" or \"out\", got '" + std::string(name) + "'");
}

struct BenchQuestion {
  std::string id;
  std::string task_id;
  ReasoningType reasoning_type = ReasoningType::planning;
  Split split = Split::in_dist;
  std::string image_ref;
  std::string question;
  std::string reference_answer;
};

struct JudgeVerdict {
  int score = 0;  // 0..3
  std::string reason;
};

// ---- prompt assembly ----

namespace detail {

inline std::string_view type_guidelines(ReasoningType type) {
  switch (type) {
    case ReasoningType::spatial:
      return "- Focus only on relative positions and spatial relationships between objects.\n"
             "- Do not describe any action or movement.\n"
             "- Only describe the current spatial configuration.\n"
             "- Example Answer: \"The gripper is above the cup, offset to the right.\"";
    case ReasoningType::planning:
      return "- List major actions in chronological order (1., 2., 3., ...).\n"
             "- Each step should describe only the action, without mentioning the purpose.\n"
             "- Example Answer: \"1. Move the robot arm above the cup. 2. Lower the gripper to "
             "grasp the cup. 3. Lift the cup upward.\"";
    case ReasoningType::high_level_action:
      return "- Focus on the immediate next meaningful subtask (a single self-contained action).\n"
             "- Describe WHAT needs to be done, not HOW to do it.\n"
             "- Only the immediate next step, not the final goal.\n"
             "- Example Answer: \"Move the gripper closer to the button.\"";
    case ReasoningType::movement:
      return "- Specify only mechanical movements and gripper state changes.\n"
             "- Use the robot's perspective for directions:\n"
             "- Describe only the very next physical movement.\n"
             "- Example Answer: \"Move down and slightly right.\"";
  }
  return "";
}

}  // namespace detail

/// Sampling system prompt: fixed answering rules plus the task guideline
/// block for the question's reasoning type.
inline std::string assemble_system_prompt(ReasoningType type) {
  std::string text =
      "You are an AI that accurately answers questions about robot actions and spatial "
      "relationships. Follow these rules strictly:\n"
      "1. Answer ONLY what is asked in the question.\n"
      "2. Do not include any purpose or objective of actions (remove all 'to...' phrases).\n"
      "3. Do not include any additional descriptive information.\n"
      "4. Keep answers concise and focused on the core information.\n"
      "5. Remove all unnecessary details about the current state or conditions.\n"
      "6. Direction should be judged based on the viewpoint in the image.\n"
      "   * up: away from the ground\n"
      "   * down: toward the ground\n"
      "   * forward: toward the camera (where the image was taken from)\n"
      "   * backward: away from the camera\n"
      "   * right: to the right side from the camera's perspective\n"
      "   * left: to the left side from the camera's perspective\n"
      "\n"
      "TASK GUIDELINES:\n";
  text += detail::type_guidelines(type);
  text +=
      "\n"
      "\n"
      "Additional Style Requirements:\n"
      "- Use simple and clear English.\n"
      "- Focus on semantic correctness, not stylistic variation.\n"
      "- Keep sentences short and remove unnecessary details.\n"
      "- If multiple directions are involved, combine them clearly (e.g., 'Move down and "
      "slightly right').";
  return text;
}

inline std::string judge_rubric() {
  return
      "0 points: Meaning completely different from ground truth\n"
      "- Answer has a completely different meaning from ground truth\n"
      "- Key concepts and ideas are misinterpreted\n"
      "- Contains information that contradicts ground truth\n"
      "\n"
      "1 point: Partially matches but with significant meaning differences\n"
      "- Some key points match but main meaning is different\n"
      "- Contains significant misunderstandings of core concepts\n"
      "- Has some correct information but overall meaning is incorrect\n"
      "\n"
      "2 points: Mostly matches in meaning but with minor differences\n"
      "- Main meaning and key points are correct\n"
      "- Minor details or expressions are different\n"
      "- Overall context and intent are preserved\n"
      "\n"
      "3 points: Meaning is equivalent to or more detailed than ground truth\n"
      "- Any expression that conveys the same basic meaning as ground truth\n"
      "- Any description that leads to the same functional outcome\n"
      "- Any expression that maintains the same spatial relationship between objects\n"
      "- Any description that achieves the same goal through equivalent means\n"
      "- Any expression that preserves the core meaning while using different words\n"
      "- Any description that maintains the same context and intent\n"
      "- Any expression that describes the same target location and action\n"
      "\n"
      "Additional Notes:\n"
      "1. Focus on semantic equivalence rather than exact wording\n"
      "2. Different expressions are acceptable if they convey the same meaning\n"
      "3. Consider the overall context and intent of the answer\n"
      "4. Minor differences in expression are acceptable if the core meaning is maintained\n"
      "5. Paraphrasing is considered a perfect match if the meaning is preserved\n"
      "6. Different ways of describing the same action (e.g., 'press' vs 'flip' a switch) "
      "should be considered equivalent\n"
      "7. The specific actor (robot vs human) should not affect the score if the action "
      "described is functionally equivalent\n"
      "8. Different ways of expressing the same spatial relationship (e.g., 'over' vs "
      "'toward') should be considered equivalent\n"
      "9. Focus on whether the answer achieves the same functional outcome as the ground truth\n"
      "10. Consider the answer as a 3 if it describes the same action or state using "
      "different but equivalent words";
}

inline std::string judge_system_prompt() {
  return
      "You are an expert in evaluating the consistency between model's answer and ground "
      "truth answer. Please assign a score between 0-3 based on the given rubric and explain "
      "the reason in detail. You must respond in the format 'Score: [0-3] Reason: "
      "[explanation]' in a single line. You may use line breaks, but Score and Reason must be "
      "clearly separated and identifiable.";
}

/// (system, user) prompt pair for one judgment.
inline std::pair<std::string, std::string> assemble_judge_prompt(
    const std::string& question, const std::string& model_answer,
    const std::string& reference_answer) {
  std::string user =
      "Please evaluate how well the model's answer matches the ground truth answer.\n"
      "Evaluation Criteria:\n";
  user += judge_rubric();
  user += "\nQuestion: " + question;
  user += "\nModel's Answer: " + model_answer;
  user += "\nGround Truth Answer: " + reference_answer;
  user += "\nPlease assign a score between 0-3 and explain the reason in detail.";
  return {judge_system_prompt(), std::move(user)};
}

/// Extracts the first "Score:" integer and the "Reason:" text after it.
/// Line breaks anywhere are tolerated.
inline JudgeVerdict parse_verdict(const std::string& text) {
  const std::size_t score_pos = text.find("Score:");
  if (score_pos == std::string::npos) {
    fail(ErrorKind::UnparseableVerdict, "no 'Score:' in judge output");
  }
  std::size_t pos = score_pos + 6;
  while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  int score = 0;
  const auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + text.size(), score);
  if (ec != std::errc() || ptr == text.data() + pos) {
    fail(ErrorKind::UnparseableVerdict, "no integer after 'Score:'");
  }
  if (score < 0 || score > 3) {
    fail(ErrorKind::ScoreOutOfRange, "judge score " + std::to_string(score) + " outside [0,3]");
  }
  const std::size_t reason_pos = text.find("Reason:", static_cast<std::size_t>(ptr - text.data()));
  if (reason_pos == std::string::npos) {
    fail(ErrorKind::UnparseableVerdict, "no 'Reason:' in judge output");
  }
  return {score, trim(std::string_view(text).substr(reason_pos + 7))};
}

// ---- sampling and judging ----

struct BenchOptions {
  std::string model = "evaluated-model";
  std::string judge_model = "judge-model";
  double temperature = 0.0;        // evaluated model
  double judge_temperature = 1.0;  // judge
  int max_in_flight = 4;
  int max_tokens = 1024;
};

struct SampledAnswer {
  std::string question_id;
  std::string raw_text;
  std::string extracted_answer;
  bool answered = false;
  std::string error;  // error kind name when not answered
};

/// One completion per question; the model answer is the <answer> inner
/// text when the tag grammar matches, the full raw text otherwise.
/// Backend failures mark the question unanswered and move on.
inline std::vector<SampledAnswer> sample_answers(Backend& backend,
                                                 const std::vector<BenchQuestion>& questions,
                                                 const BenchOptions& options = {}) {
  std::vector<GenRequest> requests;
  requests.reserve(questions.size());
  for (const BenchQuestion& question : questions) {
    GenRequest request;
    request.model = options.model;
    request.system_prompt = assemble_system_prompt(question.reasoning_type);
    request.user_text = question.question;
    if (!question.image_ref.empty()) request.image_ref = question.image_ref;
    request.temperature = options.temperature;
    request.n = 1;
    request.max_tokens = options.max_tokens;
    requests.push_back(std::move(request));
  }
  const std::vector<GenOutcome> outcomes =
      generate_batch(backend, requests, options.max_in_flight);

  std::vector<SampledAnswer> answers;
  answers.reserve(questions.size());
  for (std::size_t i = 0; i < questions.size(); ++i) {
    SampledAnswer answer;
    answer.question_id = questions[i].id;
    if (outcomes[i].ok && !outcomes[i].response.texts.empty()) {
      answer.raw_text = outcomes[i].response.texts.front();
      const ParsedResponse parsed = parse_response(answer.raw_text);
      answer.extracted_answer = parsed.valid_format ? parsed.answer : answer.raw_text;
      answer.answered = true;
    } else {
      answer.error = std::string(error_kind_name(outcomes[i].error_kind));
    }
    answers.push_back(std::move(answer));
  }
  return answers;
}

struct JudgeRecord {
  std::string question_id;
  std::string model_answer;
  int score = 0;
  std::string reason;
  std::string judge_raw;
  bool ok = false;     // a verdict was parsed
  std::string error;   // error kind name otherwise
};

/// One record per question. Unanswered questions score 0 with reason
/// "unanswered" and never reach the judge. Unparseable judge output is
/// retried once, then recorded as a zero-score UnparseableVerdict slot.
inline std::vector<JudgeRecord> judge(Backend& backend,
                                      const std::vector<BenchQuestion>& questions,
                                      const std::vector<SampledAnswer>& answers,
                                      const BenchOptions& options = {}) {
  if (questions.size() != answers.size()) {
    fail(ErrorKind::InvalidInput, "answers are not aligned to questions");
  }
  std::vector<JudgeRecord> records(questions.size());
  std::vector<GenRequest> requests;
  std::vector<std::size_t> slots;
  for (std::size_t i = 0; i < questions.size(); ++i) {
    records[i].question_id = questions[i].id;
    records[i].model_answer = answers[i].extracted_answer;
    if (!answers[i].answered) {
      records[i].score = 0;
      records[i].reason = "unanswered";
      records[i].ok = true;
      continue;
    }
    auto [system, user] = assemble_judge_prompt(questions[i].question,
                                                answers[i].extracted_answer,
                                                questions[i].reference_answer);
    GenRequest request;
    request.model = options.judge_model;
    request.system_prompt = std::move(system);
    request.user_text = std::move(user);
    request.temperature = options.judge_temperature;
    request.n = 1;
    request.max_tokens = options.max_tokens;
    requests.push_back(std::move(request));
    slots.push_back(i);
  }

  auto run_round = [&](const std::vector<GenRequest>& round_requests,
                       const std::vector<std::size_t>& round_slots)
      -> std::pair<std::vector<GenRequest>, std::vector<std::size_t>> {
    std::vector<GenRequest> retry_requests;
    std::vector<std::size_t> retry_slots;
    const std::vector<GenOutcome> outcomes =
        generate_batch(backend, round_requests, options.max_in_flight);
    for (std::size_t r = 0; r < round_slots.size(); ++r) {
      JudgeRecord& record = records[round_slots[r]];
      if (!outcomes[r].ok || outcomes[r].response.texts.empty()) {
        record.score = 0;
        record.reason = "judge backend failure";
        record.error = std::string(error_kind_name(outcomes[r].error_kind));
        continue;
      }
      record.judge_raw = outcomes[r].response.texts.front();
      try {
        const JudgeVerdict verdict = parse_verdict(record.judge_raw);
        record.score = verdict.score;
        record.reason = verdict.reason;
        record.ok = true;
        record.error.clear();
      } catch (const Error& error) {
        record.score = 0;
        record.reason = "unparseable judge output";
        record.error = std::string(error_kind_name(error.kind()));
        retry_requests.push_back(round_requests[r]);
        retry_slots.push_back(round_slots[r]);
      }
    }
    return {std::move(retry_requests), std::move(retry_slots)};
  };

  auto [retry_requests, retry_slots] = run_round(requests, slots);
  if (!retry_requests.empty()) run_round(retry_requests, retry_slots);  // one retry, then keep the failure
  return records;
}

// ---- aggregation ----

struct BenchCell {
  int count = 0;
  double sum = 0.0;

  double mean() const { return count == 0 ? 0.0 : sum / count; }
};

struct BenchReport {
  std::array<BenchCell, 4> in_cells;    // by ReasoningType
  std::array<BenchCell, 4> out_cells;   // by ReasoningType
  std::array<BenchCell, 4> type_cells;  // question-weighted Avg per type
  BenchCell overall;

  const BenchCell& in_cell(ReasoningType t) const { return in_cells[static_cast<std::size_t>(t)]; }
  const BenchCell& out_cell(ReasoningType t) const { return out_cells[static_cast<std::size_t>(t)]; }
  const BenchCell& type_cell(ReasoningType t) const { return type_cells[static_cast<std::size_t>(t)]; }
};

/// Means per type and split. Avg is the question-weighted mean over the
/// whole type, not the mean of the two split means.
inline BenchReport aggregate(const std::vector<BenchQuestion>& questions,
                             const std::vector<JudgeRecord>& records) {
  if (questions.size() != records.size()) {
    fail(ErrorKind::InvalidInput, "verdicts are not aligned to questions");
  }
  BenchReport report;
  for (std::size_t i = 0; i < questions.size(); ++i) {
    const auto type = static_cast<std::size_t>(questions[i].reasoning_type);
    const double score = records[i].score;
    auto& split_cell =
        questions[i].split == Split::in_dist ? report.in_cells[type] : report.out_cells[type];
    split_cell.count += 1;
    split_cell.sum += score;
    report.type_cells[type].count += 1;
    report.type_cells[type].sum += score;
    report.overall.count += 1;
    report.overall.sum += score;
  }
  return report;
}

// ---- judge validation ----

struct JudgeValidationRecord {
  std::string question_id;
  ReasoningType reasoning_type = ReasoningType::planning;
  std::vector<double> human_scores;  // one per annotator
  double llm_score = 0.0;
};

/// Per reasoning type, the Pearson correlation between the llm score and
/// the per-question median human score. Types with fewer than 2 questions
/// or constant series come back as nullopt ("undefined").
inline std::array<std::optional<double>, 4> validate_judge(
    const std::vector<JudgeValidationRecord>& records) {
  std::array<std::vector<double>, 4> humans;
  std::array<std::vector<double>, 4> llms;
  for (const JudgeValidationRecord& record : records) {
    if (record.human_scores.empty()) {
      fail(ErrorKind::EmptyInput, "no annotator scores for " + record.question_id);
    }
    const auto type = static_cast<std::size_t>(record.reasoning_type);
    humans[type].push_back(median(record.human_scores));
    llms[type].push_back(record.llm_score);
  }
  std::array<std::optional<double>, 4> correlations;
  for (std::size_t type = 0; type < 4; ++type) {
    if (humans[type].size() < 2) continue;
    try {
      correlations[type] = pearson(humans[type], llms[type]);
    } catch (const Error& error) {
      if (error.kind() != ErrorKind::ConstantInput) throw;
    }
  }
  return correlations;
}

// ---- file formats ----

inline std::vector<BenchQuestion> read_question_bank(const std::filesystem::path& path) {
  std::vector<BenchQuestion> questions;
  for (const Json& record : read_jsonl(path)) {
    BenchQuestion question;
    for (const char* key : {"id", "task", "type", "split", "image", "question", "reference"}) {
      if (!record.contains(key) || !record[key].is_string() ||
          record[key].get<std::string>().empty()) {
        fail(ErrorKind::MalformedRecord,
             path.string() + ": question needs non-empty string '" + std::string(key) + "'");
      }
    }
    question.id = record["id"].get<std::string>();
    question.task_id = record["task"].get<std::string>();
    question.reasoning_type = parse_reasoning_type(record["type"].get<std::string>());
    question.split = parse_split(record["split"].get<std::string>());
    question.image_ref = record["image"].get<std::string>();
    question.question = record["question"].get<std::string>();
    question.reference_answer = record["reference"].get<std::string>();
    questions.push_back(std::move(question));
  }
  return questions;
}

inline Json sampled_answer_to_json(const SampledAnswer& answer) {
  Json record;
  record["id"] = answer.question_id;
  record["raw"] = answer.raw_text;
  record["answer"] = answer.extracted_answer;
  record["answered"] = answer.answered;
  if (!answer.error.empty()) record["error"] = answer.error;
  return record;
}

inline SampledAnswer sampled_answer_from_json(const Json& record) {
  SampledAnswer answer;
  answer.question_id = record.at("id").get<std::string>();
  answer.raw_text = record.at("raw").get<std::string>();
  answer.extracted_answer = record.at("answer").get<std::string>();
  answer.answered = record.at("answered").get<bool>();
  if (record.contains("error")) answer.error = record["error"].get<std::string>();
  return answer;
}

inline Json judge_record_to_json(const JudgeRecord& record) {
  Json out;
  out["id"] = record.question_id;
  out["model_answer"] = record.model_answer;
  out["score"] = record.score;
  out["reason"] = record.reason;
  out["judge_raw"] = record.judge_raw;
  if (!record.error.empty()) out["error"] = record.error;
  return out;
}

inline JudgeRecord judge_record_from_json(const Json& record) {
  JudgeRecord out;
  out.question_id = record.at("id").get<std::string>();
  out.model_answer = record.at("model_answer").get<std::string>();
  out.score = record.at("score").get<int>();
  out.reason = record.at("reason").get<std::string>();
  out.judge_raw = record.at("judge_raw").get<std::string>();
  if (record.contains("error")) out.error = record["error"].get<std::string>();
  out.ok = out.error.empty();
  return out;
}

/// Two sections: the split table (In/Out/Avg per type, an "overall" row
/// last) and the per-type summary table.
inline void write_report_csv(const std::filesystem::path& path, const BenchReport& report,
                             const std::string& header_comment) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::MissingFile, "cannot write " + path.string());
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  auto cell_mean = [](const BenchCell& cell) {
    if (cell.count == 0) return std::string();
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", cell.mean());
    return std::string(buf);
  };
  out << "type,in_mean,in_count,out_mean,out_count,avg_mean,avg_count\n";
  for (ReasoningType type : kReasoningTypes) {
    out << reasoning_type_name(type) << "," << cell_mean(report.in_cell(type)) << ","
        << report.in_cell(type).count << "," << cell_mean(report.out_cell(type)) << ","
        << report.out_cell(type).count << "," << cell_mean(report.type_cell(type)) << ","
        << report.type_cell(type).count << "\n";
  }
  out << "overall,,,,," << cell_mean(report.overall) << "," << report.overall.count << "\n";
  out << "\n";
  out << "type,mean,count\n";
  for (ReasoningType type : kReasoningTypes) {
    out << reasoning_type_name(type) << "," << cell_mean(report.type_cell(type)) << ","
        << report.type_cell(type).count << "\n";
  }
}

inline std::vector<JudgeValidationRecord> read_validation_records(
    const std::filesystem::path& path) {
  std::vector<JudgeValidationRecord> records;
  for (const Json& record : read_jsonl(path)) {
    JudgeValidationRecord out;
    out.question_id = record.at("id").get<std::string>();
    out.reasoning_type = parse_reasoning_type(record.at("type").get<std::string>());
    out.human_scores = record.at("human").get<std::vector<double>>();
    out.llm_score = record.at("llm").get<double>();
    records.push_back(std::move(out));
  }
  return records;
}

/// Single-row table mirroring the published correlation layout.
inline void write_validation_csv(const std::filesystem::path& path,
                                 const std::array<std::optional<double>, 4>& correlations,
                                 const std::string& header_comment) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::MissingFile, "cannot write " + path.string());
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  out << "metric,planning,high_level_action,movement,spatial\n";
  out << "pearson";
  for (std::size_t type = 0; type < 4; ++type) {
    out << ",";
    if (correlations[type]) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.10g", *correlations[type]);
      out << buf;
    } else {
      out << "undefined";
    }
  }
  out << "\n";
}

}  // namespace robotr1
