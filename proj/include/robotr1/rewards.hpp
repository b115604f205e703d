#pragma once

#include <algorithm>
#include <cctype>
#include <string>
#include <string_view>

#include "robotr1/state_format.hpp"
#include "robotr1/types.hpp"

namespace robotr1 {

struct ParsedResponse {
  std::string think;
  std::string answer;
  bool valid_format = false;
};

namespace detail {

inline std::size_t count_occurrences(std::string_view text, std::string_view needle) {
  std::size_t count = 0;
  for (std::size_t pos = text.find(needle); pos != std::string_view::npos;
       pos = text.find(needle, pos + needle.size())) {
    ++count;
  }
  return count;
}

inline bool all_whitespace(std::string_view text) {
  return std::all_of(text.begin(), text.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace detail

/// Valid iff the text is exactly: optional whitespace, one <think> block,
/// optional whitespace, one <answer> block, optional whitespace, with no
/// second occurrence of any tag. Inner texts come back trimmed; a
/// malformed response is a value (valid_format=false), not an error.
inline ParsedResponse parse_response(std::string_view text) {
  constexpr std::string_view kThinkOpen = "<think>";
  constexpr std::string_view kThinkClose = "</think>";
  constexpr std::string_view kAnswerOpen = "<answer>";
  constexpr std::string_view kAnswerClose = "</answer>";

  ParsedResponse parsed;
  for (std::string_view tag : {kThinkOpen, kThinkClose, kAnswerOpen, kAnswerClose}) {
    if (detail::count_occurrences(text, tag) != 1) return parsed;
  }
  const std::size_t think_open = text.find(kThinkOpen);
  const std::size_t think_close = text.find(kThinkClose);
  const std::size_t answer_open = text.find(kAnswerOpen);
  const std::size_t answer_close = text.find(kAnswerClose);
  if (!(think_open < think_close && think_close < answer_open && answer_open < answer_close)) {
    return parsed;
  }
  if (!detail::all_whitespace(text.substr(0, think_open))) return parsed;
  const std::size_t between = think_close + kThinkClose.size();
  if (!detail::all_whitespace(text.substr(between, answer_open - between))) return parsed;
  if (!detail::all_whitespace(text.substr(answer_close + kAnswerClose.size()))) return parsed;

  parsed.think = trim(text.substr(think_open + kThinkOpen.size(),
                                  think_close - think_open - kThinkOpen.size()));
  parsed.answer = trim(text.substr(answer_open + kAnswerOpen.size(),
                                   answer_close - answer_open - kAnswerOpen.size()));
  parsed.valid_format = true;
  return parsed;
}

inline double format_reward(const ParsedResponse& parsed, double weight = 1.0) {
  return parsed.valid_format ? weight : 0.0;
}

/// Full weight iff the format is valid and the answer is exactly "[[X]]"
/// or a bare "X" for the key letter (case-sensitive). No partial credit.
inline double mcqa_answer_reward(const ParsedResponse& parsed, char answer_letter,
                                 double weight = 1.0) {
  if (!parsed.valid_format) return 0.0;
  const std::string bracketed = std::string("[[") + answer_letter + "]]";
  if (parsed.answer == bracketed || parsed.answer == std::string(1, answer_letter)) return weight;
  return 0.0;
}

/// clip(1 - L1, 0, 1) against the truth state; 0 when the format is
/// invalid or the answer is not a parseable 3-vector.
inline double open_ended_reward(const ParsedResponse& parsed, const Position3& truth) {
  if (!parsed.valid_format) return 0.0;
  const auto predicted = parse_state(parsed.answer);
  if (!predicted) return 0.0;
  const double l1 = l1_distance(*predicted, truth);
  return std::clamp(1.0 - l1, 0.0, 1.0);
}

struct RewardBreakdown {
  double r_format = 0.0;
  double r_answer = 0.0;
  double total = 0.0;
};

inline RewardBreakdown composite_reward(double r_f, double r_a) {
  return {r_f, r_a, r_f + r_a};
}

inline RewardBreakdown score_mcqa_response(std::string_view text, char answer_letter,
                                           double format_weight = 1.0,
                                           double answer_weight = 1.0) {
  const ParsedResponse parsed = parse_response(text);
  return composite_reward(format_reward(parsed, format_weight),
                          mcqa_answer_reward(parsed, answer_letter, answer_weight));
}

inline RewardBreakdown score_open_ended_response(std::string_view text, const Position3& truth,
                                                 double format_weight = 1.0) {
  const ParsedResponse parsed = parse_response(text);
  return composite_reward(format_reward(parsed, format_weight),
                          open_ended_reward(parsed, truth));
}

}  // namespace robotr1
