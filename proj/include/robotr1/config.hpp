#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "robotr1/advantages.hpp"
#include "robotr1/bench.hpp"
#include "robotr1/error.hpp"
#include "robotr1/keypoints.hpp"
#include "robotr1/qa_gen.hpp"
#include "robotr1/rng.hpp"
#include "robotr1/state_format.hpp"
#include "robotr1/train.hpp"

namespace robotr1 {

/// Flat key=value configuration. '#' starts a comment; blank lines are
/// skipped; later assignments (and flag overrides) win.
class ConfigMap {
 public:
  static ConfigMap parse_text(const std::string& text, const std::string& origin = "<config>") {
    ConfigMap config;
    std::istringstream in(text);
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
      ++line_number;
      if (const std::size_t hash = line.find('#'); hash != std::string::npos) {
        line.erase(hash);
      }
      const std::string stripped = trim(line);
      if (stripped.empty()) continue;
      const std::size_t eq = stripped.find('=');
      if (eq == std::string::npos || eq == 0) {
        fail(ErrorKind::ConfigInvalid,
             origin + ":" + std::to_string(line_number) + ": expected key = value");
      }
      const std::string key = trim(stripped.substr(0, eq));
      const std::string value = trim(stripped.substr(eq + 1));
      if (key.empty()) {
        fail(ErrorKind::ConfigInvalid, origin + ":" + std::to_string(line_number) + ": empty key");
      }
      config.values_[key] = value;
    }
    return config;
  }

  static ConfigMap parse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::ConfigInvalid, "cannot open config file " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_text(text.str(), path.string());
  }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_string(const std::string& key, const std::string& fallback = {}) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  long long get_int(const std::string& key, long long fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    long long value = 0;
    const char* begin = it->second.data();
    const char* end = begin + it->second.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
      fail(ErrorKind::ConfigInvalid, key + " must be an integer, got '" + it->second + "'");
    }
    return value;
  }

  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::uint64_t value = 0;
    const char* begin = it->second.data();
    const char* end = begin + it->second.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
      fail(ErrorKind::ConfigInvalid, key + " must be a non-negative integer, got '" + it->second + "'");
    }
    return value;
  }

  double get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    double value = 0.0;
    const char* begin = it->second.data();
    const char* end = begin + it->second.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
      fail(ErrorKind::ConfigInvalid, key + " must be a number, got '" + it->second + "'");
    }
    return value;
  }

  bool get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    fail(ErrorKind::ConfigInvalid, key + " must be true or false, got '" + it->second + "'");
  }

  /// Sorted key=value rendering; the hash of this string goes into every
  /// output header, so reruns with the same effective config match.
  std::string canonical() const {
    std::string out;
    for (const auto& [key, value] : values_) {
      out += key;
      out += '=';
      out += value;
      out += '\n';
    }
    return out;
  }

  std::string hash() const {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(canonical())));
    return buf;
  }

 private:
  std::map<std::string, std::string> values_;
};

inline GenConfig gen_config_from(const ConfigMap& config) {
  GenConfig gen;
  gen.frame_interval = static_cast<int>(config.get_int("data.frame_interval", gen.frame_interval));
  gen.distractors_per_item =
      static_cast<int>(config.get_int("data.distractors_per_item", gen.distractors_per_item));
  gen.min_distractor_separation =
      config.get_double("data.min_distractor_separation", gen.min_distractor_separation);
  gen.bounds_margin = config.get_double("data.bounds_margin", gen.bounds_margin);
  gen.seed = config.get_u64("seed", gen.seed);
  gen.validate();
  return gen;
}

inline KeypointParams keypoint_params_from(const ConfigMap& config) {
  KeypointParams params;
  params.speed_epsilon = config.get_double("keypoints.speed_epsilon", params.speed_epsilon);
  params.always_include_last =
      config.get_bool("keypoints.always_include_last", params.always_include_last);
  params.validate();
  return params;
}

inline TrainConfig train_config_from(const ConfigMap& config, bool toy_defaults) {
  TrainConfig train;
  if (toy_defaults) train.learning_rate = 1e-1;
  train.algorithm = parse_algorithm(config.get_string("train.algorithm", "grpo"));
  train.group_size = static_cast<int>(config.get_int("train.group_size", train.group_size));
  train.clip_epsilon = config.get_double("train.clip_epsilon", train.clip_epsilon);
  train.kl_beta = config.get_double("train.kl_beta", train.kl_beta);
  train.sampling_temperature =
      config.get_double("train.temperature", train.sampling_temperature);
  train.batch_size = static_cast<int>(config.get_int("train.batch_size", train.batch_size));
  train.rollout_batch_size =
      static_cast<int>(config.get_int("train.rollout_batch_size", train.rollout_batch_size));
  train.epochs = static_cast<int>(config.get_int("train.epochs", train.epochs));
  train.learning_rate = config.get_double("train.learning_rate", train.learning_rate);
  train.weight_decay = config.get_double("train.weight_decay", train.weight_decay);
  train.seed = config.get_u64("seed", train.seed);
  train.advantage_std_epsilon =
      config.get_double("train.advantage_std_epsilon", train.advantage_std_epsilon);
  train.validate();
  return train;
}

inline BenchOptions bench_options_from(const ConfigMap& config) {
  BenchOptions options;
  options.model = config.get_string("backend.model", options.model);
  options.judge_model = config.get_string("backend.judge_model", options.judge_model);
  options.temperature = config.get_double("bench.temperature", options.temperature);
  options.judge_temperature =
      config.get_double("bench.judge_temperature", options.judge_temperature);
  options.max_in_flight =
      static_cast<int>(config.get_int("backend.max_in_flight", options.max_in_flight));
  options.max_tokens = static_cast<int>(config.get_int("bench.max_tokens", options.max_tokens));
  if (options.max_in_flight < 1) fail(ErrorKind::ConfigInvalid, "backend.max_in_flight must be >= 1");
  return options;
}

}  // namespace robotr1
