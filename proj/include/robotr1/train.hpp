#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "robotr1/advantages.hpp"
#include "robotr1/error.hpp"
#include "robotr1/jsonl.hpp"
#include "robotr1/policy.hpp"
#include "robotr1/qa_gen.hpp"
#include "robotr1/rewards.hpp"
#include "robotr1/rng.hpp"

namespace robotr1 {

struct TrainConfig {
  Algorithm algorithm = Algorithm::grpo;
  int group_size = 5;             // G
  double clip_epsilon = 0.2;      // epsilon
  double kl_beta = 0.01;          // beta
  double sampling_temperature = 1.0;
  int batch_size = 128;           // queries per gradient step
  int rollout_batch_size = 512;   // queries per frozen old-policy snapshot
  int epochs = 5;
  double learning_rate = 1e-6;    // external-trainer default; toy runs want ~1e-1
  double weight_decay = 1e-2;
  std::uint64_t seed = 0;
  double advantage_std_epsilon = 1e-8;

  void validate() const {
    if (group_size < 2) fail(ErrorKind::ConfigInvalid, "group_size must be >= 2");
    if (!(clip_epsilon > 0 && clip_epsilon < 1)) {
      fail(ErrorKind::ConfigInvalid, "clip_epsilon must be in (0, 1)");
    }
    if (kl_beta < 0) fail(ErrorKind::ConfigInvalid, "kl_beta must be >= 0");
    if (!(sampling_temperature > 0)) fail(ErrorKind::ConfigInvalid, "temperature must be > 0");
    if (batch_size < 1 || rollout_batch_size < 1 || epochs < 1) {
      fail(ErrorKind::ConfigInvalid, "batch_size, rollout_batch_size, epochs must be >= 1");
    }
    if (!(learning_rate > 0)) fail(ErrorKind::ConfigInvalid, "learning_rate must be > 0");
    if (weight_decay < 0) fail(ErrorKind::ConfigInvalid, "weight_decay must be >= 0");
    if (advantage_std_epsilon <= 0) {
      fail(ErrorKind::ConfigInvalid, "advantage_std_epsilon must be > 0");
    }
  }
};

/// One query's G sampled responses with the log-probs the objective needs.
struct RolloutGroup {
  std::string query_id;
  std::vector<std::string> responses;
  std::vector<double> logprob_old;
  std::vector<double> logprob_ref;
  std::vector<double> logprob_cur;
  std::vector<double> rewards;
  std::vector<double> advantages;
};

/// Fills group advantages in place. REINFORCE++ normalizes across the
/// whole batch of groups; the others work per group.
inline void compute_advantages(std::vector<RolloutGroup>& groups, Algorithm algorithm,
                               double eps) {
  if (algorithm == Algorithm::reinforcepp) {
    std::vector<double> flat;
    for (const RolloutGroup& group : groups) {
      flat.insert(flat.end(), group.rewards.begin(), group.rewards.end());
    }
    const std::vector<double> advantages = reinforcepp_advantages(flat, eps);
    std::size_t offset = 0;
    for (RolloutGroup& group : groups) {
      group.advantages.assign(advantages.begin() + static_cast<std::ptrdiff_t>(offset),
                              advantages.begin() +
                                  static_cast<std::ptrdiff_t>(offset + group.rewards.size()));
      offset += group.rewards.size();
    }
    return;
  }
  for (RolloutGroup& group : groups) {
    group.advantages = algorithm == Algorithm::grpo ? grpo_advantages(group.rewards, eps)
                                                    : rloo_advantages(group.rewards);
  }
}

/// (1/G) sum_i [clipped surrogate_i - beta * kl_i].
inline double objective(const RolloutGroup& group, const TrainConfig& cfg) {
  const std::size_t g = group.responses.size();
  if (g == 0) fail(ErrorKind::EmptyInput, "empty rollout group");
  double total = 0.0;
  for (std::size_t i = 0; i < g; ++i) {
    total += clipped_surrogate(group.logprob_cur[i], group.logprob_old[i], group.advantages[i],
                               cfg.clip_epsilon) -
             cfg.kl_beta * kl_value(group.logprob_cur[i], group.logprob_ref[i]);
  }
  return total / static_cast<double>(g);
}

struct StepMetrics {
  int step = 0;
  double mean_reward = 0.0;
  double mean_kl = 0.0;
  double clip_fraction = 0.0;
  double objective = 0.0;
  double mean_response_chars = 0.0;
};

/// One gradient-ascent update on the mean objective over the given groups,
/// with decoupled weight decay. logprob_cur is refreshed under the live
/// policy first; the returned metrics describe the pre-update policy.
template <typename Policy>
StepMetrics train_step(Policy& policy, std::vector<RolloutGroup>& groups,
                       const TrainConfig& cfg) {
  if (groups.empty()) fail(ErrorKind::EmptyInput, "train_step needs at least one group");
  Matrix gradient(policy.weights.rows, policy.weights.cols);
  StepMetrics metrics;
  std::size_t responses = 0;
  std::size_t clipped = 0;
  double objective_sum = 0.0;

  for (RolloutGroup& group : groups) {
    const std::size_t g = group.responses.size();
    group.logprob_cur.resize(g);
    const double group_scale = 1.0 / (static_cast<double>(groups.size()) * static_cast<double>(g));
    for (std::size_t i = 0; i < g; ++i) {
      if (!std::isfinite(group.rewards[i]) || !std::isfinite(group.advantages[i])) {
        fail(ErrorKind::NonFiniteGradient, "non-finite reward or advantage");
      }
      group.logprob_cur[i] = policy.logprob(group.query_id, group.responses[i]);
      const double surrogate_coeff =
          surrogate_grad_coefficient(group.logprob_cur[i], group.logprob_old[i],
                                     group.advantages[i], cfg.clip_epsilon);
      const double kl_coeff = kl_grad_coefficient(group.logprob_cur[i], group.logprob_ref[i]);
      const double coeff = surrogate_coeff - cfg.kl_beta * kl_coeff;
      if (coeff != 0.0) {
        gradient.add_scaled(policy.grad_logprob(group.query_id, group.responses[i]),
                            coeff * group_scale);
      }

      const double ratio = std::exp(group.logprob_cur[i] - group.logprob_old[i]);
      const double clipped_ratio = std::clamp(ratio, 1.0 - cfg.clip_epsilon, 1.0 + cfg.clip_epsilon);
      if (ratio * group.advantages[i] > clipped_ratio * group.advantages[i]) ++clipped;
      metrics.mean_reward += group.rewards[i];
      metrics.mean_kl += kl_value(group.logprob_cur[i], group.logprob_ref[i]);
      metrics.mean_response_chars += static_cast<double>(group.responses[i].size());
      ++responses;
    }
    objective_sum += objective(group, cfg);
  }

  if (!gradient.finite()) fail(ErrorKind::NonFiniteGradient, "gradient has non-finite entries");
  // decoupled weight decay, then the ascent step
  policy.weights.scale(1.0 - cfg.learning_rate * cfg.weight_decay);
  policy.weights.add_scaled(gradient, cfg.learning_rate);
  if (!policy.weights.finite()) fail(ErrorKind::NonFiniteGradient, "weights left finite range");

  metrics.mean_reward /= static_cast<double>(responses);
  metrics.mean_kl /= static_cast<double>(responses);
  metrics.mean_response_chars /= static_cast<double>(responses);
  metrics.clip_fraction = static_cast<double>(clipped) / static_cast<double>(responses);
  metrics.objective = objective_sum / static_cast<double>(groups.size());
  return metrics;
}

using RewardFn = std::function<double(const McqaItem& item, const std::string& response)>;

inline double mcqa_reward_fn(const McqaItem& item, const std::string& response) {
  return score_mcqa_response(response, item.answer_letter()).total;
}

/// Full loop: epochs over the dataset, old policy frozen per rollout
/// batch, advantages per cfg.algorithm, one train_step per mini-batch.
/// Strictly serial, so the history is a pure function of (inputs, seed).
template <typename Policy>
std::vector<StepMetrics> train(const std::vector<McqaItem>& dataset, Policy& policy,
                               const RewardFn& reward_fn, const TrainConfig& cfg) {
  cfg.validate();
  if (dataset.empty()) fail(ErrorKind::EmptyInput, "empty training dataset");
  const Policy reference = policy;  // KL anchors to the initial snapshot
  Rng rng(mix_seed(cfg.seed, 0x726f6c6c6f7574ull));  // sampling stream

  std::vector<StepMetrics> history;
  int step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t rollout_start = 0; rollout_start < dataset.size();
         rollout_start += static_cast<std::size_t>(cfg.rollout_batch_size)) {
      const std::size_t rollout_end =
          std::min(dataset.size(), rollout_start + static_cast<std::size_t>(cfg.rollout_batch_size));
      const Policy old_policy = policy;  // frozen for this rollout batch

      std::vector<RolloutGroup> groups;
      groups.reserve(rollout_end - rollout_start);
      for (std::size_t q = rollout_start; q < rollout_end; ++q) {
        const McqaItem& item = dataset[q];
        RolloutGroup group;
        group.query_id = item.id;
        for (PolicySample& sample :
             old_policy.generate(item.id, cfg.group_size, cfg.sampling_temperature, rng)) {
          group.logprob_old.push_back(sample.logprob);
          group.logprob_ref.push_back(reference.logprob(item.id, sample.text));
          group.rewards.push_back(reward_fn(item, sample.text));
          group.responses.push_back(std::move(sample.text));
        }
        groups.push_back(std::move(group));
      }
      compute_advantages(groups, cfg.algorithm, cfg.advantage_std_epsilon);

      for (std::size_t batch_start = 0; batch_start < groups.size();
           batch_start += static_cast<std::size_t>(cfg.batch_size)) {
        const std::size_t batch_end =
            std::min(groups.size(), batch_start + static_cast<std::size_t>(cfg.batch_size));
        std::vector<RolloutGroup> batch(groups.begin() + static_cast<std::ptrdiff_t>(batch_start),
                                        groups.begin() + static_cast<std::ptrdiff_t>(batch_end));
        StepMetrics metrics = train_step(policy, batch, cfg);
        metrics.step = step++;
        history.push_back(metrics);
      }
    }
  }
  return history;
}

inline double greedy_accuracy(const ToyCategoricalPolicy& policy,
                              const std::vector<McqaItem>& dataset) {
  if (dataset.empty()) fail(ErrorKind::EmptyInput, "empty dataset");
  std::size_t correct = 0;
  for (const McqaItem& item : dataset) {
    if (policy.greedy_option(item.id) == item.answer_index) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

inline void write_metrics_csv(const std::filesystem::path& path,
                              const std::vector<StepMetrics>& history,
                              const std::string& header_comment = {}) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::MissingFile, "cannot write " + path.string());
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  out << "step,mean_reward,mean_kl,clip_fraction,objective,mean_response_chars\n";
  char line[256];
  for (const StepMetrics& m : history) {
    std::snprintf(line, sizeof(line), "%d,%.10g,%.10g,%.10g,%.10g,%.10g\n", m.step, m.mean_reward,
                  m.mean_kl, m.clip_fraction, m.objective, m.mean_response_chars);
    out << line;
  }
}

/// Synthetic contextual bandit: n one-hot contexts, each with a fixed
/// correct letter. The smallest dataset that exercises the entire loop.
inline std::vector<McqaItem> make_bandit_dataset(int contexts, std::uint64_t seed) {
  if (contexts < 1) fail(ErrorKind::ConfigInvalid, "contexts must be >= 1");
  Rng rng(mix_seed(seed, 0xba4d17ull));
  std::vector<McqaItem> items;
  items.reserve(static_cast<std::size_t>(contexts));
  for (int c = 0; c < contexts; ++c) {
    McqaItem item;
    item.id = "bandit:" + std::to_string(c);
    item.task_id = "bandit";
    item.qa_type = QaType::waypoint;
    item.answer_index = static_cast<int>(rng.uniform_int(4));
    item.options = {"option one", "option two", "option three", "option four"};
    item.seed = mix_seed(seed, fnv1a64(item.id));
    items.push_back(std::move(item));
  }
  return items;
}

inline ToyCategoricalPolicy make_bandit_policy(const std::vector<McqaItem>& dataset) {
  std::vector<std::string> ids;
  ids.reserve(dataset.size());
  for (const McqaItem& item : dataset) ids.push_back(item.id);
  const int dim = static_cast<int>(ids.size());
  return ToyCategoricalPolicy(dim, one_hot_features(std::move(ids)));
}

/// Rollout exchange records -> same records with `advantage` filled.
inline void export_advantages(const std::filesystem::path& input,
                              const std::filesystem::path& output, const TrainConfig& cfg,
                              const std::string& config_hash) {
  cfg.validate();
  const std::vector<Json> records = read_jsonl(input);
  std::vector<std::vector<double>> reward_groups;
  reward_groups.reserve(records.size());
  for (std::size_t r = 0; r < records.size(); ++r) {
    const Json& record = records[r];
    const std::string where = input.string() + " record " + std::to_string(r + 1);
    if (!record.is_object() || !record.contains("query_id") || !record.contains("rewards")) {
      fail(ErrorKind::MalformedRecord, where + ": expected query_id and rewards");
    }
    const auto& rewards = record["rewards"];
    if (!rewards.is_array() || static_cast<int>(rewards.size()) != cfg.group_size) {
      fail(ErrorKind::MalformedRecord,
           where + ": rewards length must equal group_size " + std::to_string(cfg.group_size));
    }
    for (const char* key : {"logprob_old", "logprob_ref", "logprob_cur"}) {
      if (record.contains(key) && static_cast<int>(record[key].size()) != cfg.group_size) {
        fail(ErrorKind::MalformedRecord, where + ": " + key + " length mismatch");
      }
    }
    reward_groups.push_back(rewards.get<std::vector<double>>());
  }

  std::vector<std::vector<double>> advantage_groups(reward_groups.size());
  if (cfg.algorithm == Algorithm::reinforcepp) {
    std::vector<double> flat;
    for (const auto& group : reward_groups) flat.insert(flat.end(), group.begin(), group.end());
    const std::vector<double> advantages = reinforcepp_advantages(flat, cfg.advantage_std_epsilon);
    std::size_t offset = 0;
    for (std::size_t r = 0; r < reward_groups.size(); ++r) {
      advantage_groups[r].assign(
          advantages.begin() + static_cast<std::ptrdiff_t>(offset),
          advantages.begin() + static_cast<std::ptrdiff_t>(offset + reward_groups[r].size()));
      offset += reward_groups[r].size();
    }
  } else {
    for (std::size_t r = 0; r < reward_groups.size(); ++r) {
      advantage_groups[r] = cfg.algorithm == Algorithm::grpo
                                ? grpo_advantages(reward_groups[r], cfg.advantage_std_epsilon)
                                : rloo_advantages(reward_groups[r]);
    }
  }

  std::vector<Json> out_records;
  out_records.reserve(records.size());
  for (std::size_t r = 0; r < records.size(); ++r) {
    Json record = records[r];
    record["advantage"] = advantage_groups[r];
    out_records.push_back(std::move(record));
  }
  write_jsonl(output, make_header_record("export-advantages", config_hash, cfg.seed), out_records);
}

}  // namespace robotr1
