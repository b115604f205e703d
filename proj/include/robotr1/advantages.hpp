#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "robotr1/error.hpp"

namespace robotr1 {

enum class Algorithm { grpo, rloo, reinforcepp };

inline std::string_view algorithm_name(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::grpo: return "grpo";
    case Algorithm::rloo: return "rloo";
    case Algorithm::reinforcepp: return "reinforcepp";
  }
  return "grpo";
}

inline Algorithm parse_algorithm(std::string_view name) {
  if (name == "grpo") return Algorithm::grpo;
  if (name == "rloo") return Algorithm::rloo;
  if (name == "reinforcepp") return Algorithm::reinforcepp;
  fail(ErrorKind::ConfigInvalid, "unknown algorithm '" + std::string(name) + "'");
}

namespace detail {

inline double mean_of(const std::vector<double>& values) {
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

inline double population_std(const std::vector<double>& values, double mean) {
  double sum_sq = 0.0;
  for (double v : values) sum_sq += (v - mean) * (v - mean);
  return std::sqrt(sum_sq / static_cast<double>(values.size()));
}

}  // namespace detail

/// Group-relative advantages: (r_i - mean) / (popstd + eps). A constant
/// group comes back exactly zero.
inline std::vector<double> grpo_advantages(const std::vector<double>& rewards,
                                           double eps = 1e-8) {
  if (rewards.size() < 2) fail(ErrorKind::InvalidInput, "group size must be >= 2");
  const double mean = detail::mean_of(rewards);
  const double stddev = detail::population_std(rewards, mean);
  std::vector<double> advantages(rewards.size());
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    advantages[i] = (rewards[i] - mean) / (stddev + eps);
  }
  return advantages;
}

/// Leave-one-out baseline: A_i = r_i - mean of the other rewards.
inline std::vector<double> rloo_advantages(const std::vector<double>& rewards) {
  if (rewards.size() < 2) fail(ErrorKind::InvalidInput, "group size must be >= 2");
  const double total = std::accumulate(rewards.begin(), rewards.end(), 0.0);
  const double denom = static_cast<double>(rewards.size() - 1);
  std::vector<double> advantages(rewards.size());
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    advantages[i] = rewards[i] - (total - rewards[i]) / denom;
  }
  return advantages;
}

/// Batch-level z-score with no group structure. Groups with identical
/// rewards still get nonzero advantages when the batch varies, the
/// behavioral difference from per-group normalization.
inline std::vector<double> reinforcepp_advantages(const std::vector<double>& batch_rewards,
                                                  double eps = 1e-8) {
  if (batch_rewards.size() < 2) fail(ErrorKind::InvalidInput, "batch size must be >= 2");
  return grpo_advantages(batch_rewards, eps);
}

/// Non-negative KL estimate from single-sample log-probs:
/// exp(delta) - delta - 1 with delta = logp_ref - logp_cur. Zero iff equal.
inline double kl_value(double logp_cur, double logp_ref) {
  if (!std::isfinite(logp_cur) || !std::isfinite(logp_ref)) {
    fail(ErrorKind::InvalidInput, "kl_value requires finite log-probs");
  }
  const double delta = logp_ref - logp_cur;
  return std::exp(delta) - delta - 1.0;
}

/// min(rho*A, clip(rho, 1-eps, 1+eps)*A) with rho the likelihood ratio.
inline double clipped_surrogate(double logp_cur, double logp_old, double advantage,
                                double eps_clip) {
  const double ratio = std::exp(logp_cur - logp_old);
  const double clipped = std::clamp(ratio, 1.0 - eps_clip, 1.0 + eps_clip);
  return std::min(ratio * advantage, clipped * advantage);
}

/// Derivative of the surrogate w.r.t. logp_cur divided by d(logp_cur),
/// i.e. the coefficient multiplying the score-function gradient. Zero when
/// the clipped branch is active (its ratio does not depend on logp_cur).
inline double surrogate_grad_coefficient(double logp_cur, double logp_old, double advantage,
                                         double eps_clip) {
  const double ratio = std::exp(logp_cur - logp_old);
  const double clipped = std::clamp(ratio, 1.0 - eps_clip, 1.0 + eps_clip);
  return ratio * advantage <= clipped * advantage ? ratio * advantage : 0.0;
}

/// d(kl_value)/d(logp_cur) = 1 - exp(delta).
inline double kl_grad_coefficient(double logp_cur, double logp_ref) {
  return 1.0 - std::exp(logp_ref - logp_cur);
}

}  // namespace robotr1
