#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "robotr1/error.hpp"
#include "robotr1/rewards.hpp"
#include "robotr1/rng.hpp"
#include "robotr1/state_format.hpp"
#include "robotr1/types.hpp"

namespace robotr1 {

/// Dense row-major matrix, just enough linear algebra for the toy
/// policies' weights and gradients.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

  void add_scaled(const Matrix& other, double scale) {
    for (std::size_t i = 0; i < data.size(); ++i) data[i] += scale * other.data[i];
  }

  void scale(double factor) {
    for (double& v : data) v *= factor;
  }

  bool finite() const {
    for (double v : data) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }
};

using FeatureMap = std::function<std::vector<double>(const std::string& query_id)>;

/// log softmax over logits/temperature, stabilized by max subtraction.
inline std::vector<double> log_softmax(const std::vector<double>& logits, double temperature) {
  std::vector<double> scaled(logits.size());
  double max_scaled = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < logits.size(); ++i) {
    scaled[i] = logits[i] / temperature;
    max_scaled = std::max(max_scaled, scaled[i]);
  }
  double sum = 0.0;
  for (double& v : scaled) {
    v -= max_scaled;
    sum += std::exp(v);
  }
  const double log_sum = std::log(sum);
  for (double& v : scaled) v -= log_sum;
  return scaled;
}

inline std::vector<double> softmax(const std::vector<double>& logits, double temperature) {
  std::vector<double> probs = log_softmax(logits, temperature);
  for (double& v : probs) v = std::exp(v);
  return probs;
}

struct PolicySample {
  std::string text;
  double logprob = 0.0;  // under the temperature-1 training measure
};

inline constexpr const char* kThinkStub = "weighing the options against the observation";

/// Linear-softmax policy over the four option letters. One decision per
/// response, so the sequence-level log-prob is exact.
class ToyCategoricalPolicy {
 public:
  Matrix weights;  // feature_dim x 4
  FeatureMap features;

  ToyCategoricalPolicy() = default;
  ToyCategoricalPolicy(int feature_dim, FeatureMap feature_map)
      : weights(feature_dim, 4), features(std::move(feature_map)) {}

  std::vector<double> logits(const std::string& query_id) const {
    const std::vector<double> phi = features(query_id);
    if (static_cast<int>(phi.size()) != weights.rows) {
      fail(ErrorKind::InvalidInput, "feature dimension mismatch");
    }
    std::vector<double> out(4, 0.0);
    for (int f = 0; f < weights.rows; ++f) {
      if (phi[static_cast<std::size_t>(f)] == 0.0) continue;
      for (int k = 0; k < 4; ++k) {
        out[static_cast<std::size_t>(k)] += weights.at(f, k) * phi[static_cast<std::size_t>(f)];
      }
    }
    return out;
  }

  static std::string render(int option) {
    return std::string("<think>") + kThinkStub + "</think><answer>[[" +
           static_cast<char>('A' + option) + "]]</answer>";
  }

  /// Extracts the option index a rendered response encodes.
  int parse_option(const std::string& response) const {
    const ParsedResponse parsed = parse_response(response);
    if (!parsed.valid_format) fail(ErrorKind::UnparseableResponse, "bad tag structure");
    std::string letter = parsed.answer;
    if (letter.size() == 5 && letter.rfind("[[", 0) == 0 && letter.substr(3) == "]]") {
      letter = letter.substr(2, 1);
    }
    if (letter.size() != 1 || letter[0] < 'A' || letter[0] > 'D') {
      fail(ErrorKind::UnparseableResponse, "no option letter in '" + parsed.answer + "'");
    }
    return letter[0] - 'A';
  }

  std::vector<PolicySample> generate(const std::string& query_id, int n, double temperature,
                                     Rng& rng) const {
    if (!(temperature > 0)) fail(ErrorKind::ConfigInvalid, "temperature must be > 0");
    const std::vector<double> all_logits = logits(query_id);
    const std::vector<double> sampling_probs = softmax(all_logits, temperature);
    const std::vector<double> train_logprobs = log_softmax(all_logits, 1.0);
    std::vector<PolicySample> samples;
    samples.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const double u = rng.uniform01();
      double cumulative = 0.0;
      int option = 3;
      for (int k = 0; k < 4; ++k) {
        cumulative += sampling_probs[static_cast<std::size_t>(k)];
        if (u < cumulative) {
          option = k;
          break;
        }
      }
      samples.push_back({render(option), train_logprobs[static_cast<std::size_t>(option)]});
    }
    return samples;
  }

  double logprob(const std::string& query_id, const std::string& response) const {
    const int option = parse_option(response);
    return log_softmax(logits(query_id), 1.0)[static_cast<std::size_t>(option)];
  }

  /// d log pi(option|query) / dW = (onehot(option) - softmax(W phi)) outer phi.
  Matrix grad_logprob(const std::string& query_id, const std::string& response) const {
    const int option = parse_option(response);
    const std::vector<double> phi = features(query_id);
    const std::vector<double> probs = softmax(logits(query_id), 1.0);
    Matrix grad(weights.rows, weights.cols);
    for (int f = 0; f < weights.rows; ++f) {
      for (int k = 0; k < 4; ++k) {
        grad.at(f, k) = ((k == option ? 1.0 : 0.0) - probs[static_cast<std::size_t>(k)]) *
                        phi[static_cast<std::size_t>(f)];
      }
    }
    return grad;
  }

  int greedy_option(const std::string& query_id) const {
    const std::vector<double> all_logits = logits(query_id);
    int best = 0;
    for (int k = 1; k < 4; ++k) {
      if (all_logits[static_cast<std::size_t>(k)] > all_logits[static_cast<std::size_t>(best)]) {
        best = k;
      }
    }
    return best;
  }
};

/// Linear-Gaussian policy emitting a 3-vector answer. Samples are rounded
/// to display precision before the log-prob is taken, so the log-prob of a
/// rendered response equals the log-prob at generation time.
class ToyGaussianPolicy {
 public:
  Matrix weights;  // feature_dim x 3
  std::array<double, 3> sigma{0.05, 0.05, 0.05};
  FeatureMap features;

  ToyGaussianPolicy() = default;
  ToyGaussianPolicy(int feature_dim, FeatureMap feature_map)
      : weights(feature_dim, 3), features(std::move(feature_map)) {}

  Position3 mean(const std::string& query_id) const {
    const std::vector<double> phi = features(query_id);
    if (static_cast<int>(phi.size()) != weights.rows) {
      fail(ErrorKind::InvalidInput, "feature dimension mismatch");
    }
    Position3 out;
    for (int f = 0; f < weights.rows; ++f) {
      for (int axis = 0; axis < 3; ++axis) {
        out[axis] += weights.at(f, axis) * phi[static_cast<std::size_t>(f)];
      }
    }
    return out;
  }

  static std::string render(const Position3& value) {
    return std::string("<think>") + kThinkStub + "</think><answer>" + format_state(value) +
           "</answer>";
  }

  Position3 parse_value(const std::string& response) const {
    const ParsedResponse parsed = parse_response(response);
    if (!parsed.valid_format) fail(ErrorKind::UnparseableResponse, "bad tag structure");
    const auto value = parse_state(parsed.answer);
    if (!value) fail(ErrorKind::UnparseableResponse, "answer is not a 3-vector");
    return *value;
  }

  double logprob_of_value(const Position3& value, const Position3& mu) const {
    double total = 0.0;
    for (int axis = 0; axis < 3; ++axis) {
      const double z = (value[axis] - mu[axis]) / sigma[static_cast<std::size_t>(axis)];
      total += -0.5 * z * z - std::log(sigma[static_cast<std::size_t>(axis)]) -
               0.5 * std::log(2.0 * 3.14159265358979323846);
    }
    return total;
  }

  std::vector<PolicySample> generate(const std::string& query_id, int n, double temperature,
                                     Rng& rng) const {
    if (!(temperature > 0)) fail(ErrorKind::ConfigInvalid, "temperature must be > 0");
    const Position3 mu = mean(query_id);
    std::vector<PolicySample> samples;
    samples.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      Position3 value;
      for (int axis = 0; axis < 3; ++axis) {
        value[axis] = mu[axis] + std::sqrt(temperature) *
                                     sigma[static_cast<std::size_t>(axis)] * rng.normal();
      }
      value = round_to_display(value);
      samples.push_back({render(value), logprob_of_value(value, mu)});
    }
    return samples;
  }

  double logprob(const std::string& query_id, const std::string& response) const {
    return logprob_of_value(parse_value(response), mean(query_id));
  }

  /// d log N(v | W phi, sigma^2) / dW[f][axis] = (v - mu)/sigma^2 * phi[f].
  Matrix grad_logprob(const std::string& query_id, const std::string& response) const {
    const Position3 value = parse_value(response);
    const Position3 mu = mean(query_id);
    const std::vector<double> phi = features(query_id);
    Matrix grad(weights.rows, weights.cols);
    for (int f = 0; f < weights.rows; ++f) {
      for (int axis = 0; axis < 3; ++axis) {
        const double s = sigma[static_cast<std::size_t>(axis)];
        grad.at(f, axis) = (value[axis] - mu[axis]) / (s * s) * phi[static_cast<std::size_t>(f)];
      }
    }
    return grad;
  }
};

/// Free-function face of policy sampling: n (text, logprob) pairs,
/// deterministic in seed.
template <typename Policy>
std::vector<PolicySample> toy_generate(const Policy& policy, const std::string& query_id, int n,
                                       double temperature, std::uint64_t seed) {
  Rng rng(seed);
  return policy.generate(query_id, n, temperature, rng);
}

template <typename Policy>
Matrix toy_grad_logprob(const Policy& policy, const std::string& query_id,
                        const std::string& response) {
  return policy.grad_logprob(query_id, response);
}

/// One-hot feature map over a fixed query-id vocabulary.
inline FeatureMap one_hot_features(std::vector<std::string> query_ids) {
  auto index = std::make_shared<std::map<std::string, int>>();
  for (std::size_t i = 0; i < query_ids.size(); ++i) {
    (*index)[query_ids[i]] = static_cast<int>(i);
  }
  const int dim = static_cast<int>(query_ids.size());
  return [index, dim](const std::string& query_id) {
    std::vector<double> phi(static_cast<std::size_t>(dim), 0.0);
    auto it = index->find(query_id);
    if (it == index->end()) fail(ErrorKind::InvalidInput, "unknown query id " + query_id);
    phi[static_cast<std::size_t>(it->second)] = 1.0;
    return phi;
  };
}

inline nlohmann::ordered_json matrix_to_json(const Matrix& m) {
  nlohmann::ordered_json out;
  out["rows"] = m.rows;
  out["cols"] = m.cols;
  out["data"] = m.data;
  return out;
}

inline Matrix matrix_from_json(const nlohmann::ordered_json& in) {
  Matrix m(in.at("rows").get<int>(), in.at("cols").get<int>());
  m.data = in.at("data").get<std::vector<double>>();
  if (m.data.size() != static_cast<std::size_t>(m.rows) * static_cast<std::size_t>(m.cols)) {
    fail(ErrorKind::MalformedRecord, "matrix shape does not match data length");
  }
  return m;
}

}  // namespace robotr1
