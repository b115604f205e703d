#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "robotr1/error.hpp"
#include "robotr1/policy.hpp"
#include "robotr1/rng.hpp"

namespace robotr1 {

struct GenRequest {
  std::string model;
  std::string system_prompt;
  std::string user_text;
  std::optional<std::string> image_ref;
  double temperature = 0.0;
  int n = 1;
  int max_tokens = 1024;
  std::optional<std::uint64_t> seed;

  void validate() const {
    if (n < 1) fail(ErrorKind::BadRequest, "n must be >= 1");
    if (temperature < 0) fail(ErrorKind::BadRequest, "temperature must be >= 0");
  }
};

struct GenResponse {
  std::vector<std::string> texts;
  std::optional<std::vector<double>> logprobs;  // sequence-level, when provided
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual GenResponse generate(const GenRequest& request) = 0;
};

/// Whether an error class is worth retrying: timeouts and
/// 5xx-equivalents, never client errors.
inline bool is_transient(ErrorKind kind) {
  return kind == ErrorKind::Timeout || kind == ErrorKind::BackendUnavailable;
}

struct RetryPolicy {
  int max_attempts = 3;
  double base_delay_ms = 100.0;
  double max_delay_ms = 2000.0;
  std::uint64_t jitter_seed = 0;
};

/// Runs fn up to max_attempts times, sleeping uniform(0, min(base*2^k, max))
/// between attempts (full jitter), retrying transient errors only.
template <typename Fn>
auto with_retries(const RetryPolicy& policy, Fn&& fn) -> decltype(fn()) {
  Rng rng(mix_seed(policy.jitter_seed, 0x6a697474ull));
  for (int attempt = 0;; ++attempt) {
    try {
      return fn();
    } catch (const Error& error) {
      if (!is_transient(error.kind()) || attempt + 1 >= policy.max_attempts) throw;
      const double cap = std::min(policy.max_delay_ms,
                                  policy.base_delay_ms * static_cast<double>(1ull << attempt));
      const double delay_ms = rng.uniform(0.0, cap);
      std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(delay_ms));
    }
  }
}

namespace detail {

inline std::string base64_encode(const std::string& bytes) {
  static constexpr char alphabet[] =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  while (i + 3 <= bytes.size()) {
    const unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                       (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                       static_cast<unsigned char>(bytes[i + 2]);
    out += alphabet[(v >> 18) & 63];
    out += alphabet[(v >> 12) & 63];
    out += alphabet[(v >> 6) & 63];
    out += alphabet[v & 63];
    i += 3;
  }
  if (i + 1 == bytes.size()) {
    const unsigned v = static_cast<unsigned char>(bytes[i]) << 16;
    out += alphabet[(v >> 18) & 63];
    out += alphabet[(v >> 12) & 63];
    out += "==";
  } else if (i + 2 == bytes.size()) {
    const unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                       (static_cast<unsigned char>(bytes[i + 1]) << 8);
    out += alphabet[(v >> 18) & 63];
    out += alphabet[(v >> 12) & 63];
    out += alphabet[(v >> 6) & 63];
    out += "=";
  }
  return out;
}

/// Canonical wire body for a request; doubles as the cache key.
inline nlohmann::ordered_json request_body(const GenRequest& request) {
  nlohmann::ordered_json body;
  body["model"] = request.model;
  body["system_prompt"] = request.system_prompt;
  body["user_text"] = request.user_text;
  if (request.image_ref) {
    std::ifstream image(*request.image_ref, std::ios::binary);
    if (image) {
      std::string bytes((std::istreambuf_iterator<char>(image)),
                        std::istreambuf_iterator<char>());
      body["image_b64"] = base64_encode(bytes);
    } else {
      body["image_ref"] = *request.image_ref;
    }
  }
  body["temperature"] = request.temperature;
  body["n"] = request.n;
  body["max_tokens"] = request.max_tokens;
  if (request.seed) body["seed"] = *request.seed;
  return body;
}

}  // namespace detail

/// Test and offline backend driven by a caller-supplied handler.
class CannedBackend : public Backend {
 public:
  using Handler = std::function<GenResponse(const GenRequest&)>;

  explicit CannedBackend(Handler handler) : handler_(std::move(handler)) {}

  GenResponse generate(const GenRequest& request) override {
    request.validate();
    calls_.fetch_add(1);
    return handler_(request);
  }

  int calls() const { return calls_.load(); }

 private:
  Handler handler_;
  std::atomic<int> calls_{0};
};

/// In-process backend over a toy categorical policy. The request's
/// user_text is the policy query id; seed (or a hash of the query when
/// absent) makes sampling deterministic.
class ToyPolicyBackend : public Backend {
 public:
  explicit ToyPolicyBackend(ToyCategoricalPolicy policy) : policy_(std::move(policy)) {}

  GenResponse generate(const GenRequest& request) override {
    request.validate();
    const std::uint64_t seed =
        request.seed ? *request.seed : fnv1a64(request.user_text);
    // temperature 0 means greedy: sample at a tiny positive temperature
    const double temperature = request.temperature > 0 ? request.temperature : 1e-9;
    const std::vector<PolicySample> samples =
        toy_generate(policy_, request.user_text, request.n, temperature, seed);
    GenResponse response;
    std::vector<double> logprobs;
    for (const PolicySample& sample : samples) {
      response.texts.push_back(sample.text);
      logprobs.push_back(sample.logprob);
    }
    response.logprobs = std::move(logprobs);
    return response;
  }

 private:
  ToyCategoricalPolicy policy_;
};

/// Memoizing wrapper. A request is cacheable when its outcome is
/// reproducible: temperature 0, or an explicit seed. Concurrent identical
/// misses share one upstream call.
class CachingBackend : public Backend {
 public:
  explicit CachingBackend(std::shared_ptr<Backend> inner) : inner_(std::move(inner)) {}

  static bool cacheable(const GenRequest& request) {
    return request.temperature == 0.0 || request.seed.has_value();
  }

  GenResponse generate(const GenRequest& request) override {
    request.validate();
    if (!cacheable(request)) return inner_->generate(request);
    const std::string key = detail::request_body(request).dump();

    std::shared_future<GenResponse> waiting;
    std::promise<GenResponse> promise;
    {
      std::lock_guard<std::mutex> lock(mutex_);
      if (auto hit = done_.find(key); hit != done_.end()) return hit->second;
      if (auto pending = pending_.find(key); pending != pending_.end()) {
        waiting = pending->second;
      } else {
        pending_[key] = promise.get_future().share();
      }
    }
    if (waiting.valid()) return waiting.get();  // rethrows the owner's error

    try {
      GenResponse response = inner_->generate(request);
      promise.set_value(response);
      std::lock_guard<std::mutex> lock(mutex_);
      done_[key] = response;
      pending_.erase(key);
      return response;
    } catch (...) {
      promise.set_exception(std::current_exception());
      std::lock_guard<std::mutex> lock(mutex_);
      pending_.erase(key);
      throw;
    }
  }

  std::size_t cached_count() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return done_.size();
  }

 private:
  std::shared_ptr<Backend> inner_;
  mutable std::mutex mutex_;
  std::map<std::string, GenResponse> done_;
  std::map<std::string, std::shared_future<GenResponse>> pending_;
};

/// One batch slot: either a response or the error that killed it.
struct GenOutcome {
  bool ok = false;
  GenResponse response;
  ErrorKind error_kind = ErrorKind::BackendUnavailable;
  std::string error_message;
};

/// Index-aligned fan-out with at most max_in_flight concurrent calls.
/// A failing slot never aborts its siblings.
inline std::vector<GenOutcome> generate_batch(Backend& backend,
                                              const std::vector<GenRequest>& requests,
                                              int max_in_flight) {
  if (max_in_flight < 1) fail(ErrorKind::ConfigInvalid, "max_in_flight must be >= 1");
  std::vector<GenOutcome> outcomes(requests.size());
  if (requests.empty()) return outcomes;

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= requests.size()) return;
      try {
        outcomes[i].response = backend.generate(requests[i]);
        outcomes[i].ok = true;
      } catch (const Error& error) {
        outcomes[i].error_kind = error.kind();
        outcomes[i].error_message = error.what();
      } catch (const std::exception& error) {
        outcomes[i].error_kind = ErrorKind::BackendUnavailable;
        outcomes[i].error_message = error.what();
      }
    }
  };

  const std::size_t thread_count =
      std::min(static_cast<std::size_t>(max_in_flight), requests.size());
  std::vector<std::thread> workers;
  workers.reserve(thread_count);
  for (std::size_t t = 0; t < thread_count; ++t) workers.emplace_back(worker);
  for (std::thread& t : workers) t.join();
  return outcomes;
}

/// Env-variable wiring: R1_BACKEND_URL selects the remote backend,
/// R1_BACKEND_KEY authenticates, R1_MAX_IN_FLIGHT caps concurrency.
struct BackendEnv {
  std::string url;
  std::string key;
  int max_in_flight = 4;
};

inline BackendEnv backend_env() {
  BackendEnv env;
  if (const char* url = std::getenv("R1_BACKEND_URL")) env.url = url;
  if (const char* key = std::getenv("R1_BACKEND_KEY")) env.key = key;
  if (const char* raw = std::getenv("R1_MAX_IN_FLIGHT")) {
    const int value = std::atoi(raw);
    if (value < 1) fail(ErrorKind::ConfigInvalid, "R1_MAX_IN_FLIGHT must be >= 1");
    env.max_in_flight = value;
  }
  return env;
}

}  // namespace robotr1
