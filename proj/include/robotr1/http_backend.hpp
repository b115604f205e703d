#pragma once

#include <chrono>
#include <string>
#include <utility>

#include <httplib.h>
#include <json.hpp>

#include "robotr1/backend.hpp"
#include "robotr1/error.hpp"

namespace robotr1 {

/// Remote backend speaking POST /v1/generate against a base URL like
/// "http://127.0.0.1:8080". Timeouts and 5xx answers are retried with
/// full-jitter backoff; 4xx answers are not.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(std::string base_url, std::string api_key = {}, RetryPolicy retry = {},
                       double timeout_seconds = 30.0)
      : base_url_(std::move(base_url)), api_key_(std::move(api_key)), retry_(retry),
        timeout_seconds_(timeout_seconds) {}

  GenResponse generate(const GenRequest& request) override {
    request.validate();
    const std::string body = detail::request_body(request).dump();
    return with_retries(retry_, [&]() { return post_once(body, request.n); });
  }

 private:
  GenResponse post_once(const std::string& body, int expected_n) {
    httplib::Client client(base_url_);
    const auto timeout = std::chrono::duration<double>(timeout_seconds_);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    httplib::Result result = client.Post("/v1/generate", headers, body, "application/json");
    if (!result) {
      if (result.error() == httplib::Error::ConnectionTimeout ||
          result.error() == httplib::Error::Read || result.error() == httplib::Error::Write) {
        fail(ErrorKind::Timeout, "no response from " + base_url_ + ": " +
                                     httplib::to_string(result.error()));
      }
      fail(ErrorKind::BackendUnavailable,
           "cannot reach " + base_url_ + ": " + httplib::to_string(result.error()));
    }
    if (result->status >= 500) {
      fail(ErrorKind::BackendUnavailable,
           base_url_ + " answered status " + std::to_string(result->status));
    }
    if (result->status >= 400) {
      fail(ErrorKind::BadRequest, base_url_ + " rejected the request with status " +
                                      std::to_string(result->status) + ": " + result->body);
    }

    const nlohmann::ordered_json parsed =
        nlohmann::ordered_json::parse(result->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object() || !parsed.contains("texts") ||
        !parsed["texts"].is_array()) {
      fail(ErrorKind::BadRequest, base_url_ + " returned a malformed response body");
    }
    GenResponse response;
    for (const auto& text : parsed["texts"]) response.texts.push_back(text.get<std::string>());
    if (static_cast<int>(response.texts.size()) != expected_n) {
      fail(ErrorKind::BadRequest, "backend returned " + std::to_string(response.texts.size()) +
                                      " texts, expected " + std::to_string(expected_n));
    }
    if (parsed.contains("logprobs") && parsed["logprobs"].is_array()) {
      response.logprobs = parsed["logprobs"].get<std::vector<double>>();
    }
    return response;
  }

  std::string base_url_;
  std::string api_key_;
  RetryPolicy retry_;
  double timeout_seconds_;
};

}  // namespace robotr1
