#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ctxeval/llm.hpp"
#include "ctxeval/serialization.hpp"

namespace ctxeval {

/// One scripted behaviour. A rule applies when every selector it sets matches
/// the prompt; the first applicable rule wins.
struct MockRule {
  std::string match;                       // substring of the prompt ("" matches all)
  std::optional<std::string> suffix;       // prompt must end with this
  std::optional<std::uint64_t> prompt_hash;  // fnv1a of the full prompt
  /// Replies handed out in order for repeated calls with the same prompt,
  /// wrapping around at the end.
  std::vector<std::string> responses;
  /// "persistence": answer in the prompt's own format with the last history
  /// value plus Gaussian jitter (sd = jitter * history range).
  std::optional<std::string> generate;
  double jitter = 0.0;
};

std::vector<MockRule> mock_rules_from_json(const Json& script);

/// Deterministic endpoint for tests and offline runs.
///
/// Script JSON: an array of objects with keys "match" (or
/// "prompt_substring_match"), "suffix", "prompt_hash" (hex), "response",
/// "responses", "generate", "jitter".
class MockEndpoint : public CompletionEndpoint {
 public:
  explicit MockEndpoint(std::vector<MockRule> rules);

  static MockEndpoint from_json(const Json& script);
  static MockEndpoint from_file(const std::string& path);

  std::string complete(const CompletionRequest& request) override;

  /// Clears the per-prompt counters and the request log.
  void reset();
  [[nodiscard]] std::size_t calls() const;
  [[nodiscard]] std::vector<CompletionRequest> requests() const;

 private:
  std::vector<MockRule> rules_;
  mutable std::mutex mu_;
  std::map<std::pair<std::size_t, std::uint64_t>, std::size_t> counters_;
  std::vector<CompletionRequest> log_;
};

enum class HttpApi { chat, completions };

struct HttpEndpointConfig {
  /// e.g. "https://api.example.com/v1"; the request path is appended.
  std::string base_url;
  std::string model;
  HttpApi api = HttpApi::chat;
  /// Name of the environment variable holding the bearer token; empty for none.
  std::string api_key_env;
  std::size_t max_concurrent = 4;
  double min_interval_seconds = 0.0;
  double timeout_seconds = 120.0;

  void validate() const;
};

/// Chat/completions JSON client.
///
/// Request body: {"model", "messages": [{"role": "user", "content": prompt}]
/// (chat) or "prompt" (completions), "max_tokens", "temperature", "seed"
/// (when set), "stop" (when set)}. The reply text is read from
/// choices[0].message.content (chat) or choices[0].text (completions).
class HttpEndpoint : public CompletionEndpoint {
 public:
  explicit HttpEndpoint(HttpEndpointConfig config);

  std::string complete(const CompletionRequest& request) override;

  [[nodiscard]] const HttpEndpointConfig& config() const { return config_; }

 private:
  HttpEndpointConfig config_;
  std::string scheme_host_port_;
  std::string path_prefix_;
  std::string api_key_;

  std::mutex mu_;
  std::condition_variable cv_;
  std::size_t in_flight_ = 0;
  std::chrono::steady_clock::time_point next_start_{};
};

HttpEndpointConfig http_config_from_json(const Json& j);

/// {"type": "mock", "script": [...] | "script_file": path} or
/// {"type": "http", ...HttpEndpointConfig fields}.
std::unique_ptr<CompletionEndpoint> make_endpoint(const Json& j);

}  // namespace ctxeval
