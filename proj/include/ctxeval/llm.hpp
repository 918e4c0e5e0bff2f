#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ctxeval/scoring.hpp"
#include "ctxeval/tasks.hpp"

namespace ctxeval {

struct CompletionRequest {
  std::string prompt;
  std::optional<std::string> stop;
  std::size_t max_tokens = 1024;
  double temperature = 1.0;
  std::optional<std::uint64_t> seed;
};

/// Text-completion boundary. Implementations must be safe to call from
/// several threads at once.
class CompletionEndpoint {
 public:
  virtual ~CompletionEndpoint() = default;
  /// Throws EndpointError on transport or protocol failures.
  virtual std::string complete(const CompletionRequest& request) = 0;
};

struct RetryPolicy {
  std::size_t max_attempts_per_sample = 10;
  std::size_t samples_required = 25;

  void validate() const;
};

struct LlmOptions {
  double temperature = 1.0;
  std::size_t direct_max_tokens = 4096;
  std::size_t llmp_max_tokens = 24;
  bool allow_scientific = false;
};

enum class RejectReason {
  missing_tags,
  extra_content,
  wrong_count,
  timestamp_mismatch,
  bad_number,
  endpoint_error,
};

std::string_view reject_reason_name(RejectReason r);

/// Raised when some sample could not be obtained within the retry budget.
class ForecastFailure : public std::runtime_error {
 public:
  ForecastFailure(const std::string& what, std::map<std::string, std::size_t> histogram,
                  std::size_t attempts, std::string last_reason)
      : std::runtime_error(what),
        histogram_(std::move(histogram)),
        attempts_(attempts),
        last_reason_(std::move(last_reason)) {}

  /// Rejection reason -> count over every attempt of the forecast.
  [[nodiscard]] const std::map<std::string, std::size_t>& histogram() const { return histogram_; }
  [[nodiscard]] std::size_t attempts() const { return attempts_; }
  [[nodiscard]] const std::string& last_reason() const { return last_reason_; }

 private:
  std::map<std::string, std::size_t> histogram_;
  std::size_t attempts_;
  std::string last_reason_;
};

/// Fixed 4 decimals with trailing zeros removed: 0.1, 12, -3.25.
std::string format_value(double v);

/// True when `text` is a plain decimal number (optional sign, digits,
/// optional fraction). Scientific notation only when `allow_scientific`.
bool is_decimal(std::string_view text, bool allow_scientific = false);

// Direct Prompt -------------------------------------------------------------

std::string direct_prompt_render(const TaskInstance& instance);

struct ParseOutcome {
  std::vector<double> values;
  std::optional<RejectReason> reason;  // empty on success
  std::string detail;

  [[nodiscard]] bool ok() const { return !reason.has_value(); }
};

ParseOutcome direct_prompt_parse(std::string_view completion,
                                 const std::vector<Timestamp>& expected,
                                 bool allow_scientific = false);

/// Collects policy.samples_required trajectories, retrying each sample up to
/// max_attempts_per_sample times. All samples are attempted before a
/// ForecastFailure is raised.
ForecastEnsemble direct_prompt_forecast(CompletionEndpoint& endpoint, const TaskInstance& instance,
                                        const RetryPolicy& policy, std::uint64_t seed,
                                        const LlmOptions& options = {});

// LLMP ----------------------------------------------------------------------

std::string llmp_render(const TaskInstance& instance);

/// Value from one autoregressive completion: text up to the first newline,
/// surrounding whitespace removed, must be a decimal.
std::optional<double> llmp_parse_value(std::string_view completion, bool allow_scientific = false);

/// One completion per future step with stop="\n"; a rejected step is retried
/// up to max_attempts_per_sample times.
ForecastEnsemble llmp_forecast(CompletionEndpoint& endpoint, const TaskInstance& instance,
                               const RetryPolicy& policy, std::uint64_t seed,
                               const LlmOptions& options = {});

}  // namespace ctxeval
