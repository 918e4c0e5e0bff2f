#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ctxeval/baselines.hpp"
#include "ctxeval/llm.hpp"
#include "ctxeval/scoring.hpp"
#include "ctxeval/serialization.hpp"
#include "ctxeval/tasks.hpp"

namespace ctxeval {

/// A model under evaluation. forecast() may be called from several threads.
class Forecaster {
 public:
  virtual ~Forecaster() = default;

  [[nodiscard]] virtual const std::string& id() const = 0;
  /// Whether the model reads the instance context; such models are evaluated
  /// both with and without it.
  [[nodiscard]] virtual bool uses_context() const = 0;
  /// Throws ForecastFailure (or any std::exception) when no ensemble can be made.
  virtual ForecastEnsemble forecast(const TaskInstance& instance, std::size_t num_samples,
                                    std::uint64_t seed) = 0;
};

/// Holt-Winters fit on the history, sampled with Gaussian innovations.
class ExpSmoothingForecaster : public Forecaster {
 public:
  explicit ExpSmoothingForecaster(std::string id = "exp_smoothing",
                                  SamplingMethod method = SamplingMethod::gaussian);
  [[nodiscard]] const std::string& id() const override { return id_; }
  [[nodiscard]] bool uses_context() const override { return false; }
  ForecastEnsemble forecast(const TaskInstance& instance, std::size_t num_samples,
                            std::uint64_t seed) override;

 private:
  std::string id_;
  SamplingMethod method_;
};

class SeasonalNaiveForecaster : public Forecaster {
 public:
  explicit SeasonalNaiveForecaster(std::string id = "seasonal_naive");
  [[nodiscard]] const std::string& id() const override { return id_; }
  [[nodiscard]] bool uses_context() const override { return false; }
  ForecastEnsemble forecast(const TaskInstance& instance, std::size_t num_samples,
                            std::uint64_t seed) override;

 private:
  std::string id_;
};

/// Wraps another forecaster with context_oracle. Without context the
/// instance carries no effect or constraint, so the wrapper is the identity.
class ContextOracleForecaster : public Forecaster {
 public:
  ContextOracleForecaster(std::string id, std::shared_ptr<Forecaster> inner);
  [[nodiscard]] const std::string& id() const override { return id_; }
  [[nodiscard]] bool uses_context() const override { return true; }
  ForecastEnsemble forecast(const TaskInstance& instance, std::size_t num_samples,
                            std::uint64_t seed) override;

 private:
  std::string id_;
  std::shared_ptr<Forecaster> inner_;
};

enum class PromptMethod { direct_prompt, llmp };

class LlmForecaster : public Forecaster {
 public:
  LlmForecaster(std::string id, PromptMethod method, std::shared_ptr<CompletionEndpoint> endpoint,
                RetryPolicy policy = {}, LlmOptions options = {});
  [[nodiscard]] const std::string& id() const override { return id_; }
  [[nodiscard]] bool uses_context() const override { return true; }
  /// num_samples overrides policy.samples_required.
  ForecastEnsemble forecast(const TaskInstance& instance, std::size_t num_samples,
                            std::uint64_t seed) override;

 private:
  std::string id_;
  PromptMethod method_;
  std::shared_ptr<CompletionEndpoint> endpoint_;
  RetryPolicy policy_;
  LlmOptions options_;
};

/// Copy of `instance` as a model sees it with the context switched off:
/// no text, no effect, no constraint. Scoring still uses the original.
TaskInstance strip_context(const TaskInstance& instance);

/// Built-in names: "exp_smoothing", "exp_smoothing_bootstrap",
/// "seasonal_naive", "oracle_exp_smoothing".
std::vector<std::string> builtin_model_names();

/// A model from a name or an object:
///   {"id", "method": "direct_prompt" | "llmp", "endpoint": {...},
///    "max_attempts_per_sample", "temperature", "allow_scientific"}
/// Throws ConfigError.
std::shared_ptr<Forecaster> make_model(const Json& spec);

}  // namespace ctxeval
