#include "ctxeval/models.hpp"

#include "ctxeval/endpoints.hpp"
#include "ctxeval/errors.hpp"

namespace ctxeval {

ExpSmoothingForecaster::ExpSmoothingForecaster(std::string id, SamplingMethod method)
    : id_(std::move(id)), method_(method) {}

ForecastEnsemble ExpSmoothingForecaster::forecast(const TaskInstance& instance,
                                                  std::size_t num_samples, std::uint64_t seed) {
  const auto state = exp_smoothing_fit(instance.history);
  return exp_smoothing_sample(state, instance.future.size(), num_samples, seed, method_);
}

SeasonalNaiveForecaster::SeasonalNaiveForecaster(std::string id) : id_(std::move(id)) {}

ForecastEnsemble SeasonalNaiveForecaster::forecast(const TaskInstance& instance,
                                                   std::size_t num_samples, std::uint64_t seed) {
  std::size_t period = instance.history.frequency().default_period();
  if (period > instance.history.size()) period = 1;
  return seasonal_naive(instance.history, period, instance.future.size(), num_samples, seed);
}

ContextOracleForecaster::ContextOracleForecaster(std::string id, std::shared_ptr<Forecaster> inner)
    : id_(std::move(id)), inner_(std::move(inner)) {}

ForecastEnsemble ContextOracleForecaster::forecast(const TaskInstance& instance,
                                                   std::size_t num_samples, std::uint64_t seed) {
  return context_oracle(instance, inner_->forecast(instance, num_samples, seed));
}

LlmForecaster::LlmForecaster(std::string id, PromptMethod method,
                             std::shared_ptr<CompletionEndpoint> endpoint, RetryPolicy policy,
                             LlmOptions options)
    : id_(std::move(id)),
      method_(method),
      endpoint_(std::move(endpoint)),
      policy_(policy),
      options_(options) {
  if (!endpoint_) throw std::invalid_argument("LLM forecaster needs an endpoint");
  policy_.validate();
}

ForecastEnsemble LlmForecaster::forecast(const TaskInstance& instance, std::size_t num_samples,
                                         std::uint64_t seed) {
  RetryPolicy policy = policy_;
  policy.samples_required = num_samples;
  if (method_ == PromptMethod::direct_prompt) {
    return direct_prompt_forecast(*endpoint_, instance, policy, seed, options_);
  }
  return llmp_forecast(*endpoint_, instance, policy, seed, options_);
}

TaskInstance strip_context(const TaskInstance& instance) {
  TaskInstance out = instance;
  out.context = {};
  out.effect = {};
  out.constraint = {};
  return out;
}

std::vector<std::string> builtin_model_names() {
  return {"exp_smoothing", "exp_smoothing_bootstrap", "seasonal_naive", "oracle_exp_smoothing"};
}

std::shared_ptr<Forecaster> make_model(const Json& spec) {
  if (spec.is_string()) {
    const auto name = spec.get<std::string>();
    if (name == "exp_smoothing") return std::make_shared<ExpSmoothingForecaster>();
    if (name == "exp_smoothing_bootstrap") {
      return std::make_shared<ExpSmoothingForecaster>(name, SamplingMethod::bootstrap);
    }
    if (name == "seasonal_naive") return std::make_shared<SeasonalNaiveForecaster>();
    if (name == "oracle_exp_smoothing") {
      return std::make_shared<ContextOracleForecaster>(name,
                                                       std::make_shared<ExpSmoothingForecaster>());
    }
    throw ConfigError("unknown model: " + name);
  }
  if (!spec.is_object()) throw ConfigError("model must be a name or an object");
  try {
    const auto id = spec.at("id").get<std::string>();
    const auto method_name = spec.value("method", std::string("direct_prompt"));
    PromptMethod method;
    if (method_name == "direct_prompt") {
      method = PromptMethod::direct_prompt;
    } else if (method_name == "llmp") {
      method = PromptMethod::llmp;
    } else {
      throw ConfigError("model " + id + ": unknown method " + method_name);
    }
    if (!spec.contains("endpoint")) throw ConfigError("model " + id + " needs an \"endpoint\"");
    std::shared_ptr<CompletionEndpoint> endpoint = make_endpoint(spec.at("endpoint"));
    RetryPolicy policy;
    policy.max_attempts_per_sample =
        spec.value("max_attempts_per_sample", policy.max_attempts_per_sample);
    LlmOptions options;
    options.temperature = spec.value("temperature", options.temperature);
    options.allow_scientific = spec.value("allow_scientific", options.allow_scientific);
    if (policy.max_attempts_per_sample < 1) {
      throw ConfigError("model " + id + ": max_attempts_per_sample must be >= 1");
    }
    return std::make_shared<LlmForecaster>(id, method, std::move(endpoint), policy, options);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad model spec: ") + e.what());
  }
}

}  // namespace ctxeval
