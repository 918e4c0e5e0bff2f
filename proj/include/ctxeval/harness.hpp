#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ctxeval/kernels.hpp"
#include "ctxeval/models.hpp"
#include "ctxeval/scoring.hpp"
#include "ctxeval/serialization.hpp"
#include "ctxeval/tasks.hpp"

namespace ctxeval {

struct EvalRecord {
  std::string model_id;
  std::string task_id;
  std::uint64_t instance_seed = 0;
  bool context_enabled = false;
  /// True for models that read context; their no-context rows get their own label.
  bool context_capable = false;
  /// Empty when the forecast failed.
  std::optional<ScoreRecord> score;
  std::string failure;
  std::map<std::string, std::size_t> rejections;
  double wall_time = 0.0;  // seconds

  /// Report row: model_id, or model_id + "/no-context" for a context-capable
  /// model run without its context.
  [[nodiscard]] std::string label() const;
};

enum class ContextMode { both, with_context, without_context };

struct EvalOptions {
  ScoringConfig scoring;  // alpha is replaced per task
  std::uint64_t master_seed = 0;
  /// Worker threads; 0 uses the OpenMP default.
  std::size_t jobs = 0;
  ContextMode context_mode = ContextMode::both;
};

/// Forecast seed for one unit. With and without context share it, so the
/// paired comparison sees the same underlying draws.
std::uint64_t unit_seed(std::uint64_t master_seed, const std::string& model_id,
                        const std::string& task_id, std::uint64_t instance_seed);

/// Runs every (model, task, eval seed, context setting) unit. Failures become
/// records without a score. The output order is fixed: model, task, seed,
/// then context on before off.
std::vector<EvalRecord> run_evaluation(const std::vector<std::shared_ptr<Forecaster>>& models,
                                       const std::vector<TaskDescriptor>& descriptors,
                                       const InstancePlan& plan, const EvalOptions& options = {});

/// Scores one stored ensemble the way run_evaluation does.
ScoreRecord score_instance(const TaskInstance& instance, const ForecastEnsemble& ensemble,
                           ScoringConfig config);

struct TaskScore {
  double mean = 0.0;      // mean clipped rcrps
  double variance = 0.0;  // mean instance variance / n
  std::size_t n = 0;
};

struct ModelSummary {
  std::string label;
  double weighted_mean = 0.0;
  double stderr_ = 0.0;
  double rank_mean = 0.0;  // NaN when the model is left out of the ranking
  double rank_std = 0.0;
  std::size_t significant_failures = 0;
  std::size_t forecast_failures = 0;
  std::size_t scored = 0;
  /// Weighted mean over the tasks tagged with each context type.
  std::map<ContextType, double> by_context_type;
  std::map<std::string, TaskScore> tasks;
};

struct AggregateOptions {
  /// Raw scores above this count as significant failures and are clipped to it.
  double clip_threshold = 5.0;
  std::size_t rank_reps = 10000;
  std::uint64_t master_seed = 0;
};

struct AggregateReport {
  std::vector<ModelSummary> models;  // sorted by label
};

/// Throws std::invalid_argument when a scored task has no weight.
AggregateReport aggregate(const std::vector<EvalRecord>& records,
                          const std::map<std::string, double>& weights,
                          const std::map<std::string, std::set<ContextType>>& task_types = {},
                          const AggregateOptions& options = {});

AggregateReport aggregate(const std::vector<EvalRecord>& records,
                          const std::vector<TaskDescriptor>& descriptors,
                          const AggregateOptions& options = {});

/// Average weighted rank under Gaussian perturbation of the task scores.
/// Throws std::invalid_argument with fewer than 2 models.
kernels::RankSummary rank_simulation(const kernels::RankInputs& inputs, std::size_t reps = 10000,
                                     std::uint64_t master_seed = 0);

/// Student-t CDF with `dof` degrees of freedom.
double student_t_cdf(double t, double dof);

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

/// One-sided p-value for mean(with - without) < 0. Equal lengths >= 3.
double paired_t_test(const std::vector<double>& with_context,
                     const std::vector<double>& without_context);

struct PairedTest {
  std::string model_id;
  std::size_t n = 0;
  double mean_difference = 0.0;  // with - without, unclipped rcrps
  double p_value = 0.0;
};

/// One test per context-capable model with at least 3 instances scored both ways.
std::vector<PairedTest> context_tests(const std::vector<EvalRecord>& records);

Json record_to_json(const EvalRecord& r);
EvalRecord record_from_json(const Json& j);
std::vector<EvalRecord> read_records(const std::filesystem::path& path);

std::string report_csv(const AggregateReport& report);
std::string report_text(const AggregateReport& report);
std::string tests_csv(const std::vector<PairedTest>& tests);

/// Writes records.jsonl, timings.csv, report.csv, report.txt and ttest.csv
/// into `out_dir`. wall_time only goes to timings.csv so the other files are
/// byte-stable.
void persist_and_report(const std::vector<EvalRecord>& records, const AggregateReport& report,
                        const std::vector<PairedTest>& tests, const std::filesystem::path& out_dir);

}  // namespace ctxeval
