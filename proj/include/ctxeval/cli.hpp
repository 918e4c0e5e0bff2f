#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ctxeval/harness.hpp"
#include "ctxeval/serialization.hpp"
#include "ctxeval/tasks.hpp"

namespace ctxeval {

enum ExitCode : int { exit_ok = 0, exit_partial = 1, exit_config = 2 };

struct RunConfig {
  /// Task ids or cluster ids; empty selects the whole registry.
  std::vector<std::string> tasks;
  /// Model specs as accepted by make_model.
  Json models = Json::array({"exp_smoothing", "seasonal_naive", "oracle_exp_smoothing"});
  InstancePlan plan;
  ScoringConfig scoring;
  std::string out_dir = "ctxeval-out";
  std::uint64_t master_seed = 0;
  std::size_t jobs = 0;
  ContextMode context_mode = ContextMode::both;
  std::size_t rank_reps = 10000;

  [[nodiscard]] Json to_json() const;
};

/// Keys: tasks, models, plan{eval_seeds, calibration_seeds,
/// samples_per_forecast}, scoring{beta, clip_threshold, constraint_estimator},
/// out, seed, jobs, context ("both" | "with" | "without"), rank_reps.
/// Unknown keys are rejected. Throws ConfigError.
RunConfig config_from_json(const Json& j);
RunConfig load_config(const std::filesystem::path& path);

/// Registry entries whose task id or cluster id is listed; all when empty.
std::vector<TaskDescriptor> select_tasks(const std::vector<TaskDescriptor>& registry,
                                         const std::vector<std::string>& filter);

/// Keeps the config models whose id is listed; other names are built-in models.
Json select_models(const Json& configured, const std::vector<std::string>& names);

int cmd_list_tasks(const std::vector<std::string>& filter, std::ostream& out);
int cmd_generate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_evaluate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_score(const RunConfig& config, const std::vector<std::string>& forecast_files,
              const std::vector<std::string>& instance_files, std::ostream& out,
              std::ostream& err);

/// Full command line, argv[0] excluded. Returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ctxeval
