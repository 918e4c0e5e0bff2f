#include "ctxeval/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "ctxeval/errors.hpp"
#include "ctxeval/random.hpp"

namespace ctxeval {

namespace {

std::string hex64(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

Json seeds_json(const std::vector<std::uint64_t>& seeds) {
  Json a = Json::array();
  for (auto s : seeds) a.push_back(s);
  return a;
}

std::string context_mode_name(ContextMode m) {
  switch (m) {
    case ContextMode::both: return "both";
    case ContextMode::with_context: return "with";
    case ContextMode::without_context: return "without";
  }
  return "both";
}

/// Hash of what the selected tasks generate: descriptions plus instance 0.
std::string registry_hash(const std::vector<TaskDescriptor>& ds) {
  std::uint64_t h = fnv1a("");
  for (const auto& d : ds) {
    h = fnv1a(describe_task(d), h);
    h = fnv1a(instance_to_json(generate_instance(d, 0)).dump(), h);
  }
  return hex64(h);
}

Json manifest(const std::string& command, const RunConfig& cfg,
              const std::vector<TaskDescriptor>& ds) {
  Json m;
  m["tool"] = "ctxeval";
  m["command"] = command;
  Json c = cfg.to_json();
  c.erase("out");  // outputs from different directories stay comparable
  m["config"] = c;
  m["config_hash"] = hex64(fnv1a(c.dump()));
  m["registry_hash"] = registry_hash(ds);
  Json tasks = Json::array();
  for (const auto& d : ds) tasks.push_back(d.task_id);
  m["tasks"] = tasks;
  return m;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T>
T get_field(const Json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config key \"") + key + "\": " + e.what());
  }
}

void check_keys(const Json& j, std::initializer_list<const char*> allowed, const char* where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be an object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) throw ConfigError(std::string("unknown key \"") + k + "\" in " + where);
  }
}

std::vector<TaskDescriptor> selected_or_throw(const RunConfig& cfg) {
  auto ds = select_tasks(default_registry(), cfg.tasks);
  if (ds.empty()) throw ConfigError("task filter matches no task");
  return ds;
}

}  // namespace

Json RunConfig::to_json() const {
  Json j;
  Json t = Json::array();
  for (const auto& s : tasks) t.push_back(s);
  j["tasks"] = t;
  j["models"] = models;
  j["plan"] = Json{{"eval_seeds", seeds_json(plan.eval_seeds)},
                   {"calibration_seeds", seeds_json(plan.calibration_seeds)},
                   {"samples_per_forecast", plan.samples_per_forecast}};
  j["scoring"] = Json{{"beta", scoring.beta},
                      {"clip_threshold", scoring.clip_threshold},
                      {"constraint_estimator",
                       scoring.constraint_estimator == ConstraintEstimator::pwm ? "pwm" : "empirical"}};
  j["out"] = out_dir;
  j["seed"] = master_seed;
  j["jobs"] = jobs;
  j["context"] = context_mode_name(context_mode);
  j["rank_reps"] = rank_reps;
  return j;
}

RunConfig config_from_json(const Json& j) {
  check_keys(j, {"tasks", "models", "plan", "scoring", "out", "seed", "jobs", "context", "rank_reps"},
             "config");
  RunConfig c;
  if (j.contains("tasks")) c.tasks = get_field<std::vector<std::string>>(j, "tasks");
  if (j.contains("models")) {
    c.models = j.at("models");
    if (!c.models.is_array()) throw ConfigError("\"models\" must be an array");
  }
  if (j.contains("plan")) {
    const Json& p = j.at("plan");
    check_keys(p, {"eval_seeds", "calibration_seeds", "samples_per_forecast"}, "plan");
    if (p.contains("eval_seeds")) c.plan.eval_seeds = get_field<std::vector<std::uint64_t>>(p, "eval_seeds");
    if (p.contains("calibration_seeds")) {
      c.plan.calibration_seeds = get_field<std::vector<std::uint64_t>>(p, "calibration_seeds");
    }
    if (p.contains("samples_per_forecast")) {
      c.plan.samples_per_forecast = get_field<std::size_t>(p, "samples_per_forecast");
    }
  }
  if (j.contains("scoring")) {
    const Json& s = j.at("scoring");
    check_keys(s, {"beta", "clip_threshold", "constraint_estimator"}, "scoring");
    if (s.contains("beta")) c.scoring.beta = get_field<double>(s, "beta");
    if (s.contains("clip_threshold")) c.scoring.clip_threshold = get_field<double>(s, "clip_threshold");
    if (s.contains("constraint_estimator")) {
      const auto e = get_field<std::string>(s, "constraint_estimator");
      if (e == "pwm") {
        c.scoring.constraint_estimator = ConstraintEstimator::pwm;
      } else if (e == "empirical") {
        c.scoring.constraint_estimator = ConstraintEstimator::empirical;
      } else {
        throw ConfigError("constraint_estimator must be \"empirical\" or \"pwm\"");
      }
    }
  }
  if (j.contains("out")) c.out_dir = get_field<std::string>(j, "out");
  if (j.contains("seed")) c.master_seed = get_field<std::uint64_t>(j, "seed");
  if (j.contains("jobs")) c.jobs = get_field<std::size_t>(j, "jobs");
  if (j.contains("rank_reps")) c.rank_reps = get_field<std::size_t>(j, "rank_reps");
  if (j.contains("context")) {
    const auto m = get_field<std::string>(j, "context");
    if (m == "both") {
      c.context_mode = ContextMode::both;
    } else if (m == "with") {
      c.context_mode = ContextMode::with_context;
    } else if (m == "without") {
      c.context_mode = ContextMode::without_context;
    } else {
      throw ConfigError("context must be \"both\", \"with\" or \"without\"");
    }
  }
  try {
    c.plan.validate();
    c.scoring.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (c.rank_reps < 1) throw ConfigError("rank_reps must be >= 1");
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  Json j;
  try {
    j = read_json_file(path);
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
  return config_from_json(j);
}

std::vector<TaskDescriptor> select_tasks(const std::vector<TaskDescriptor>& registry,
                                         const std::vector<std::string>& filter) {
  if (filter.empty()) return registry;
  const std::set<std::string> f(filter.begin(), filter.end());
  std::vector<TaskDescriptor> out;
  for (const auto& d : registry) {
    if (f.count(d.task_id) || f.count(d.cluster_id)) out.push_back(d);
  }
  return out;
}

Json select_models(const Json& configured, const std::vector<std::string>& names) {
  Json out = Json::array();
  for (const auto& n : names) {
    bool found = false;
    for (const auto& m : configured) {
      if (m.is_object() && m.value("id", std::string()) == n) {
        out.push_back(m);
        found = true;
        break;
      }
    }
    if (!found) out.push_back(n);
  }
  return out;
}

int cmd_list_tasks(const std::vector<std::string>& filter, std::ostream& out) {
  const auto ds = select_tasks(default_registry(), filter);
  out << "task_id\tcluster_id\tgenerator\tcontext_types\n";
  for (const auto& d : ds) out << describe_task(d) << "\n";
  if (ds.empty()) out << "(no task matches the filter)\n";
  return exit_ok;
}

int cmd_generate(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const auto ds = selected_or_throw(cfg);
  const std::filesystem::path root(cfg.out_dir);
  Json counts = Json::object();
  std::size_t n_eval = 0, n_cal = 0;
  for (const auto& d : ds) {
    for (auto seed : cfg.plan.eval_seeds) {
      write_json_file(root / "eval" / (d.task_id + "." + std::to_string(seed) + ".json"),
                      instance_to_json(generate_instance(d, seed)));
    }
    for (auto seed : cfg.plan.calibration_seeds) {
      write_json_file(root / "calibration" / (d.task_id + "." + std::to_string(seed) + ".json"),
                      instance_to_json(generate_instance(d, seed)));
    }
    counts[d.task_id] = Json{{"eval", cfg.plan.eval_seeds.size()},
                             {"calibration", cfg.plan.calibration_seeds.size()}};
    n_eval += cfg.plan.eval_seeds.size();
    n_cal += cfg.plan.calibration_seeds.size();
  }
  Json m = manifest("generate", cfg, ds);
  m["files"] = counts;
  write_json_file(root / "manifest.json", m);
  out << "wrote " << n_eval << " eval and " << n_cal << " calibration instances to "
      << root.string() << "\n";
  return exit_ok;
}

int cmd_evaluate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto ds = selected_or_throw(cfg);
  // Build every model first so credential problems surface before any work.
  std::vector<std::shared_ptr<Forecaster>> models;
  for (const auto& spec : cfg.models) {
    try {
      models.push_back(make_model(spec));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (models.empty()) throw ConfigError("no models selected");

  EvalOptions opt;
  opt.scoring = cfg.scoring;
  opt.master_seed = cfg.master_seed;
  opt.jobs = cfg.jobs;
  opt.context_mode = cfg.context_mode;
  std::vector<EvalRecord> records;
  try {
    records = run_evaluation(models, ds, cfg.plan, opt);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  AggregateOptions agg;
  agg.clip_threshold = cfg.scoring.clip_threshold;
  agg.rank_reps = cfg.rank_reps;
  agg.master_seed = cfg.master_seed;
  const auto report = aggregate(records, ds, agg);
  const auto tests = context_tests(records);
  persist_and_report(records, report, tests, cfg.out_dir);

  std::size_t scored = 0;
  for (const auto& r : records) scored += r.score ? 1 : 0;
  Json m = manifest("evaluate", cfg, ds);
  m["records"] = Json{{"total", records.size()}, {"scored", scored}, {"failed", records.size() - scored}};
  write_json_file(std::filesystem::path(cfg.out_dir) / "manifest.json", m);

  out << report_text(report);
  if (!tests.empty()) out << "\n" << tests_csv(tests);

  int code = exit_ok;
  for (const auto& s : report.models) {
    if (s.scored == 0) {
      err << "model " << s.label << " produced no scored records\n";
      code = exit_partial;
    }
  }
  for (const auto& r : records) {
    if (!r.score) {
      err << r.label() << " " << r.task_id << " seed " << r.instance_seed << ": " << r.failure << "\n";
    }
  }
  return code;
}

int cmd_score(const RunConfig& cfg, const std::vector<std::string>& forecast_files,
              const std::vector<std::string>& instance_files, std::ostream& out,
              std::ostream& err) {
  if (forecast_files.empty()) throw ConfigError("no forecast files given");
  const auto ds = selected_or_throw(cfg);
  std::size_t bad = 0;

  std::map<std::pair<std::string, std::uint64_t>, TaskInstance> instances;
  for (const auto& f : instance_files) {
    try {
      TaskInstance inst = instance_from_json(read_json_file(f));
      instances.insert_or_assign({inst.task_id, inst.instance_seed}, std::move(inst));
    } catch (const std::exception& e) {
      err << f << ": " << e.what() << "\n";
      ++bad;
    }
  }

  std::map<std::string, double> alpha;
  std::vector<EvalRecord> records;
  for (const auto& f : forecast_files) {
    try {
      const Json j = read_json_file(f);
      EvalRecord rec;
      rec.model_id = j.at("model_id").get<std::string>();
      rec.task_id = j.at("task_id").get<std::string>();
      rec.instance_seed = j.at("seed").get<std::uint64_t>();
      rec.context_enabled = j.value("context_enabled", false);
      rec.context_capable = j.value("context_capable", false);
      const auto it = std::find_if(ds.begin(), ds.end(),
                                   [&](const auto& d) { return d.task_id == rec.task_id; });
      if (it == ds.end()) throw std::invalid_argument("unknown task_id " + rec.task_id);
      const ForecastEnsemble ens = ensemble_from_json(j);
      const auto found = instances.find({rec.task_id, rec.instance_seed});
      const TaskInstance inst = found != instances.end() ? found->second
                                                         : generate_instance(*it, rec.instance_seed);
      if (ens.horizon() != inst.future.size()) {
        throw std::invalid_argument("forecast horizon " + std::to_string(ens.horizon()) +
                                    " does not match the instance horizon " +
                                    std::to_string(inst.future.size()));
      }
      if (!alpha.count(rec.task_id)) {
        alpha[rec.task_id] = calibrate_alpha(calibration_futures(*it, cfg.plan));
      }
      ScoringConfig sc = cfg.scoring;
      sc.alpha = alpha.at(rec.task_id);
      rec.score = score_instance(inst, ens, sc);
      records.push_back(std::move(rec));
    } catch (const std::exception& e) {
      err << f << ": " << e.what() << "\n";
      ++bad;
    }
  }

  AggregateOptions agg;
  agg.clip_threshold = cfg.scoring.clip_threshold;
  agg.rank_reps = cfg.rank_reps;
  agg.master_seed = cfg.master_seed;
  const auto report = aggregate(records, ds, agg);
  const auto tests = context_tests(records);
  persist_and_report(records, report, tests, cfg.out_dir);
  Json m = manifest("score", cfg, ds);
  m["records"] = Json{{"scored", records.size()}, {"rejected_files", bad}};
  write_json_file(std::filesystem::path(cfg.out_dir) / "manifest.json", m);
  out << report_text(report);
  if (bad > 0) {
    err << bad << " file(s) could not be scored\n";
    return exit_partial;
  }
  return exit_ok;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Context-aided probabilistic forecast evaluation", "ctxeval"};
  app.require_subcommand(1);

  std::string config_path, tasks, models, out_dir;
  std::uint64_t seed = 0;
  std::size_t jobs = 0;
  bool no_context = false;
  std::vector<std::string> forecast_files, instance_files;

  const auto common = [&](CLI::App* sub, bool eval_flags) {
    sub->add_option("--config", config_path, "JSON run configuration");
    sub->add_option("--tasks", tasks, "Comma-separated task or cluster ids");
    sub->add_option("--out", out_dir, "Output directory");
    if (eval_flags) {
      sub->add_option("--models", models, "Comma-separated model names or config model ids");
      sub->add_option("--seed", seed, "Master seed");
      sub->add_option("--jobs", jobs, "Worker threads (default: all cores)");
      sub->add_flag("--no-context", no_context, "Evaluate context-capable models without context");
    }
  };
  auto* list = app.add_subcommand("list-tasks", "Print the task registry");
  list->add_option("--tasks", tasks, "Comma-separated task or cluster ids");
  auto* gen = app.add_subcommand("generate", "Write eval and calibration instances");
  common(gen, false);
  auto* eval = app.add_subcommand("evaluate", "Forecast, score and report");
  common(eval, true);
  auto* score = app.add_subcommand("score", "Score stored forecast files");
  common(score, false);
  score->add_option("--forecasts", forecast_files, "Forecast JSON files")->required();
  score->add_option("--instances", instance_files, "Instance JSON files");

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_config;
  }

  try {
    if (list->parsed()) return cmd_list_tasks(split_list(tasks), out);

    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    CLI::App* sub = app.get_subcommands().front();
    if (sub->count("--tasks")) cfg.tasks = split_list(tasks);
    if (sub->count("--out")) cfg.out_dir = out_dir;
    if (eval->parsed()) {
      if (eval->count("--models")) cfg.models = select_models(cfg.models, split_list(models));
      if (eval->count("--seed")) cfg.master_seed = seed;
      if (eval->count("--jobs")) cfg.jobs = jobs;
      if (no_context) cfg.context_mode = ContextMode::without_context;
      return cmd_evaluate(cfg, out, err);
    }
    if (gen->parsed()) return cmd_generate(cfg, out, err);
    return cmd_score(cfg, forecast_files, instance_files, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_partial;
  }
}

}  // namespace ctxeval
