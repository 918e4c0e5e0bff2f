#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ctxeval/cli.hpp"
#include "ctxeval/errors.hpp"

using namespace ctxeval;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = 0;
  std::string out, err;
};

CliRun cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliRun r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ctxeval_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_files(const fs::path& dir) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir)) n += e.is_regular_file() ? 1 : 0;
  return n;
}

RunConfig small_config(const fs::path& out) {
  RunConfig c;
  c.tasks = {"bounded_daily_sensor", "spike_electricity"};
  c.plan.eval_seeds = {0, 1, 2};
  c.out_dir = out.string();
  c.rank_reps = 500;
  return c;
}

}  // namespace

TEST(Config, DefaultsRoundTrip) {
  const RunConfig c;
  const RunConfig back = config_from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
  EXPECT_EQ(back.plan.calibration_seeds.size(), 25u);
  EXPECT_EQ(back.plan.eval_seeds.size(), 5u);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(config_from_json(Json{{"modles", Json::array()}}), ConfigError);
  EXPECT_THROW(config_from_json(Json{{"plan", {{"seeds", 1}}}}), ConfigError);
  EXPECT_THROW(config_from_json(Json{{"scoring", {{"beta", -1.0}}}}), ConfigError);
  EXPECT_THROW(config_from_json(Json{{"context", "sometimes"}}), ConfigError);
  EXPECT_THROW(config_from_json(Json{{"plan", {{"eval_seeds", {1000}}}}}), ConfigError);
  EXPECT_THROW(config_from_json(Json{{"seed", "zero"}}), ConfigError);
}

TEST(Config, ShippedConfigsParse) {
  const fs::path dir = fs::path(CTXEVAL_SOURCE_DIR) / "tools" / "configs";
  for (const auto& e : fs::directory_iterator(dir)) {
    EXPECT_NO_THROW(load_config(e.path())) << e.path();
  }
}

TEST(Select, TaskAndClusterIds) {
  const auto reg = default_registry();
  EXPECT_EQ(select_tasks(reg, {}).size(), reg.size());
  EXPECT_EQ(select_tasks(reg, {"bounded"}).size(), 2u);
  EXPECT_EQ(select_tasks(reg, {"bounded", "atm_outage"}).size(), 3u);
  EXPECT_TRUE(select_tasks(reg, {"nothing"}).empty());
}

TEST(ListTasks, PrintsRegistryAndFilterNotice) {
  const CliRun all = cli({"list-tasks"});
  EXPECT_EQ(all.code, 0);
  for (const auto& d : default_registry()) EXPECT_NE(all.out.find(d.task_id), std::string::npos);

  const CliRun some = cli({"list-tasks", "--tasks", "spike"});
  EXPECT_EQ(some.code, 0);
  EXPECT_NE(some.out.find("spike_electricity"), std::string::npos);
  EXPECT_EQ(some.out.find("atm_outage"), std::string::npos);

  const CliRun none = cli({"list-tasks", "--tasks", "nothing"});
  EXPECT_EQ(none.code, 0);
  EXPECT_NE(none.out.find("no task matches"), std::string::npos);
}

TEST(Cli, UsageErrorsAreConfigErrors) {
  EXPECT_EQ(cli({}).code, exit_config);
  EXPECT_EQ(cli({"frobnicate"}).code, exit_config);
  EXPECT_EQ(cli({"evaluate", "--jobs", "many"}).code, exit_config);
  EXPECT_EQ(cli({"evaluate", "--config", "/nonexistent/cfg.json"}).code, exit_config);
  EXPECT_EQ(cli({"--help"}).code, exit_ok);
}

TEST(Generate, WritesPlanCountsAndIsByteStable) {
  const fs::path a = scratch("gen_a"), b = scratch("gen_b");
  const CliRun r1 = cli({"generate", "--out", a.string()});
  ASSERT_EQ(r1.code, 0) << r1.err;
  const auto n_tasks = default_registry().size();
  EXPECT_EQ(count_files(a / "eval"), 5 * n_tasks);
  EXPECT_EQ(count_files(a / "calibration"), 25 * n_tasks);

  const Json m = read_json_file(a / "manifest.json");
  for (const auto& d : default_registry()) {
    EXPECT_EQ(m["files"][d.task_id]["eval"], 5);
    EXPECT_EQ(m["files"][d.task_id]["calibration"], 25);
  }

  ASSERT_EQ(cli({"generate", "--out", b.string()}).code, 0);
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), a);
    EXPECT_EQ(slurp(e.path()), slurp(b / rel)) << rel;
  }
  // Instances stored on disk load back to what the registry generates.
  const auto d = default_registry().front();
  EXPECT_EQ(instance_from_json(read_json_file(a / "eval" / (d.task_id + ".3.json"))),
            generate_instance(d, 3));
}

TEST(Generate, UnwritableOutputIsReported) {
  const fs::path f = scratch("gen_blocker");
  { std::ofstream(f) << "x"; }
  const CliRun r = cli({"generate", "--out", (f / "sub").string()});
  EXPECT_EQ(r.code, exit_partial);
  EXPECT_NE(r.err.find("sub"), std::string::npos) << r.err;
}

TEST(Generate, UnknownTaskFilterIsConfigError) {
  const CliRun r = cli({"generate", "--tasks", "nothing", "--out", scratch("gen_none").string()});
  EXPECT_EQ(r.code, exit_config);
}

TEST(Evaluate, DeterministicOutputsAcrossRunsAndJobs) {
  const fs::path a = scratch("eval_a"), b = scratch("eval_b");
  RunConfig c = small_config(a);
  c.jobs = 1;
  std::ostringstream out, err;
  ASSERT_EQ(cmd_evaluate(c, out, err), 0) << err.str();
  c.out_dir = b.string();
  c.jobs = 3;
  std::ostringstream out2, err2;
  ASSERT_EQ(cmd_evaluate(c, out2, err2), 0) << err2.str();
  EXPECT_EQ(out.str(), out2.str());
  for (const char* f : {"records.jsonl", "report.csv", "report.txt", "ttest.csv"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  // jobs is part of the config, so only the hash and that field may differ.
  Json ma = read_json_file(a / "manifest.json"), mb = read_json_file(b / "manifest.json");
  ma["config"].erase("jobs");
  mb["config"].erase("jobs");
  ma.erase("config_hash");
  mb.erase("config_hash");
  EXPECT_EQ(ma, mb);
  EXPECT_EQ(ma["records"]["total"], 3 * 2 * 4);  // 2 plain models + 1 run twice
}

TEST(Evaluate, NoContextFlagDropsContextRuns) {
  const fs::path o = scratch("eval_noctx");
  const CliRun r = cli({"evaluate", "--tasks", "spike", "--models", "oracle_exp_smoothing",
                     "--no-context", "--out", o.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto recs = read_records(o / "records.jsonl");
  ASSERT_EQ(recs.size(), 5u);
  for (const auto& rec : recs) EXPECT_FALSE(rec.context_enabled);
}

TEST(Evaluate, MockLlmConfigRuns) {
  const fs::path o = scratch("eval_mock");
  const CliRun r = cli({"evaluate", "--config",
                     (fs::path(CTXEVAL_SOURCE_DIR) / "tools" / "configs" / "mock_llm.json").string(),
                     "--out", o.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("mock_direct"), std::string::npos);
  EXPECT_NE(r.out.find("mock_llmp/no-context"), std::string::npos);
}

TEST(Evaluate, MissingCredentialFailsBeforeAnyRun) {
  ::unsetenv("CTXEVAL_TEST_MISSING_KEY");
  RunConfig c = small_config(scratch("eval_nokey"));
  c.models = Json::array({"exp_smoothing",
                          {{"id", "remote"},
                           {"endpoint",
                            {{"type", "http"},
                             {"base_url", "http://127.0.0.1:9"},
                             {"model", "m"},
                             {"api_key_env", "CTXEVAL_TEST_MISSING_KEY"}}}}});
  std::ostringstream out, err;
  EXPECT_THROW(cmd_evaluate(c, out, err), ConfigError);
  EXPECT_FALSE(fs::exists(c.out_dir));
}

TEST(Evaluate, ModelWithNoScoresGivesPartialExit) {
  RunConfig c = small_config(scratch("eval_broken"));
  c.models = Json::array(
      {"exp_smoothing",
       {{"id", "broken"},
        {"max_attempts_per_sample", 2},
        {"endpoint", {{"type", "mock"}, {"script", {{{"responses", {"no forecast here"}}}}}}}}});
  std::ostringstream out, err;
  EXPECT_EQ(cmd_evaluate(c, out, err), exit_partial);
  EXPECT_NE(err.str().find("broken"), std::string::npos);
  EXPECT_TRUE(fs::exists(fs::path(c.out_dir) / "report.csv"));
}

namespace {

fs::path write_forecast(const fs::path& dir, const std::string& name, const ForecastEnsemble& e,
                        const std::string& model, const std::string& task, std::uint64_t seed) {
  const fs::path p = dir / name;
  write_json_file(p, ensemble_to_json(e, model, task, seed));
  return p;
}

}  // namespace

TEST(Score, PerfectForecastsScoreZero) {
  const fs::path dir = scratch("score_perfect");
  const fs::path gen = dir / "gen";
  ASSERT_EQ(cli({"generate", "--tasks", "bounded", "--out", gen.string()}).code, 0);
  std::vector<std::string> args{"score", "--tasks", "bounded", "--out", (dir / "out").string(),
                                "--forecasts"};
  std::vector<std::string> instances;
  for (const auto& d : select_tasks(default_registry(), {"bounded"})) {
    for (std::uint64_t s = 0; s < 5; ++s) {
      const auto inst = generate_instance(d, s);
      const auto e = ForecastEnsemble::replicate(inst.future.values(), 25);
      args.push_back(write_forecast(dir, d.task_id + "." + std::to_string(s) + ".fc.json", e,
                                    "truth", d.task_id, s)
                         .string());
      instances.push_back((gen / "eval" / (d.task_id + "." + std::to_string(s) + ".json")).string());
    }
  }
  args.push_back("--instances");
  args.insert(args.end(), instances.begin(), instances.end());
  const CliRun r = cli(args);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto recs = read_records(dir / "out" / "records.jsonl");
  ASSERT_EQ(recs.size(), 10u);
  for (const auto& rec : recs) EXPECT_EQ(rec.score->rcrps, 0.0);
  EXPECT_NE(slurp(dir / "out" / "report.csv").find("truth,0.000,"), std::string::npos);
}

TEST(Score, RejectsSingleTrajectoryAndReportsMixedFiles) {
  const fs::path dir = scratch("score_mixed");
  fs::create_directories(dir);
  const auto d = default_registry().front();
  const auto inst = generate_instance(d, 0);
  const auto good = write_forecast(dir, "good.json",
                                   ForecastEnsemble::replicate(inst.future.values(), 5), "m",
                                   d.task_id, 0);
  Json one = ensemble_to_json(ForecastEnsemble::replicate(inst.future.values(), 2), "m", d.task_id, 1);
  one["values"].erase(1);
  const fs::path single = dir / "single.json";
  write_json_file(single, one);
  Json unknown = ensemble_to_json(ForecastEnsemble::replicate(inst.future.values(), 2), "m", "nope", 0);
  const fs::path bad_task = dir / "unknown.json";
  write_json_file(bad_task, unknown);

  const CliRun r = cli({"score", "--out", (dir / "out").string(), "--forecasts", good.string(),
                     single.string(), bad_task.string()});
  EXPECT_EQ(r.code, exit_partial);
  EXPECT_NE(r.err.find("single.json"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("M >= 2"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("unknown.json"), std::string::npos) << r.err;
  EXPECT_EQ(r.err.find("good.json"), std::string::npos) << r.err;
  EXPECT_EQ(read_records(dir / "out" / "records.jsonl").size(), 1u);
}

TEST(Score, HorizonMismatchIsRejected) {
  const fs::path dir = scratch("score_horizon");
  fs::create_directories(dir);
  const auto d = default_registry().front();
  const auto f = write_forecast(dir, "short.json", ForecastEnsemble(3, 2, std::vector<double>(6, 0.0)), "m", d.task_id, 0);
  const CliRun r = cli({"score", "--out", (dir / "out").string(), "--forecasts", f.string()});
  EXPECT_EQ(r.code, exit_partial);
  EXPECT_NE(r.err.find("horizon"), std::string::npos) << r.err;
}
