#include "ctxeval/harness.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ctxeval/errors.hpp"
#include "ctxeval/random.hpp"

namespace ctxeval {

namespace {

constexpr ContextType kAllTypes[] = {ContextType::intemporal, ContextType::future,
                                     ContextType::historical, ContextType::covariate,
                                     ContextType::causal};

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Unit {
  std::size_t model, task, seed;
  bool context;
};

struct PreparedTask {
  const TaskDescriptor* descriptor;
  double alpha;
  std::vector<TaskInstance> instances;
};

EvalRecord run_unit(Forecaster& model, const PreparedTask& task, std::size_t seed_index,
                    bool context, std::size_t num_samples, const EvalOptions& options) {
  const TaskInstance& inst = task.instances[seed_index];
  EvalRecord rec;
  rec.model_id = model.id();
  rec.task_id = inst.task_id;
  rec.instance_seed = inst.instance_seed;
  rec.context_enabled = context;
  rec.context_capable = model.uses_context();

  const auto t0 = std::chrono::steady_clock::now();
  try {
    const TaskInstance view = context ? inst : strip_context(inst);
    const ForecastEnsemble ens = model.forecast(
        view, num_samples, unit_seed(options.master_seed, rec.model_id, rec.task_id, rec.instance_seed));
    if (ens.horizon() != inst.future.size() || ens.num_samples() != num_samples) {
      throw std::runtime_error("forecast has shape " + std::to_string(ens.num_samples()) + "x" +
                               std::to_string(ens.horizon()) + ", expected " +
                               std::to_string(num_samples) + "x" +
                               std::to_string(inst.future.size()));
    }
    ScoringConfig cfg = options.scoring;
    cfg.alpha = task.alpha;
    rec.score = score_instance(inst, ens, cfg);
  } catch (const ForecastFailure& f) {
    rec.failure = f.what();
    rec.rejections = f.histogram();
  } catch (const std::exception& e) {
    rec.failure = e.what();
  }
  rec.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

std::string fmt(const char* spec, double v) {
  if (!std::isfinite(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  std::string s = buf;
  if (s == "-0.000") s = "0.000";
  return s;
}

double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-16, kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

std::string EvalRecord::label() const {
  return context_capable && !context_enabled ? model_id + "/no-context" : model_id;
}

std::uint64_t unit_seed(std::uint64_t master_seed, const std::string& model_id,
                        const std::string& task_id, std::uint64_t instance_seed) {
  return SeedSequence(master_seed).with("forecast").with(model_id).with(task_id).with(instance_seed).value();
}

ScoreRecord score_instance(const TaskInstance& instance, const ForecastEnsemble& ensemble,
                           ScoringConfig config) {
  const auto& truth = instance.future.values();
  ScoreRecord r = rcrps(ensemble, truth, instance.roi, instance.constraint, config);
  r.variance = rcrps_variance(ensemble, truth, instance.roi, instance.constraint, config);
  return r;
}

std::vector<EvalRecord> run_evaluation(const std::vector<std::shared_ptr<Forecaster>>& models,
                                       const std::vector<TaskDescriptor>& descriptors,
                                       const InstancePlan& plan, const EvalOptions& options) {
  plan.validate();
  options.scoring.validate();
  std::set<std::string> ids;
  for (const auto& m : models) {
    if (!m) throw std::invalid_argument("null model");
    if (!ids.insert(m->id()).second) throw std::invalid_argument("duplicate model id " + m->id());
  }

  // Calibrate every task before anything is scored.
  std::vector<PreparedTask> tasks;
  tasks.reserve(descriptors.size());
  for (const auto& d : descriptors) {
    PreparedTask t{&d, calibrate_alpha(calibration_futures(d, plan)), {}};
    for (auto seed : plan.eval_seeds) t.instances.push_back(generate_instance(d, seed));
    tasks.push_back(std::move(t));
  }

  std::vector<Unit> units;
  for (std::size_t m = 0; m < models.size(); ++m) {
    const bool capable = models[m]->uses_context();
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      for (std::size_t s = 0; s < plan.eval_seeds.size(); ++s) {
        if (!capable) {
          units.push_back({m, t, s, false});
          continue;
        }
        if (options.context_mode != ContextMode::without_context) units.push_back({m, t, s, true});
        if (options.context_mode != ContextMode::with_context) units.push_back({m, t, s, false});
      }
    }
  }

  std::vector<EvalRecord> out(units.size());
  const int threads = options.jobs > 0 ? static_cast<int>(options.jobs) : omp_get_max_threads();
  const auto n = static_cast<std::ptrdiff_t>(units.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const Unit& u = units[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(i)] = run_unit(*models[u.model], tasks[u.task], u.seed, u.context,
                                                plan.samples_per_forecast, options);
  }
  return out;
}

// Aggregation ---------------------------------------------------------------

AggregateReport aggregate(const std::vector<EvalRecord>& records,
                          const std::map<std::string, double>& weights,
                          const std::map<std::string, std::set<ContextType>>& task_types,
                          const AggregateOptions& options) {
  struct Acc {
    std::map<std::string, std::vector<std::pair<double, double>>> tasks;  // (clipped, variance)
    std::size_t sig = 0, failed = 0;
  };
  std::map<std::string, Acc> by_label;
  for (const auto& r : records) {
    Acc& acc = by_label[r.label()];
    if (!r.score) {
      ++acc.failed;
      continue;
    }
    if (!weights.count(r.task_id)) throw std::invalid_argument("no weight for task " + r.task_id);
    const double raw = r.score->rcrps;
    const bool sig = raw > options.clip_threshold;
    acc.sig += sig ? 1 : 0;
    acc.tasks[r.task_id].emplace_back(std::min(raw, options.clip_threshold), r.score->variance);
  }

  AggregateReport report;
  for (const auto& [label, acc] : by_label) {
    ModelSummary s;
    s.label = label;
    s.significant_failures = acc.sig;
    s.forecast_failures = acc.failed;
    double wsum = 0.0;
    for (const auto& [task, vals] : acc.tasks) {
      TaskScore ts;
      ts.n = vals.size();
      for (const auto& [v, var] : vals) {
        ts.mean += v;
        ts.variance += var;
      }
      ts.mean /= static_cast<double>(ts.n);
      ts.variance /= static_cast<double>(ts.n) * static_cast<double>(ts.n);
      s.scored += ts.n;
      s.tasks[task] = ts;
      wsum += weights.at(task);
    }
    if (s.tasks.empty() || !(wsum > 0.0)) {
      s.weighted_mean = s.stderr_ = kNaN;
    } else {
      double mean = 0.0, var = 0.0;
      for (const auto& [task, ts] : s.tasks) {
        const double w = weights.at(task) / wsum;
        mean += w * ts.mean;
        var += w * w * ts.variance;
      }
      s.weighted_mean = mean;
      s.stderr_ = std::sqrt(var);
    }
    for (ContextType c : kAllTypes) {
      double num = 0.0, den = 0.0;
      for (const auto& [task, ts] : s.tasks) {
        const auto it = task_types.find(task);
        if (it == task_types.end() || !it->second.count(c)) continue;
        num += weights.at(task) * ts.mean;
        den += weights.at(task);
      }
      if (den > 0.0) s.by_context_type[c] = num / den;
    }
    s.rank_mean = s.rank_std = kNaN;
    report.models.push_back(std::move(s));
  }

  // Rank the models that scored anything, over the tasks they all share.
  std::vector<ModelSummary*> ranked;
  for (auto& s : report.models) {
    if (!s.tasks.empty()) ranked.push_back(&s);
  }
  if (ranked.size() == 1) {
    ranked[0]->rank_mean = 1.0;
    ranked[0]->rank_std = 0.0;
  } else if (ranked.size() >= 2) {
    std::vector<std::string> common;
    for (const auto& [task, ts] : ranked[0]->tasks) {
      if (std::all_of(ranked.begin(), ranked.end(), [&](auto* s) { return s->tasks.count(task) > 0; })) {
        common.push_back(task);
      }
    }
    double wsum = 0.0;
    for (const auto& t : common) wsum += weights.at(t);
    if (!common.empty() && wsum > 0.0) {
      kernels::RankInputs in;
      in.num_models = ranked.size();
      in.num_tasks = common.size();
      for (const auto& t : common) in.weights.push_back(weights.at(t) / wsum);
      for (auto* s : ranked) {
        for (const auto& t : common) {
          in.mean.push_back(s->tasks.at(t).mean);
          in.stderr_.push_back(std::sqrt(s->tasks.at(t).variance));
        }
      }
      const auto rs = rank_simulation(in, options.rank_reps, options.master_seed);
      for (std::size_t k = 0; k < ranked.size(); ++k) {
        ranked[k]->rank_mean = rs.rank_mean[k];
        ranked[k]->rank_std = rs.rank_std[k];
      }
    }
  }
  return report;
}

AggregateReport aggregate(const std::vector<EvalRecord>& records,
                          const std::vector<TaskDescriptor>& descriptors,
                          const AggregateOptions& options) {
  std::map<std::string, std::set<ContextType>> types;
  for (const auto& d : descriptors) types[d.task_id] = d.context_types;
  return aggregate(records, task_weights(descriptors), types, options);
}

kernels::RankSummary rank_simulation(const kernels::RankInputs& inputs, std::size_t reps,
                                     std::uint64_t master_seed) {
  if (inputs.num_models < 2) throw std::invalid_argument("rank simulation needs at least 2 models");
  if (reps < 1) throw std::invalid_argument("rank simulation needs at least 1 repetition");
  return kernels::parallel::rank_simulation(inputs, reps, master_seed);
}

// Paired t-test -------------------------------------------------------------

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("incomplete beta needs a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("incomplete beta needs x in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                                a * std::log(x) + b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double dof) {
  if (!(dof > 0.0)) throw std::invalid_argument("degrees of freedom must be > 0");
  if (std::isnan(t)) return kNaN;
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double tail = 0.5 * incomplete_beta(0.5 * dof, 0.5, dof / (dof + t * t));
  return t > 0.0 ? 1.0 - tail : tail;
}

double paired_t_test(const std::vector<double>& with_context,
                     const std::vector<double>& without_context) {
  if (with_context.size() != without_context.size()) {
    throw std::invalid_argument("paired samples differ in length");
  }
  const std::size_t n = with_context.size();
  if (n < 3) throw std::invalid_argument("paired t-test needs at least 3 pairs");
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = with_context[i] - without_context[i];
    if (!std::isfinite(d[i])) throw std::invalid_argument("paired samples must be finite");
  }
  double mean = 0.0;
  for (double v : d) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : d) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (sd == 0.0) {
    if (mean == 0.0) return 0.5;
    return mean < 0.0 ? 0.0 : 1.0;
  }
  const double t = mean / (sd / std::sqrt(static_cast<double>(n)));
  return student_t_cdf(t, static_cast<double>(n - 1));
}

std::vector<PairedTest> context_tests(const std::vector<EvalRecord>& records) {
  // model -> (task, seed) -> (with, without)
  std::map<std::string, std::map<std::pair<std::string, std::uint64_t>,
                                  std::pair<std::optional<double>, std::optional<double>>>>
      pairs;
  for (const auto& r : records) {
    if (!r.context_capable || !r.score) continue;
    auto& slot = pairs[r.model_id][{r.task_id, r.instance_seed}];
    (r.context_enabled ? slot.first : slot.second) = r.score->rcrps;
  }
  std::vector<PairedTest> out;
  for (const auto& [model, cells] : pairs) {
    std::vector<double> with, without;
    for (const auto& [key, v] : cells) {
      if (v.first && v.second) {
        with.push_back(*v.first);
        without.push_back(*v.second);
      }
    }
    if (with.size() < 3) continue;
    PairedTest t;
    t.model_id = model;
    t.n = with.size();
    for (std::size_t i = 0; i < t.n; ++i) t.mean_difference += with[i] - without[i];
    t.mean_difference /= static_cast<double>(t.n);
    t.p_value = paired_t_test(with, without);
    out.push_back(t);
  }
  return out;
}

// Persistence ---------------------------------------------------------------

Json record_to_json(const EvalRecord& r) {
  Json j;
  j["model_id"] = r.model_id;
  j["task_id"] = r.task_id;
  j["instance_seed"] = r.instance_seed;
  j["context_enabled"] = r.context_enabled;
  j["context_capable"] = r.context_capable;
  j["label"] = r.label();
  if (r.score) {
    j["status"] = "ok";
    j["score"] = score_to_json(*r.score);
  } else {
    j["status"] = "failed";
    j["score"] = nullptr;
    j["failure"] = r.failure;
    if (!r.rejections.empty()) {
      Json h = Json::object();
      for (const auto& [k, v] : r.rejections) h[k] = v;
      j["rejections"] = h;
    }
  }
  return j;
}

EvalRecord record_from_json(const Json& j) {
  EvalRecord r;
  r.model_id = j.at("model_id").get<std::string>();
  r.task_id = j.at("task_id").get<std::string>();
  r.instance_seed = j.at("instance_seed").get<std::uint64_t>();
  r.context_enabled = j.at("context_enabled").get<bool>();
  r.context_capable = j.value("context_capable", false);
  if (j.contains("score") && !j.at("score").is_null()) r.score = score_from_json(j.at("score"));
  r.failure = j.value("failure", std::string());
  if (j.contains("rejections")) {
    for (const auto& [k, v] : j.at("rejections").items()) r.rejections[k] = v.get<std::size_t>();
  }
  return r;
}

std::vector<EvalRecord> read_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<EvalRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(record_from_json(Json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(path.string() + ": line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::string report_csv(const AggregateReport& report) {
  std::string s = "model,avg_rcrps,stderr,avg_rank,rank_std,failures";
  for (ContextType c : kAllTypes) s += "," + std::string(context_type_name(c));
  s += "\n";
  for (const auto& m : report.models) {
    s += m.label + "," + fmt("%.3f", m.weighted_mean) + "," + fmt("%.3f", m.stderr_) + "," +
         fmt("%.3f", m.rank_mean) + "," + fmt("%.3f", m.rank_std) + "," +
         std::to_string(m.significant_failures);
    for (ContextType c : kAllTypes) {
      const auto it = m.by_context_type.find(c);
      s += "," + (it == m.by_context_type.end() ? std::string() : fmt("%.3f", it->second));
    }
    s += "\n";
  }
  return s;
}

std::string report_text(const AggregateReport& report) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"model", "avg RCRPS", "avg rank", "RCRPS>5", "failed", "scored"};
  for (ContextType c : kAllTypes) header.emplace_back(context_type_name(c));
  rows.push_back(header);
  const auto pm = [](double a, double b) {
    if (!std::isfinite(a)) return std::string("-");
    return fmt("%.3f", a) + " +- " + (std::isfinite(b) ? fmt("%.3f", b) : "-");
  };
  for (const auto& m : report.models) {
    std::vector<std::string> row{m.label, pm(m.weighted_mean, m.stderr_), pm(m.rank_mean, m.rank_std),
                                 std::to_string(m.significant_failures),
                                 std::to_string(m.forecast_failures), std::to_string(m.scored)};
    for (ContextType c : kAllTypes) {
      const auto it = m.by_context_type.find(c);
      row.push_back(it == m.by_context_type.end() ? "-" : fmt("%.3f", it->second));
    }
    rows.push_back(std::move(row));
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < r.size(); ++k) width[k] = std::max(width[k], r[k].size());
  }
  std::string s;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < rows[i].size(); ++k) {
      const auto& cell = rows[i][k];
      const std::string pad(width[k] - cell.size(), ' ');
      s += k == 0 ? cell + pad : "  " + pad + cell;
    }
    s += "\n";
    if (i == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w + 2;
      s += std::string(total - 2, '-') + "\n";
    }
  }
  return s;
}

std::string tests_csv(const std::vector<PairedTest>& tests) {
  std::string s = "model,n,mean_difference,p_value\n";
  char buf[128];
  for (const auto& t : tests) {
    std::snprintf(buf, sizeof buf, ",%zu,%.6g,%.6g\n", t.n, t.mean_difference, t.p_value);
    s += t.model_id + buf;
  }
  return s;
}

void persist_and_report(const std::vector<EvalRecord>& records, const AggregateReport& report,
                        const std::vector<PairedTest>& tests, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());

  std::string jsonl, timings = "model,task_id,instance_seed,context_enabled,wall_time_s\n";
  char buf[64];
  for (const auto& r : records) {
    jsonl += record_to_json(r).dump() + "\n";
    std::snprintf(buf, sizeof buf, ",%d,%.6f\n", r.context_enabled ? 1 : 0, r.wall_time);
    timings += r.model_id + "," + r.task_id + "," + std::to_string(r.instance_seed) + buf;
  }
  write_text(out_dir / "records.jsonl", jsonl);
  write_text(out_dir / "timings.csv", timings);
  write_text(out_dir / "report.csv", report_csv(report));
  write_text(out_dir / "report.txt", report_text(report));
  write_text(out_dir / "ttest.csv", tests_csv(tests));
}

}  // namespace ctxeval
