#include "ctxeval/serialization.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ctxeval {

namespace {

std::string_view constraint_kind_name(ConstraintSpec::Kind k) {
  switch (k) {
    case ConstraintSpec::Kind::none: return "none";
    case ConstraintSpec::Kind::upper: return "upper";
    case ConstraintSpec::Kind::lower: return "lower";
    case ConstraintSpec::Kind::interval: return "interval";
    case ConstraintSpec::Kind::variable_upper: return "variable_upper";
  }
  return "";
}

ConstraintSpec::Kind parse_constraint_kind(const std::string& s) {
  using K = ConstraintSpec::Kind;
  for (auto k : {K::none, K::upper, K::lower, K::interval, K::variable_upper}) {
    if (constraint_kind_name(k) == s) return k;
  }
  throw std::invalid_argument("unknown constraint kind: " + s);
}

}  // namespace

Json window_to_json(const TimeSeriesWindow& w) {
  return Json{{"start", w.start().to_string()},
              {"frequency", std::string(w.frequency().name())},
              {"values", w.values()}};
}

TimeSeriesWindow window_from_json(const Json& j) {
  return TimeSeriesWindow(Timestamp::parse(j.at("start").get<std::string>()),
                          Frequency::parse(j.at("frequency").get<std::string>()),
                          j.at("values").get<std::vector<double>>());
}

Json constraint_to_json(const ConstraintSpec& c) {
  Json j{{"kind", std::string(constraint_kind_name(c.kind))}};
  switch (c.kind) {
    case ConstraintSpec::Kind::none: break;
    case ConstraintSpec::Kind::upper: j["upper"] = c.upper; break;
    case ConstraintSpec::Kind::lower: j["lower"] = c.lower; break;
    case ConstraintSpec::Kind::interval:
      j["lower"] = c.lower;
      j["upper"] = c.upper;
      break;
    case ConstraintSpec::Kind::variable_upper: {
      Json e = Json::array();
      for (const auto& [step, tau] : c.entries) e.push_back(Json{{"step", step}, {"upper", tau}});
      j["entries"] = e;
      break;
    }
  }
  return j;
}

ConstraintSpec constraint_from_json(const Json& j) {
  switch (parse_constraint_kind(j.at("kind").get<std::string>())) {
    case ConstraintSpec::Kind::none: return ConstraintSpec::none_spec();
    case ConstraintSpec::Kind::upper: return ConstraintSpec::upper_bound(j.at("upper").get<double>());
    case ConstraintSpec::Kind::lower: return ConstraintSpec::lower_bound(j.at("lower").get<double>());
    case ConstraintSpec::Kind::interval:
      return ConstraintSpec::interval_bounds(j.at("lower").get<double>(),
                                             j.at("upper").get<double>());
    case ConstraintSpec::Kind::variable_upper: {
      std::map<std::size_t, double> e;
      for (const auto& item : j.at("entries")) {
        e[item.at("step").get<std::size_t>()] = item.at("upper").get<double>();
      }
      return ConstraintSpec::variable_upper_bounds(std::move(e));
    }
  }
  throw std::logic_error("unreachable");
}

Json instance_to_json(const TaskInstance& inst) {
  Json types = Json::array();
  for (auto t : inst.context_types) types.push_back(std::string(context_type_name(t)));
  return Json{
      {"task_id", inst.task_id},
      {"instance_seed", inst.instance_seed},
      {"cluster_id", inst.cluster_id},
      {"context_types", types},
      {"history", window_to_json(inst.history)},
      {"future", window_to_json(inst.future)},
      {"context",
       {{"background", inst.context.background},
        {"scenario", inst.context.scenario},
        {"constraints", inst.context.constraints_text}}},
      {"roi", inst.roi},
      {"constraint", constraint_to_json(inst.constraint)},
      {"effect",
       {{"kind", std::string(effect_kind_name(inst.effect.kind))},
        {"multiplier", inst.effect.multiplier},
        {"indices", inst.effect.indices}}},
  };
}

TaskInstance instance_from_json(const Json& j) {
  TaskInstance inst{.task_id = j.at("task_id").get<std::string>(),
                    .instance_seed = j.at("instance_seed").get<std::uint64_t>(),
                    .history = window_from_json(j.at("history")),
                    .future = window_from_json(j.at("future")),
                    .context = {},
                    .roi = j.at("roi").get<std::vector<std::size_t>>(),
                    .constraint = constraint_from_json(j.at("constraint")),
                    .cluster_id = j.at("cluster_id").get<std::string>(),
                    .context_types = {},
                    .effect = {}};
  const auto& c = j.at("context");
  inst.context.background = c.value("background", "");
  inst.context.scenario = c.value("scenario", "");
  inst.context.constraints_text = c.value("constraints", "");
  for (const auto& t : j.at("context_types")) {
    inst.context_types.insert(parse_context_type(t.get<std::string>()));
  }
  if (j.contains("effect")) {
    const auto& e = j.at("effect");
    inst.effect.kind = parse_effect_kind(e.at("kind").get<std::string>());
    inst.effect.multiplier = e.value("multiplier", 1.0);
    inst.effect.indices = e.value("indices", std::vector<std::size_t>{});
  }
  inst.validate();
  return inst;
}

Json ensemble_to_json(const ForecastEnsemble& e, const std::string& model_id,
                      const std::string& task_id, std::uint64_t seed) {
  return Json{{"model_id", model_id},
              {"task_id", task_id},
              {"seed", seed},
              {"values", e.rows()}};
}

ForecastEnsemble ensemble_from_json(const Json& j) {
  return ForecastEnsemble(j.at("values").get<std::vector<std::vector<double>>>());
}

Json score_to_json(const ScoreRecord& r) {
  return Json{{"rcrps", r.rcrps},
              {"rcrps_clipped", r.rcrps_clipped},
              {"term_roi", r.term_roi},
              {"term_non_roi", r.term_non_roi},
              {"term_constraint", r.term_constraint},
              {"variance", r.variance},
              {"significant_failure", r.significant_failure}};
}

ScoreRecord score_from_json(const Json& j) {
  ScoreRecord r;
  r.rcrps = j.at("rcrps").get<double>();
  r.rcrps_clipped = j.at("rcrps_clipped").get<double>();
  r.term_roi = j.at("term_roi").get<double>();
  r.term_non_roi = j.at("term_non_roi").get<double>();
  r.term_constraint = j.at("term_constraint").get<double>();
  r.variance = j.at("variance").get<double>();
  r.significant_failure = j.at("significant_failure").get<bool>();
  return r;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j, int indent) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(indent) << '\n';
}

}  // namespace ctxeval
