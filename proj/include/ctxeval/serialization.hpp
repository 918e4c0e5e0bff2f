#pragma once

// JSON forms of the shared data types. Doubles are written with enough digits
// to round-trip exactly, so parse(dump(x)) == x.

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "ctxeval/scoring.hpp"
#include "ctxeval/tasks.hpp"
#include "ctxeval/timeseries.hpp"

namespace ctxeval {

using Json = nlohmann::ordered_json;

Json window_to_json(const TimeSeriesWindow& w);
TimeSeriesWindow window_from_json(const Json& j);

Json constraint_to_json(const ConstraintSpec& c);
ConstraintSpec constraint_from_json(const Json& j);

Json instance_to_json(const TaskInstance& inst);
TaskInstance instance_from_json(const Json& j);

/// {"model_id", "task_id", "seed", "values": M rows of H numbers}
Json ensemble_to_json(const ForecastEnsemble& e, const std::string& model_id,
                      const std::string& task_id, std::uint64_t seed);
ForecastEnsemble ensemble_from_json(const Json& j);

Json score_to_json(const ScoreRecord& r);
ScoreRecord score_from_json(const Json& j);

/// Reads a whole JSON file; errors name the path.
Json read_json_file(const std::filesystem::path& path);
/// Writes `j.dump(indent)` plus a trailing newline.
void write_json_file(const std::filesystem::path& path, const Json& j, int indent = 2);

}  // namespace ctxeval
