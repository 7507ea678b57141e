#pragma once

// JSON / JSONL encodings of trajectories, task sets and reward breakdowns.
// Keys are emitted in a fixed order so output bytes are reproducible.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rltr/reward.hpp"
#include "rltr/task_env.hpp"
#include "rltr/trajectory.hpp"

namespace rltr {

using Json = nlohmann::ordered_json;

Json to_json(const Trajectory& traj);
Trajectory trajectory_from_json(const Json& j);

Json to_json(const RewardBreakdown& r);

/// One trajectory log line; `reward` is attached under key "reward".
std::string trajectory_jsonl_line(const Trajectory& traj, const std::optional<RewardBreakdown>& reward = std::nullopt);

Json to_json(const TaskSpec& task);
TaskSpec task_from_json(const Json& j);

void write_tasks_jsonl(std::ostream& out, const std::vector<TaskSpec>& tasks);
std::vector<TaskSpec> read_tasks_jsonl(std::istream& in);

/// Writes `contents` to `path` via a sibling temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

std::string read_file(const std::filesystem::path& path);

}  // namespace rltr
