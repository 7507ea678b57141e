#include "rltr/io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace rltr {

namespace {

Json action_json(const Action& a) {
  Json j;
  if (const auto* call = std::get_if<ToolCall>(&a)) {
    j["kind"] = "tool_call";
    j["tool"] = call->tool;
    j["arg"] = call->arg;
  } else {
    j["kind"] = "answer";
  }
  return j;
}

Json observation_json(const Observation& obs) {
  Json j;
  if (const auto* f = std::get_if<Fact>(&obs)) {
    j["kind"] = "fact";
    j["slot"] = f->slot;
    j["value"] = f->value;
  } else if (const auto* r = std::get_if<ComputeResult>(&obs)) {
    j["kind"] = "compute_result";
    j["value"] = r->value;
  } else {
    j["kind"] = "tool_error";
    j["code"] = std::string(to_string(std::get<ToolError>(obs).code));
  }
  return j;
}

Action action_from_json(const Json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "answer") {
    return Answer{};
  }
  if (kind == "tool_call") {
    return ToolCall{j.at("tool").get<std::string>(), j.at("arg").get<std::string>()};
  }
  throw std::invalid_argument("unknown action kind: " + kind);
}

Observation observation_from_json(const Json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "fact") {
    return Fact{j.at("slot").get<std::string>(), j.at("value").get<Value>()};
  }
  if (kind == "compute_result") {
    return ComputeResult{j.at("value").get<Value>()};
  }
  if (kind == "tool_error") {
    auto code = parse_error_code(j.at("code").get<std::string>());
    if (!code) {
      throw std::invalid_argument("unknown tool error code");
    }
    return ToolError{*code};
  }
  throw std::invalid_argument("unknown observation kind: " + kind);
}

}  // namespace

Json to_json(const Trajectory& traj) {
  Json j;
  j["query_id"] = traj.query_id;
  j["query_features"] = traj.query_features;
  Json steps = Json::array();
  for (const auto& s : traj.steps) {
    Json step;
    step["index"] = s.index;
    step["action"] = action_json(s.action);
    step["observation"] = s.observation ? observation_json(*s.observation) : Json(nullptr);
    steps.push_back(std::move(step));
  }
  j["steps"] = std::move(steps);
  j["terminated"] = traj.terminated;
  return j;
}

Trajectory trajectory_from_json(const Json& j) {
  Trajectory t;
  t.query_id = j.at("query_id").get<std::string>();
  if (j.contains("query_features")) {
    t.query_features = j.at("query_features").get<std::vector<double>>();
  }
  for (const auto& s : j.at("steps")) {
    Step step;
    step.index = s.at("index").get<std::size_t>();
    step.action = action_from_json(s.at("action"));
    if (s.contains("observation") && !s.at("observation").is_null()) {
      step.observation = observation_from_json(s.at("observation"));
    }
    t.steps.push_back(std::move(step));
  }
  t.terminated = j.at("terminated").get<bool>();
  return t;
}

Json to_json(const RewardBreakdown& r) {
  Json j;
  j["format_valid"] = r.format_valid;
  j["r_comp"] = r.r_comp;
  j["r_repeat"] = r.r_repeat;
  j["r_error"] = r.r_error;
  j["r_rule"] = r.r_rule;
  j["r_total"] = r.r_total;
  return j;
}

std::string trajectory_jsonl_line(const Trajectory& traj, const std::optional<RewardBreakdown>& reward) {
  Json j = to_json(traj);
  if (reward) {
    j["reward"] = to_json(*reward);
  }
  return j.dump() + "\n";
}

Json to_json(const TaskSpec& task) {
  Json j;
  j["query_id"] = task.query_id;
  j["query_features"] = task.query_features;
  j["required_search"] = task.required_search;
  if (task.required_compute) {
    Json c;
    c["op"] = std::string(to_string(task.required_compute->op));
    c["lhs"] = task.required_compute->lhs;
    c["rhs"] = task.required_compute->rhs;
    j["required_compute"] = std::move(c);
  } else {
    j["required_compute"] = nullptr;
  }
  Json facts = Json::object();
  for (const auto& [slot, v] : task.fact_table) {
    facts[slot] = v;
  }
  j["fact_table"] = std::move(facts);
  j["distractor_slots"] = task.distractor_slots;
  j["gold_answer"] = task.gold_answer;
  return j;
}

TaskSpec task_from_json(const Json& j) {
  TaskSpec t;
  t.query_id = j.at("query_id").get<std::string>();
  t.query_features = j.at("query_features").get<std::vector<double>>();
  t.required_search = j.at("required_search").get<std::vector<std::string>>();
  if (j.contains("required_compute") && !j.at("required_compute").is_null()) {
    const auto& c = j.at("required_compute");
    auto op = parse_compute_op(c.at("op").get<std::string>());
    if (!op) {
      throw std::invalid_argument("unknown compute op");
    }
    t.required_compute = ComputeSpec{*op, c.at("lhs").get<std::string>(), c.at("rhs").get<std::string>()};
  }
  for (const auto& [slot, v] : j.at("fact_table").items()) {
    t.fact_table[slot] = v.get<Value>();
  }
  t.distractor_slots = j.at("distractor_slots").get<std::vector<std::string>>();
  t.gold_answer = j.at("gold_answer").get<Value>();
  return t;
}

void write_tasks_jsonl(std::ostream& out, const std::vector<TaskSpec>& tasks) {
  for (const auto& t : tasks) {
    out << to_json(t).dump() << '\n';
  }
}

std::vector<TaskSpec> read_tasks_jsonl(std::istream& in) {
  std::vector<TaskSpec> tasks;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) {
      continue;
    }
    try {
      tasks.push_back(task_from_json(Json::parse(line)));
    } catch (const std::exception& e) {
      throw std::invalid_argument("task line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return tasks;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) {
      throw std::runtime_error("cannot open for writing: " + tmp.string());
    }
    f << contents;
    f.flush();
    if (!f) {
      throw std::runtime_error("failed writing: " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw std::runtime_error("cannot open: " + path.string());
  }
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace rltr
