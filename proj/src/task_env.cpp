#include "rltr/task_env.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rltr {

std::string_view to_string(ComputeOp op) noexcept {
  switch (op) {
    case ComputeOp::difference:
      return "diff";
    case ComputeOp::sum:
      return "sum";
    case ComputeOp::max:
      return "max";
  }
  return "diff";
}

std::optional<ComputeOp> parse_compute_op(std::string_view s) noexcept {
  for (auto op : kComputeOps) {
    if (to_string(op) == s) {
      return op;
    }
  }
  return std::nullopt;
}

Value apply(ComputeOp op, Value lhs, Value rhs) noexcept {
  switch (op) {
    case ComputeOp::difference:
      return lhs - rhs;
    case ComputeOp::sum:
      return lhs + rhs;
    case ComputeOp::max:
      return std::max(lhs, rhs);
  }
  return 0;
}

std::string slot_name(std::size_t i) { return "k" + std::to_string(i); }

ToolRegistry make_registry(std::size_t num_slots) {
  ToolSpec search{std::string(kSearchTool), {}, "look up the value stored under a slot"};
  for (std::size_t i = 0; i < num_slots; ++i) {
    search.arg_slots.push_back(slot_name(i));
  }
  ToolSpec compute{std::string(kComputeTool), {}, "combine the two operand facts of the query"};
  for (auto op : kComputeOps) {
    compute.arg_slots.emplace_back(to_string(op));
  }
  return ToolRegistry({std::move(search), std::move(compute)});
}

void TaskDistribution::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw std::invalid_argument(field + ": " + why);
  };
  if (num_slots < 1) {
    fail("num_slots", "must be >= 1");
  }
  if (r_max < 1 || r_max > num_slots) {
    fail("r_max", "must satisfy 1 <= r_max <= num_slots");
  }
  if (!(p_compute >= 0.0 && p_compute <= 1.0)) {
    fail("p_compute", "must lie in [0, 1]");
  }
  if (p_compute > 0.0 && r_max < 2) {
    fail("p_compute", "compute tasks need two operands, so r_max must be >= 2");
  }
  if (r_max + distractors > num_slots) {
    fail("distractors", "r_max + distractors must not exceed num_slots");
  }
  if (!(feature_noise >= 0.0 && std::isfinite(feature_noise))) {
    fail("feature_noise", "must be finite and >= 0");
  }
}

std::vector<TaskSpec> generate_tasks(const TaskDistribution& dist, std::size_t n, std::uint64_t seed,
                                     std::string_view id_prefix) {
  dist.validate();
  if (n < 1) {
    throw std::invalid_argument("n: must be >= 1");
  }
  Rng rng{derive_seed(seed, {stream::kTasks})};
  std::normal_distribution<double> noise(0.0, 1.0);

  std::vector<TaskSpec> tasks;
  tasks.reserve(n);
  std::vector<std::size_t> slots(dist.num_slots);
  for (std::size_t i = 0; i < n; ++i) {
    TaskSpec t;
    t.query_id = std::string(id_prefix) + std::to_string(i);

    const bool has_compute = dist.p_compute > 0.0 && bernoulli(rng, dist.p_compute);
    const auto lo = static_cast<std::int64_t>(has_compute ? 2 : 1);
    const auto r = static_cast<std::size_t>(uniform_int(rng, lo, static_cast<std::int64_t>(dist.r_max)));

    std::iota(slots.begin(), slots.end(), std::size_t{0});
    std::shuffle(slots.begin(), slots.end(), rng);
    std::vector<std::size_t> required(slots.begin(), slots.begin() + static_cast<std::ptrdiff_t>(r));
    std::vector<std::size_t> distract(slots.begin() + static_cast<std::ptrdiff_t>(r),
                                      slots.begin() + static_cast<std::ptrdiff_t>(r + dist.distractors));
    std::sort(required.begin(), required.end());
    std::sort(distract.begin(), distract.end());

    for (auto s : required) {
      t.required_search.push_back(slot_name(s));
      t.fact_table[slot_name(s)] = uniform_int(rng, kMinFact, kMaxFact);
    }
    for (auto s : distract) {
      t.distractor_slots.push_back(slot_name(s));
      t.fact_table[slot_name(s)] = uniform_int(rng, kMinFact, kMaxFact);
    }

    std::size_t op_index = kNumComputeOps;
    if (has_compute) {
      op_index = static_cast<std::size_t>(uniform_int(rng, 0, kNumComputeOps - 1));
      ComputeSpec c{kComputeOps[op_index], t.required_search[0], t.required_search[1]};
      t.gold_answer = apply(c.op, t.fact_table.at(c.lhs), t.fact_table.at(c.rhs));
      t.required_compute = std::move(c);
    } else {
      t.gold_answer = t.fact_table.at(t.required_search.front());
    }

    t.query_features.assign(dist.feature_dim(), 0.0);
    for (auto s : required) {
      t.query_features[s] = 1.0;
    }
    if (op_index < kNumComputeOps) {
      t.query_features[dist.num_slots + op_index] = 1.0;
    }
    if (dist.feature_noise > 0.0) {
      for (auto& f : t.query_features) {
        f += dist.feature_noise * noise(rng);
      }
    }
    tasks.push_back(std::move(t));
  }
  return tasks;
}

std::pair<std::optional<Observation>, EpisodeState> step(EpisodeState state, const Action& action) {
  if (state.terminated) {
    throw std::logic_error("step on a terminated episode");
  }
  if (state.task == nullptr) {
    throw std::logic_error("episode state has no task");
  }
  const TaskSpec& task = *state.task;

  std::optional<Observation> obs;
  if (const auto* call = std::get_if<ToolCall>(&action)) {
    if (call->tool == kSearchTool) {
      auto it = task.fact_table.find(call->arg);
      if (it == task.fact_table.end()) {
        obs = ToolError{ToolErrorCode::unknown_slot};
      } else {
        obs = Fact{it->first, it->second};
        state.gathered_facts[it->first] = it->second;
      }
    } else if (call->tool == kComputeTool) {
      auto op = parse_compute_op(call->arg);
      if (!op || !task.required_compute) {
        obs = ToolError{ToolErrorCode::bad_tool};
      } else {
        const auto& spec = *task.required_compute;
        auto lhs = state.gathered_facts.find(spec.lhs);
        auto rhs = state.gathered_facts.find(spec.rhs);
        if (lhs == state.gathered_facts.end() || rhs == state.gathered_facts.end()) {
          obs = ToolError{ToolErrorCode::missing_operands};
        } else {
          obs = ComputeResult{apply(*op, lhs->second, rhs->second)};
          if (*op == spec.op) {
            state.compute_done = true;
          }
        }
      }
    } else {
      obs = ToolError{ToolErrorCode::bad_tool};
    }
  } else {
    state.terminated = true;
  }

  state.history.push_back(Step{state.turn, action, obs});
  ++state.turn;
  return {std::move(obs), std::move(state)};
}

Trajectory rollout(const Planner& planner, const TaskSpec& task, std::size_t max_turns, Rng& rng) {
  if (max_turns < 1) {
    throw std::invalid_argument("max_turns: must be >= 1");
  }
  auto state = EpisodeState::start(task);
  while (!state.terminated && state.turn < max_turns) {
    Action a = planner.act(task, state, rng);
    state = step(std::move(state), a).second;
  }
  Trajectory traj;
  traj.query_id = task.query_id;
  traj.query_features = task.query_features;
  traj.steps = std::move(state.history);
  traj.terminated = state.terminated;
  return traj;
}

std::vector<EpisodeState> replay_states(const TaskSpec& task, const Trajectory& traj) {
  std::vector<EpisodeState> states;
  states.reserve(traj.steps.size());
  auto state = EpisodeState::start(task);
  for (const auto& s : traj.steps) {
    states.push_back(state);
    if (state.terminated) {
      throw std::invalid_argument("trajectory continues after Answer");
    }
    state = step(std::move(state), s.action).second;
  }
  return states;
}

Action ScriptedTeacher::act(const TaskSpec& task, const EpisodeState& state, Rng& rng) const {
  if (deviation_ > 0.0 && bernoulli(rng, deviation_)) {
    std::vector<Action> detours;
    for (const auto& d : task.distractor_slots) {
      detours.emplace_back(ToolCall{std::string(kSearchTool), d});
    }
    if (!state.compute_done) {
      bool operands_ready = false;
      if (task.required_compute) {
        operands_ready = state.gathered_facts.contains(task.required_compute->lhs) &&
                         state.gathered_facts.contains(task.required_compute->rhs);
      }
      if (!operands_ready) {
        auto op = task.required_compute ? task.required_compute->op : ComputeOp::difference;
        detours.emplace_back(ToolCall{std::string(kComputeTool), std::string(to_string(op))});
      }
    }
    if (!detours.empty()) {
      auto pick = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(detours.size()) - 1));
      return detours[pick];
    }
  }
  for (const auto& slot : task.required_search) {
    if (!state.gathered_facts.contains(slot)) {
      return ToolCall{std::string(kSearchTool), slot};
    }
  }
  if (task.required_compute && !state.compute_done) {
    return ToolCall{std::string(kComputeTool), std::string(to_string(task.required_compute->op))};
  }
  return Answer{};
}

int oracle_completeness(const TaskSpec& task, const Trajectory& traj) {
  std::map<std::string, std::size_t> first_fact;
  std::optional<std::size_t> compute_at;
  for (const auto& s : traj.steps) {
    if (!s.observation) {
      continue;
    }
    if (const auto* f = std::get_if<Fact>(&*s.observation)) {
      first_fact.try_emplace(f->slot, s.index);
    } else if (std::holds_alternative<ComputeResult>(*s.observation) && task.required_compute) {
      const auto& c = *task.required_compute;
      const auto* call = std::get_if<ToolCall>(&s.action);
      auto lhs = first_fact.find(c.lhs);
      auto rhs = first_fact.find(c.rhs);
      if (call != nullptr && call->tool == kComputeTool && call->arg == to_string(c.op) &&
          lhs != first_fact.end() && rhs != first_fact.end() && !compute_at) {
        compute_at = s.index;
      }
    }
  }
  for (const auto& slot : task.required_search) {
    if (!first_fact.contains(slot)) {
      return 0;
    }
  }
  if (task.required_compute && !compute_at) {
    return 0;
  }
  return 1;
}

Summary oracle_summarize(const TaskSpec& task, const Trajectory& traj, double h, Rng& rng) {
  if (oracle_completeness(task, traj) == 1) {
    return {task.gold_answer, true};
  }
  if (bernoulli(rng, h)) {
    Value offset = uniform_int(rng, 1, 10);
    if (bernoulli(rng, 0.5)) {
      offset = -offset;
    }
    return {task.gold_answer + offset, false};
  }
  return {kAbstention, false};
}

}  // namespace rltr
