#pragma once

// Hand-built tasks and random trajectory generators shared by the tests.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "rltr/judges.hpp"
#include "rltr/rng.hpp"
#include "rltr/task_env.hpp"
#include "rltr/trajectory.hpp"

namespace rltr::test {

inline ToolCall search(const std::string& slot) { return {std::string(kSearchTool), slot}; }
inline ToolCall compute(const std::string& op) { return {std::string(kComputeTool), op}; }

// Two required slots k1 (value 20) and k3 (value 5), distractor k6 (value -7).
// With `op` set the gold answer is op(20, 5), otherwise k1's value and only
// k1 is required.
inline TaskSpec temperature_task(std::optional<ComputeOp> op = ComputeOp::difference) {
  TaskSpec t;
  t.query_id = "q0";
  t.query_features = std::vector<double>(11, 0.0);
  t.fact_table = {{"k1", 20}, {"k3", 5}, {"k6", -7}};
  t.distractor_slots = {"k6"};
  if (op) {
    t.required_search = {"k1", "k3"};
    t.required_compute = ComputeSpec{*op, "k1", "k3"};
    t.gold_answer = apply(*op, 20, 5);
    t.query_features[1] = t.query_features[3] = 1.0;
    t.query_features[8 + static_cast<std::size_t>(*op)] = 1.0;
  } else {
    t.required_search = {"k1"};
    t.gold_answer = 20;
    t.query_features[1] = 1.0;
  }
  return t;
}

inline Trajectory play(const TaskSpec& task, const std::vector<Action>& actions) {
  auto state = EpisodeState::start(task);
  for (const auto& a : actions) {
    state = step(std::move(state), a).second;
  }
  Trajectory t;
  t.query_id = task.query_id;
  t.query_features = task.query_features;
  t.steps = state.history;
  t.terminated = state.terminated;
  return t;
}

// Any action a planner for make_registry(M) could emit, plus, with
// `wild`, tools and slots outside the registry.
inline Action random_action(Rng& rng, std::size_t num_slots, bool wild, double p_answer = 0.15) {
  if (bernoulli(rng, p_answer)) {
    return Answer{};
  }
  const auto r = uniform_int(rng, 0, wild ? 9 : 7);
  if (r < 5) {
    const auto hi = static_cast<std::int64_t>(num_slots) + (wild ? 2 : 0) - 1;
    return search(slot_name(static_cast<std::size_t>(uniform_int(rng, 0, hi))));
  }
  if (r < 8) {
    return compute(std::string(to_string(kComputeOps[static_cast<std::size_t>(uniform_int(rng, 0, 2))])));
  }
  return ToolCall{r == 8 ? "lookup" : std::string(kComputeTool), "bogus"};
}

inline Observation random_observation(Rng& rng) {
  switch (uniform_int(rng, 0, 2)) {
    case 0:
      return Fact{slot_name(static_cast<std::size_t>(uniform_int(rng, 0, 7))), uniform_int(rng, -50, 50)};
    case 1:
      return ComputeResult{uniform_int(rng, -100, 100)};
    default:
      return ToolError{static_cast<ToolErrorCode>(uniform_int(rng, 0, 2))};
  }
}

// Structurally well-formed trajectory with arbitrary contents (observations
// need not be consistent with any task).
inline Trajectory random_wellformed(Rng& rng, std::size_t max_len = 8) {
  Trajectory t;
  t.query_id = "r" + std::to_string(uniform_int(rng, 0, 9999));
  const auto d = static_cast<std::size_t>(uniform_int(rng, 0, 4));
  for (std::size_t i = 0; i < d; ++i) {
    t.query_features.push_back((uniform01(rng) - 0.5) * std::pow(10.0, static_cast<double>(uniform_int(rng, -3, 3))));
  }
  const auto len = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(max_len)));
  for (std::size_t i = 0; i < len; ++i) {
    Step s;
    s.index = i;
    s.action = random_action(rng, 8, false, i + 1 == len ? 0.7 : 0.0);
    if (!is_answer(s.action)) {
      s.observation = random_observation(rng);
    }
    t.steps.push_back(std::move(s));
  }
  t.terminated = !t.steps.empty() && is_answer(t.steps.back().action);
  return t;
}

// Records every call and answers from a fixed verdict pattern.
class PatternJudge final : public CompletenessJudge {
 public:
  explicit PatternJudge(std::vector<Verdict> pattern) : pattern_(std::move(pattern)) {}
  Verdict judge(const TaskSpec&, const Trajectory&, Rng&) const override {
    return pattern_[calls_++ % pattern_.size()];
  }
  std::size_t calls() const { return calls_; }

 private:
  std::vector<Verdict> pattern_;
  mutable std::size_t calls_ = 0;
};

}  // namespace rltr::test
