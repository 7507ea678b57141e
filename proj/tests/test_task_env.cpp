#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

#include "rltr/io.hpp"
#include "rltr/task_env.hpp"
#include "support.hpp"

namespace rltr {
namespace {

using test::compute;
using test::play;
using test::search;
using test::temperature_task;

TaskDistribution dist(double p_compute = 0.5, double noise = 0.1) {
  TaskDistribution d;
  d.p_compute = p_compute;
  d.feature_noise = noise;
  return d;
}

TEST(ComputeOps, Apply) {
  EXPECT_EQ(apply(ComputeOp::difference, 20, 5), 15);
  EXPECT_EQ(apply(ComputeOp::sum, -3, 5), 2);
  EXPECT_EQ(apply(ComputeOp::max, -3, -5), -3);
  for (auto op : kComputeOps) {
    EXPECT_EQ(parse_compute_op(to_string(op)), op);
  }
  EXPECT_FALSE(parse_compute_op("mul"));
}

TEST(GenerateTasks, ForcedComputeExample) {
  auto d = dist(1.0);
  d.seed = 7;
  const auto tasks = generate_tasks(d, 3, 7);
  ASSERT_EQ(tasks.size(), 3u);
  for (const auto& t : tasks) {
    EXPECT_EQ(t.required_search.size(), 2u);
    ASSERT_TRUE(t.required_compute);
  }
}

TEST(GenerateTasks, ZeroNoiseFeaturesAreIndicators) {
  const auto tasks = generate_tasks(dist(0.5, 0.0), 50, 3);
  for (const auto& t : tasks) {
    std::vector<double> expect(11, 0.0);
    for (const auto& s : t.required_search) {
      expect[static_cast<std::size_t>(std::stoi(s.substr(1)))] = 1.0;
    }
    if (t.required_compute) {
      expect[8 + static_cast<std::size_t>(t.required_compute->op)] = 1.0;
    }
    EXPECT_EQ(t.query_features, expect);
  }
}

TEST(GenerateTasks, Deterministic) {
  EXPECT_EQ(generate_tasks(dist(), 40, 11), generate_tasks(dist(), 40, 11));
  EXPECT_NE(generate_tasks(dist(), 40, 11), generate_tasks(dist(), 40, 12));
}

TEST(GenerateTasks, Invariants) {
  auto d = dist();
  d.r_max = 3;
  const auto tasks = generate_tasks(d, 500, 1, "t");
  std::set<std::string> ids;
  std::size_t with_compute = 0;
  for (const auto& t : tasks) {
    EXPECT_TRUE(ids.insert(t.query_id).second);
    EXPECT_EQ(t.query_id.front(), 't');
    EXPECT_GE(t.required_search.size(), 1u);
    EXPECT_LE(t.required_search.size(), 3u);
    for (const auto& s : t.required_search) {
      EXPECT_TRUE(t.fact_table.count(s));
      EXPECT_EQ(std::count(t.distractor_slots.begin(), t.distractor_slots.end(), s), 0);
    }
    for (const auto& s : t.distractor_slots) {
      EXPECT_TRUE(t.fact_table.count(s));
    }
    for (const auto& [slot, v] : t.fact_table) {
      EXPECT_GE(v, kMinFact);
      EXPECT_LE(v, kMaxFact);
    }
    if (t.required_compute) {
      ++with_compute;
      const auto& c = *t.required_compute;
      EXPECT_TRUE(std::count(t.required_search.begin(), t.required_search.end(), c.lhs));
      EXPECT_TRUE(std::count(t.required_search.begin(), t.required_search.end(), c.rhs));
      EXPECT_EQ(t.gold_answer, apply(c.op, t.fact_table.at(c.lhs), t.fact_table.at(c.rhs)));
    } else {
      ASSERT_FALSE(t.required_search.empty());
      EXPECT_EQ(t.gold_answer, t.fact_table.at(t.required_search.front()));
    }
    EXPECT_NE(t.gold_answer, kAbstention);
  }
  EXPECT_GT(with_compute, 150u);
  EXPECT_LT(with_compute, 350u);
}

TEST(GenerateTasks, RejectsBadDistribution) {
  auto d = dist();
  d.r_max = 0;
  EXPECT_THROW(generate_tasks(d, 1, 0), std::invalid_argument);
  d = dist();
  d.r_max = 9;
  EXPECT_THROW(generate_tasks(d, 1, 0), std::invalid_argument);
  d = dist(1.5);
  EXPECT_THROW(generate_tasks(d, 1, 0), std::invalid_argument);
  EXPECT_THROW(generate_tasks(dist(), 0, 0), std::invalid_argument);
}

TEST(TasksJsonl, RoundTrip) {
  const auto tasks = generate_tasks(dist(), 30, 4);
  std::stringstream ss;
  write_tasks_jsonl(ss, tasks);
  EXPECT_EQ(read_tasks_jsonl(ss), tasks);
}

TEST(Step, SearchKnownSlot) {
  const auto task = temperature_task();
  auto [obs, s] = step(EpisodeState::start(task), search("k1"));
  ASSERT_TRUE(obs);
  EXPECT_EQ(std::get<Fact>(*obs), (Fact{"k1", 20}));
  EXPECT_EQ(s.gathered_facts.at("k1"), 20);
  EXPECT_EQ(s.turn, 1u);
  EXPECT_EQ(s.history.size(), 1u);
}

TEST(Step, SearchUnknownSlot) {
  const auto task = temperature_task();
  auto [obs, s] = step(EpisodeState::start(task), search("k0"));
  EXPECT_EQ(std::get<ToolError>(*obs).code, ToolErrorCode::unknown_slot);
  EXPECT_TRUE(s.gathered_facts.empty());
}

TEST(Step, DistractorSearchIsValid) {
  const auto task = temperature_task();
  auto [obs, s] = step(EpisodeState::start(task), search("k6"));
  EXPECT_EQ(std::get<Fact>(*obs), (Fact{"k6", -7}));
}

TEST(Step, ComputeBeforeOperands) {
  const auto task = temperature_task();
  auto s = step(EpisodeState::start(task), search("k1")).second;
  auto [obs, s2] = step(s, compute("diff"));
  EXPECT_EQ(std::get<ToolError>(*obs).code, ToolErrorCode::missing_operands);
  EXPECT_FALSE(s2.compute_done);
}

TEST(Step, ComputeAfterOperands) {
  const auto task = temperature_task();
  const auto t = play(task, {search("k1"), search("k3"), compute("diff")});
  EXPECT_EQ(std::get<ComputeResult>(*t.steps[2].observation).value, 15);
  // A different op still computes but does not satisfy the task.
  const auto wrong = play(task, {search("k1"), search("k3"), compute("sum")});
  EXPECT_EQ(std::get<ComputeResult>(*wrong.steps[2].observation).value, 25);
}

TEST(Step, ComputeOnTaskWithoutComputeIsBadTool) {
  const auto task = temperature_task(std::nullopt);
  const auto t = play(task, {search("k1"), compute("max")});
  EXPECT_EQ(std::get<ToolError>(*t.steps[1].observation).code, ToolErrorCode::bad_tool);
}

TEST(Step, AnswerTerminates) {
  const auto task = temperature_task();
  auto [obs, s] = step(EpisodeState::start(task), Answer{});
  EXPECT_FALSE(obs);
  EXPECT_TRUE(s.terminated);
  EXPECT_THROW(step(s, Answer{}), std::logic_error);
}

TEST(Step, NeverMutatesFactTableAndGathersMonotonically) {
  Rng rng(3);
  const auto tasks = generate_tasks(dist(), 50, 3);
  for (const auto& task : tasks) {
    const auto before = task.fact_table;
    auto s = EpisodeState::start(task);
    for (int i = 0; i < 10 && !s.terminated; ++i) {
      const auto prev = s.gathered_facts;
      s = step(s, test::random_action(rng, 8, true)).second;
      for (const auto& [k, v] : prev) {
        EXPECT_EQ(s.gathered_facts.at(k), v);
      }
      for (const auto& [k, v] : s.gathered_facts) {
        EXPECT_EQ(task.fact_table.at(k), v);
      }
      EXPECT_EQ(s.turn, s.history.size());
    }
    EXPECT_EQ(task.fact_table, before);
  }
}

class AlwaysAnswer final : public Planner {
 public:
  Action act(const TaskSpec&, const EpisodeState&, Rng&) const override { return Answer{}; }
};

class NeverAnswer final : public Planner {
 public:
  Action act(const TaskSpec&, const EpisodeState&, Rng&) const override { return search("k1"); }
};

TEST(Rollout, AlwaysAnswerIsOneStep) {
  Rng rng(1);
  const auto t = rollout(AlwaysAnswer{}, temperature_task(), 8, rng);
  EXPECT_EQ(t.steps.size(), 1u);
  EXPECT_TRUE(t.terminated);
}

TEST(Rollout, TruncationIsFormatInvalid) {
  Rng rng(1);
  const auto t = rollout(NeverAnswer{}, temperature_task(), 2, rng);
  EXPECT_EQ(t.steps.size(), 2u);
  EXPECT_FALSE(t.terminated);
  EXPECT_FALSE(validate_format(t, make_registry(8)).valid());
  EXPECT_THROW(rollout(NeverAnswer{}, temperature_task(), 0, rng), std::invalid_argument);
}

TEST(Rollout, ScriptedTeacherIsComplete) {
  Rng rng(1);
  const ScriptedTeacher teacher(0.0);
  const auto task = temperature_task();
  const auto t = rollout(teacher, task, 8, rng);
  EXPECT_EQ(oracle_completeness(task, t), 1);
  ASSERT_EQ(t.steps.size(), 4u);
  EXPECT_EQ(std::get<ToolCall>(t.steps[0].action), search("k1"));
  EXPECT_EQ(std::get<ToolCall>(t.steps[1].action), search("k3"));
  EXPECT_EQ(std::get<ToolCall>(t.steps[2].action), compute("diff"));
  EXPECT_TRUE(is_answer(t.steps[3].action));
  for (const auto& generated : generate_tasks(dist(), 100, 8)) {
    EXPECT_EQ(oracle_completeness(generated, rollout(teacher, generated, 8, rng)), 1);
  }
}

TEST(Rollout, DeviatingTeacherStillTerminatesAndVaries) {
  Rng rng(1);
  const ScriptedTeacher teacher(0.5);
  const auto tasks = generate_tasks(dist(), 100, 8);
  std::size_t complete = 0;
  for (const auto& task : tasks) {
    const auto t = rollout(teacher, task, 8, rng);
    complete += static_cast<std::size_t>(oracle_completeness(task, t));
    EXPECT_TRUE(check_structure(t).valid());
  }
  EXPECT_LT(complete, tasks.size());
  EXPECT_GT(complete, 0u);
}

TEST(Rollout, DeterministicGivenStream) {
  const ScriptedTeacher teacher(0.3);
  const auto task = temperature_task();
  Rng a(42), b(42);
  EXPECT_EQ(trajectory_jsonl_line(rollout(teacher, task, 8, a)), trajectory_jsonl_line(rollout(teacher, task, 8, b)));
}

TEST(ReplayStates, MatchesHistoryPrefixes) {
  const auto task = temperature_task();
  const auto t = play(task, {search("k1"), search("k6"), search("k3"), compute("diff"), Answer{}});
  const auto states = replay_states(task, t);
  ASSERT_EQ(states.size(), t.steps.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    EXPECT_EQ(states[i].turn, i);
    EXPECT_EQ(states[i].history.size(), i);
  }
  EXPECT_TRUE(states[4].compute_done);
}

TEST(OracleCompleteness, Examples) {
  const auto task = temperature_task();
  EXPECT_EQ(oracle_completeness(task, play(task, {search("k1"), search("k3"), compute("diff"), Answer{}})), 1);
  EXPECT_EQ(oracle_completeness(task, play(task, {search("k1"), compute("diff"), Answer{}})), 0);
  EXPECT_EQ(oracle_completeness(task, play(task, {search("k1"), search("k3"), Answer{}})), 0);
  EXPECT_EQ(oracle_completeness(task, play(task, {search("k1"), search("k3"), compute("max"), Answer{}})), 0);
}

TEST(OracleCompleteness, ComputeBeforeOperandsNotRetried) {
  const auto task = temperature_task();
  EXPECT_EQ(oracle_completeness(task, play(task, {compute("diff"), search("k1"), search("k3"), Answer{}})), 0);
  EXPECT_EQ(oracle_completeness(task, play(task, {compute("diff"), search("k1"), search("k3"), compute("diff"), Answer{}})), 1);
}

// Enumerates every action sequence of length <= 4 over the task's relevant
// actions and checks the ordering rule against a direct scan.
TEST(OracleCompleteness, OrderingByEnumeration) {
  const auto task = temperature_task();
  const std::vector<Action> alphabet = {search("k1"), search("k3"), search("k6"), compute("diff"), compute("sum")};
  std::vector<std::size_t> idx;
  std::function<void(std::size_t)> rec = [&](std::size_t depth) {
    std::vector<Action> actions;
    for (auto i : idx) {
      actions.push_back(alphabet[i]);
    }
    bool k1 = false, k3 = false, done = false;
    for (auto i : idx) {
      k1 |= i == 0;
      k3 |= i == 1;
      done |= i == 3 && k1 && k3;
    }
    actions.push_back(Answer{});
    EXPECT_EQ(oracle_completeness(task, play(task, actions)), done && k1 && k3 ? 1 : 0);
    if (depth == 4) {
      return;
    }
    for (std::size_t a = 0; a < alphabet.size(); ++a) {
      idx.push_back(a);
      rec(depth + 1);
      idx.pop_back();
    }
  };
  rec(0);
}

TEST(OracleSummarize, Examples) {
  const auto task = temperature_task();
  const auto complete = play(task, {search("k1"), search("k3"), compute("diff"), Answer{}});
  const auto partial = play(task, {search("k1"), Answer{}});
  Rng rng(0);
  for (double h : {0.0, 0.5, 1.0}) {
    const auto s = oracle_summarize(task, complete, h, rng);
    EXPECT_EQ(s.answer, 15);
    EXPECT_TRUE(s.is_correct);
  }
  for (int i = 0; i < 100; ++i) {
    const auto abstain = oracle_summarize(task, partial, 0.0, rng);
    EXPECT_EQ(abstain.answer, kAbstention);
    EXPECT_FALSE(abstain.is_correct);
    const auto fabricated = oracle_summarize(task, partial, 1.0, rng);
    EXPECT_NE(fabricated.answer, task.gold_answer);
    EXPECT_NE(fabricated.answer, kAbstention);
    EXPECT_FALSE(fabricated.is_correct);
  }
}

TEST(OracleSummarize, CompletenessImpliesAnswerability) {
  Rng rng(77);
  const ScriptedTeacher teacher(0.4);
  for (const auto& task : generate_tasks(dist(), 300, 2)) {
    const auto t = rollout(teacher, task, 8, rng);
    const auto s = oracle_summarize(task, t, 0.0, rng);
    EXPECT_EQ(s.is_correct, oracle_completeness(task, t) == 1);
    if (oracle_completeness(task, t) == 1) {
      EXPECT_TRUE(oracle_summarize(task, t, 1.0, rng).is_correct);
    }
  }
}

}  // namespace
}  // namespace rltr
