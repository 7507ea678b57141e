#include <gtest/gtest.h>

#include "rltr/judges.hpp"
#include "support.hpp"

namespace rltr {
namespace {

using test::play;
using test::search;
using test::temperature_task;

const TaskSpec& task() {
  static const TaskSpec t = temperature_task();
  return t;
}

Trajectory complete() { return play(task(), {search("k1"), search("k3"), test::compute("diff"), Answer{}}); }
Trajectory incomplete() { return play(task(), {search("k1"), Answer{}}); }

double mean_completeness(const Trajectory& t, const JudgeConfig& cfg, int draws, std::uint64_t seed) {
  Rng rng(seed);
  double sum = 0;
  for (int i = 0; i < draws; ++i) {
    sum += completeness_judge(task(), t, cfg, rng);
  }
  return sum / draws;
}

double mean_answer(Value answer, const JudgeConfig& cfg, int draws, std::uint64_t seed) {
  Rng rng(seed);
  double sum = 0;
  for (int i = 0; i < draws; ++i) {
    sum += answer_judge(task(), answer, cfg, rng);
  }
  return sum / draws;
}

TEST(JudgeConfig, Validate) {
  EXPECT_NO_THROW((JudgeConfig{0.1, 0.2, 0.3, 0}.validate()));
  EXPECT_THROW((JudgeConfig{-0.1, 0, 0, 0}.validate()), std::invalid_argument);
  EXPECT_THROW((JudgeConfig{0, 1.5, 0, 0}.validate()), std::invalid_argument);
  EXPECT_THROW((JudgeConfig{0, 0, std::nan(""), 0}.validate()), std::invalid_argument);
}

TEST(CompletenessJudge, NoiselessEqualsOracle) {
  Rng rng(1);
  const ScriptedTeacher teacher(0.5);
  TaskDistribution d;
  for (const auto& t : generate_tasks(d, 200, 5)) {
    const auto traj = rollout(teacher, t, 8, rng);
    EXPECT_EQ(completeness_judge(t, traj, {}, rng), oracle_completeness(t, traj));
  }
}

TEST(CompletenessJudge, FullFalseNegativeAlwaysZero) {
  EXPECT_EQ(mean_completeness(complete(), {0, 1, 0, 0}, 1000, 2), 0.0);
}

TEST(CompletenessJudge, FalsePositiveRate) {
  EXPECT_NEAR(mean_completeness(incomplete(), {0.2, 0, 0, 0}, 10000, 3), 0.2, 0.02);
  EXPECT_NEAR(mean_completeness(complete(), {0, 0.1, 0, 0}, 10000, 4), 0.9, 0.01);
}

TEST(AnswerJudge, Examples) {
  EXPECT_EQ(mean_answer(task().gold_answer, {}, 100, 5), 1.0);
  EXPECT_EQ(mean_answer(kAbstention, {1, 1, 1, 0}, 1000, 5), 0.0);
  EXPECT_NEAR(mean_answer(task().gold_answer + 3, {0, 0, 0.3, 0}, 10000, 6), 0.3, 0.02);
  EXPECT_NEAR(mean_answer(task().gold_answer, {0, 0.1, 0, 0}, 10000, 7), 0.9, 0.01);
}

TEST(AnswerJudge, FalsePositiveRateDoesNotAffectIt) {
  EXPECT_EQ(mean_answer(task().gold_answer + 1, {1.0, 0, 0, 0}, 500, 8), 0.0);
}

TEST(Judges, SameStreamSameVerdicts) {
  const JudgeConfig cfg{0.3, 0.3, 0.3, 0};
  const NoisyCompletenessJudge cj(cfg);
  const NoisyAnswerJudge aj(cfg);
  Rng a(99), b(99);
  for (int i = 0; i < 200; ++i) {
    EXPECT_EQ(cj.judge(task(), incomplete(), a), cj.judge(task(), incomplete(), b));
    EXPECT_EQ(aj.judge(task(), 3, a), aj.judge(task(), 3, b));
  }
}

TEST(Judges, CompletenessJudgeIgnoresAnswerContent) {
  // Two trajectories with the same actions but different fact values must be
  // judged from the action sequence alone.
  auto other = task();
  other.fact_table["k1"] = -40;
  other.gold_answer = apply(ComputeOp::difference, -40, 5);
  const auto t = play(other, {search("k1"), search("k3"), test::compute("diff"), Answer{}});
  Rng rng(1);
  EXPECT_EQ(completeness_judge(task(), t, {}, rng), 1);
}

TEST(Summarizer, OracleWrapper) {
  const OracleSummarizer s(0.0);
  Rng rng(1);
  EXPECT_EQ(s.summarize(task(), complete(), rng).answer, 15);
  EXPECT_EQ(s.summarize(task(), incomplete(), rng).answer, kAbstention);
}

}  // namespace
}  // namespace rltr
