#include <gtest/gtest.h>

#include "rltr/reward.hpp"
#include "support.hpp"

namespace rltr {
namespace {

using test::PatternJudge;
using test::play;
using test::search;
using test::temperature_task;

const ToolRegistry& registry() {
  static const ToolRegistry r = make_registry(8);
  return r;
}

const TaskSpec& task() {
  static const TaskSpec t = temperature_task();
  return t;
}

Trajectory complete() { return play(task(), {search("k1"), search("k3"), test::compute("diff"), Answer{}}); }

// Counts every call and refuses to be used; proves a code path never ran.
class ForbiddenSummarizer final : public Summarizer {
 public:
  Summary summarize(const TaskSpec&, const Trajectory&, Rng&) const override {
    ADD_FAILURE() << "summarizer invoked";
    return {};
  }
};

class ForbiddenAnswerJudge final : public AnswerJudge {
 public:
  Verdict judge(const TaskSpec&, Value, Rng&) const override {
    ADD_FAILURE() << "answer judge invoked";
    return 0;
  }
};

TEST(MeanVerdict, Examples) {
  const std::vector<Verdict> v = {1, 1, 0, 1};
  EXPECT_EQ(mean_verdict(v), 0.75);
  EXPECT_THROW(mean_verdict(std::vector<Verdict>{}), std::invalid_argument);
}

TEST(CompletenessReward, UsesNIndependentCalls) {
  Rng rng(0);
  PatternJudge judge({1, 1, 0, 1});
  EXPECT_EQ(completeness_reward(task(), complete(), judge, 4, rng), 0.75);
  EXPECT_EQ(judge.calls(), 4u);
  EXPECT_THROW(completeness_reward(task(), complete(), judge, 0, rng), std::invalid_argument);
}

TEST(CompletenessReward, NoiselessCompleteIsOneForAnyN) {
  const NoisyCompletenessJudge judge({});
  Rng rng(0);
  for (std::size_t n : {1u, 2u, 4u, 7u, 16u}) {
    EXPECT_EQ(completeness_reward(task(), complete(), judge, n, rng), 1.0);
  }
}

TEST(CompletenessReward, MonteCarloFalseNegative) {
  const NoisyCompletenessJudge judge({0, 0.1, 0, 0});
  Rng rng(17);
  double sum = 0;
  const int trials = 10000;
  for (int i = 0; i < trials; ++i) {
    sum += completeness_reward(task(), complete(), judge, 8, rng);
  }
  EXPECT_NEAR(sum / trials, 0.9, 0.01);
}

TEST(CompletenessReward, MultipleOfOneOverNAndInRange) {
  const NoisyCompletenessJudge judge({0.3, 0.3, 0, 0});
  Rng rng(3);
  for (std::size_t n = 1; n <= 8; ++n) {
    for (int i = 0; i < 50; ++i) {
      const double r = completeness_reward(task(), complete(), judge, n, rng);
      const double scaled = r * static_cast<double>(n);
      EXPECT_EQ(scaled, std::round(scaled));
      EXPECT_GE(r, 0.0);
      EXPECT_LE(r, 1.0);
    }
  }
}

TEST(CompletenessReward, AddingAPositiveVerdictNeverLowersIt) {
  for (std::size_t n = 1; n <= 6; ++n) {
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      std::vector<Verdict> v;
      for (std::size_t i = 0; i < n; ++i) {
        v.push_back(static_cast<int>((mask >> i) & 1u));
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (v[i] == 0) {
          auto w = v;
          w[i] = 1;
          EXPECT_GE(mean_verdict(w), mean_verdict(v));
        }
      }
    }
  }
}

TEST(RuleRewards, Examples) {
  auto t = complete();
  EXPECT_EQ(rule_rewards(t, 0.1, 0.1), std::make_pair(0.0, 0.0));
  const auto repeated = play(task(), {search("k1"), search("k1"), search("k3"), test::compute("diff"), Answer{}});
  EXPECT_DOUBLE_EQ(rule_rewards(repeated, 0.1, 0.1).first, -0.1);
  const auto errors = play(task(), {search("k0"), test::compute("diff"), search("k1"), Answer{}});
  EXPECT_DOUBLE_EQ(rule_rewards(errors, 0.1, 0.2).second, -0.4);
}

TEST(RuleRewards, NoNegativeZero) {
  const auto [rep, err] = rule_rewards(complete(), 0.1, 0.1);
  EXPECT_FALSE(std::signbit(rep));
  EXPECT_FALSE(std::signbit(err));
}

TEST(TotalReward, Examples) {
  const NoisyCompletenessJudge judge({});
  const RewardConfig cfg;
  Rng rng(0);

  const auto truncated = play(task(), {search("k1"), search("k3")});
  const auto r0 = total_reward(task(), truncated, registry(), judge, cfg, rng);
  EXPECT_FALSE(r0.format_valid);
  EXPECT_EQ(r0.r_total, -1.0);
  EXPECT_EQ(r0.r_comp, 0.0);
  EXPECT_EQ(r0.r_rule, 0.0);

  const auto r1 = total_reward(task(), complete(), registry(), judge, cfg, rng);
  EXPECT_TRUE(r1.format_valid);
  EXPECT_EQ(r1.r_total, 1.0);

  const auto repeated = play(task(), {search("k1"), search("k1"), search("k3"), test::compute("diff"), Answer{}});
  const auto r2 = total_reward(task(), repeated, registry(), judge, cfg, rng);
  EXPECT_DOUBLE_EQ(r2.r_total, 0.9);
  EXPECT_DOUBLE_EQ(r2.r_repeat, -0.1);
  EXPECT_EQ(r2.r_rule, r2.r_repeat + r2.r_error);
}

TEST(TotalReward, InvalidNeverReachesJudge) {
  PatternJudge judge({1});
  Rng rng(0);
  const auto truncated = play(task(), {search("k1")});
  total_reward(task(), truncated, registry(), judge, {}, rng);
  EXPECT_EQ(judge.calls(), 0u);
}

TEST(TotalReward, NotClippedBelow) {
  PatternJudge judge({0});
  Rng rng(0);
  std::vector<Action> actions(7, search("k0"));
  actions.push_back(Answer{});
  const auto t = play(task(), actions);
  const auto r = total_reward(task(), t, registry(), judge, {4, 0.2, 0.2}, rng);
  EXPECT_TRUE(r.format_valid);
  EXPECT_DOUBLE_EQ(r.r_total, -0.2 * 6 - 0.2 * 7);
  EXPECT_LT(r.r_total, -1.0);
}

TEST(TotalReward, DeterministicWithNoiselessJudge) {
  const NoisyCompletenessJudge judge({});
  Rng a(1), b(2);
  const auto t = play(task(), {search("k1"), Answer{}});
  EXPECT_EQ(total_reward(task(), t, registry(), judge, {}, a).r_total,
            total_reward(task(), t, registry(), judge, {}, b).r_total);
}

TEST(RewardConfig, Validate) {
  EXPECT_THROW((RewardConfig{0, 0.1, 0.1}.validate()), std::invalid_argument);
  EXPECT_THROW((RewardConfig{4, -0.1, 0.1}.validate()), std::invalid_argument);
  EXPECT_THROW((RewardConfig{4, 0.1, -1}.validate()), std::invalid_argument);
}

TEST(AnswerReward, Examples) {
  Rng rng(0);
  const OracleSummarizer exact(0.0);
  const NoisyAnswerJudge noiseless({});
  EXPECT_EQ(answer_reward(task(), complete(), exact, noiseless, rng), 1.0);

  const auto partial = play(task(), {search("k1"), Answer{}});
  EXPECT_EQ(answer_reward(task(), partial, exact, noiseless, rng), 0.0);

  const OracleSummarizer fabricating(1.0);
  const NoisyAnswerJudge gullible({0, 0, 1.0, 0});
  EXPECT_EQ(answer_reward(task(), partial, fabricating, gullible, rng), 1.0);
}

TEST(AnswerReward, InvariantToRulePenaltyWeights) {
  // A repetitive, error-ridden but complete trajectory earns full answer reward.
  const auto messy =
      play(task(), {search("k0"), search("k1"), search("k1"), search("k3"), test::compute("diff"), Answer{}});
  Rng rng(0);
  EXPECT_EQ(gated_answer_reward(task(), messy, registry(), OracleSummarizer(0), NoisyAnswerJudge({}), rng).r_total, 1.0);
}

TEST(GatedAnswerReward, SameFormatGate) {
  Rng rng(0);
  ForbiddenSummarizer s;
  ForbiddenAnswerJudge j;
  const auto r = gated_answer_reward(task(), play(task(), {search("k1")}), registry(), s, j, rng);
  EXPECT_FALSE(r.format_valid);
  EXPECT_EQ(r.r_total, -1.0);
}

TEST(RewardDecoupling, CompletenessIgnoresSummarizer) {
  // total_reward has no summarizer input at all; r_comp depends only on the
  // judge's view of the trajectory.
  PatternJudge a({1, 0}), b({1, 0});
  Rng r1(1), r2(999);
  EXPECT_EQ(total_reward(task(), complete(), registry(), a, {}, r1).r_comp,
            total_reward(task(), complete(), registry(), b, {}, r2).r_comp);
}

}  // namespace
}  // namespace rltr
