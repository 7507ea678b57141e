#include "rltr/reward.hpp"

#include <algorithm>
#include <stdexcept>

namespace rltr {

void RewardConfig::validate() const {
  if (samples < 1) {
    throw std::invalid_argument("samples: must be >= 1");
  }
  if (!(lambda >= 0.0)) {
    throw std::invalid_argument("lambda: must be >= 0");
  }
  if (!(mu >= 0.0)) {
    throw std::invalid_argument("mu: must be >= 0");
  }
}

double mean_verdict(std::span<const Verdict> verdicts) {
  if (verdicts.empty()) {
    throw std::invalid_argument("mean_verdict: need at least one verdict");
  }
  const auto ones = std::count(verdicts.begin(), verdicts.end(), 1);
  return static_cast<double>(ones) / static_cast<double>(verdicts.size());
}

double completeness_reward(const TaskSpec& task, const Trajectory& traj, const CompletenessJudge& judge,
                           std::size_t samples, Rng& rng) {
  if (samples == 0) {
    throw std::invalid_argument("completeness_reward: N must be >= 1");
  }
  std::size_t ones = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    ones += judge.judge(task, traj, rng) == 1 ? 1 : 0;
  }
  return static_cast<double>(ones) / static_cast<double>(samples);
}

std::pair<double, double> rule_rewards(const Trajectory& traj, double lambda, double mu) {
  // 0.0 - x keeps a zero penalty as +0.0 rather than -0.0.
  return {0.0 - lambda * static_cast<double>(repetition_count(traj)),
          0.0 - mu * static_cast<double>(error_count(traj))};
}

RewardBreakdown total_reward(const TaskSpec& task, const Trajectory& traj, const ToolRegistry& registry,
                             const CompletenessJudge& judge, const RewardConfig& cfg, Rng& rng) {
  RewardBreakdown r;
  if (!validate_format(traj, registry).valid()) {
    return r;
  }
  r.format_valid = true;
  r.r_comp = completeness_reward(task, traj, judge, cfg.samples, rng);
  std::tie(r.r_repeat, r.r_error) = rule_rewards(traj, cfg.lambda, cfg.mu);
  r.r_rule = r.r_repeat + r.r_error;
  r.r_total = r.r_comp + r.r_rule;
  return r;
}

double answer_reward(const TaskSpec& task, const Trajectory& traj, const Summarizer& summarizer,
                     const AnswerJudge& judge, Rng& rng) {
  const auto summary = summarizer.summarize(task, traj, rng);
  return static_cast<double>(judge.judge(task, summary.answer, rng));
}

RewardBreakdown gated_answer_reward(const TaskSpec& task, const Trajectory& traj, const ToolRegistry& registry,
                                    const Summarizer& summarizer, const AnswerJudge& judge, Rng& rng) {
  RewardBreakdown r;
  if (!validate_format(traj, registry).valid()) {
    return r;
  }
  r.format_valid = true;
  r.r_total = answer_reward(task, traj, summarizer, judge, rng);
  return r;
}

}  // namespace rltr
