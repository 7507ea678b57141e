#pragma once

#include <span>
#include <utility>

#include "rltr/judges.hpp"
#include "rltr/task_env.hpp"
#include "rltr/trajectory.hpp"

namespace rltr {

inline constexpr double kFormatPenalty = -1.0;

struct RewardConfig {
  std::size_t samples = 4;  // judge samples N averaged into r_comp
  double lambda = 0.1;      // repetition penalty weight
  double mu = 0.1;          // error penalty weight

  void validate() const;
};

struct RewardBreakdown {
  bool format_valid = false;
  double r_comp = 0.0;
  double r_repeat = 0.0;
  double r_error = 0.0;
  double r_rule = 0.0;
  double r_total = kFormatPenalty;
};

/// Mean of a verdict sequence: (#ones) / N. Throws on an empty sequence.
double mean_verdict(std::span<const Verdict> verdicts);

/// Averages `samples` independent judge invocations. Throws on samples == 0.
double completeness_reward(const TaskSpec& task, const Trajectory& traj, const CompletenessJudge& judge,
                           std::size_t samples, Rng& rng);

/// (r_repeat, r_error) = (-lambda * repetitions, -mu * tool errors).
std::pair<double, double> rule_rewards(const Trajectory& traj, double lambda, double mu);

/// Format gate, then r_comp + r_repeat + r_error. Invalid trajectories score
/// exactly -1 with every component zero and never reach the judge.
RewardBreakdown total_reward(const TaskSpec& task, const Trajectory& traj, const ToolRegistry& registry,
                             const CompletenessJudge& judge, const RewardConfig& cfg, Rng& rng);

/// Summarize, then judge the answer. No rule penalties.
double answer_reward(const TaskSpec& task, const Trajectory& traj, const Summarizer& summarizer,
                     const AnswerJudge& judge, Rng& rng);

/// Answer reward behind the same -1 format gate as total_reward.
RewardBreakdown gated_answer_reward(const TaskSpec& task, const Trajectory& traj, const ToolRegistry& registry,
                                    const Summarizer& summarizer, const AnswerJudge& judge, Rng& rng);

}  // namespace rltr
