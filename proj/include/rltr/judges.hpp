#pragma once

// Binary verdict providers. Each is a noisy wrapper around an oracle: the
// completeness judge flips the oracle completeness bit, the answer judge
// accepts the gold answer and, with probability h, a fabricated one.

#include <cstdint>

#include "rltr/rng.hpp"
#include "rltr/task_env.hpp"

namespace rltr {

struct JudgeConfig {
  double fp = 0.0;  // P(verdict 1 | truth 0)
  double fn = 0.0;  // P(verdict 0 | truth 1)
  double h = 0.0;   // answer judge: P(accept fabricated answer)
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument unless every rate lies in [0, 1].
  void validate() const;
};

using Verdict = int;  // 0 or 1

Verdict completeness_judge(const TaskSpec& task, const Trajectory& traj, const JudgeConfig& cfg, Rng& rng);
Verdict answer_judge(const TaskSpec& task, Value answer, const JudgeConfig& cfg, Rng& rng);

/// Single-call contract (context, subject, rng) -> {0, 1}. Remote judges plug
/// in here by subclassing.
class CompletenessJudge {
 public:
  virtual ~CompletenessJudge() = default;
  virtual Verdict judge(const TaskSpec& task, const Trajectory& traj, Rng& rng) const = 0;
};

class AnswerJudge {
 public:
  virtual ~AnswerJudge() = default;
  virtual Verdict judge(const TaskSpec& task, Value answer, Rng& rng) const = 0;
};

class Summarizer {
 public:
  virtual ~Summarizer() = default;
  virtual Summary summarize(const TaskSpec& task, const Trajectory& traj, Rng& rng) const = 0;
};

class NoisyCompletenessJudge final : public CompletenessJudge {
 public:
  explicit NoisyCompletenessJudge(JudgeConfig cfg) : cfg_(cfg) { cfg_.validate(); }
  Verdict judge(const TaskSpec& task, const Trajectory& traj, Rng& rng) const override {
    return completeness_judge(task, traj, cfg_, rng);
  }

 private:
  JudgeConfig cfg_;
};

class NoisyAnswerJudge final : public AnswerJudge {
 public:
  explicit NoisyAnswerJudge(JudgeConfig cfg) : cfg_(cfg) { cfg_.validate(); }
  Verdict judge(const TaskSpec& task, Value answer, Rng& rng) const override {
    return answer_judge(task, answer, cfg_, rng);
  }

 private:
  JudgeConfig cfg_;
};

class OracleSummarizer final : public Summarizer {
 public:
  explicit OracleSummarizer(double hallucination_rate) : h_(hallucination_rate) {}
  Summary summarize(const TaskSpec& task, const Trajectory& traj, Rng& rng) const override {
    return oracle_summarize(task, traj, h_, rng);
  }

 private:
  double h_;
};

}  // namespace rltr
