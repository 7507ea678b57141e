#include "rltr/judges.hpp"

#include <stdexcept>
#include <string>

namespace rltr {

void JudgeConfig::validate() const {
  auto check = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument(std::string(name) + ": must lie in [0, 1]");
    }
  };
  check(fp, "fp");
  check(fn, "fn");
  check(h, "h");
}

Verdict completeness_judge(const TaskSpec& task, const Trajectory& traj, const JudgeConfig& cfg, Rng& rng) {
  const int truth = oracle_completeness(task, traj);
  const double flip = truth == 1 ? cfg.fn : cfg.fp;
  return bernoulli(rng, flip) ? 1 - truth : truth;
}

Verdict answer_judge(const TaskSpec& task, Value answer, const JudgeConfig& cfg, Rng& rng) {
  if (answer == kAbstention) {
    return 0;
  }
  if (answer == task.gold_answer) {
    return bernoulli(rng, cfg.fn) ? 0 : 1;
  }
  return bernoulli(rng, cfg.h) ? 1 : 0;
}

}  // namespace rltr
