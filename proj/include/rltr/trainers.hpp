#pragma once

// Cold start (teacher sampling, best-of-n rejection sampling, behavior
// cloning) and the generate / evaluate / optimize RL loop with GRPO,
// REINFORCE++ and PPO advantage estimators.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rltr/judges.hpp"
#include "rltr/policy.hpp"
#include "rltr/reward.hpp"
#include "rltr/task_env.hpp"

namespace rltr {

enum class Algorithm { reinforce_pp, grpo, ppo };
enum class RewardMode { rltr, e2e_answer };

std::string_view to_string(Algorithm a) noexcept;
std::string_view to_string(RewardMode m) noexcept;
std::optional<Algorithm> parse_algorithm(std::string_view s) noexcept;
/// Accepts "rltr", "e2e" and "e2e_answer".
std::optional<RewardMode> parse_reward_mode(std::string_view s) noexcept;

struct TrainerConfig {
  Algorithm algorithm = Algorithm::grpo;
  RewardMode reward_mode = RewardMode::rltr;
  std::size_t batch_size = 32;
  std::size_t group_size = 8;
  double lr = 0.05;
  double value_lr = 0.05;
  double kl_beta = 0.01;
  double clip_eps = 0.2;
  std::size_t iterations = 300;
  std::size_t max_turns = 8;
  double std_eps = 1e-8;
  std::size_t update_epochs = 4;
  std::size_t threads = 1;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct ValueParams {
  Vector w;
};

struct IterationStats {
  std::size_t iter = 0;
  double r_total = 0.0;
  double r_comp = 0.0;
  double err_penalty = 0.0;  // mean |r_error|
  double turns = 0.0;
  double len = 0.0;  // mean rendered template length in bytes
  double kl = 0.0;   // mean per-step KL to the reference policy
  double invalid_rate = 0.0;
};

struct TrainingLog {
  std::vector<IterationStats> records;

  static constexpr std::string_view kCsvHeader = "iter,r_total,r_comp,err_penalty,turns,len,kl,invalid_rate";
  std::string to_csv() const;
};

/// Everything used to score a trajectory. Only the members the reward mode
/// needs are touched: rltr never reaches the summarizer or answer judge,
/// e2e_answer never reaches the completeness judge.
struct RewardContext {
  const ToolRegistry* registry = nullptr;
  RewardConfig reward;
  const CompletenessJudge* completeness = nullptr;
  const Summarizer* summarizer = nullptr;
  const AnswerJudge* answer = nullptr;
};

RewardBreakdown score_trajectory(const RewardContext& ctx, RewardMode mode, const TaskSpec& task,
                                 const Trajectory& traj, Rng& rng);

struct StepSample {
  Vector phi;
  std::size_t action = 0;
  double old_log_prob = 0.0;
  double kl = 0.0;  // KL(pi_old || pi_ref) at this state
};

struct Episode {
  std::size_t task_index = 0;
  Trajectory traj;
  std::vector<StepSample> steps;
  RewardBreakdown reward;
};

/// Replays a trajectory and records, per action step, the features, the
/// chosen action index, its log-probability under theta and the KL to the
/// reference (zero without one). Observations contribute only through the
/// features of later states.
std::vector<StepSample> record_steps(const Featurizer& featurizer, const PolicyParams& params, const TaskSpec& task,
                                     const Trajectory& traj);

// ---- advantages ----------------------------------------------------------

/// (R_i - mean) / (std + std_eps) with population std. Throws if G < 2.
std::vector<double> grpo_advantages(std::span<const double> rewards, double std_eps);

/// Shaped return R_i - beta * sum_t KL_t, standardized over the batch.
std::vector<double> reinforcepp_advantages(std::span<const double> rewards, std::span<const double> kl_sums,
                                           double beta, double std_eps);

/// min(rho * A, clip(rho, 1 - eps, 1 + eps) * A)
double clipped_surrogate(double ratio, double advantage, double eps) noexcept;

/// d clipped_surrogate / d log pi, i.e. rho * A on the unclipped branch and 0
/// where the clip is active.
double clipped_surrogate_slope(double ratio, double advantage, double eps) noexcept;

/// Clipped-surrogate gradient with respect to theta, summed over the steps
/// of each episode and averaged over episodes. `advantages[e][t]` pairs
/// with `episodes[e].steps[t]`.
Matrix surrogate_gradient(const Matrix& theta, std::span<const Episode> episodes,
                          const std::vector<std::vector<double>>& advantages, double eps);

/// grad KL(pi_theta || pi_ref), summed over steps and averaged over episodes.
Matrix kl_gradient(const Matrix& theta, const Matrix& theta_ref, std::span<const Episode> episodes);

/// Terminal-reward returns with per-step -beta * KL_t, gamma = lambda_GAE = 1.
std::vector<std::vector<double>> ppo_returns(std::span<const Episode> episodes, double beta);

/// One PPO update: GAE(1, 1) advantages against the linear critic, whitened
/// over the batch, `update_epochs` clipped-surrogate ascent steps on theta
/// and the same number of regression steps on the critic.
std::pair<Matrix, Vector> ppo_update(std::span<const Episode> episodes, const PolicyParams& params,
                                     const ValueParams& value, const TrainerConfig& cfg);

// ---- cold start ----------------------------------------------------------

using TrajectoryScorer = std::function<double(const TaskSpec&, const Trajectory&)>;

/// Oracle completeness as a real score.
double completeness_score(const TaskSpec& task, const Trajectory& traj);

/// Index of the best candidate: highest score, then fewest steps, then lowest
/// index.
std::size_t select_best(const TaskSpec& task, std::span<const Trajectory> candidates, const TrajectoryScorer& scorer);

/// n teacher rollouts drawn sequentially from `rng`; returns the best.
Trajectory reject_sample(const Planner& teacher, const TaskSpec& task, std::size_t n, const TrajectoryScorer& scorer,
                         std::size_t max_turns, Rng& rng);

struct BcSample {
  Vector phi;
  std::size_t action = 0;
};

/// State/action pairs of a trajectory. Observation content is never a target.
std::vector<BcSample> bc_samples(const Featurizer& featurizer, const TaskSpec& task, const Trajectory& traj);

/// Mean negative log-likelihood of the dataset.
double bc_loss(const Matrix& theta, std::span<const BcSample> data);

/// Full-batch gradient ascent on the mean log-likelihood, one step per
/// epoch. Returns the loss before each step followed by the final loss.
std::vector<double> bc_fit(Matrix& theta, std::span<const BcSample> data, std::size_t epochs, double lr);

struct ColdStartConfig {
  std::size_t tasks = 200;
  std::size_t n = 4;
  std::size_t epochs = 100;
  double lr = 0.5;
  double teacher_deviation = 0.2;

  void validate() const;
};

PolicyParams cold_start_bc(const Planner& teacher, std::span<const TaskSpec> tasks, const Featurizer& featurizer,
                           const ColdStartConfig& cfg, std::size_t max_turns, Rng& rng);

// ---- RL loop -------------------------------------------------------------

struct TrainResult {
  PolicyParams params;
  ValueParams value;
  TrainingLog log;
};

/// Runs cfg.iterations of generate / evaluate / optimize. The reference
/// policy is frozen from theta0 if it has none. Episode (b, g) of iteration i
/// draws from its own stream (seed, i, b, g), so any thread count gives
/// identical results.
TrainResult train_loop(PolicyParams theta0, const TrainerConfig& cfg, std::span<const TaskSpec> tasks,
                       const Featurizer& featurizer, const RewardContext& rewards);

}  // namespace rltr
