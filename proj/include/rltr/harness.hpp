#pragma once

// Experiment orchestration: config loading, evaluation, the judge accuracy
// study, the cold start -> RL -> eval pipeline and the rltr vs e2e comparison.

#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "rltr/io.hpp"
#include "rltr/judges.hpp"
#include "rltr/policy.hpp"
#include "rltr/reward.hpp"
#include "rltr/task_env.hpp"
#include "rltr/trainers.hpp"

namespace rltr {

inline constexpr int kSchemaVersion = 1;

/// Config validation failure. `field()` is the dotted path of the offending
/// key, e.g. "trainer.lr".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& why)
      : std::runtime_error(field + ": " + why), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct ExperimentConfig {
  std::uint64_t seed = 7;
  TaskDistribution tasks;
  std::size_t train_tasks = 200;
  std::size_t eval_tasks = 100;
  JudgeConfig completeness_judge{0.1, 0.1, 0.0, 0};
  JudgeConfig answer_judge{0.0, 0.1, 0.25, 0};
  double summarizer_hallucination = 0.25;
  RewardConfig reward;
  ColdStartConfig cold_start;
  TrainerConfig trainer;
  std::size_t judge_study_trajectories = 1000;
  std::filesystem::path output_dir = "rltr_out";

  /// Throws ConfigError with a field path.
  void validate() const;
};

/// Parses the JSON config document. Unknown keys are rejected. Missing keys
/// keep their defaults; `schema_version` is mandatory.
ExperimentConfig parse_config(const Json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);
Json config_to_json(const ExperimentConfig& cfg);

/// Everything derived from a config: tool registry, vocabulary, featurizer,
/// task sets and judges.
struct ExperimentSetup {
  explicit ExperimentSetup(const ExperimentConfig& cfg);

  ExperimentConfig config;
  ToolRegistry registry;
  std::shared_ptr<const ActionVocabulary> vocab;
  Featurizer featurizer;
  std::vector<TaskSpec> train;
  std::vector<TaskSpec> eval;
  NoisyCompletenessJudge completeness;
  NoisyAnswerJudge answer;
  OracleSummarizer summarizer;

  RewardContext reward_context() const;
  TrainerConfig trainer_config() const;
};

struct EvalRow {
  std::string query_id;
  int completeness = 0;
  bool correct = false;
  std::size_t turns = 0;
  std::size_t errors = 0;
  bool format_valid = false;
};

struct EvalReport {
  double mean_completeness = 0.0;  // Com.
  double match_rate = 0.0;         // Match
  double mean_turns = 0.0;
  double error_rate = 0.0;  // tool errors per tool call
  double format_invalid_rate = 0.0;
  std::vector<EvalRow> rows;
  std::vector<Trajectory> trajectories;
};

Json to_json(const EvalReport& report);

/// Greedy rollouts of `planner` on every task; Match summarizes each
/// trajectory with hallucination rate `h` on stream (seed, task index).
EvalReport evaluate_planner(const Planner& planner, std::span<const TaskSpec> tasks, const ToolRegistry& registry,
                            std::size_t max_turns, double h, std::uint64_t seed);

EvalReport evaluate(const Featurizer& featurizer, const ToolRegistry& registry, const Matrix& theta,
                    std::span<const TaskSpec> tasks, double h, std::uint64_t seed);

struct BinaryScores {
  double accuracy = 0.0;
  double f1 = 0.0;
};

BinaryScores binary_scores(std::span<const int> truth, std::span<const int> predicted);

struct JudgeStudyResult {
  BinaryScores completeness_reward;
  BinaryScores answer_reward;
  std::size_t trajectories = 0;
  std::size_t positives = 0;
};

Json to_json(const JudgeStudyResult& r);

/// Samples `count` trajectories from the stochastic policy (cycling through
/// `tasks`). Ground truth is whether the summarized answer is correct; the
/// completeness reward predicts 1 when its N-sample mean is >= 0.5, the answer
/// reward predicts its own verdict.
JudgeStudyResult judge_accuracy_experiment(const Featurizer& featurizer, const Matrix& theta,
                                           std::span<const TaskSpec> tasks, const JudgeConfig& completeness_cfg,
                                           const JudgeConfig& answer_cfg, double summarizer_h, std::size_t samples,
                                           std::size_t count, std::uint64_t seed);

struct ExperimentResult {
  PolicyParams cold_start;
  TrainResult trained;
  EvalReport cold_start_eval;
  EvalReport final_eval;
};

/// Cold start, RL training and evaluation, in memory.
ExperimentResult run_pipeline(const ExperimentSetup& setup);

/// Cold start only.
PolicyParams run_cold_start(const ExperimentSetup& setup);

/// Output bundle writer. Files are staged in a private directory and moved
/// into place only once every file has been produced; on failure the
/// staging directory is removed and nothing is left behind.
class BundleWriter {
 public:
  explicit BundleWriter(std::filesystem::path out_dir);
  ~BundleWriter();
  BundleWriter(const BundleWriter&) = delete;
  BundleWriter& operator=(const BundleWriter&) = delete;

  void add(const std::string& name, std::string contents);
  void commit();

 private:
  std::filesystem::path out_dir_;
  std::filesystem::path staging_;
  std::vector<std::string> names_;
};

/// File names inside an output bundle.
namespace bundle {
inline constexpr const char* kTrainTasks = "train_tasks.jsonl";
inline constexpr const char* kEvalTasks = "eval_tasks.jsonl";
inline constexpr const char* kColdStartCheckpoint = "checkpoint_cold_start.txt";
inline constexpr const char* kFinalCheckpoint = "checkpoint_final.txt";
inline constexpr const char* kTrainingLog = "training_log.csv";
inline constexpr const char* kEvalReport = "eval_report.json";
inline constexpr const char* kTrajectories = "trajectories.jsonl";
inline constexpr const char* kJudgeStudy = "judge_study.json";
inline constexpr const char* kCompare = "compare.csv";
}  // namespace bundle

void write_tasks_bundle(const ExperimentSetup& setup, const std::filesystem::path& out);
void write_cold_start_bundle(const ExperimentSetup& setup, const std::filesystem::path& out);
ExperimentResult run_experiment(const ExperimentSetup& setup, const std::filesystem::path& out);
EvalReport write_eval_bundle(const ExperimentSetup& setup, const Matrix& theta, const std::filesystem::path& out);
JudgeStudyResult write_judge_study_bundle(const ExperimentSetup& setup, const Matrix& theta,
                                          const std::filesystem::path& out);

struct CompareResult {
  ExperimentResult rltr;
  ExperimentResult e2e;
};

/// Same cold start, seed and budget; only the reward mode differs.
CompareResult run_compare(const ExperimentSetup& setup);
CompareResult write_compare_bundle(const ExperimentSetup& setup, const std::filesystem::path& out);

}  // namespace rltr
