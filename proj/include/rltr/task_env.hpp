#pragma once

// Synthetic "fact-chase" tasks: the planner must search a set of required
// slots, optionally combine two of them with a compute op, then answer.

#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rltr/rng.hpp"
#include "rltr/trajectory.hpp"

namespace rltr {

enum class ComputeOp { difference, sum, max };

inline constexpr std::size_t kNumComputeOps = 3;
inline constexpr ComputeOp kComputeOps[kNumComputeOps] = {ComputeOp::difference, ComputeOp::sum, ComputeOp::max};

std::string_view to_string(ComputeOp op) noexcept;
std::optional<ComputeOp> parse_compute_op(std::string_view s) noexcept;
Value apply(ComputeOp op, Value lhs, Value rhs) noexcept;

inline constexpr std::string_view kSearchTool = "search";
inline constexpr std::string_view kComputeTool = "compute";

inline constexpr Value kMinFact = -50;
inline constexpr Value kMaxFact = 50;

/// Sentinel answer emitted by a summarizer that declines to answer. Lies far
/// outside every reachable gold answer.
inline constexpr Value kAbstention = std::numeric_limits<Value>::min();

std::string slot_name(std::size_t i);

/// Registry with `search` over slots k0..k{M-1} and `compute` over the op names.
ToolRegistry make_registry(std::size_t num_slots);

struct ComputeSpec {
  ComputeOp op = ComputeOp::difference;
  std::string lhs;
  std::string rhs;
  bool operator==(const ComputeSpec&) const = default;
};

/// What the policy is allowed to see of a task.
struct TaskPublicView {
  std::string_view query_id;
  std::span<const double> query_features;
};

struct TaskSpec {
  std::string query_id;
  std::vector<double> query_features;
  std::vector<std::string> required_search;
  std::optional<ComputeSpec> required_compute;
  std::map<std::string, Value> fact_table;
  std::vector<std::string> distractor_slots;
  Value gold_answer = 0;

  TaskPublicView public_view() const noexcept { return {query_id, query_features}; }
  bool operator==(const TaskSpec&) const = default;
};

struct TaskDistribution {
  std::size_t num_slots = 8;
  std::size_t r_max = 2;
  double p_compute = 0.5;
  std::size_t distractors = 2;
  double feature_noise = 0.1;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  /// Query feature dimension: slot indicator plus compute-op one-hot.
  std::size_t feature_dim() const noexcept { return num_slots + kNumComputeOps; }
};

/// Deterministic in (dist, seed). Task ids are `<id_prefix><index>`, so train
/// and eval sets drawn with different prefixes never share ids.
std::vector<TaskSpec> generate_tasks(const TaskDistribution& dist, std::size_t n, std::uint64_t seed,
                                     std::string_view id_prefix = "q");

struct EpisodeState {
  const TaskSpec* task = nullptr;
  std::map<std::string, Value> gathered_facts;
  bool compute_done = false;
  bool terminated = false;
  std::size_t turn = 0;
  std::vector<Step> history;

  static EpisodeState start(const TaskSpec& task) {
    EpisodeState s;
    s.task = &task;
    return s;
  }
};

/// Applies one action. Throws std::logic_error on a terminated episode.
std::pair<std::optional<Observation>, EpisodeState> step(EpisodeState state, const Action& action);

/// Anything that can choose the next action. Learned planners must only read
/// task.public_view(); the scripted teacher is privileged.
class Planner {
 public:
  virtual ~Planner() = default;
  virtual Action act(const TaskSpec& task, const EpisodeState& state, Rng& rng) const = 0;
};

Trajectory rollout(const Planner& planner, const TaskSpec& task, std::size_t max_turns, Rng& rng);

/// Episode states before each step of `traj`, reconstructed by replaying its
/// actions against the task.
std::vector<EpisodeState> replay_states(const TaskSpec& task, const Trajectory& traj);

/// Scripted expert: required searches in slot order, then the compute op,
/// then Answer. With probability `deviation` per step it instead takes a
/// detour (distractor search or premature/unneeded compute) when one exists.
class ScriptedTeacher final : public Planner {
 public:
  explicit ScriptedTeacher(double deviation = 0.2) : deviation_(deviation) {}
  Action act(const TaskSpec& task, const EpisodeState& state, Rng& rng) const override;

 private:
  double deviation_;
};

struct Summary {
  Value answer = kAbstention;
  bool is_correct = false;
};

/// 1 iff every required slot has a Fact observation and, if a compute op is
/// required, a ComputeResult for that op appears after both operand facts.
int oracle_completeness(const TaskSpec& task, const Trajectory& traj);

/// Complete evidence yields the gold answer. Otherwise fabricate a plausible
/// wrong answer with probability h, else abstain.
Summary oracle_summarize(const TaskSpec& task, const Trajectory& traj, double h, Rng& rng);

}  // namespace rltr
