#pragma once

// Linear-softmax planner over a finite action vocabulary.

#include <Eigen/Dense>

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "rltr/task_env.hpp"
#include "rltr/trajectory.hpp"

namespace rltr {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Fixed ordering of every action: each (tool, slot) pair of the registry in
/// registry order, then Answer last.
class ActionVocabulary {
 public:
  explicit ActionVocabulary(const ToolRegistry& registry);

  std::size_t size() const noexcept { return actions_.size(); }
  const Action& operator[](std::size_t i) const { return actions_.at(i); }
  std::size_t answer_index() const noexcept { return actions_.size() - 1; }

  /// Index of an action, or nullopt if it is not in the vocabulary.
  std::optional<std::size_t> index_of(const Action& a) const;

  /// FNV-1a over the rendered action names; stamps checkpoints.
  std::uint64_t hash() const noexcept;

  std::string name(std::size_t i) const;

 private:
  std::vector<Action> actions_;
  std::unordered_map<std::string, std::size_t> index_;
};

inline constexpr double kHistoryCountCap = 3.0;
inline constexpr std::size_t kObservationFlags = 3;

/// Builds the state feature vector:
///   query features | per-action call counts (capped, Answer excluded)
///   | last observation {fact, result, error} | turn / max_turns
class Featurizer {
 public:
  Featurizer(std::shared_ptr<const ActionVocabulary> vocab, std::size_t query_dim, std::size_t max_turns);

  std::size_t dim() const noexcept { return query_dim_ + vocab_->size() - 1 + kObservationFlags + 1; }
  std::size_t query_dim() const noexcept { return query_dim_; }
  std::size_t max_turns() const noexcept { return max_turns_; }
  const ActionVocabulary& vocabulary() const noexcept { return *vocab_; }

  /// Reads only the public view and the step history of the episode.
  Vector featurize(const TaskPublicView& task, const std::vector<Step>& history) const;
  Vector featurize(const TaskPublicView& task, const EpisodeState& state) const {
    return featurize(task, state.history);
  }

 private:
  std::shared_ptr<const ActionVocabulary> vocab_;
  std::size_t query_dim_;
  std::size_t max_turns_;
};

struct PolicyParams {
  Matrix theta;
  std::shared_ptr<const Matrix> theta_ref;

  static PolicyParams zeros(std::size_t actions, std::size_t dim) {
    return PolicyParams{Matrix::Zero(static_cast<Eigen::Index>(actions), static_cast<Eigen::Index>(dim)), nullptr};
  }

  /// Freezes a copy of the current weights as the reference policy.
  void freeze_reference() { theta_ref = std::make_shared<const Matrix>(theta); }
};

/// Numerically stable softmax (max-logit subtracted).
Vector softmax(const Vector& logits);
Vector log_softmax(const Vector& logits);

/// softmax(theta * phi). Throws std::invalid_argument on dimension mismatch.
Vector action_probs(const Matrix& theta, const Vector& phi);
Vector action_log_probs(const Matrix& theta, const Vector& phi);

/// Exact gradient of log pi(a | phi) with respect to theta: (e_a - pi) phi^T.
Matrix grad_log_prob(const Matrix& theta, const Vector& phi, std::size_t action);

double categorical_kl(const Vector& log_p, const Vector& log_q);

/// KL(pi_theta(.|phi) || pi_ref(.|phi)) over the whole vocabulary.
double kl_divergence(const Matrix& theta, const Matrix& theta_ref, const Vector& phi);

/// Gradient of kl_divergence with respect to theta.
Matrix grad_kl(const Matrix& theta, const Matrix& theta_ref, const Vector& phi);

/// Planner view of a linear-softmax policy. Samples during training, argmax
/// when greedy (lowest index wins ties).
class LinearPlanner final : public Planner {
 public:
  LinearPlanner(const Featurizer& featurizer, const Matrix& theta, bool greedy)
      : featurizer_(featurizer), theta_(theta), greedy_(greedy) {}

  Action act(const TaskSpec& task, const EpisodeState& state, Rng& rng) const override;

 private:
  const Featurizer& featurizer_;
  const Matrix& theta_;
  bool greedy_;
};

std::size_t sample_index(const Vector& probs, Rng& rng);
std::size_t argmax_index(const Vector& v);

/// Text checkpoint: a header line with |A|, d and the vocabulary hash, then
/// one row of theta per line in shortest round-trip decimal.
void save_checkpoint(const std::filesystem::path& path, const Matrix& theta, const ActionVocabulary& vocab);
Matrix load_checkpoint(const std::filesystem::path& path, const ActionVocabulary& vocab, std::size_t dim);
std::string checkpoint_text(const Matrix& theta, const ActionVocabulary& vocab);

}  // namespace rltr
