#include "rltr/policy.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rltr {

namespace {

std::string action_key(const Action& a) {
  if (const auto* call = std::get_if<ToolCall>(&a)) {
    return call->tool + "(" + call->arg + ")";
  }
  return "ANSWER";
}

void check_dims(const Matrix& theta, const Vector& phi) {
  if (theta.cols() != phi.size()) {
    throw std::invalid_argument("dimension mismatch: theta has " + std::to_string(theta.cols()) +
                                " columns, phi has " + std::to_string(phi.size()) + " entries");
  }
}

}  // namespace

ActionVocabulary::ActionVocabulary(const ToolRegistry& registry) {
  for (const auto& tool : registry.tools()) {
    for (const auto& slot : tool.arg_slots) {
      actions_.emplace_back(ToolCall{tool.name, slot});
    }
  }
  actions_.emplace_back(Answer{});
  for (std::size_t i = 0; i < actions_.size(); ++i) {
    index_.emplace(action_key(actions_[i]), i);
  }
}

std::optional<std::size_t> ActionVocabulary::index_of(const Action& a) const {
  auto it = index_.find(action_key(a));
  if (it == index_.end()) {
    return std::nullopt;
  }
  return it->second;
}

std::uint64_t ActionVocabulary::hash() const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& a : actions_) {
    for (char c : action_key(a) + ";") {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

std::string ActionVocabulary::name(std::size_t i) const { return action_key(actions_.at(i)); }

Featurizer::Featurizer(std::shared_ptr<const ActionVocabulary> vocab, std::size_t query_dim, std::size_t max_turns)
    : vocab_(std::move(vocab)), query_dim_(query_dim), max_turns_(max_turns) {
  if (!vocab_) {
    throw std::invalid_argument("featurizer needs a vocabulary");
  }
  if (max_turns_ < 1) {
    throw std::invalid_argument("max_turns: must be >= 1");
  }
}

Vector Featurizer::featurize(const TaskPublicView& task, const std::vector<Step>& history) const {
  if (task.query_features.size() != query_dim_) {
    throw std::invalid_argument("query feature dimension mismatch");
  }
  Vector phi = Vector::Zero(static_cast<Eigen::Index>(dim()));
  for (std::size_t i = 0; i < query_dim_; ++i) {
    phi[static_cast<Eigen::Index>(i)] = task.query_features[i];
  }
  const auto counts_at = static_cast<Eigen::Index>(query_dim_);
  const auto answer = vocab_->answer_index();
  for (const auto& s : history) {
    auto idx = vocab_->index_of(s.action);
    if (idx && *idx != answer) {
      auto& c = phi[counts_at + static_cast<Eigen::Index>(*idx)];
      c = std::min(c + 1.0, kHistoryCountCap);
    }
  }
  const auto flags_at = counts_at + static_cast<Eigen::Index>(vocab_->size() - 1);
  if (!history.empty() && history.back().observation) {
    const auto& obs = *history.back().observation;
    phi[flags_at + static_cast<Eigen::Index>(obs.index())] = 1.0;
  }
  phi[flags_at + static_cast<Eigen::Index>(kObservationFlags)] =
      static_cast<double>(history.size()) / static_cast<double>(max_turns_);
  return phi;
}

Vector softmax(const Vector& logits) {
  Vector e = (logits.array() - logits.maxCoeff()).exp();
  return e / e.sum();
}

Vector log_softmax(const Vector& logits) {
  const double m = logits.maxCoeff();
  const double lse = m + std::log((logits.array() - m).exp().sum());
  return logits.array() - lse;
}

Vector action_probs(const Matrix& theta, const Vector& phi) {
  check_dims(theta, phi);
  return softmax(theta * phi);
}

Vector action_log_probs(const Matrix& theta, const Vector& phi) {
  check_dims(theta, phi);
  return log_softmax(theta * phi);
}

Matrix grad_log_prob(const Matrix& theta, const Vector& phi, std::size_t action) {
  check_dims(theta, phi);
  if (action >= static_cast<std::size_t>(theta.rows())) {
    throw std::invalid_argument("action index out of range");
  }
  Vector coeff = -action_probs(theta, phi);
  coeff[static_cast<Eigen::Index>(action)] += 1.0;
  return coeff * phi.transpose();
}

double categorical_kl(const Vector& log_p, const Vector& log_q) {
  double kl = (log_p.array().exp() * (log_p - log_q).array()).sum();
  return std::max(kl, 0.0);
}

double kl_divergence(const Matrix& theta, const Matrix& theta_ref, const Vector& phi) {
  if (theta.rows() != theta_ref.rows() || theta.cols() != theta_ref.cols()) {
    throw std::invalid_argument("kl_divergence: parameter shapes differ");
  }
  return categorical_kl(action_log_probs(theta, phi), action_log_probs(theta_ref, phi));
}

Matrix grad_kl(const Matrix& theta, const Matrix& theta_ref, const Vector& phi) {
  const Vector log_p = action_log_probs(theta, phi);
  const Vector log_q = action_log_probs(theta_ref, phi);
  const Vector p = log_p.array().exp();
  const Vector diff = log_p - log_q;
  const double kl = p.dot(diff);
  // d KL / d z_j = p_j (log p_j - log q_j - KL)
  const Vector dz = p.array() * (diff.array() - kl);
  return dz * phi.transpose();
}

std::size_t sample_index(const Vector& probs, Rng& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) {
      return static_cast<std::size_t>(i);
    }
  }
  return static_cast<std::size_t>(probs.size() - 1);
}

std::size_t argmax_index(const Vector& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) {
      best = i;
    }
  }
  return static_cast<std::size_t>(best);
}

Action LinearPlanner::act(const TaskSpec& task, const EpisodeState& state, Rng& rng) const {
  const Vector phi = featurizer_.featurize(task.public_view(), state);
  const Vector logits = theta_ * phi;
  const std::size_t a = greedy_ ? argmax_index(logits) : sample_index(softmax(logits), rng);
  return featurizer_.vocabulary()[a];
}

std::string checkpoint_text(const Matrix& theta, const ActionVocabulary& vocab) {
  std::ostringstream out;
  out << "rltr-policy v1 actions " << theta.rows() << " dim " << theta.cols() << " vocab " << std::hex
      << vocab.hash() << std::dec << '\n';
  char buf[64];
  for (Eigen::Index r = 0; r < theta.rows(); ++r) {
    for (Eigen::Index c = 0; c < theta.cols(); ++c) {
      auto res = std::to_chars(buf, buf + sizeof(buf), theta(r, c));
      if (c > 0) {
        out << ' ';
      }
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
  return out.str();
}

void save_checkpoint(const std::filesystem::path& path, const Matrix& theta, const ActionVocabulary& vocab) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) {
    throw std::runtime_error("cannot open checkpoint for writing: " + path.string());
  }
  f << checkpoint_text(theta, vocab);
  if (!f) {
    throw std::runtime_error("failed writing checkpoint: " + path.string());
  }
}

Matrix load_checkpoint(const std::filesystem::path& path, const ActionVocabulary& vocab, std::size_t dim) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw std::runtime_error("cannot open checkpoint: " + path.string());
  }
  std::string magic, version, k_actions, k_dim, k_vocab;
  std::size_t rows = 0, cols = 0;
  std::uint64_t hash = 0;
  f >> magic >> version >> k_actions >> rows >> k_dim >> cols >> k_vocab >> std::hex >> hash >> std::dec;
  if (!f || magic != "rltr-policy" || version != "v1" || k_actions != "actions" || k_dim != "dim" ||
      k_vocab != "vocab") {
    throw std::runtime_error("malformed checkpoint header: " + path.string());
  }
  if (rows != vocab.size() || cols != dim || hash != vocab.hash()) {
    throw std::runtime_error("checkpoint does not match the action vocabulary or feature dimension: " +
                             path.string());
  }
  Matrix theta(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  std::string tok;
  for (Eigen::Index r = 0; r < theta.rows(); ++r) {
    for (Eigen::Index c = 0; c < theta.cols(); ++c) {
      if (!(f >> tok)) {
        throw std::runtime_error("checkpoint truncated: " + path.string());
      }
      double v = 0.0;
      auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size() || !std::isfinite(v)) {
        throw std::runtime_error("bad checkpoint entry '" + tok + "': " + path.string());
      }
      theta(r, c) = v;
    }
  }
  return theta;
}

}  // namespace rltr
