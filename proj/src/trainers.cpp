#include "rltr/trainers.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace rltr {

std::string_view to_string(Algorithm a) noexcept {
  switch (a) {
    case Algorithm::reinforce_pp:
      return "reinforce_pp";
    case Algorithm::grpo:
      return "grpo";
    case Algorithm::ppo:
      return "ppo";
  }
  return "grpo";
}

std::string_view to_string(RewardMode m) noexcept {
  return m == RewardMode::rltr ? "rltr" : "e2e_answer";
}

std::optional<Algorithm> parse_algorithm(std::string_view s) noexcept {
  if (s == "reinforce_pp" || s == "reinforce++") {
    return Algorithm::reinforce_pp;
  }
  if (s == "grpo") {
    return Algorithm::grpo;
  }
  if (s == "ppo") {
    return Algorithm::ppo;
  }
  return std::nullopt;
}

std::optional<RewardMode> parse_reward_mode(std::string_view s) noexcept {
  if (s == "rltr") {
    return RewardMode::rltr;
  }
  if (s == "e2e" || s == "e2e_answer") {
    return RewardMode::e2e_answer;
  }
  return std::nullopt;
}

void TrainerConfig::validate() const {
  auto fail = [](const char* field, const char* why) { throw std::invalid_argument(std::string(field) + ": " + why); };
  if (batch_size < 1) {
    fail("batch_size", "must be >= 1");
  }
  if (algorithm == Algorithm::grpo && group_size < 2) {
    fail("group_size", "must be >= 2 for grpo");
  }
  if (!(lr >= 0.0) || !std::isfinite(lr)) {
    fail("lr", "must be finite and >= 0");
  }
  if (!(value_lr >= 0.0) || !std::isfinite(value_lr)) {
    fail("value_lr", "must be finite and >= 0");
  }
  if (!(kl_beta >= 0.0)) {
    fail("kl_beta", "must be >= 0");
  }
  if (!(clip_eps > 0.0 && clip_eps < 1.0)) {
    fail("clip_eps", "must lie in (0, 1)");
  }
  if (max_turns < 1) {
    fail("max_turns", "must be >= 1");
  }
  if (!(std_eps >= 0.0)) {
    fail("std_eps", "must be >= 0");
  }
  if (update_epochs < 1) {
    fail("update_epochs", "must be >= 1");
  }
  if (threads < 1) {
    fail("threads", "must be >= 1");
  }
}

void ColdStartConfig::validate() const {
  auto fail = [](const char* field, const char* why) { throw std::invalid_argument(std::string(field) + ": " + why); };
  if (tasks < 1) {
    fail("tasks", "must be >= 1");
  }
  if (n < 1) {
    fail("n", "must be >= 1");
  }
  if (!(lr >= 0.0) || !std::isfinite(lr)) {
    fail("lr", "must be finite and >= 0");
  }
  if (!(teacher_deviation >= 0.0 && teacher_deviation <= 1.0)) {
    fail("teacher_deviation", "must lie in [0, 1]");
  }
}

namespace {

void append_number(std::string& out, double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

double mean(std::span<const double> xs) {
  if (xs.empty()) {
    return 0.0;
  }
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double population_std(std::span<const double> xs, double m) {
  if (xs.empty()) {
    return 0.0;
  }
  double ss = 0.0;
  for (double x : xs) {
    ss += (x - m) * (x - m);
  }
  return std::sqrt(ss / static_cast<double>(xs.size()));
}

std::vector<double> standardize(std::span<const double> xs, double std_eps) {
  if (std::adjacent_find(xs.begin(), xs.end(), std::not_equal_to<>()) == xs.end()) {
    return std::vector<double>(xs.size(), 0.0);
  }
  const double m = mean(xs);
  const double sd = population_std(xs, m);
  std::vector<double> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dev = xs[i] - m;
    out[i] = dev == 0.0 ? 0.0 : dev / (sd + std_eps);
  }
  return out;
}

template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      fn(i);
    }
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += threads) {
        fn(i);
      }
    });
  }
}

std::size_t total_steps(std::span<const Episode> episodes) {
  std::size_t n = 0;
  for (const auto& e : episodes) {
    n += e.steps.size();
  }
  return n;
}

}  // namespace

std::string TrainingLog::to_csv() const {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : records) {
    out += std::to_string(r.iter);
    for (double v : {r.r_total, r.r_comp, r.err_penalty, r.turns, r.len, r.kl, r.invalid_rate}) {
      out += ',';
      append_number(out, v);
    }
    out += '\n';
  }
  return out;
}

RewardBreakdown score_trajectory(const RewardContext& ctx, RewardMode mode, const TaskSpec& task,
                                 const Trajectory& traj, Rng& rng) {
  if (ctx.registry == nullptr) {
    throw std::invalid_argument("reward context has no tool registry");
  }
  if (mode == RewardMode::rltr) {
    if (ctx.completeness == nullptr) {
      throw std::invalid_argument("rltr reward mode needs a completeness judge");
    }
    return total_reward(task, traj, *ctx.registry, *ctx.completeness, ctx.reward, rng);
  }
  if (ctx.summarizer == nullptr || ctx.answer == nullptr) {
    throw std::invalid_argument("e2e_answer reward mode needs a summarizer and an answer judge");
  }
  return gated_answer_reward(task, traj, *ctx.registry, *ctx.summarizer, *ctx.answer, rng);
}

std::vector<StepSample> record_steps(const Featurizer& featurizer, const PolicyParams& params, const TaskSpec& task,
                                     const Trajectory& traj) {
  const auto states = replay_states(task, traj);
  const auto& vocab = featurizer.vocabulary();
  std::vector<StepSample> out;
  out.reserve(states.size());
  for (std::size_t t = 0; t < states.size(); ++t) {
    StepSample s;
    s.phi = featurizer.featurize(task.public_view(), states[t]);
    auto idx = vocab.index_of(traj.steps[t].action);
    if (!idx) {
      throw std::invalid_argument("trajectory action outside the vocabulary");
    }
    s.action = *idx;
    const Vector log_p = action_log_probs(params.theta, s.phi);
    s.old_log_prob = log_p[static_cast<Eigen::Index>(s.action)];
    if (params.theta_ref) {
      s.kl = categorical_kl(log_p, action_log_probs(*params.theta_ref, s.phi));
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<double> grpo_advantages(std::span<const double> rewards, double std_eps) {
  if (rewards.size() < 2) {
    throw std::invalid_argument("grpo_advantages: group size must be >= 2");
  }
  return standardize(rewards, std_eps);
}

std::vector<double> reinforcepp_advantages(std::span<const double> rewards, std::span<const double> kl_sums,
                                           double beta, double std_eps) {
  if (rewards.empty()) {
    throw std::invalid_argument("reinforcepp_advantages: empty batch");
  }
  if (kl_sums.size() != rewards.size()) {
    throw std::invalid_argument("reinforcepp_advantages: rewards and KL sums differ in length");
  }
  std::vector<double> shaped(rewards.size());
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    shaped[i] = rewards[i] - beta * kl_sums[i];
  }
  return standardize(shaped, std_eps);
}

double clipped_surrogate(double ratio, double advantage, double eps) noexcept {
  const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
  return std::min(ratio * advantage, clipped * advantage);
}

double clipped_surrogate_slope(double ratio, double advantage, double eps) noexcept {
  if (advantage > 0.0 && ratio > 1.0 + eps) {
    return 0.0;
  }
  if (advantage < 0.0 && ratio < 1.0 - eps) {
    return 0.0;
  }
  return ratio * advantage;
}

Matrix surrogate_gradient(const Matrix& theta, std::span<const Episode> episodes,
                          const std::vector<std::vector<double>>& advantages, double eps) {
  if (advantages.size() != episodes.size()) {
    throw std::invalid_argument("surrogate_gradient: one advantage row per episode required");
  }
  Matrix grad = Matrix::Zero(theta.rows(), theta.cols());
  const std::size_t n = total_steps(episodes);
  if (n == 0) {
    return grad;
  }
  for (std::size_t e = 0; e < episodes.size(); ++e) {
    const auto& steps = episodes[e].steps;
    if (advantages[e].size() != steps.size()) {
      throw std::invalid_argument("surrogate_gradient: advantage row length differs from episode length");
    }
    for (std::size_t t = 0; t < steps.size(); ++t) {
      const double adv = advantages[e][t];
      if (adv == 0.0) {
        continue;
      }
      const auto& s = steps[t];
      const Vector log_p = action_log_probs(theta, s.phi);
      const double ratio = std::exp(log_p[static_cast<Eigen::Index>(s.action)] - s.old_log_prob);
      const double slope = clipped_surrogate_slope(ratio, adv, eps);
      if (slope == 0.0) {
        continue;
      }
      Vector coeff = -log_p.array().exp();
      coeff[static_cast<Eigen::Index>(s.action)] += 1.0;
      grad.noalias() += (slope * coeff) * s.phi.transpose();
    }
  }
  return grad / static_cast<double>(episodes.size());
}

Matrix kl_gradient(const Matrix& theta, const Matrix& theta_ref, std::span<const Episode> episodes) {
  Matrix grad = Matrix::Zero(theta.rows(), theta.cols());
  const std::size_t n = total_steps(episodes);
  if (n == 0) {
    return grad;
  }
  for (const auto& e : episodes) {
    for (const auto& s : e.steps) {
      grad += grad_kl(theta, theta_ref, s.phi);
    }
  }
  return grad / static_cast<double>(episodes.size());
}

std::vector<std::vector<double>> ppo_returns(std::span<const Episode> episodes, double beta) {
  std::vector<std::vector<double>> returns(episodes.size());
  for (std::size_t e = 0; e < episodes.size(); ++e) {
    const auto& steps = episodes[e].steps;
    auto& g = returns[e];
    g.assign(steps.size(), 0.0);
    double acc = 0.0;
    for (std::size_t k = steps.size(); k-- > 0;) {
      double r = -beta * steps[k].kl;
      if (k + 1 == steps.size()) {
        r += episodes[e].reward.r_total;
      }
      acc += r;
      g[k] = acc;
    }
  }
  return returns;
}

std::pair<Matrix, Vector> ppo_update(std::span<const Episode> episodes, const PolicyParams& params,
                                     const ValueParams& value, const TrainerConfig& cfg) {
  if (episodes.empty()) {
    throw std::invalid_argument("ppo_update: empty batch");
  }
  Matrix theta = params.theta;
  Vector w = value.w.size() == theta.cols() ? value.w : Vector::Zero(theta.cols());
  const auto returns = ppo_returns(episodes, cfg.kl_beta);

  // GAE with gamma = lambda = 1 reduces to return minus baseline.
  std::vector<double> flat;
  for (std::size_t e = 0; e < episodes.size(); ++e) {
    for (std::size_t t = 0; t < episodes[e].steps.size(); ++t) {
      flat.push_back(returns[e][t] - w.dot(episodes[e].steps[t].phi));
    }
  }
  const auto whitened = standardize(flat, cfg.std_eps);
  std::vector<std::vector<double>> adv(episodes.size());
  std::size_t k = 0;
  for (std::size_t e = 0; e < episodes.size(); ++e) {
    adv[e].assign(whitened.begin() + static_cast<std::ptrdiff_t>(k),
                  whitened.begin() + static_cast<std::ptrdiff_t>(k + episodes[e].steps.size()));
    k += episodes[e].steps.size();
  }

  const std::size_t n = flat.size();
  for (std::size_t epoch = 0; epoch < cfg.update_epochs; ++epoch) {
    theta += cfg.lr * surrogate_gradient(theta, episodes, adv, cfg.clip_eps);
    if (n == 0) {
      continue;
    }
    Vector gw = Vector::Zero(w.size());
    for (std::size_t e = 0; e < episodes.size(); ++e) {
      for (std::size_t t = 0; t < episodes[e].steps.size(); ++t) {
        const auto& phi = episodes[e].steps[t].phi;
        gw += (returns[e][t] - w.dot(phi)) * phi;
      }
    }
    w += cfg.value_lr * gw / static_cast<double>(n);
  }
  return {std::move(theta), std::move(w)};
}

double completeness_score(const TaskSpec& task, const Trajectory& traj) {
  return static_cast<double>(oracle_completeness(task, traj));
}

std::size_t select_best(const TaskSpec& task, std::span<const Trajectory> candidates, const TrajectoryScorer& scorer) {
  if (candidates.empty()) {
    throw std::invalid_argument("select_best: no candidates");
  }
  std::size_t best = 0;
  double best_score = scorer(task, candidates[0]);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double s = scorer(task, candidates[i]);
    if (s > best_score || (s == best_score && candidates[i].steps.size() < candidates[best].steps.size())) {
      best = i;
      best_score = s;
    }
  }
  return best;
}

Trajectory reject_sample(const Planner& teacher, const TaskSpec& task, std::size_t n, const TrajectoryScorer& scorer,
                         std::size_t max_turns, Rng& rng) {
  if (n < 1) {
    throw std::invalid_argument("reject_sample: n must be >= 1");
  }
  std::vector<Trajectory> candidates;
  candidates.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    candidates.push_back(rollout(teacher, task, max_turns, rng));
  }
  return std::move(candidates[select_best(task, candidates, scorer)]);
}

std::vector<BcSample> bc_samples(const Featurizer& featurizer, const TaskSpec& task, const Trajectory& traj) {
  const auto states = replay_states(task, traj);
  std::vector<BcSample> out;
  out.reserve(states.size());
  for (std::size_t t = 0; t < states.size(); ++t) {
    auto idx = featurizer.vocabulary().index_of(traj.steps[t].action);
    if (!idx) {
      throw std::invalid_argument("trajectory action outside the vocabulary");
    }
    out.push_back({featurizer.featurize(task.public_view(), states[t]), *idx});
  }
  return out;
}

double bc_loss(const Matrix& theta, std::span<const BcSample> data) {
  if (data.empty()) {
    return 0.0;
  }
  double nll = 0.0;
  for (const auto& s : data) {
    nll -= action_log_probs(theta, s.phi)[static_cast<Eigen::Index>(s.action)];
  }
  return nll / static_cast<double>(data.size());
}

std::vector<double> bc_fit(Matrix& theta, std::span<const BcSample> data, std::size_t epochs, double lr) {
  std::vector<double> losses;
  losses.reserve(epochs + 1);
  if (data.empty()) {
    return losses;
  }
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    Matrix grad = Matrix::Zero(theta.rows(), theta.cols());
    double nll = 0.0;
    for (const auto& s : data) {
      const Vector log_p = action_log_probs(theta, s.phi);
      nll -= log_p[static_cast<Eigen::Index>(s.action)];
      Vector coeff = -log_p.array().exp();
      coeff[static_cast<Eigen::Index>(s.action)] += 1.0;
      grad.noalias() += coeff * s.phi.transpose();
    }
    losses.push_back(nll / static_cast<double>(data.size()));
    theta += (lr / static_cast<double>(data.size())) * grad;
  }
  losses.push_back(bc_loss(theta, data));
  return losses;
}

PolicyParams cold_start_bc(const Planner& teacher, std::span<const TaskSpec> tasks, const Featurizer& featurizer,
                           const ColdStartConfig& cfg, std::size_t max_turns, Rng& rng) {
  cfg.validate();
  if (tasks.empty()) {
    throw std::invalid_argument("cold_start_bc: no tasks");
  }
  std::vector<BcSample> data;
  const std::size_t count = std::min(cfg.tasks, tasks.size());
  for (std::size_t i = 0; i < count; ++i) {
    const auto best = reject_sample(teacher, tasks[i], cfg.n, completeness_score, max_turns, rng);
    auto samples = bc_samples(featurizer, tasks[i], best);
    data.insert(data.end(), std::make_move_iterator(samples.begin()), std::make_move_iterator(samples.end()));
  }
  auto params = PolicyParams::zeros(featurizer.vocabulary().size(), featurizer.dim());
  bc_fit(params.theta, data, cfg.epochs, cfg.lr);
  return params;
}

TrainResult train_loop(PolicyParams theta0, const TrainerConfig& cfg, std::span<const TaskSpec> tasks,
                       const Featurizer& featurizer, const RewardContext& rewards) {
  cfg.validate();
  if (tasks.empty()) {
    throw std::invalid_argument("train_loop: no training tasks");
  }
  if (cfg.max_turns != featurizer.max_turns()) {
    throw std::invalid_argument("max_turns: trainer and featurizer disagree");
  }
  if (static_cast<std::size_t>(theta0.theta.rows()) != featurizer.vocabulary().size() ||
      static_cast<std::size_t>(theta0.theta.cols()) != featurizer.dim()) {
    throw std::invalid_argument("initial policy shape does not match the featurizer");
  }
  if (!theta0.theta_ref) {
    theta0.freeze_reference();
  }

  TrainResult result{std::move(theta0), {Vector::Zero(static_cast<Eigen::Index>(featurizer.dim()))}, {}};
  auto& params = result.params;
  const std::size_t per_task = cfg.algorithm == Algorithm::grpo ? cfg.group_size : 1;
  const std::size_t batch = cfg.batch_size;

  std::vector<std::size_t> order(tasks.size());
  for (std::size_t iter = 0; iter < cfg.iterations; ++iter) {
    // Phase 1: sample queries and generate trajectories.
    Rng iter_rng = make_stream(cfg.seed, {stream::kTrain, iter});
    std::vector<std::size_t> picked(batch);
    if (batch <= tasks.size()) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::shuffle(order.begin(), order.end(), iter_rng);
      std::copy_n(order.begin(), batch, picked.begin());
    } else {
      for (auto& p : picked) {
        p = static_cast<std::size_t>(uniform_int(iter_rng, 0, static_cast<std::int64_t>(tasks.size()) - 1));
      }
    }

    std::vector<Episode> episodes(batch * per_task);
    const LinearPlanner planner(featurizer, params.theta, false);
    parallel_for(episodes.size(), cfg.threads, [&](std::size_t k) {
      const std::size_t b = k / per_task;
      const std::size_t g = k % per_task;
      Rng rng = make_stream(cfg.seed, {stream::kTrain, iter, b, g});
      const TaskSpec& task = tasks[picked[b]];
      Episode& ep = episodes[k];
      ep.task_index = picked[b];
      ep.traj = rollout(planner, task, cfg.max_turns, rng);
      ep.steps = record_steps(featurizer, params, task, ep.traj);
      // Phase 2: evaluate.
      ep.reward = score_trajectory(rewards, cfg.reward_mode, task, ep.traj, rng);
    });

    // Phase 3: optimize.
    std::vector<double> totals(episodes.size());
    std::vector<double> kl_sums(episodes.size());
    for (std::size_t k = 0; k < episodes.size(); ++k) {
      totals[k] = episodes[k].reward.r_total;
      for (const auto& s : episodes[k].steps) {
        kl_sums[k] += s.kl;
      }
    }

    auto broadcast = [&](const std::vector<double>& per_episode) {
      std::vector<std::vector<double>> adv(episodes.size());
      for (std::size_t k = 0; k < episodes.size(); ++k) {
        adv[k].assign(episodes[k].steps.size(), per_episode[k]);
      }
      return adv;
    };

    switch (cfg.algorithm) {
      case Algorithm::grpo: {
        std::vector<double> per_episode(episodes.size());
        for (std::size_t b = 0; b < batch; ++b) {
          std::span<const double> group(totals.data() + b * per_task, per_task);
          auto a = grpo_advantages(group, cfg.std_eps);
          std::copy(a.begin(), a.end(), per_episode.begin() + static_cast<std::ptrdiff_t>(b * per_task));
        }
        const auto adv = broadcast(per_episode);
        for (std::size_t epoch = 0; epoch < cfg.update_epochs; ++epoch) {
          Matrix step = surrogate_gradient(params.theta, episodes, adv, cfg.clip_eps);
          if (cfg.kl_beta > 0.0) {
            step -= cfg.kl_beta * kl_gradient(params.theta, *params.theta_ref, episodes);
          }
          params.theta += cfg.lr * step;
        }
        break;
      }
      case Algorithm::reinforce_pp: {
        const auto adv = broadcast(reinforcepp_advantages(totals, kl_sums, cfg.kl_beta, cfg.std_eps));
        for (std::size_t epoch = 0; epoch < cfg.update_epochs; ++epoch) {
          params.theta += cfg.lr * surrogate_gradient(params.theta, episodes, adv, cfg.clip_eps);
        }
        break;
      }
      case Algorithm::ppo: {
        auto [theta, w] = ppo_update(episodes, params, result.value, cfg);
        params.theta = std::move(theta);
        result.value.w = std::move(w);
        break;
      }
    }

    IterationStats st;
    st.iter = iter;
    std::size_t steps = 0, invalid = 0;
    double kl_total = 0.0;
    for (std::size_t k = 0; k < episodes.size(); ++k) {
      const auto& ep = episodes[k];
      st.r_total += ep.reward.r_total;
      st.r_comp += ep.reward.r_comp;
      st.err_penalty += std::abs(ep.reward.r_error);
      st.turns += static_cast<double>(ep.traj.steps.size());
      st.len += static_cast<double>(render_text(ep.traj).size());
      invalid += ep.reward.format_valid ? 0 : 1;
      steps += ep.steps.size();
      kl_total += kl_sums[k];
    }
    const auto m = static_cast<double>(episodes.size());
    st.r_total /= m;
    st.r_comp /= m;
    st.err_penalty /= m;
    st.turns /= m;
    st.len /= m;
    st.invalid_rate = static_cast<double>(invalid) / m;
    st.kl = steps > 0 ? kl_total / static_cast<double>(steps) : 0.0;
    result.log.records.push_back(st);
  }
  return result;
}

}  // namespace rltr
