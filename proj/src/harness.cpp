#include "rltr/harness.hpp"

#include <charconv>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unistd.h>

namespace rltr {

namespace {

// Typed access to a JSON object that remembers its dotted path and which
// keys were consumed.
class Section {
 public:
  Section(const Json* obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (obj_ != nullptr && !obj_->is_object()) {
      throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }
  }

  ~Section() = default;

  Section child(const std::string& key) {
    seen_.insert(key);
    if (obj_ == nullptr || !obj_->contains(key)) {
      return Section(nullptr, field(key));
    }
    return Section(&obj_->at(key), field(key));
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    seen_.insert(key);
    if (obj_ == nullptr || !obj_->contains(key)) {
      return;
    }
    const Json& v = obj_->at(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) {
        throw ConfigError(field(key), "expected a boolean");
      }
      out = v.get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
        throw ConfigError(field(key), "expected a non-negative integer");
      }
      out = v.get<T>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) {
        throw ConfigError(field(key), "expected a number");
      }
      out = v.get<T>();
    } else {
      if (!v.is_string()) {
        throw ConfigError(field(key), "expected a string");
      }
      out = v.get<std::string>();
    }
  }

  void reject_unknown() const {
    if (obj_ == nullptr) {
      return;
    }
    for (const auto& [k, v] : obj_->items()) {
      if (!seen_.contains(k)) {
        throw ConfigError(field(k), "unknown key");
      }
    }
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  const Json* obj_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename Fn>
void rethrow_as_config(const std::string& prefix, Fn&& fn) {
  try {
    fn();
  } catch (const std::invalid_argument& e) {
    // validate() messages start with the field name.
    std::string msg = e.what();
    auto colon = msg.find(':');
    std::string field = colon == std::string::npos ? prefix : prefix + "." + msg.substr(0, colon);
    std::string why = colon == std::string::npos ? msg : msg.substr(colon + 2);
    throw ConfigError(field, why);
  }
}

double safe_div(double a, double b) { return b == 0.0 ? 0.0 : a / b; }

}  // namespace

void ExperimentConfig::validate() const {
  rethrow_as_config("tasks", [&] { tasks.validate(); });
  if (train_tasks < 1) {
    throw ConfigError("tasks.train_size", "must be >= 1");
  }
  if (eval_tasks < 1) {
    throw ConfigError("tasks.eval_size", "must be >= 1");
  }
  rethrow_as_config("judges.completeness", [&] { completeness_judge.validate(); });
  rethrow_as_config("judges.answer", [&] { answer_judge.validate(); });
  if (!(summarizer_hallucination >= 0.0 && summarizer_hallucination <= 1.0)) {
    throw ConfigError("summarizer.hallucination_rate", "must lie in [0, 1]");
  }
  rethrow_as_config("reward", [&] { reward.validate(); });
  rethrow_as_config("cold_start", [&] { cold_start.validate(); });
  rethrow_as_config("trainer", [&] { trainer.validate(); });
  if (judge_study_trajectories < 1) {
    throw ConfigError("judge_study.trajectories", "must be >= 1");
  }
}

ExperimentConfig parse_config(const Json& doc) {
  ExperimentConfig cfg;
  Section root(&doc, "");
  if (!doc.contains("schema_version")) {
    throw ConfigError("schema_version", "missing");
  }
  int version = 0;
  root.read("schema_version", version);
  if (version != kSchemaVersion) {
    throw ConfigError("schema_version", "unsupported version " + std::to_string(version) + " (expected " +
                                            std::to_string(kSchemaVersion) + ")");
  }
  root.read("seed", cfg.seed);
  std::string out = cfg.output_dir.string();
  root.read("output_dir", out);
  cfg.output_dir = out;

  {
    auto s = root.child("tasks");
    s.read("num_slots", cfg.tasks.num_slots);
    s.read("r_max", cfg.tasks.r_max);
    s.read("p_compute", cfg.tasks.p_compute);
    s.read("distractors", cfg.tasks.distractors);
    s.read("feature_noise", cfg.tasks.feature_noise);
    s.read("train_size", cfg.train_tasks);
    s.read("eval_size", cfg.eval_tasks);
    s.reject_unknown();
  }
  {
    auto s = root.child("judges");
    auto c = s.child("completeness");
    c.read("fp", cfg.completeness_judge.fp);
    c.read("fn", cfg.completeness_judge.fn);
    c.reject_unknown();
    auto a = s.child("answer");
    a.read("fn", cfg.answer_judge.fn);
    a.read("h", cfg.answer_judge.h);
    a.reject_unknown();
    s.reject_unknown();
  }
  {
    auto s = root.child("summarizer");
    s.read("hallucination_rate", cfg.summarizer_hallucination);
    s.reject_unknown();
  }
  {
    auto s = root.child("reward");
    s.read("samples", cfg.reward.samples);
    s.read("lambda", cfg.reward.lambda);
    s.read("mu", cfg.reward.mu);
    s.reject_unknown();
  }
  {
    auto s = root.child("cold_start");
    s.read("tasks", cfg.cold_start.tasks);
    s.read("n", cfg.cold_start.n);
    s.read("epochs", cfg.cold_start.epochs);
    s.read("lr", cfg.cold_start.lr);
    s.read("teacher_deviation", cfg.cold_start.teacher_deviation);
    s.reject_unknown();
  }
  {
    auto s = root.child("trainer");
    std::string algorithm(to_string(cfg.trainer.algorithm));
    std::string mode(to_string(cfg.trainer.reward_mode));
    s.read("algorithm", algorithm);
    s.read("reward_mode", mode);
    auto alg = parse_algorithm(algorithm);
    if (!alg) {
      throw ConfigError("trainer.algorithm", "unknown algorithm '" + algorithm + "'");
    }
    auto rm = parse_reward_mode(mode);
    if (!rm) {
      throw ConfigError("trainer.reward_mode", "unknown reward mode '" + mode + "'");
    }
    cfg.trainer.algorithm = *alg;
    cfg.trainer.reward_mode = *rm;
    s.read("batch_size", cfg.trainer.batch_size);
    s.read("group_size", cfg.trainer.group_size);
    s.read("lr", cfg.trainer.lr);
    s.read("value_lr", cfg.trainer.value_lr);
    s.read("kl_beta", cfg.trainer.kl_beta);
    s.read("clip_eps", cfg.trainer.clip_eps);
    s.read("iterations", cfg.trainer.iterations);
    s.read("max_turns", cfg.trainer.max_turns);
    s.read("std_eps", cfg.trainer.std_eps);
    s.read("update_epochs", cfg.trainer.update_epochs);
    s.read("threads", cfg.trainer.threads);
    s.reject_unknown();
  }
  {
    auto s = root.child("judge_study");
    s.read("trajectories", cfg.judge_study_trajectories);
    s.reject_unknown();
  }
  root.reject_unknown();
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  Json doc;
  try {
    doc = Json::parse(read_file(path), nullptr, true, true);
  } catch (const Json::parse_error& e) {
    throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
  } catch (const std::runtime_error& e) {
    throw ConfigError("<file>", e.what());
  }
  return parse_config(doc);
}

Json config_to_json(const ExperimentConfig& cfg) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["seed"] = cfg.seed;
  j["output_dir"] = cfg.output_dir.string();
  j["tasks"] = {{"num_slots", cfg.tasks.num_slots},     {"r_max", cfg.tasks.r_max},
                {"p_compute", cfg.tasks.p_compute},     {"distractors", cfg.tasks.distractors},
                {"feature_noise", cfg.tasks.feature_noise}, {"train_size", cfg.train_tasks},
                {"eval_size", cfg.eval_tasks}};
  j["judges"] = {{"completeness", {{"fp", cfg.completeness_judge.fp}, {"fn", cfg.completeness_judge.fn}}},
                 {"answer", {{"fn", cfg.answer_judge.fn}, {"h", cfg.answer_judge.h}}}};
  j["summarizer"] = {{"hallucination_rate", cfg.summarizer_hallucination}};
  j["reward"] = {{"samples", cfg.reward.samples}, {"lambda", cfg.reward.lambda}, {"mu", cfg.reward.mu}};
  j["cold_start"] = {{"tasks", cfg.cold_start.tasks},
                     {"n", cfg.cold_start.n},
                     {"epochs", cfg.cold_start.epochs},
                     {"lr", cfg.cold_start.lr},
                     {"teacher_deviation", cfg.cold_start.teacher_deviation}};
  const auto& t = cfg.trainer;
  j["trainer"] = {{"algorithm", std::string(to_string(t.algorithm))},
                  {"reward_mode", std::string(to_string(t.reward_mode))},
                  {"batch_size", t.batch_size},
                  {"group_size", t.group_size},
                  {"lr", t.lr},
                  {"value_lr", t.value_lr},
                  {"kl_beta", t.kl_beta},
                  {"clip_eps", t.clip_eps},
                  {"iterations", t.iterations},
                  {"max_turns", t.max_turns},
                  {"std_eps", t.std_eps},
                  {"update_epochs", t.update_epochs},
                  {"threads", t.threads}};
  j["judge_study"] = {{"trajectories", cfg.judge_study_trajectories}};
  return j;
}

ExperimentSetup::ExperimentSetup(const ExperimentConfig& cfg)
    : config((cfg.validate(), cfg)),
      registry(make_registry(cfg.tasks.num_slots)),
      vocab(std::make_shared<const ActionVocabulary>(registry)),
      featurizer(vocab, cfg.tasks.feature_dim(), cfg.trainer.max_turns),
      completeness(cfg.completeness_judge),
      answer(cfg.answer_judge),
      summarizer(cfg.summarizer_hallucination) {
  train = generate_tasks(cfg.tasks, cfg.train_tasks, derive_seed(cfg.seed, {stream::kTasks}), "t");
  eval = generate_tasks(cfg.tasks, cfg.eval_tasks, derive_seed(cfg.seed, {stream::kEvalTasks}), "e");
}

RewardContext ExperimentSetup::reward_context() const {
  return RewardContext{&registry, config.reward, &completeness, &summarizer, &answer};
}

TrainerConfig ExperimentSetup::trainer_config() const {
  TrainerConfig t = config.trainer;
  t.seed = derive_seed(config.seed, {stream::kTrain});
  return t;
}

Json to_json(const EvalReport& report) {
  Json j;
  j["mean_completeness"] = report.mean_completeness;
  j["match_rate"] = report.match_rate;
  j["mean_turns"] = report.mean_turns;
  j["error_rate"] = report.error_rate;
  j["format_invalid_rate"] = report.format_invalid_rate;
  Json rows = Json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"query_id", r.query_id},
                    {"completeness", r.completeness},
                    {"correct", r.correct},
                    {"turns", r.turns},
                    {"errors", r.errors},
                    {"format_valid", r.format_valid}});
  }
  j["rows"] = std::move(rows);
  return j;
}

EvalReport evaluate_planner(const Planner& planner, std::span<const TaskSpec> tasks, const ToolRegistry& registry,
                            std::size_t max_turns, double h, std::uint64_t seed) {
  if (tasks.empty()) {
    throw std::invalid_argument("evaluate: no tasks");
  }
  EvalReport report;
  std::size_t calls = 0, errors = 0;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& task = tasks[i];
    Rng rollout_rng = make_stream(seed, {stream::kEval, i, 0});
    Rng summary_rng = make_stream(seed, {stream::kEval, i, 1});
    Trajectory traj = rollout(planner, task, max_turns, rollout_rng);

    EvalRow row;
    row.query_id = task.query_id;
    row.completeness = oracle_completeness(task, traj);
    row.correct = oracle_summarize(task, traj, h, summary_rng).answer == task.gold_answer;
    row.turns = traj.steps.size();
    row.errors = error_count(traj);
    row.format_valid = validate_format(traj, registry).valid();

    calls += traj.steps.size() - (traj.terminated ? 1 : 0);
    errors += row.errors;
    report.mean_completeness += row.completeness;
    report.match_rate += row.correct ? 1.0 : 0.0;
    report.mean_turns += static_cast<double>(row.turns);
    report.format_invalid_rate += row.format_valid ? 0.0 : 1.0;
    report.rows.push_back(std::move(row));
    report.trajectories.push_back(std::move(traj));
  }
  const auto n = static_cast<double>(tasks.size());
  report.mean_completeness /= n;
  report.match_rate /= n;
  report.mean_turns /= n;
  report.format_invalid_rate /= n;
  report.error_rate = safe_div(static_cast<double>(errors), static_cast<double>(calls));
  return report;
}

EvalReport evaluate(const Featurizer& featurizer, const ToolRegistry& registry, const Matrix& theta,
                    std::span<const TaskSpec> tasks, double h, std::uint64_t seed) {
  const LinearPlanner planner(featurizer, theta, true);
  return evaluate_planner(planner, tasks, registry, featurizer.max_turns(), h, seed);
}

BinaryScores binary_scores(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size()) {
    throw std::invalid_argument("binary_scores: length mismatch");
  }
  std::size_t tp = 0, fp = 0, fn = 0, correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    correct += truth[i] == predicted[i] ? 1 : 0;
    tp += truth[i] == 1 && predicted[i] == 1 ? 1 : 0;
    fp += truth[i] == 0 && predicted[i] == 1 ? 1 : 0;
    fn += truth[i] == 1 && predicted[i] == 0 ? 1 : 0;
  }
  BinaryScores s;
  s.accuracy = safe_div(static_cast<double>(correct), static_cast<double>(truth.size()));
  const std::size_t denom = 2 * tp + fp + fn;
  // No positives anywhere: every prediction agrees, treat as perfect.
  s.f1 = denom == 0 ? 1.0 : static_cast<double>(2 * tp) / static_cast<double>(denom);
  return s;
}

Json to_json(const JudgeStudyResult& r) {
  Json j;
  j["trajectories"] = r.trajectories;
  j["positives"] = r.positives;
  j["completeness_reward"] = {{"accuracy", r.completeness_reward.accuracy}, {"f1", r.completeness_reward.f1}};
  j["answer_reward"] = {{"accuracy", r.answer_reward.accuracy}, {"f1", r.answer_reward.f1}};
  return j;
}

JudgeStudyResult judge_accuracy_experiment(const Featurizer& featurizer, const Matrix& theta,
                                           std::span<const TaskSpec> tasks, const JudgeConfig& completeness_cfg,
                                           const JudgeConfig& answer_cfg, double summarizer_h, std::size_t samples,
                                           std::size_t count, std::uint64_t seed) {
  if (tasks.empty()) {
    throw std::invalid_argument("judge_accuracy_experiment: no tasks");
  }
  const NoisyCompletenessJudge comp(completeness_cfg);
  const NoisyAnswerJudge ans(answer_cfg);
  const LinearPlanner planner(featurizer, theta, false);

  std::vector<int> truth(count), pred_comp(count), pred_ans(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto& task = tasks[i % tasks.size()];
    Rng rng = make_stream(seed, {stream::kJudgeStudy, i});
    const Trajectory traj = rollout(planner, task, featurizer.max_turns(), rng);
    const Summary summary = oracle_summarize(task, traj, summarizer_h, rng);
    truth[i] = summary.is_correct ? 1 : 0;
    pred_comp[i] = completeness_reward(task, traj, comp, samples, rng) >= 0.5 ? 1 : 0;
    pred_ans[i] = ans.judge(task, summary.answer, rng);
  }
  JudgeStudyResult r;
  r.trajectories = count;
  r.positives = static_cast<std::size_t>(std::count(truth.begin(), truth.end(), 1));
  r.completeness_reward = binary_scores(truth, pred_comp);
  r.answer_reward = binary_scores(truth, pred_ans);
  return r;
}

PolicyParams run_cold_start(const ExperimentSetup& setup) {
  const ScriptedTeacher teacher(setup.config.cold_start.teacher_deviation);
  Rng rng = make_stream(setup.config.seed, {stream::kColdStart});
  auto params = cold_start_bc(teacher, setup.train, setup.featurizer, setup.config.cold_start,
                              setup.config.trainer.max_turns, rng);
  params.freeze_reference();
  return params;
}

ExperimentResult run_pipeline(const ExperimentSetup& setup) {
  ExperimentResult r;
  r.cold_start = run_cold_start(setup);
  const double h = setup.config.summarizer_hallucination;
  const auto eval_seed = derive_seed(setup.config.seed, {stream::kEval});
  r.cold_start_eval = evaluate(setup.featurizer, setup.registry, r.cold_start.theta, setup.eval, h, eval_seed);
  r.trained = train_loop(r.cold_start, setup.trainer_config(), setup.train, setup.featurizer, setup.reward_context());
  r.final_eval = evaluate(setup.featurizer, setup.registry, r.trained.params.theta, setup.eval, h, eval_seed);
  return r;
}

BundleWriter::BundleWriter(std::filesystem::path out_dir) : out_dir_(std::move(out_dir)) {
  std::filesystem::create_directories(out_dir_);
  staging_ = out_dir_ / (".staging-" + std::to_string(::getpid()));
  std::filesystem::remove_all(staging_);
  std::filesystem::create_directories(staging_);
}

BundleWriter::~BundleWriter() {
  std::error_code ec;
  std::filesystem::remove_all(staging_, ec);
}

void BundleWriter::add(const std::string& name, std::string contents) {
  write_file_atomic(staging_ / name, contents);
  names_.push_back(name);
}

void BundleWriter::commit() {
  for (const auto& n : names_) {
    std::filesystem::rename(staging_ / n, out_dir_ / n);
  }
}

namespace {

std::string tasks_text(const std::vector<TaskSpec>& tasks) {
  std::ostringstream out;
  write_tasks_jsonl(out, tasks);
  return out.str();
}

std::string trajectories_text(const ExperimentSetup& setup, const EvalReport& report) {
  std::string out;
  const auto seed = derive_seed(setup.config.seed, {stream::kEval, 0xfeed});
  for (std::size_t i = 0; i < report.trajectories.size(); ++i) {
    Rng rng = make_stream(seed, {i});
    const auto reward = total_reward(setup.eval[i], report.trajectories[i], setup.registry, setup.completeness,
                                     setup.config.reward, rng);
    out += trajectory_jsonl_line(report.trajectories[i], reward);
  }
  return out;
}

std::string eval_bundle_json(const EvalReport& cold, const EvalReport* final_eval) {
  Json j;
  j["cold_start"] = to_json(cold);
  if (final_eval != nullptr) {
    j["final"] = to_json(*final_eval);
  }
  return j.dump(2) + "\n";
}

}  // namespace

void write_tasks_bundle(const ExperimentSetup& setup, const std::filesystem::path& out) {
  BundleWriter w(out);
  w.add(bundle::kTrainTasks, tasks_text(setup.train));
  w.add(bundle::kEvalTasks, tasks_text(setup.eval));
  w.commit();
}

void write_cold_start_bundle(const ExperimentSetup& setup, const std::filesystem::path& out) {
  const auto params = run_cold_start(setup);
  const auto eval_seed = derive_seed(setup.config.seed, {stream::kEval});
  const auto report = evaluate(setup.featurizer, setup.registry, params.theta, setup.eval, setup.config.summarizer_hallucination,
                               eval_seed);
  BundleWriter w(out);
  w.add(bundle::kColdStartCheckpoint, checkpoint_text(params.theta, *setup.vocab));
  w.add(bundle::kEvalReport, eval_bundle_json(report, nullptr));
  w.add(bundle::kTrajectories, trajectories_text(setup, report));
  w.commit();
}

ExperimentResult run_experiment(const ExperimentSetup& setup, const std::filesystem::path& out) {
  auto r = run_pipeline(setup);
  BundleWriter w(out);
  w.add(bundle::kTrainTasks, tasks_text(setup.train));
  w.add(bundle::kEvalTasks, tasks_text(setup.eval));
  w.add(bundle::kColdStartCheckpoint, checkpoint_text(r.cold_start.theta, *setup.vocab));
  if (setup.config.trainer.iterations > 0) {
    w.add(bundle::kFinalCheckpoint, checkpoint_text(r.trained.params.theta, *setup.vocab));
    w.add(bundle::kEvalReport, eval_bundle_json(r.cold_start_eval, &r.final_eval));
  } else {
    w.add(bundle::kEvalReport, eval_bundle_json(r.cold_start_eval, nullptr));
  }
  w.add(bundle::kTrainingLog, r.trained.log.to_csv());
  w.add(bundle::kTrajectories, trajectories_text(setup, r.final_eval));
  w.commit();
  return r;
}

EvalReport write_eval_bundle(const ExperimentSetup& setup, const Matrix& theta, const std::filesystem::path& out) {
  const auto eval_seed = derive_seed(setup.config.seed, {stream::kEval});
  auto report = evaluate(setup.featurizer, setup.registry, theta, setup.eval, setup.config.summarizer_hallucination, eval_seed);
  BundleWriter w(out);
  w.add(bundle::kEvalReport, to_json(report).dump(2) + "\n");
  w.add(bundle::kTrajectories, trajectories_text(setup, report));
  w.commit();
  return report;
}

JudgeStudyResult write_judge_study_bundle(const ExperimentSetup& setup, const Matrix& theta,
                                          const std::filesystem::path& out) {
  const auto& c = setup.config;
  auto r = judge_accuracy_experiment(setup.featurizer, theta, setup.train, c.completeness_judge, c.answer_judge,
                                     c.summarizer_hallucination, c.reward.samples, c.judge_study_trajectories,
                                     derive_seed(c.seed, {stream::kJudgeStudy}));
  BundleWriter w(out);
  w.add(bundle::kJudgeStudy, to_json(r).dump(2) + "\n");
  w.commit();
  return r;
}

CompareResult run_compare(const ExperimentSetup& setup) {
  CompareResult r;
  const auto cold = run_cold_start(setup);
  const double h = setup.config.summarizer_hallucination;
  const auto eval_seed = derive_seed(setup.config.seed, {stream::kEval});
  const auto cold_eval = evaluate(setup.featurizer, setup.registry, cold.theta, setup.eval, h, eval_seed);
  for (auto mode : {RewardMode::rltr, RewardMode::e2e_answer}) {
    auto& run = mode == RewardMode::rltr ? r.rltr : r.e2e;
    auto tcfg = setup.trainer_config();
    tcfg.reward_mode = mode;
    run.cold_start = cold;
    run.cold_start_eval = cold_eval;
    run.trained = train_loop(cold, tcfg, setup.train, setup.featurizer, setup.reward_context());
    run.final_eval = evaluate(setup.featurizer, setup.registry, run.trained.params.theta, setup.eval, h, eval_seed);
  }
  return r;
}

CompareResult write_compare_bundle(const ExperimentSetup& setup, const std::filesystem::path& out) {
  auto r = run_compare(setup);
  std::string csv = "metric,cold_start,rltr,e2e_answer\n";
  auto row = [&](const char* name, double cold, double a, double b) {
    csv += name;
    for (double v : {cold, a, b}) {
      char buf[64];
      auto res = std::to_chars(buf, buf + sizeof(buf), v);
      csv += ',';
      csv.append(buf, res.ptr);
    }
    csv += '\n';
  };
  const auto& c = r.rltr.cold_start_eval;
  row("com", c.mean_completeness, r.rltr.final_eval.mean_completeness, r.e2e.final_eval.mean_completeness);
  row("match", c.match_rate, r.rltr.final_eval.match_rate, r.e2e.final_eval.match_rate);
  row("turns", c.mean_turns, r.rltr.final_eval.mean_turns, r.e2e.final_eval.mean_turns);
  row("error_rate", c.error_rate, r.rltr.final_eval.error_rate, r.e2e.final_eval.error_rate);
  row("format_invalid_rate", c.format_invalid_rate, r.rltr.final_eval.format_invalid_rate,
      r.e2e.final_eval.format_invalid_rate);

  BundleWriter w(out);
  w.add(bundle::kCompare, csv);
  w.add("training_log_rltr.csv", r.rltr.trained.log.to_csv());
  w.add("training_log_e2e_answer.csv", r.e2e.trained.log.to_csv());
  w.commit();
  return r;
}

}  // namespace rltr
