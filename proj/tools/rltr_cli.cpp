// rltr: experiment driver for tool-use reward training on synthetic tasks.
//
//   rltr gen-tasks   --config cfg.json --out dir
//   rltr cold-start  --config cfg.json --out dir
//   rltr train       --config cfg.json --out dir [--algorithm grpo] [--reward-mode rltr]
//   rltr eval        --config cfg.json --checkpoint dir/checkpoint_final.txt --out dir
//   rltr judge-study --config cfg.json [--checkpoint ...] --out dir
//   rltr compare     --config cfg.json --out dir
//
// Exit code 0 on success. On failure a single JSON object is written to
// stderr: {"error": {"kind": ..., "field": ..., "message": ...}}.

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "rltr/harness.hpp"

namespace {

struct CommonArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string algorithm;
  std::string reward_mode;
  std::string checkpoint;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config, "experiment config (JSON, schema_version 1)");
  cmd->add_option("--seed", args.seed, "override the config seed");
  cmd->add_option("--out", args.out, "output directory (defaults to the config's output_dir)");
  cmd->add_option("--algorithm", args.algorithm, "grpo | ppo | reinforce_pp");
  cmd->add_option("--reward-mode", args.reward_mode, "rltr | e2e");
}

rltr::ExperimentConfig resolve(const CommonArgs& args) {
  rltr::ExperimentConfig cfg = args.config.empty() ? rltr::ExperimentConfig{} : rltr::load_config(args.config);
  if (args.seed) {
    cfg.seed = *args.seed;
  }
  if (!args.out.empty()) {
    cfg.output_dir = args.out;
  }
  if (!args.algorithm.empty()) {
    auto a = rltr::parse_algorithm(args.algorithm);
    if (!a) {
      throw rltr::ConfigError("--algorithm", "unknown algorithm '" + args.algorithm + "'");
    }
    cfg.trainer.algorithm = *a;
  }
  if (!args.reward_mode.empty()) {
    auto m = rltr::parse_reward_mode(args.reward_mode);
    if (!m) {
      throw rltr::ConfigError("--reward-mode", "unknown reward mode '" + args.reward_mode + "'");
    }
    cfg.trainer.reward_mode = *m;
  }
  cfg.validate();
  return cfg;
}

rltr::Matrix policy_for(const rltr::ExperimentSetup& setup, const std::string& checkpoint) {
  if (checkpoint.empty()) {
    return rltr::run_cold_start(setup).theta;
  }
  return rltr::load_checkpoint(checkpoint, *setup.vocab, setup.featurizer.dim());
}

int fail(const std::string& kind, const std::string& message, const std::string& field = {}) {
  rltr::Json err;
  err["kind"] = kind;
  if (!field.empty()) {
    err["field"] = field;
  }
  err["message"] = message;
  std::cerr << rltr::Json{{"error", err}}.dump() << std::endl;
  return kind == "config" || kind == "usage" ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tool-use reward RL laboratory"};
  app.require_subcommand(1);
  CommonArgs args;

  auto* gen = app.add_subcommand("gen-tasks", "generate train and eval task sets");
  auto* cold = app.add_subcommand("cold-start", "rejection-sampled behavior cloning from the scripted teacher");
  auto* train = app.add_subcommand("train", "cold start, RL training and evaluation");
  auto* eval = app.add_subcommand("eval", "greedy evaluation of a checkpoint");
  auto* study = app.add_subcommand("judge-study", "accuracy / F1 of completeness vs answer rewards");
  auto* compare = app.add_subcommand("compare", "rltr vs e2e answer reward under one seed");
  for (auto* cmd : {gen, cold, train, eval, study, compare}) {
    add_common(cmd, args);
  }
  eval->add_option("--checkpoint", args.checkpoint, "policy checkpoint file")->required();
  study->add_option("--checkpoint", args.checkpoint, "policy checkpoint (default: cold-start policy)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what());
  }

  try {
    const auto cfg = resolve(args);
    const rltr::ExperimentSetup setup(cfg);
    const auto& out = cfg.output_dir;
    rltr::Json summary;

    if (gen->parsed()) {
      rltr::write_tasks_bundle(setup, out);
      summary = {{"train_tasks", setup.train.size()}, {"eval_tasks", setup.eval.size()}};
    } else if (cold->parsed()) {
      rltr::write_cold_start_bundle(setup, out);
      summary = {{"checkpoint", (out / rltr::bundle::kColdStartCheckpoint).string()}};
    } else if (train->parsed()) {
      auto r = rltr::run_experiment(setup, out);
      summary = {{"algorithm", std::string(rltr::to_string(cfg.trainer.algorithm))},
                 {"reward_mode", std::string(rltr::to_string(cfg.trainer.reward_mode))},
                 {"cold_start_com", r.cold_start_eval.mean_completeness},
                 {"final_com", r.final_eval.mean_completeness},
                 {"final_match", r.final_eval.match_rate}};
    } else if (eval->parsed()) {
      auto theta = policy_for(setup, args.checkpoint);
      auto r = rltr::write_eval_bundle(setup, theta, out);
      summary = {{"com", r.mean_completeness}, {"match", r.match_rate}, {"turns", r.mean_turns}};
    } else if (study->parsed()) {
      auto theta = policy_for(setup, args.checkpoint);
      summary = rltr::to_json(rltr::write_judge_study_bundle(setup, theta, out));
    } else if (compare->parsed()) {
      auto r = rltr::write_compare_bundle(setup, out);
      summary = {{"rltr_com", r.rltr.final_eval.mean_completeness},
                 {"e2e_com", r.e2e.final_eval.mean_completeness},
                 {"rltr_match", r.rltr.final_eval.match_rate},
                 {"e2e_match", r.e2e.final_eval.match_rate}};
    }
    std::cout << summary.dump() << std::endl;
    return 0;
  } catch (const rltr::ConfigError& e) {
    return fail("config", e.what(), e.field());
  } catch (const std::exception& e) {
    return fail("runtime", e.what());
  }
}
