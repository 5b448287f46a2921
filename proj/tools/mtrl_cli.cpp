#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "mtrl/envs.hpp"
#include "mtrl/harness.hpp"
#include "mtrl/mdp_io.hpp"

namespace {

int cmd_run(const std::string& config_path, const std::string& out_dir,
            std::uint64_t seed, bool seed_set, int rounds, const std::string& arm,
            int workers, int verbosity) {
  mtrl::ExperimentConfig cfg;
  if (!config_path.empty()) {
    cfg = mtrl::load_experiment_config(config_path);
  } else {
    cfg = mtrl::gridworld_full_config();
  }
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (seed_set) cfg.learner.seed = seed;
  if (rounds > 0) cfg.rounds = rounds;
  if (!arm.empty()) {
    if (arm == "multitask") cfg.arm = mtrl::Arm::multitask;
    else if (arm == "single_task_e3") cfg.arm = mtrl::Arm::single_task_e3;
    else if (arm == "both") cfg.arm = mtrl::Arm::both;
    else throw CLI::ValidationError("--arm must be multitask, single_task_e3, or both");
  }
  if (workers > 0) cfg.workers = workers;
  if (verbosity >= 0) cfg.verbosity = verbosity;
  if (cfg.out_dir.empty()) throw CLI::ValidationError("an output directory is required");

  const mtrl::SummaryStats stats = mtrl::run_experiment(cfg);
  for (const auto& arm_result : stats.arms) {
    std::printf("%s: first-vs-last U=%.3f p=%.6g\n",
                mtrl::arm_name(arm_result.arm).c_str(), arm_result.first_vs_last.u,
                arm_result.first_vs_last.p);
  }
  if (stats.arm_totals_test)
    std::printf("round totals multitask vs single_task_e3: U=%.3f p=%.6g\n",
                stats.arm_totals_test->u, stats.arm_totals_test->p);
  std::printf("outputs written to %s (%.1fs)\n", cfg.out_dir.c_str(),
              stats.runtime_seconds);
  return 0;
}

int cmd_export_gridworld(const std::string& out_path) {
  const mtrl::MdpFamily family = mtrl::gridworld_suite();
  mtrl::save_family_file(out_path, family);
  std::printf("wrote %s (C=%d, S=%d, A=%d, gap=%.3f, diameter=%.2f)\n", out_path.c_str(),
              family.size(), family.members.front().num_states(),
              family.members.front().num_actions(), family.gap, family.diameter_bound);
  return 0;
}

int cmd_plan(const std::string& mdp_path, double tol) {
  const mtrl::Mdp mdp = mtrl::load_mdp_file(mdp_path);
  const auto plan = mtrl::value_iteration(mdp, tol);
  std::printf("state,value,action\n");
  for (int s = 0; s < mdp.num_states(); ++s)
    std::printf("%d,%.9f,%d\n", s, plan.value.values[s], plan.policy.actions[s]);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-task tabular reinforcement learning benchmark"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int rounds = 0;
  std::string arm;
  int workers = 0;
  int verbosity = -1;
  auto* run = app.add_subcommand("run", "run the experiment harness");
  run->add_option("--config", config_path, "config file (defaults to the full preset)")
      ->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "output directory");
  auto* seed_opt = run->add_option("--seed", seed, "master seed override");
  run->add_option("--rounds", rounds, "rounds override");
  run->add_option("--arm", arm, "arm override: multitask | single_task_e3 | both");
  run->add_option("--workers", workers, "max concurrent rounds");
  run->add_option("--verbosity", verbosity, "0 = summaries, 2 = per-step task CSVs");

  std::string export_path = "gridworld.family";
  auto* export_cmd =
      app.add_subcommand("export-gridworld", "write the benchmark family file");
  export_cmd->add_option("--out", export_path, "target path");

  std::string mdp_path;
  double tol = 1e-9;
  auto* plan_cmd = app.add_subcommand("plan", "value-iterate an MDP file");
  plan_cmd->add_option("--mdp", mdp_path, "MDP text file")
      ->required()
      ->check(CLI::ExistingFile);
  plan_cmd->add_option("--tol", tol, "planning tolerance");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return cmd_run(config_path, out_dir, seed, seed_opt->count() > 0, rounds, arm,
                     workers, verbosity);
    if (export_cmd->parsed()) return cmd_export_gridworld(export_path);
    if (plan_cmd->parsed()) return cmd_plan(mdp_path, tol);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
