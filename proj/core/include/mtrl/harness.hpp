#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mtrl/multitask.hpp"
#include "mtrl/stats.hpp"

namespace mtrl {

enum class Arm { multitask, single_task_e3, both };

std::string arm_name(Arm arm);

struct ExperimentConfig {
  MultiTaskConfig learner;
  std::string family_source = "gridworld";  // builtin name or family file path
  int rounds = 1;
  Arm arm = Arm::multitask;
  std::string out_dir;
  int workers = 0;     // 0 = hardware concurrency
  int verbosity = 0;   // >= 2 also writes per-step task CSVs

  void validate() const;
};

// Flat key = value text format; '#' starts a comment. Unknown keys are
// rejected. Unset keys inherit the full benchmark preset. See configs/ for
// annotated examples.
ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);

// The benchmark presets. The full preset mirrors the reported run: 150
// tasks per round of horizon 3000, 13 of them in phase 1, m = 5, 20 rounds.
// The reduced preset cuts to 5 rounds at horizon 1500 for quick checks.
ExperimentConfig gridworld_full_config();
ExperimentConfig gridworld_reduced_config();

struct ArmResult {
  Arm arm = Arm::multitask;
  std::vector<RoundLog> rounds;
  std::vector<double> per_task_mean;    // over rounds, indexed by task
  std::vector<double> per_task_se;
  std::vector<double> round_totals;     // total reward per round
  MannWhitneyResult first_vs_last;      // first-task vs last-task rewards
};

struct SummaryStats {
  std::vector<ArmResult> arms;
  std::optional<MannWhitneyResult> arm_totals_test;  // multitask vs single-task
  double runtime_seconds = 0.0;

  const ArmResult* find(Arm arm) const;
};

// Runs every selected arm for the configured rounds with per-round seeds
// derived from the master seed, writes one CSV per (arm, round), a merged
// per-task summary CSV, and a summary text file. Output is byte-identical
// across runs of the same config.
SummaryStats run_experiment(const ExperimentConfig& config);

// Round seed derivation; adding rounds never perturbs earlier ones.
std::uint64_t round_seed(std::uint64_t master_seed, int round);

// One single-task round: independent learners on each sampled task, matched
// to the multitask arm's task draws through the shared seed lanes.
RoundLog run_single_task_round(const MdpFamily& family, const MultiTaskConfig& config,
                               int round_index, const TaskLogSink& sink = {});

MdpFamily resolve_family(const std::string& family_source);

}  // namespace mtrl
