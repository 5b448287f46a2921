#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mtrl/envs.hpp"
#include "mtrl/estimation.hpp"
#include "mtrl/finite_model.hpp"
#include "mtrl/task_log.hpp"

namespace mtrl {

// ceil((1/p_min) * ln(c_bar / delta)): phase-1 length that sees every model
// with probability at least 1 - delta.
int phase1_length(double p_min, int c_bar, double delta);

struct MultiTaskConfig {
  int tasks = 1;            // T
  int phase1_tasks = 1;     // T1; 0 derives phase1_length from p_min
  std::int64_t horizon = 1; // H
  int model_bound = 1;      // upper bound on the number of distinct MDPs
  double gap = 0.0;         // model gap; 0 means take the family's verified gap
  double p_min = 0.0;       // 0 means take the family's prior minimum
  double epsilon = 0.1;
  double delta = 0.05;
  std::int64_t m = 1;       // in-task knownness count threshold (phase 2)
  double xi = 0.0;          // elimination threshold; 0 means the theory value
  double tol = 1e-6;
  std::uint64_t seed = 0;

  // Desk-scale overrides; zero selects the corresponding theory formula.
  double eps_known = 0.0;
  double gate_multiplier = 8.0;
  std::int64_t phase1_threshold = 0;
  bool enforce_cluster_precondition = true;

  void validate() const;
};

// Phase-1 per-task counts awaiting clustering. radius_delta is the
// confidence level used when checking the clustering precondition.
// min_known_count restricts pairwise comparisons to cells both tasks have
// visited at least that often; zero compares every cell. When the strict
// precondition holds every cell qualifies either way, so the restriction
// only matters for data-starved runs.
struct TaskArchive {
  std::vector<CountTable> tables;
  double radius_delta = 0.05;
  std::int64_t min_known_count = 0;
};

struct Grouping {
  std::vector<int> group_of;        // per archived task
  std::vector<CountTable> merged;   // per group
  int group_count() const { return static_cast<int>(merged.size()); }
};

// Thrown when some task's estimate at some (s, a) is too loose for the
// clustering guarantee (radius above gap/4): the horizon was too short.
class ClusteringPreconditionError : public std::runtime_error {
 public:
  ClusteringPreconditionError(int task, int state, int action, double radius, double bound);
  int task;
  int state;
  int action;
  double radius;
  double bound;
};

// Thrown when clustering produces more groups than the configured model
// bound; silently merging would poison phase 2.
class GroupCountError : public std::runtime_error {
 public:
  GroupCountError(int groups, int bound);
  int groups;
  int bound;
};

struct ClusterOptions {
  bool enforce_precondition = true;
};

// Greedy single-linkage clustering: tasks join a group when their estimates
// are within gap/2 at every (s, a), transitively closed. Group tables are
// the entrywise merges of their members.
Grouping cluster_tasks(const TaskArchive& archive, double gap,
                       const ClusterOptions& options = {});

struct MultiTaskResult {
  RoundLog round;
  Grouping grouping;
  std::vector<CountTable> final_groups;
};

// Optional per-task sink, called with each finished task's full log before
// it is reduced to a summary row.
using TaskLogSink = std::function<void(int task, const TaskLog&)>;

// Algorithm 1 end to end: T1 exploration tasks, clustering, then
// model-elimination tasks against the evolving group bank, absorbing counts
// from every identified task.
MultiTaskResult run_multitask(const MdpFamily& family, const MultiTaskConfig& config,
                              const TaskLogSink& sink = {});

// Per-task environment seed lane shared by every arm, so comparisons across
// algorithms see identical task draws and environment streams.
std::uint64_t task_env_seed(std::uint64_t round_seed, int task);

}  // namespace mtrl
