#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace mtrl {

enum class Mode { explore, exploit };

// Per-step trace of one task plus the events that drive policy recomputation.
struct TaskLog {
  struct Step {
    std::int64_t step;
    int state;
    int action;
    int reward;
    Mode mode;
    int known_pairs;
  };
  struct KnownnessEvent {
    std::int64_t step;  // -1 for events at task setup
    int state;
    int action;
    bool known;  // false when a threshold switch re-opened the pair
  };
  struct EliminationEvent {
    std::int64_t step;
    int eliminated;
    int surviving;
  };

  std::vector<Step> steps;
  std::vector<KnownnessEvent> knownness_events;
  std::vector<EliminationEvent> eliminations;
  std::int64_t policy_recomputes = 0;
  std::int64_t unknown_visits = 0;
  std::int64_t cum_reward = 0;
  std::int64_t identification_step = -1;  // -1 when never identified
  int known_pairs_end = 0;

  std::int64_t step_count() const { return static_cast<std::int64_t>(steps.size()); }
  // Number of exploit -> explore re-entries.
  std::int64_t explore_reentries() const;

  // Streams "step,state,action,reward,mode,known_pairs_count" rows.
  void write_csv(std::ostream& out) const;
};

// One line per task in the round CSV.
struct TaskSummary {
  int task = 0;
  int phase = 1;
  int true_mdp = -1;
  int identified_group = -1;
  std::int64_t cum_reward = 0;
  std::int64_t unknown_visits = 0;
  std::int64_t identification_step = -1;
  std::int64_t steps = 0;
};

struct RoundLog {
  int round = 0;
  std::vector<TaskSummary> tasks;
  std::vector<int> group_of_phase1_task;  // filled after clustering
  int group_count = 0;

  void write_csv(std::ostream& out) const;
  static const char* csv_header();
};

TaskSummary summarize(int task, int phase, int true_mdp, int identified_group,
                      const TaskLog& log);

}  // namespace mtrl
