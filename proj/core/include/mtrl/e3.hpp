#pragma once

#include <cstdint>
#include <optional>

#include "mtrl/estimation.hpp"
#include "mtrl/mdp.hpp"
#include "mtrl/task_log.hpp"

namespace mtrl {

// Known/unknown partition of state-action pairs under an active visit-count
// threshold. Within one threshold regime knownness only grows.
class KnownnessMap {
 public:
  KnownnessMap(int num_states, int num_actions, std::int64_t threshold);
  static KnownnessMap from_counts(const CountTable& counts, std::int64_t threshold);

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }
  std::int64_t threshold() const { return threshold_; }

  bool known(int s, int a) const { return known_[s * num_actions_ + a] != 0; }
  void mark_known(int s, int a);
  int known_count() const { return known_count_; }
  bool all_known() const { return known_count_ == num_states_ * num_actions_; }

  bool operator==(const KnownnessMap& other) const {
    return known_ == other.known_;
  }

 private:
  int num_states_;
  int num_actions_;
  std::int64_t threshold_;
  std::vector<char> known_;
  int known_count_ = 0;
};

// Dual knownness thresholds: a small identification threshold for evenly
// sampling the state space, and the larger learning threshold for acting
// near-optimally. A fixed-threshold schedule has both equal.
struct ThresholdSchedule {
  enum class Stage { identify, learn };

  std::int64_t identify_threshold = 1;
  std::int64_t learn_threshold = 1;
  Stage stage = Stage::identify;

  std::int64_t active() const {
    return stage == Stage::identify ? identify_threshold : learn_threshold;
  }
  static ThresholdSchedule fixed(std::int64_t m) { return {m, m, Stage::identify}; }
};

// Thresholds from the gap and accuracy targets: the identification threshold
// makes every confidence radius at most gap/4, the learning threshold makes
// it at most eps*(1-gamma)/(2*v_max*sqrt(next_state_bound)); both at
// per-pair confidence delta/(2*S*A*T).
ThresholdSchedule make_schedule(double gap, double epsilon, double gamma, double v_max,
                                double delta, int num_states, int num_actions, int tasks,
                                int next_state_bound);

// Exploration surrogate: empirical transitions for known pairs with zero
// reward; unknown pairs become absorbing self-loops paying reward one.
Mdp build_explore_mdp(const CountTable& est, const KnownnessMap& known, double gamma);

// Exploitation surrogate: empirical model for known pairs; unknown pairs
// become zero-reward deterministic self-loops.
Mdp build_exploit_mdp(const CountTable& est, const KnownnessMap& known, double gamma);

// Explore exactly when the exploration value at the current state strictly
// exceeds the threshold.
Mode choose_mode(const ValueFunction& v_explore, int state, double explore_threshold);

// Explore-mode action at `state`: the least-visited unknown action when one
// exists locally, otherwise the exploration policy's routing action.
int pick_explore_action(int state, const CountTable& counts, const KnownnessMap& known,
                        const Policy& explore_policy);

struct E3Params {
  std::int64_t horizon = 1;
  ThresholdSchedule schedule = ThresholdSchedule::fixed(1);
  double epsilon = 0.1;
  double tol = 1e-6;
  std::optional<CountTable> initial_counts;

  double explore_threshold() const { return epsilon / 2.0; }
};

struct E3Result {
  CountTable counts;
  TaskLog log;
};

// Single-task explore-or-exploit learner: plans on the two surrogate MDPs,
// recomputes both policies whenever the knownness map changes, and logs
// every step.
E3Result run_e3_task(Simulator& env, const E3Params& params);

}  // namespace mtrl
