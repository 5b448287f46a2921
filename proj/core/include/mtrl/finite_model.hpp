#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mtrl/e3.hpp"
#include "mtrl/estimation.hpp"
#include "mtrl/mdp.hpp"
#include "mtrl/task_log.hpp"

namespace mtrl {

// Surviving candidate models for the current task plus the pairwise
// elimination statistics. Accumulators for pairs that lose a member are
// frozen, never reused. The last survivor is never eliminated.
class VersionSpace {
 public:
  VersionSpace(int candidate_count, double elimination_threshold);

  int candidate_count() const { return candidate_count_; }
  double elimination_threshold() const { return elimination_threshold_; }
  bool alive(int c) const { return alive_[c] != 0; }
  int surviving_count() const { return surviving_count_; }
  std::vector<int> surviving() const;
  // Valid only when surviving_count() == 1.
  int sole_survivor() const;

  double pair_weight(int i, int j) const { return c_[pair_index(i, j)]; }
  double pair_loss_gap(int i, int j) const { return delta_[pair_index(i, j)]; }

  void add_pair_statistics(int i, int j, double weight, double loss_gap);
  void eliminate(int c);

 private:
  int pair_index(int i, int j) const { return i * candidate_count_ + j; }

  int candidate_count_;
  double elimination_threshold_;
  std::vector<char> alive_;
  int surviving_count_;
  std::vector<double> c_;      // cumulative (1/4)*||theta_i - theta_j||^2
  std::vector<double> delta_;  // cumulative loss(theta_i) - loss(theta_j)
};

// Per-group merged counts with cached per-(s, a) estimates and confidence
// radii; the caches always equal a fresh recomputation from the counts.
// Mutates only between tasks (absorb), so concurrent reads during a task
// against a fixed bank are safe.
class GroupBank {
 public:
  GroupBank(std::vector<CountTable> groups, double radius_delta);

  int group_count() const { return static_cast<int>(groups_.size()); }
  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }
  double radius_delta() const { return radius_delta_; }

  const CountTable& counts(int group) const { return groups_[group]; }
  const ThetaVector& theta(int group, int s, int a) const {
    return theta_cache_[group][s * num_actions_ + a];
  }
  double radius(int group, int s, int a) const {
    return radius_cache_[group][s * num_actions_ + a];
  }

  // Merges task counts into one group and refreshes that group's caches.
  void absorb(int group, const CountTable& task_counts);

 private:
  void refresh(int group);

  int num_states_;
  int num_actions_;
  double radius_delta_;
  std::vector<CountTable> groups_;
  std::vector<std::vector<ThetaVector>> theta_cache_;
  std::vector<std::vector<double>> radius_cache_;
};

// Free-function form of the count-merge transfer step.
GroupBank absorb_counts(GroupBank bank, int group, const CountTable& task_counts);

// One elimination pass for the visited (s, a). For each surviving pair whose
// estimates differ by at least gate_multiplier times the larger of the
// pair's confidence radii, accrues the pair statistics; any pair whose
// weight crosses the threshold drops the higher-loss member. Pairs are
// processed in lexicographic order against the live surviving set. Returns
// eliminated candidate ids in order.
std::vector<int> update_elimination(VersionSpace& vs,
                                    const std::vector<const ThetaVector*>& thetas,
                                    const std::vector<double>& radii,
                                    const EncodedOutcome& z, double gate_multiplier);

// A pair is known when every surviving candidate pins it down (radius at
// most eps_known/2 and pairwise estimate distances at most eps_known) or the
// current task has visited it at least m times.
KnownnessMap check_known(int num_states, int num_actions, double eps_known,
                         const GroupBank& bank, const std::vector<int>& surviving,
                         const CountTable& task_counts, std::int64_t m);

// Accuracy target implied by the known-state conditions:
// eps*(1-gamma)/(v_max*sqrt(next_state_bound)).
double theory_eps_known(double epsilon, double gamma, double v_max, int next_state_bound);

// Elimination threshold from the loss-difference concentration argument,
// union-bounded over candidate pairs, tasks, and steps.
double theory_elimination_threshold(int candidate_bound, int tasks, std::int64_t horizon,
                                    double delta);

struct FiniteModelParams {
  std::int64_t horizon = 1;
  std::int64_t m = 1;                // in-task knownness count threshold
  double xi = 1.0;                   // elimination threshold
  double eps_known = 0.1;            // candidate-agreement accuracy
  double gate_multiplier = 8.0;      // radius gate on pair comparisons
  double epsilon = 0.1;
  double tol = 1e-6;
  // Optional larger threshold to switch to once the task is identified.
  std::optional<std::int64_t> post_identification_m;

  double explore_threshold() const { return epsilon / 2.0; }
};

struct FiniteModelResult {
  std::optional<int> identified;
  CountTable counts;  // current-task counts only
  TaskLog log;
};

// The phase-2 single-task learner: explore-or-exploit control as in
// run_e3_task, with candidate elimination folded into every step and
// knownness extended by candidate agreement. With a single empty candidate
// its step-by-step behavior matches run_e3_task exactly.
FiniteModelResult run_finite_model_task(Simulator& env, const GroupBank& bank,
                                        const FiniteModelParams& params);

}  // namespace mtrl
