#pragma once

#include <cstdint>
#include <vector>

#include "mtrl/mdp.hpp"

namespace mtrl {

// Per-(s, a) transition counts and reward sums: the unit of empirical
// knowledge gathered in one task and merged across tasks of the same group.
// Single writer during a task; take copies for cross-thread reads.
class CountTable {
 public:
  CountTable(int num_states, int num_actions);

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }

  void record(const TransitionRecord& rec);

  std::int64_t visits(int s, int a) const { return visits_[pair_index(s, a)]; }
  std::int64_t next_count(int s, int a, int next) const {
    return next_counts_[static_cast<std::size_t>(pair_index(s, a)) * num_states_ + next];
  }
  double reward_sum(int s, int a) const { return reward_sum_[pair_index(s, a)]; }
  std::int64_t total_visits() const;

  // Direct row assignment, used when synthesizing planning tables from
  // several sources. Keeps the row-sum invariant by construction.
  void set_pair(int s, int a, const CountTable& source);

  void add_observation(int s, int a, int next, std::int64_t count, double reward_sum);

  bool same_shape(const CountTable& other) const {
    return num_states_ == other.num_states_ && num_actions_ == other.num_actions_;
  }

 private:
  int pair_index(int s, int a) const { return s * num_actions_ + a; }

  int num_states_;
  int num_actions_;
  std::vector<std::int64_t> next_counts_;  // [s][a][s']
  std::vector<double> reward_sum_;         // [s][a]
  std::vector<std::int64_t> visits_;       // [s][a]
};

// Entrywise sum of two tables of the same shape.
CountTable merge_counts(const CountTable& a, const CountTable& b);

// (S+1)-dimensional model estimate at one (s, a): transition row followed by
// the mean reward, plus the sample size behind it.
struct ThetaVector {
  std::vector<double> values;
  std::int64_t sample_size = 0;

  int dimension() const { return static_cast<int>(values.size()); }
  double reward() const { return values.back(); }
};

// Empirical means at (s, a). Zero-count pairs fall back to the uniform
// transition row with reward 0.5 and sample_size 0; knownness logic never
// trusts such a pair through the accuracy branch, so any fixed default works.
ThetaVector estimate_theta(const CountTable& counts, int s, int a);

// l2 confidence radius for an empirical-mean vector with n samples:
// the epsilon solving 2*exp(2 - n*eps^2/2) = delta. Returns +infinity when
// n == 0 (no information).
double confidence_radius(std::int64_t n, double delta);

// Realized outcome in the same coordinates as ThetaVector: next-state
// indicator followed by the realized reward.
struct EncodedOutcome {
  std::vector<double> values;
  int next_state = 0;
  int reward = 0;

  int dimension() const { return static_cast<int>(values.size()); }
};

EncodedOutcome encode_transition(const TransitionRecord& rec, int num_states);

// Square loss of a model estimate against a realized outcome:
//   sum_{tau != s'} theta(tau)^2 + (theta(s') - 1)^2 + (theta(S+1) - r)^2,
// which equals ||theta - z||^2.
double square_loss(const ThetaVector& theta, const EncodedOutcome& z);

double theta_distance(const ThetaVector& a, const ThetaVector& b);

}  // namespace mtrl
