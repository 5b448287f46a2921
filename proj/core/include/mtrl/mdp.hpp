#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "mtrl/rng.hpp"

namespace mtrl {

// One sampled environment interaction. Rewards are Bernoulli draws, so the
// realized reward is always 0 or 1.
struct TransitionRecord {
  int state = 0;
  int action = 0;
  int reward = 0;
  int next_state = 0;
};

// Finite tabular MDP. Immutable after construction; construction validates
// that every transition row is a probability distribution (sum within 1e-9
// of one) and that reward means lie in [0, 1].
class Mdp {
 public:
  Mdp(int num_states, int num_actions, std::vector<double> transition,
      std::vector<double> reward_mean, double discount);

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }
  double discount() const { return discount_; }

  double transition(int s, int a, int next) const {
    return transition_[(static_cast<std::size_t>(s) * num_actions_ + a) * num_states_ + next];
  }
  std::span<const double> transition_row(int s, int a) const {
    return {transition_.data() +
                (static_cast<std::size_t>(s) * num_actions_ + a) * num_states_,
            static_cast<std::size_t>(num_states_)};
  }
  double reward_mean(int s, int a) const {
    return reward_mean_[static_cast<std::size_t>(s) * num_actions_ + a];
  }

  // Largest number of next states with positive probability over all (s, a).
  int max_next_states() const;

  bool valid_state(int s) const { return s >= 0 && s < num_states_; }
  bool valid_action(int a) const { return a >= 0 && a < num_actions_; }

 private:
  int num_states_;
  int num_actions_;
  std::vector<double> transition_;   // [s][a][s'] row-major
  std::vector<double> reward_mean_;  // [s][a]
  double discount_;
};

// Deterministic state -> action mapping.
struct Policy {
  std::vector<int> actions;
};

struct ValueFunction {
  std::vector<double> values;
};

struct PlanResult {
  ValueFunction value;
  Policy policy;
};

// Discounted value iteration. Stops once the sup-norm update difference is
// at most tol*(1-gamma)/gamma, which bounds the Bellman residual of the
// returned value function by tol. Greedy ties break toward the lowest
// action index.
PlanResult value_iteration(const Mdp& mdp, double tol);
PlanResult value_iteration(const Mdp& mdp, double tol, const ValueFunction& initial);

// Fixed point of the policy Bellman operator, within tol.
ValueFunction policy_evaluation(const Mdp& mdp, const Policy& policy, double tol);

// Samples one environment interaction: next state from the transition row,
// reward from Bernoulli(reward_mean). Draw order is next state, then reward.
TransitionRecord step(const Mdp& mdp, int state, int action, Rng& rng);

// Worst case over ordered state pairs of the minimal expected hitting time
// under the best stationary policy, computed by dynamic programming on the
// first-passage equations. Returns +infinity when some target is not
// almost-surely reachable from some start.
double diameter(const Mdp& mdp, double tol);

// Black-box view of an environment handed to learners. State/action counts
// and the discount are public knowledge; transition and reward parameters
// are not exposed.
class Simulator {
 public:
  virtual ~Simulator() = default;
  virtual int num_states() const = 0;
  virtual int num_actions() const = 0;
  virtual double discount() const = 0;
  virtual int state() const = 0;
  virtual TransitionRecord step(int action) = 0;
};

// Simulator backed by a concrete Mdp. Owns its random stream.
class MdpSimulator final : public Simulator {
 public:
  MdpSimulator(Mdp mdp, int start_state, std::uint64_t seed);

  int num_states() const override { return mdp_.num_states(); }
  int num_actions() const override { return mdp_.num_actions(); }
  double discount() const override { return mdp_.discount(); }
  int state() const override { return state_; }
  TransitionRecord step(int action) override;

 private:
  Mdp mdp_;
  int state_;
  Rng rng_;
};

}  // namespace mtrl
