#include "mtrl/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace mtrl {

namespace {

constexpr double kRowSumTolerance = 1e-9;
constexpr std::int64_t kMaxSweeps = 50'000'000;

double backup(const Mdp& mdp, int s, int a, const std::vector<double>& v) {
  const auto row = mdp.transition_row(s, a);
  double acc = 0.0;
  for (int next = 0; next < mdp.num_states(); ++next) acc += row[next] * v[next];
  return mdp.reward_mean(s, a) + mdp.discount() * acc;
}

}  // namespace

Mdp::Mdp(int num_states, int num_actions, std::vector<double> transition,
         std::vector<double> reward_mean, double discount)
    : num_states_(num_states),
      num_actions_(num_actions),
      transition_(std::move(transition)),
      reward_mean_(std::move(reward_mean)),
      discount_(discount) {
  if (num_states_ <= 0 || num_actions_ <= 0)
    throw std::invalid_argument("Mdp: state and action counts must be positive");
  if (!(discount_ > 0.0 && discount_ < 1.0))
    throw std::invalid_argument("Mdp: discount must lie in (0, 1)");
  const auto expected_p = static_cast<std::size_t>(num_states_) * num_actions_ * num_states_;
  const auto expected_r = static_cast<std::size_t>(num_states_) * num_actions_;
  if (transition_.size() != expected_p || reward_mean_.size() != expected_r)
    throw std::invalid_argument("Mdp: table sizes do not match S and A");
  for (int s = 0; s < num_states_; ++s) {
    for (int a = 0; a < num_actions_; ++a) {
      double sum = 0.0;
      for (int next = 0; next < num_states_; ++next) {
        const double p = this->transition(s, a, next);
        if (p < 0.0 || p > 1.0)
          throw std::invalid_argument("Mdp: transition probability outside [0, 1] at (" +
                                      std::to_string(s) + ", " + std::to_string(a) + ")");
        sum += p;
      }
      if (std::abs(sum - 1.0) > kRowSumTolerance)
        throw std::invalid_argument("Mdp: transition row does not sum to 1 at (" +
                                    std::to_string(s) + ", " + std::to_string(a) + ")");
      const double r = this->reward_mean(s, a);
      if (r < 0.0 || r > 1.0)
        throw std::invalid_argument("Mdp: reward mean outside [0, 1] at (" +
                                    std::to_string(s) + ", " + std::to_string(a) + ")");
    }
  }
}

int Mdp::max_next_states() const {
  int bound = 0;
  for (int s = 0; s < num_states_; ++s) {
    for (int a = 0; a < num_actions_; ++a) {
      int support = 0;
      for (int next = 0; next < num_states_; ++next)
        if (transition(s, a, next) > 0.0) ++support;
      bound = std::max(bound, support);
    }
  }
  return bound;
}

PlanResult value_iteration(const Mdp& mdp, double tol) {
  ValueFunction zero{std::vector<double>(mdp.num_states(), 0.0)};
  return value_iteration(mdp, tol, zero);
}

PlanResult value_iteration(const Mdp& mdp, double tol, const ValueFunction& initial) {
  if (!(tol > 0.0)) throw std::invalid_argument("value_iteration: tol must be positive");
  if (initial.values.size() != static_cast<std::size_t>(mdp.num_states()))
    throw std::invalid_argument("value_iteration: initial value has wrong size");
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  const double gamma = mdp.discount();
  const double stop = tol * (1.0 - gamma) / gamma;

  std::vector<double> v = initial.values;
  std::vector<double> next(S, 0.0);
  Policy policy{std::vector<int>(S, 0)};
  for (std::int64_t sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double change = 0.0;
    for (int s = 0; s < S; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      int best_action = 0;
      for (int a = 0; a < A; ++a) {
        const double q = backup(mdp, s, a, v);
        if (q > best) {
          best = q;
          best_action = a;
        }
      }
      next[s] = best;
      policy.actions[s] = best_action;
      change = std::max(change, std::abs(next[s] - v[s]));
    }
    v.swap(next);
    if (change <= stop) return {ValueFunction{std::move(v)}, std::move(policy)};
  }
  throw std::runtime_error("value_iteration: sweep limit exceeded");
}

ValueFunction policy_evaluation(const Mdp& mdp, const Policy& policy, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("policy_evaluation: tol must be positive");
  if (policy.actions.size() != static_cast<std::size_t>(mdp.num_states()))
    throw std::invalid_argument("policy_evaluation: policy has wrong size");
  for (int s = 0; s < mdp.num_states(); ++s)
    if (!mdp.valid_action(policy.actions[s]))
      throw std::invalid_argument("policy_evaluation: invalid action at state " +
                                  std::to_string(s));
  const int S = mdp.num_states();
  const double gamma = mdp.discount();
  const double stop = tol * (1.0 - gamma) / gamma;

  std::vector<double> v(S, 0.0);
  std::vector<double> next(S, 0.0);
  for (std::int64_t sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double change = 0.0;
    for (int s = 0; s < S; ++s) {
      next[s] = backup(mdp, s, policy.actions[s], v);
      change = std::max(change, std::abs(next[s] - v[s]));
    }
    v.swap(next);
    if (change <= stop) return ValueFunction{std::move(v)};
  }
  throw std::runtime_error("policy_evaluation: sweep limit exceeded");
}

TransitionRecord step(const Mdp& mdp, int state, int action, Rng& rng) {
  if (!mdp.valid_state(state) || !mdp.valid_action(action))
    throw std::invalid_argument("step: state or action out of range");
  const int next = rng.categorical(mdp.transition_row(state, action));
  const int reward = rng.bernoulli(mdp.reward_mean(state, action)) ? 1 : 0;
  return {state, action, reward, next};
}

namespace {

// States from which `target` is reachable with probability one under some
// stationary policy: the standard nested fixpoint. The outer loop shrinks a
// candidate set R; the inner loop collects states that can make progress
// toward the target while staying inside R.
std::vector<char> almost_sure_reach_set(const Mdp& mdp, int target) {
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  std::vector<char> candidate(S, 1);
  while (true) {
    std::vector<char> reach(S, 0);
    reach[target] = 1;
    bool grew = true;
    while (grew) {
      grew = false;
      for (int s = 0; s < S; ++s) {
        if (reach[s] || !candidate[s]) continue;
        for (int a = 0; a < A; ++a) {
          bool stays_inside = true;
          bool touches_reach = false;
          const auto row = mdp.transition_row(s, a);
          for (int next = 0; next < S; ++next) {
            if (row[next] <= 0.0) continue;
            if (!candidate[next]) {
              stays_inside = false;
              break;
            }
            if (reach[next]) touches_reach = true;
          }
          if (stays_inside && touches_reach) {
            reach[s] = 1;
            grew = true;
            break;
          }
        }
      }
    }
    if (reach == candidate) return reach;
    candidate = std::move(reach);
  }
}

// Minimal expected hitting times of `target`, all states assumed to be in
// the almost-sure reach set. Undiscounted value iteration from zero
// converges monotonically from below.
std::vector<double> min_hitting_times(const Mdp& mdp, int target, double tol) {
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  std::vector<double> h(S, 0.0);
  std::vector<double> next(S, 0.0);
  for (std::int64_t sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double change = 0.0;
    for (int s = 0; s < S; ++s) {
      if (s == target) {
        next[s] = 0.0;
        continue;
      }
      double best = std::numeric_limits<double>::infinity();
      for (int a = 0; a < A; ++a) {
        const auto row = mdp.transition_row(s, a);
        double acc = 0.0;
        for (int n = 0; n < S; ++n) acc += row[n] * h[n];
        best = std::min(best, 1.0 + acc);
      }
      next[s] = best;
      change = std::max(change, std::abs(next[s] - h[s]));
    }
    h.swap(next);
    if (change <= tol) return h;
  }
  throw std::runtime_error("diameter: first-passage iteration did not settle");
}

}  // namespace

double diameter(const Mdp& mdp, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("diameter: tol must be positive");
  const int S = mdp.num_states();
  double worst = 0.0;
  for (int target = 0; target < S; ++target) {
    const auto reachable = almost_sure_reach_set(mdp, target);
    for (int s = 0; s < S; ++s)
      if (!reachable[s]) return std::numeric_limits<double>::infinity();
    const auto h = min_hitting_times(mdp, target, tol);
    for (int s = 0; s < S; ++s) worst = std::max(worst, h[s]);
  }
  return worst;
}

MdpSimulator::MdpSimulator(Mdp mdp, int start_state, std::uint64_t seed)
    : mdp_(std::move(mdp)), state_(start_state), rng_(seed) {
  if (!mdp_.valid_state(start_state))
    throw std::invalid_argument("MdpSimulator: start state out of range");
}

TransitionRecord MdpSimulator::step(int action) {
  const TransitionRecord rec = mtrl::step(mdp_, state_, action, rng_);
  state_ = rec.next_state;
  return rec;
}

}  // namespace mtrl
