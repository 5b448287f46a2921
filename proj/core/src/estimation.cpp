#include "mtrl/estimation.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace mtrl {

CountTable::CountTable(int num_states, int num_actions)
    : num_states_(num_states),
      num_actions_(num_actions),
      next_counts_(static_cast<std::size_t>(num_states) * num_actions * num_states, 0),
      reward_sum_(static_cast<std::size_t>(num_states) * num_actions, 0.0),
      visits_(static_cast<std::size_t>(num_states) * num_actions, 0) {
  if (num_states <= 0 || num_actions <= 0)
    throw std::invalid_argument("CountTable: state and action counts must be positive");
}

void CountTable::record(const TransitionRecord& rec) {
  if (rec.state < 0 || rec.state >= num_states_ || rec.action < 0 ||
      rec.action >= num_actions_ || rec.next_state < 0 || rec.next_state >= num_states_)
    throw std::invalid_argument("CountTable::record: indices out of range");
  if (rec.reward != 0 && rec.reward != 1)
    throw std::invalid_argument("CountTable::record: reward must be 0 or 1");
  const int pair = pair_index(rec.state, rec.action);
  ++next_counts_[static_cast<std::size_t>(pair) * num_states_ + rec.next_state];
  reward_sum_[pair] += rec.reward;
  ++visits_[pair];
}

std::int64_t CountTable::total_visits() const {
  return std::accumulate(visits_.begin(), visits_.end(), std::int64_t{0});
}

void CountTable::set_pair(int s, int a, const CountTable& source) {
  if (!same_shape(source)) throw std::invalid_argument("CountTable::set_pair: shape mismatch");
  const int pair = pair_index(s, a);
  for (int next = 0; next < num_states_; ++next)
    next_counts_[static_cast<std::size_t>(pair) * num_states_ + next] =
        source.next_count(s, a, next);
  reward_sum_[pair] = source.reward_sum(s, a);
  visits_[pair] = source.visits(s, a);
}

void CountTable::add_observation(int s, int a, int next, std::int64_t count,
                                 double reward_sum) {
  if (s < 0 || s >= num_states_ || a < 0 || a >= num_actions_ || next < 0 ||
      next >= num_states_)
    throw std::invalid_argument("CountTable::add_observation: indices out of range");
  if (count < 0 || reward_sum < 0.0)
    throw std::invalid_argument("CountTable::add_observation: negative contribution");
  const int pair = pair_index(s, a);
  next_counts_[static_cast<std::size_t>(pair) * num_states_ + next] += count;
  visits_[pair] += count;
  reward_sum_[pair] += reward_sum;
}

CountTable merge_counts(const CountTable& a, const CountTable& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("merge_counts: shape mismatch");
  CountTable out(a.num_states(), a.num_actions());
  for (int s = 0; s < a.num_states(); ++s) {
    for (int act = 0; act < a.num_actions(); ++act) {
      for (int next = 0; next < a.num_states(); ++next) {
        const std::int64_t total = a.next_count(s, act, next) + b.next_count(s, act, next);
        if (total > 0) out.add_observation(s, act, next, total, 0.0);
      }
      out.add_observation(s, act, 0, 0, a.reward_sum(s, act) + b.reward_sum(s, act));
    }
  }
  return out;
}

ThetaVector estimate_theta(const CountTable& counts, int s, int a) {
  const int S = counts.num_states();
  ThetaVector theta;
  theta.values.assign(static_cast<std::size_t>(S) + 1, 0.0);
  theta.sample_size = counts.visits(s, a);
  if (theta.sample_size == 0) {
    const double uniform = 1.0 / S;
    for (int next = 0; next < S; ++next) theta.values[next] = uniform;
    theta.values[S] = 0.5;
    return theta;
  }
  const double n = static_cast<double>(theta.sample_size);
  for (int next = 0; next < S; ++next)
    theta.values[next] = static_cast<double>(counts.next_count(s, a, next)) / n;
  theta.values[S] = counts.reward_sum(s, a) / n;
  return theta;
}

double confidence_radius(std::int64_t n, double delta) {
  if (n < 0) throw std::invalid_argument("confidence_radius: negative sample count");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("confidence_radius: delta must lie in (0, 1)");
  if (n == 0) return std::numeric_limits<double>::infinity();
  return std::sqrt((2.0 / static_cast<double>(n)) * (2.0 + std::log(2.0 / delta)));
}

EncodedOutcome encode_transition(const TransitionRecord& rec, int num_states) {
  if (num_states <= 0) throw std::invalid_argument("encode_transition: bad state count");
  if (rec.next_state < 0 || rec.next_state >= num_states)
    throw std::invalid_argument("encode_transition: next state out of range");
  if (rec.reward != 0 && rec.reward != 1)
    throw std::invalid_argument("encode_transition: reward must be 0 or 1");
  EncodedOutcome z;
  z.values.assign(static_cast<std::size_t>(num_states) + 1, 0.0);
  z.values[rec.next_state] = 1.0;
  z.values[num_states] = rec.reward;
  z.next_state = rec.next_state;
  z.reward = rec.reward;
  return z;
}

double square_loss(const ThetaVector& theta, const EncodedOutcome& z) {
  if (theta.dimension() != z.dimension())
    throw std::invalid_argument("square_loss: dimension mismatch");
  const int S = theta.dimension() - 1;
  double acc = 0.0;
  for (int tau = 0; tau < S; ++tau) {
    const double v = theta.values[tau];
    acc += (tau == z.next_state) ? (v - 1.0) * (v - 1.0) : v * v;
  }
  const double dr = theta.values[S] - static_cast<double>(z.reward);
  return acc + dr * dr;
}

double theta_distance(const ThetaVector& a, const ThetaVector& b) {
  if (a.dimension() != b.dimension())
    throw std::invalid_argument("theta_distance: dimension mismatch");
  double acc = 0.0;
  for (int i = 0; i < a.dimension(); ++i) {
    const double d = a.values[i] - b.values[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

}  // namespace mtrl
