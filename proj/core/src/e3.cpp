#include "mtrl/e3.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mtrl {

KnownnessMap::KnownnessMap(int num_states, int num_actions, std::int64_t threshold)
    : num_states_(num_states),
      num_actions_(num_actions),
      threshold_(threshold),
      known_(static_cast<std::size_t>(num_states) * num_actions, 0) {
  if (num_states <= 0 || num_actions <= 0)
    throw std::invalid_argument("KnownnessMap: state and action counts must be positive");
  if (threshold <= 0) throw std::invalid_argument("KnownnessMap: threshold must be positive");
}

KnownnessMap KnownnessMap::from_counts(const CountTable& counts, std::int64_t threshold) {
  KnownnessMap map(counts.num_states(), counts.num_actions(), threshold);
  for (int s = 0; s < counts.num_states(); ++s)
    for (int a = 0; a < counts.num_actions(); ++a)
      if (counts.visits(s, a) >= threshold) map.mark_known(s, a);
  return map;
}

void KnownnessMap::mark_known(int s, int a) {
  char& cell = known_[s * num_actions_ + a];
  if (!cell) {
    cell = 1;
    ++known_count_;
  }
}

ThresholdSchedule make_schedule(double gap, double epsilon, double gamma, double v_max,
                                double delta, int num_states, int num_actions, int tasks,
                                int next_state_bound) {
  constexpr double kMaxGap = 2.4142135623730951;  // sqrt(2) + 1
  if (!(gap > 0.0 && gap <= kMaxGap))
    throw std::invalid_argument("make_schedule: gap must lie in (0, sqrt(2)+1]");
  if (!(epsilon > 0.0)) throw std::invalid_argument("make_schedule: epsilon must be positive");
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::invalid_argument("make_schedule: gamma must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("make_schedule: delta must lie in (0, 1)");
  if (v_max <= 0.0 || num_states <= 0 || num_actions <= 0 || tasks <= 0 ||
      next_state_bound <= 0)
    throw std::invalid_argument("make_schedule: bounds must be positive");

  const double log_term =
      2.0 + std::log(2.0 * num_states * num_actions * static_cast<double>(tasks) / delta);
  const double id_raw = (32.0 / (gap * gap)) * log_term;
  const double learn_raw = (8.0 * next_state_bound * v_max * v_max /
                            (epsilon * epsilon * (1.0 - gamma) * (1.0 - gamma))) *
                           log_term;
  ThresholdSchedule schedule;
  schedule.identify_threshold = static_cast<std::int64_t>(std::ceil(id_raw));
  schedule.learn_threshold =
      std::max(schedule.identify_threshold, static_cast<std::int64_t>(std::ceil(learn_raw)));
  schedule.stage = ThresholdSchedule::Stage::identify;
  return schedule;
}

namespace {

void fill_pair(std::vector<double>& transition, std::vector<double>& reward, int S, int A,
               int s, int a, const CountTable& est, bool known, bool explore_variant) {
  const std::size_t row = (static_cast<std::size_t>(s) * A + a) * S;
  if (known) {
    const ThetaVector theta = estimate_theta(est, s, a);
    for (int next = 0; next < S; ++next) transition[row + next] = theta.values[next];
    reward[static_cast<std::size_t>(s) * A + a] = explore_variant ? 0.0 : theta.reward();
  } else {
    transition[row + s] = 1.0;
    reward[static_cast<std::size_t>(s) * A + a] = explore_variant ? 1.0 : 0.0;
  }
}

Mdp build_surrogate(const CountTable& est, const KnownnessMap& known, double gamma,
                    bool explore_variant) {
  const int S = est.num_states();
  const int A = est.num_actions();
  std::vector<double> transition(static_cast<std::size_t>(S) * A * S, 0.0);
  std::vector<double> reward(static_cast<std::size_t>(S) * A, 0.0);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a)
      fill_pair(transition, reward, S, A, s, a, est, known.known(s, a), explore_variant);
  return Mdp(S, A, std::move(transition), std::move(reward), gamma);
}

}  // namespace

Mdp build_explore_mdp(const CountTable& est, const KnownnessMap& known, double gamma) {
  return build_surrogate(est, known, gamma, true);
}

Mdp build_exploit_mdp(const CountTable& est, const KnownnessMap& known, double gamma) {
  return build_surrogate(est, known, gamma, false);
}

Mode choose_mode(const ValueFunction& v_explore, int state, double explore_threshold) {
  return v_explore.values[state] > explore_threshold ? Mode::explore : Mode::exploit;
}

int pick_explore_action(int state, const CountTable& counts, const KnownnessMap& known,
                        const Policy& explore_policy) {
  int best_action = -1;
  std::int64_t best_visits = std::numeric_limits<std::int64_t>::max();
  for (int a = 0; a < counts.num_actions(); ++a) {
    if (known.known(state, a)) continue;
    const std::int64_t v = counts.visits(state, a);
    if (v < best_visits) {
      best_visits = v;
      best_action = a;
    }
  }
  return best_action >= 0 ? best_action : explore_policy.actions[state];
}

E3Result run_e3_task(Simulator& env, const E3Params& params) {
  if (params.horizon < 1) throw std::invalid_argument("run_e3_task: horizon must be >= 1");
  const int S = env.num_states();
  const int A = env.num_actions();
  const double gamma = env.discount();

  CountTable counts = params.initial_counts ? *params.initial_counts : CountTable(S, A);
  if (!counts.same_shape(CountTable(S, A)))
    throw std::invalid_argument("run_e3_task: initial counts shape mismatch");

  ThresholdSchedule schedule = params.schedule;
  KnownnessMap known = KnownnessMap::from_counts(counts, schedule.active());

  TaskLog log;
  log.steps.reserve(static_cast<std::size_t>(params.horizon));

  PlanResult explore_plan{ValueFunction{std::vector<double>(S, 0.0)}, Policy{}};
  PlanResult exploit_plan = explore_plan;
  auto replan = [&] {
    explore_plan = value_iteration(build_explore_mdp(counts, known, gamma), params.tol,
                                   explore_plan.value);
    exploit_plan = value_iteration(build_exploit_mdp(counts, known, gamma), params.tol,
                                   exploit_plan.value);
    ++log.policy_recomputes;
  };
  replan();

  for (std::int64_t h = 0; h < params.horizon; ++h) {
    const int s = env.state();
    const Mode mode = choose_mode(explore_plan.value, s, params.explore_threshold());
    const int a = mode == Mode::explore
                      ? pick_explore_action(s, counts, known, explore_plan.policy)
                      : exploit_plan.policy.actions[s];
    const TransitionRecord rec = env.step(a);
    const bool was_known = known.known(s, a);
    counts.record(rec);

    log.steps.push_back({h, s, a, rec.reward, mode, known.known_count()});
    log.cum_reward += rec.reward;
    if (!was_known) ++log.unknown_visits;

    bool changed = false;
    if (!was_known && counts.visits(s, a) >= schedule.active()) {
      known.mark_known(s, a);
      log.knownness_events.push_back({h, s, a, true});
      changed = true;
    }
    if (schedule.stage == ThresholdSchedule::Stage::identify && known.all_known()) {
      schedule.stage = ThresholdSchedule::Stage::learn;
      if (schedule.learn_threshold != schedule.identify_threshold) {
        known = KnownnessMap::from_counts(counts, schedule.learn_threshold);
        log.knownness_events.push_back({h, -1, -1, false});
        changed = true;
      }
    }
    if (changed) replan();
  }
  log.known_pairs_end = known.known_count();
  return {std::move(counts), std::move(log)};
}

}  // namespace mtrl
