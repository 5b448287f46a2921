#include "mtrl/finite_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mtrl {

VersionSpace::VersionSpace(int candidate_count, double elimination_threshold)
    : candidate_count_(candidate_count),
      elimination_threshold_(elimination_threshold),
      alive_(candidate_count, 1),
      surviving_count_(candidate_count),
      c_(static_cast<std::size_t>(candidate_count) * candidate_count, 0.0),
      delta_(static_cast<std::size_t>(candidate_count) * candidate_count, 0.0) {
  if (candidate_count < 1)
    throw std::invalid_argument("VersionSpace: need at least one candidate");
  if (!(elimination_threshold > 0.0))
    throw std::invalid_argument("VersionSpace: elimination threshold must be positive");
}

std::vector<int> VersionSpace::surviving() const {
  std::vector<int> out;
  out.reserve(surviving_count_);
  for (int c = 0; c < candidate_count_; ++c)
    if (alive_[c]) out.push_back(c);
  return out;
}

int VersionSpace::sole_survivor() const {
  if (surviving_count_ != 1)
    throw std::logic_error("VersionSpace: more than one survivor");
  for (int c = 0; c < candidate_count_; ++c)
    if (alive_[c]) return c;
  throw std::logic_error("VersionSpace: empty");  // unreachable
}

void VersionSpace::add_pair_statistics(int i, int j, double weight, double loss_gap) {
  c_[pair_index(i, j)] += weight;
  delta_[pair_index(i, j)] += loss_gap;
}

void VersionSpace::eliminate(int c) {
  if (!alive_[c]) throw std::logic_error("VersionSpace: candidate already eliminated");
  if (surviving_count_ <= 1)
    throw std::logic_error("VersionSpace: cannot eliminate the last survivor");
  alive_[c] = 0;
  --surviving_count_;
}

std::vector<int> update_elimination(VersionSpace& vs,
                                    const std::vector<const ThetaVector*>& thetas,
                                    const std::vector<double>& radii,
                                    const EncodedOutcome& z, double gate_multiplier) {
  const int C = vs.candidate_count();
  if (static_cast<int>(thetas.size()) != C || static_cast<int>(radii.size()) != C)
    throw std::invalid_argument("update_elimination: candidate arrays have wrong size");
  std::vector<int> eliminated;
  if (vs.surviving_count() < 2) return eliminated;

  for (int i = 0; i < C && vs.surviving_count() > 1; ++i) {
    if (!vs.alive(i)) continue;
    for (int j = i + 1; j < C && vs.surviving_count() > 1; ++j) {
      if (!vs.alive(j)) continue;
      // Gate on the compared pair's own radii. For the pair member that is
      // the true model this bounds the drift term directly; when neither is
      // true the sign test removes the farther wrong candidate either way.
      const double max_radius = std::max(radii[i], radii[j]);
      const double dist = theta_distance(*thetas[i], *thetas[j]);
      if (dist < gate_multiplier * max_radius) continue;

      const double gap = square_loss(*thetas[i], z) - square_loss(*thetas[j], z);
      vs.add_pair_statistics(i, j, 0.25 * dist * dist, gap);
      if (vs.pair_weight(i, j) >= vs.elimination_threshold()) {
        const int victim = vs.pair_loss_gap(i, j) > 0.0 ? i : j;
        vs.eliminate(victim);
        eliminated.push_back(victim);
        if (victim == i) break;  // remaining (i, *) pairs are stale
      }
    }
  }
  return eliminated;
}

GroupBank::GroupBank(std::vector<CountTable> groups, double radius_delta)
    : radius_delta_(radius_delta), groups_(std::move(groups)) {
  if (groups_.empty()) throw std::invalid_argument("GroupBank: need at least one group");
  if (!(radius_delta > 0.0 && radius_delta < 1.0))
    throw std::invalid_argument("GroupBank: radius delta must lie in (0, 1)");
  num_states_ = groups_.front().num_states();
  num_actions_ = groups_.front().num_actions();
  for (const auto& g : groups_)
    if (!g.same_shape(groups_.front()))
      throw std::invalid_argument("GroupBank: group tables must share a shape");
  theta_cache_.resize(groups_.size());
  radius_cache_.resize(groups_.size());
  for (int g = 0; g < group_count(); ++g) refresh(g);
}

void GroupBank::refresh(int group) {
  auto& thetas = theta_cache_[group];
  auto& radii = radius_cache_[group];
  thetas.assign(static_cast<std::size_t>(num_states_) * num_actions_, {});
  radii.assign(static_cast<std::size_t>(num_states_) * num_actions_, 0.0);
  for (int s = 0; s < num_states_; ++s) {
    for (int a = 0; a < num_actions_; ++a) {
      const int idx = s * num_actions_ + a;
      thetas[idx] = estimate_theta(groups_[group], s, a);
      radii[idx] = confidence_radius(thetas[idx].sample_size, radius_delta_);
    }
  }
}

void GroupBank::absorb(int group, const CountTable& task_counts) {
  if (group < 0 || group >= group_count())
    throw std::invalid_argument("GroupBank::absorb: invalid group " + std::to_string(group));
  groups_[group] = merge_counts(groups_[group], task_counts);
  refresh(group);
}

GroupBank absorb_counts(GroupBank bank, int group, const CountTable& task_counts) {
  bank.absorb(group, task_counts);
  return bank;
}

KnownnessMap check_known(int num_states, int num_actions, double eps_known,
                         const GroupBank& bank, const std::vector<int>& surviving,
                         const CountTable& task_counts, std::int64_t m) {
  KnownnessMap map(num_states, num_actions, m);
  for (int s = 0; s < num_states; ++s) {
    for (int a = 0; a < num_actions; ++a) {
      bool agreement = !surviving.empty();
      for (const int c : surviving) {
        if (bank.radius(c, s, a) > eps_known / 2.0) {
          agreement = false;
          break;
        }
      }
      if (agreement) {
        for (std::size_t i = 0; i < surviving.size() && agreement; ++i)
          for (std::size_t j = i + 1; j < surviving.size(); ++j)
            if (theta_distance(bank.theta(surviving[i], s, a),
                               bank.theta(surviving[j], s, a)) > eps_known) {
              agreement = false;
              break;
            }
      }
      if (agreement || task_counts.visits(s, a) >= m) map.mark_known(s, a);
    }
  }
  return map;
}

double theory_eps_known(double epsilon, double gamma, double v_max, int next_state_bound) {
  if (!(epsilon > 0.0) || !(gamma > 0.0 && gamma < 1.0) || v_max <= 0.0 ||
      next_state_bound <= 0)
    throw std::invalid_argument("theory_eps_known: invalid arguments");
  return epsilon * (1.0 - gamma) / (v_max * std::sqrt(next_state_bound));
}

double theory_elimination_threshold(int candidate_bound, int tasks, std::int64_t horizon,
                                    double delta) {
  if (candidate_bound < 1 || tasks < 1 || horizon < 1 || !(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("theory_elimination_threshold: invalid arguments");
  const double pairs = static_cast<double>(candidate_bound) * candidate_bound;
  return 8.0 * (2.0 + std::log(2.0 * pairs * tasks * static_cast<double>(horizon) / delta));
}

namespace {

// Planning estimates for the task: task counts everywhere, candidate rows
// substituted at pairs the task has not pinned down itself. Once a single
// candidate remains its full table is merged with the task counts.
CountTable build_planning_counts(const GroupBank& bank, const std::vector<int>& surviving,
                                 const CountTable& task_counts, const KnownnessMap& known,
                                 std::int64_t m) {
  if (surviving.size() == 1)
    return merge_counts(bank.counts(surviving.front()), task_counts);
  CountTable planning = task_counts;
  const int S = task_counts.num_states();
  const int A = task_counts.num_actions();
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      if (!known.known(s, a) || task_counts.visits(s, a) >= m) continue;
      // Known through candidate agreement: borrow the best-sampled row.
      int best = surviving.front();
      for (const int c : surviving)
        if (bank.counts(c).visits(s, a) > bank.counts(best).visits(s, a)) best = c;
      planning.set_pair(s, a, bank.counts(best));
    }
  }
  return planning;
}

}  // namespace

FiniteModelResult run_finite_model_task(Simulator& env, const GroupBank& bank,
                                        const FiniteModelParams& params) {
  if (params.horizon < 1)
    throw std::invalid_argument("run_finite_model_task: horizon must be >= 1");
  if (params.m < 1) throw std::invalid_argument("run_finite_model_task: m must be >= 1");
  const int S = env.num_states();
  const int A = env.num_actions();
  if (S != bank.num_states() || A != bank.num_actions())
    throw std::invalid_argument("run_finite_model_task: bank shape mismatch");
  const double gamma = env.discount();

  VersionSpace vs(bank.group_count(), params.xi);
  CountTable task_counts(S, A);
  std::vector<int> surviving = vs.surviving();
  std::int64_t active_m = params.m;

  TaskLog log;
  log.steps.reserve(static_cast<std::size_t>(params.horizon));

  std::optional<int> identified;
  if (vs.surviving_count() == 1) {
    identified = vs.sole_survivor();
    log.identification_step = 0;
    if (params.post_identification_m) active_m = *params.post_identification_m;
  }

  // The candidate-agreement half of check_known depends only on the bank and
  // the surviving set, so it is cached and refreshed on candidate changes.
  // The count half flips one pair at a time at the visited (s, a).
  KnownnessMap known = check_known(S, A, params.eps_known, bank, surviving, task_counts,
                                   active_m);
  auto rebuild_known = [&] {
    KnownnessMap next =
        check_known(S, A, params.eps_known, bank, surviving, task_counts, active_m);
    const bool changed = !(next == known);
    known = std::move(next);
    return changed;
  };

  PlanResult explore_plan{ValueFunction{std::vector<double>(S, 0.0)}, Policy{}};
  PlanResult exploit_plan = explore_plan;
  auto replan = [&] {
    const CountTable planning =
        build_planning_counts(bank, surviving, task_counts, known, active_m);
    explore_plan = value_iteration(build_explore_mdp(planning, known, gamma), params.tol,
                                   explore_plan.value);
    exploit_plan = value_iteration(build_exploit_mdp(planning, known, gamma), params.tol,
                                   exploit_plan.value);
    ++log.policy_recomputes;
  };
  replan();

  std::vector<const ThetaVector*> thetas(bank.group_count(), nullptr);
  std::vector<double> radii(bank.group_count(), 0.0);

  for (std::int64_t h = 0; h < params.horizon; ++h) {
    const int s = env.state();
    const Mode mode = choose_mode(explore_plan.value, s, params.explore_threshold());
    const int a = mode == Mode::explore
                      ? pick_explore_action(s, task_counts, known, explore_plan.policy)
                      : exploit_plan.policy.actions[s];
    const TransitionRecord rec = env.step(a);
    const bool was_known = known.known(s, a);
    task_counts.record(rec);

    log.steps.push_back({h, s, a, rec.reward, mode, known.known_count()});
    log.cum_reward += rec.reward;
    if (!was_known) ++log.unknown_visits;

    bool candidates_changed = false;
    if (vs.surviving_count() > 1) {
      for (const int c : surviving) {
        thetas[c] = &bank.theta(c, s, a);
        radii[c] = bank.radius(c, s, a);
      }
      const EncodedOutcome z = encode_transition(rec, S);
      const std::vector<int> eliminated =
          update_elimination(vs, thetas, radii, z, params.gate_multiplier);
      if (!eliminated.empty()) {
        candidates_changed = true;
        surviving = vs.surviving();
        for (const int victim : eliminated)
          log.eliminations.push_back({h, victim, vs.surviving_count()});
        if (vs.surviving_count() == 1 && !identified) {
          identified = vs.sole_survivor();
          log.identification_step = h;
          if (params.post_identification_m) active_m = *params.post_identification_m;
        }
      }
    }

    bool knownness_changed = false;
    if (candidates_changed) {
      const int before = known.known_count();
      knownness_changed = rebuild_known();
      if (knownness_changed)
        log.knownness_events.push_back({h, -1, -1, known.known_count() >= before});
    } else if (!was_known && task_counts.visits(s, a) >= active_m) {
      known.mark_known(s, a);
      log.knownness_events.push_back({h, s, a, true});
      knownness_changed = true;
    }
    if (knownness_changed || candidates_changed) replan();
  }
  log.known_pairs_end = known.known_count();
  return {identified, std::move(task_counts), std::move(log)};
}

}  // namespace mtrl
