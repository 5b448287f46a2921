#include "mtrl/envs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "mtrl/estimation.hpp"

namespace mtrl {

namespace {

constexpr double kGridGamma = 0.95;
constexpr double kMoveSuccess = 0.85;
constexpr double kMoveSlip = 0.05;
constexpr double kCornerStay = 0.95;

// Joint (transition row, reward) l2 difference at one (s, a).
double model_difference(const Mdp& a, const Mdp& b, int s, int act) {
  double acc = 0.0;
  for (int next = 0; next < a.num_states(); ++next) {
    const double d = a.transition(s, act, next) - b.transition(s, act, next);
    acc += d * d;
  }
  const double dr = a.reward_mean(s, act) - b.reward_mean(s, act);
  return std::sqrt(acc + dr * dr);
}

double pair_gap(const Mdp& a, const Mdp& b) {
  double best = 0.0;
  for (int s = 0; s < a.num_states(); ++s)
    for (int act = 0; act < a.num_actions(); ++act)
      best = std::max(best, model_difference(a, b, s, act));
  return best;
}

}  // namespace

double family_gap(const std::vector<Mdp>& members) {
  double gap = 0.0;
  bool first = true;
  for (std::size_t i = 0; i < members.size(); ++i) {
    for (std::size_t j = i + 1; j < members.size(); ++j) {
      const double g = pair_gap(members[i], members[j]);
      if (first || g < gap) {
        gap = g;
        first = false;
      }
    }
  }
  return first ? 0.0 : gap;
}

double MdpFamily::p_min() const {
  double out = 1.0;
  for (const double p : prior) out = std::min(out, p);
  return out;
}

void MdpFamily::validate() const {
  if (members.empty()) throw std::invalid_argument("MdpFamily: no members");
  if (prior.size() != members.size())
    throw std::invalid_argument("MdpFamily: prior size mismatch");
  const int S = members.front().num_states();
  const int A = members.front().num_actions();
  const double gamma = members.front().discount();
  for (const auto& m : members)
    if (m.num_states() != S || m.num_actions() != A || m.discount() != gamma)
      throw std::invalid_argument("MdpFamily: members must share S, A, and discount");
  double sum = 0.0;
  for (const double p : prior) {
    if (p < 0.0) throw std::invalid_argument("MdpFamily: negative prior entry");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("MdpFamily: prior does not sum to 1");
  if (start_state < 0 || start_state >= S)
    throw std::invalid_argument("MdpFamily: start state out of range");
}

namespace {

struct GridSpec {
  int high_state;    // 0.99 corner
  int medium_state;  // 0.6 cell
  int zero_a;
  int zero_b;
};

std::vector<double> grid_rewards(const GridSpec& spec, int S, int A) {
  std::vector<double> reward(static_cast<std::size_t>(S) * A, 0.1);
  auto set_state = [&](int s, double r) {
    for (int a = 0; a < A; ++a) reward[static_cast<std::size_t>(s) * A + a] = r;
  };
  set_state(spec.high_state, 0.99);
  set_state(spec.medium_state, 0.6);
  set_state(spec.zero_a, 0.0);
  set_state(spec.zero_b, 0.0);
  return reward;
}

}  // namespace

MdpFamily gridworld_suite() {
  constexpr int kSide = 5;
  constexpr int S = kSide * kSide;
  constexpr int A = 4;  // up, down, left, right
  constexpr int kStart = 12;
  // Special corners: top-right, bottom-left, bottom-right.
  constexpr int kCornerTR = 4;
  constexpr int kCornerBL = 20;
  constexpr int kCornerBR = 24;

  const int row_delta[A] = {-1, 1, 0, 0};
  const int col_delta[A] = {0, 0, -1, 1};

  std::vector<double> transition(static_cast<std::size_t>(S) * A * S, 0.0);
  auto cell = [&](int s, int a) {
    return transition.data() + (static_cast<std::size_t>(s) * A + a) * S;
  };
  for (int s = 0; s < S; ++s) {
    const int row = s / kSide;
    const int col = s % kSide;
    for (int a = 0; a < A; ++a) {
      double* p = cell(s, a);
      if (s == kCornerTR || s == kCornerBL || s == kCornerBR) {
        p[s] += kCornerStay;
        p[kStart] += 1.0 - kCornerStay;
        continue;
      }
      for (int dir = 0; dir < A; ++dir) {
        const double mass = dir == a ? kMoveSuccess : kMoveSlip;
        const int nr = row + row_delta[dir];
        const int nc = col + col_delta[dir];
        if (nr < 0 || nr >= kSide || nc < 0 || nc >= kSide)
          p[s] += mass;  // wall: stay in place
        else
          p[nr * kSide + nc] += mass;
      }
    }
  }

  // Rewards, cells in row-major 0-based indices: layout 1 pays at the
  // bottom-left corner (20) with medium cell 5; layout 2 at the top-right
  // corner (4) with medium cell 1; layout 3 mirrors them at the bottom-right
  // corner (24) with medium cell 0 and zero corners 4 and 20.
  const GridSpec specs[3] = {
      {kCornerBL, 5, kCornerTR, kCornerBR},
      {kCornerTR, 1, kCornerBL, kCornerBR},
      {kCornerBR, 0, kCornerTR, kCornerBL},
  };

  MdpFamily family;
  for (const auto& spec : specs)
    family.members.emplace_back(S, A, transition, grid_rewards(spec, S, A), kGridGamma);
  family.prior.assign(3, 1.0 / 3.0);
  family.start_state = kStart;
  family.gap = family_gap(family.members);
  family.diameter_bound = diameter(family.members.front(), 1e-9);
  family.next_state_bound = family.members.front().max_next_states();
  family.validate();
  return family;
}

namespace {

std::vector<double> random_transition_table(int S, int A, Rng& rng) {
  std::vector<double> transition(static_cast<std::size_t>(S) * A * S, 0.0);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      double* row = transition.data() + (static_cast<std::size_t>(s) * A + a) * S;
      double sum = 0.0;
      for (int next = 0; next < S; ++next) {
        const double w = -std::log(1.0 - rng.uniform());  // Exp(1), Dirichlet(1)
        row[next] = w;
        sum += w;
      }
      for (int next = 0; next < S; ++next) row[next] /= sum;
      // Renormalize exactly against accumulated rounding.
      double check = 0.0;
      for (int next = 0; next < S; ++next) check += row[next];
      row[S - 1] += 1.0 - check;
    }
  }
  return transition;
}

std::vector<double> random_rewards(int S, int A, Rng& rng) {
  std::vector<double> reward(static_cast<std::size_t>(S) * A, 0.0);
  for (auto& r : reward) r = rng.uniform();
  return reward;
}

}  // namespace

MdpFamily random_family(int num_states, int num_actions, int members, double gamma,
                        double target_gap, std::uint64_t seed,
                        const RandomFamilyOptions& options) {
  if (members < 1) throw std::invalid_argument("random_family: need at least one member");
  if (!(target_gap > 0.0)) throw std::invalid_argument("random_family: gap must be positive");
  Rng rng(seed);
  for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
    std::vector<Mdp> candidates;
    std::vector<double> shared;
    if (options.rewards_only) shared = random_transition_table(num_states, num_actions, rng);
    for (int c = 0; c < members; ++c) {
      std::vector<double> transition =
          options.rewards_only ? shared : random_transition_table(num_states, num_actions, rng);
      candidates.emplace_back(num_states, num_actions, std::move(transition),
                              random_rewards(num_states, num_actions, rng), gamma);
    }
    const double gap = members > 1 ? family_gap(candidates)
                                   : std::numeric_limits<double>::infinity();
    if (members > 1 && gap <= target_gap) continue;
    bool connected = true;
    double worst_diameter = 0.0;
    for (const auto& m : candidates) {
      const double d = diameter(m, 1e-9);
      if (!std::isfinite(d)) {
        connected = false;
        break;
      }
      worst_diameter = std::max(worst_diameter, d);
    }
    if (!connected) continue;

    MdpFamily family;
    family.members = std::move(candidates);
    family.prior.assign(members, 1.0 / members);
    // Guard the prior sum against division rounding.
    family.prior.back() = 1.0;
    for (int c = 0; c + 1 < members; ++c) family.prior.back() -= family.prior[c];
    family.start_state = 0;
    family.gap = members > 1 ? gap : 0.0;
    family.diameter_bound = worst_diameter;
    int bound = 0;
    for (const auto& m : family.members) bound = std::max(bound, m.max_next_states());
    family.next_state_bound = bound;
    family.validate();
    return family;
  }
  throw std::runtime_error("random_family: no family met gap " + std::to_string(target_gap) +
                           " within " + std::to_string(options.max_attempts) + " attempts");
}

SampledTask sample_task(const MdpFamily& family, Rng& rng) {
  family.validate();
  const int index = rng.categorical(family.prior);
  const std::uint64_t sim_seed = rng.next_u64();
  SampledTask task;
  task.true_index = index;
  task.simulator =
      std::make_unique<MdpSimulator>(family.members[index], family.start_state, sim_seed);
  return task;
}

}  // namespace mtrl
