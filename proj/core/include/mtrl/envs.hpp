#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "mtrl/mdp.hpp"
#include "mtrl/rng.hpp"

namespace mtrl {

// A finite set of MDPs sharing state space, action space, and discount,
// together with the task prior and the verified separation/reachability
// constants. Immutable.
struct MdpFamily {
  std::vector<Mdp> members;
  std::vector<double> prior;
  int start_state = 0;
  double gap = 0.0;            // largest g with some per-pair l2 difference >= g
  double diameter_bound = 0.0;
  int next_state_bound = 0;

  int size() const { return static_cast<int>(members.size()); }
  double p_min() const;
  void validate() const;
};

// Smallest over member pairs of the largest per-(s, a) l2 model difference;
// exhaustive scan. Zero for fewer than two members.
double family_gap(const std::vector<Mdp>& members);

// The 5x5 benchmark triple. States number row-major from the top-left; the
// start state is the center cell (index 12). Four cardinal actions move in
// the intended direction with probability 0.85 and in each other direction
// with probability 0.05; movement into a wall stays in place. Corner cells
// 4, 20, and 24 ignore the action: they self-loop with probability 0.95 and
// otherwise return to the start. The three members share transitions and
// differ only in rewards; each has one 0.99 corner, one 0.6 cell, two zero
// corners, and 0.1 elsewhere. Uniform prior.
MdpFamily gridworld_suite();

struct RandomFamilyOptions {
  bool rewards_only = false;  // members share one transition kernel
  int max_attempts = 1000;
};

// Rejection-samples a family whose verified gap exceeds target_gap and whose
// members all have finite diameter. Throws after max_attempts failures.
MdpFamily random_family(int num_states, int num_actions, int members, double gamma,
                        double target_gap, std::uint64_t seed,
                        const RandomFamilyOptions& options = {});

struct SampledTask {
  int true_index = 0;  // hidden from learners; only the harness may read it
  std::unique_ptr<Simulator> simulator;
};

// Draws a task from the prior and wraps it behind the black-box Simulator
// interface. The simulator owns its stream, seeded from rng.
SampledTask sample_task(const MdpFamily& family, Rng& rng);

}  // namespace mtrl
