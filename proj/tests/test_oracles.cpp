#include "doctest.h"

#include <cmath>

#include "mtrl/mdp.hpp"
#include "oracle/oracles.hpp"

using namespace mtrl;

TEST_CASE("exact loss gap closed forms") {
  SUBCASE("identical estimates give a zero gap and a zero bound") {
    oracle::LossGapInstance inst;
    inst.theta1 = {0.7, 0.3, 0.4};
    inst.hat1 = {0.6, 0.4, 0.5};
    inst.hat2 = inst.hat1;
    inst.delta1 = 0.2;
    CHECK(oracle::exact_loss_gap(inst) == doctest::Approx(0.0));
  }

  SUBCASE("exact first estimate turns the gap into the squared distance") {
    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
      auto inst = oracle::random_loss_gap_instance(4, rng);
      inst.hat1 = inst.theta1;
      inst.delta1 = 0.0;
      double dist2 = 0.0;
      for (std::size_t i = 0; i < inst.hat1.size(); ++i) {
        const double d = inst.hat1[i] - inst.hat2[i];
        dist2 += d * d;
      }
      CHECK(oracle::exact_loss_gap(inst) == doctest::Approx(dist2).epsilon(1e-10));
    }
  }

  SUBCASE("enumeration weights sum to one") {
    Rng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
      const auto inst = oracle::random_loss_gap_instance(5, rng);
      CHECK(oracle::enumeration_mass(inst) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  SUBCASE("instances satisfy their own radius hypothesis") {
    Rng rng(7);
    for (int trial = 0; trial < 100; ++trial) {
      const auto inst = oracle::random_loss_gap_instance(6, rng);
      double dist = 0.0;
      for (std::size_t i = 0; i < inst.theta1.size(); ++i) {
        const double d = inst.theta1[i] - inst.hat1[i];
        dist += d * d;
      }
      CHECK(std::sqrt(dist) <= inst.delta1 + 1e-12);
    }
  }
}

TEST_CASE("reference plan closed forms") {
  const Mdp one(1, 1, {1.0}, {1.0}, 0.95);
  CHECK(oracle::reference_plan(one).value.values[0] ==
        doctest::Approx(20.0).epsilon(1e-9));

  const Mdp zero(2, 2, {1, 0, 0, 1, 0, 1, 1, 0}, {0, 0, 0, 0}, 0.9);
  const auto plan = oracle::reference_plan(zero);
  CHECK(plan.value.values[0] == doctest::Approx(0.0));
  CHECK(plan.value.values[1] == doctest::Approx(0.0));
}

TEST_CASE("exhaustive search picks the best arm and breaks ties low") {
  SUBCASE("two-armed single state") {
    const Mdp bandit(1, 2, {1.0, 1.0}, {0.2, 0.9}, 0.5);
    const auto best = oracle::exhaustive_policy_search(bandit, 0);
    CHECK(best.policy.actions[0] == 1);
    CHECK(best.value.values[0] == doctest::Approx(1.8).epsilon(1e-9));
  }
  SUBCASE("identical rewards keep the lexicographically smallest policy") {
    const Mdp flat(2, 2, {1, 0, 1, 0, 0, 1, 0, 1}, {0.4, 0.4, 0.4, 0.4}, 0.5);
    const auto best = oracle::exhaustive_policy_search(flat, 0);
    CHECK(best.policy.actions == std::vector<int>{0, 0});
  }
  SUBCASE("instances beyond the enumeration budget are rejected") {
    Rng rng(9);
    const Mdp big = oracle::random_mdp(13, 2, 0.9, rng);  // 2^13 > 4096
    CHECK_THROWS_AS(oracle::exhaustive_policy_search(big, 0), std::invalid_argument);
  }
  SUBCASE("agrees with the reference plan on random tiny MDPs") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
      const Mdp mdp = oracle::random_mdp(3, 2, 0.9, rng);
      const auto brute = oracle::exhaustive_policy_search(mdp, 0);
      const auto ref = oracle::reference_plan(mdp);
      for (int s = 0; s < 3; ++s)
        CHECK(brute.value.values[s] == doctest::Approx(ref.value.values[s]).epsilon(1e-6));
    }
  }
}

TEST_CASE("first passage oracle closed forms") {
  SUBCASE("deterministic chain") {
    // 0 -> 1 -> 2 absorbing at 2.
    const Mdp chain(3, 1, {0, 1, 0, 0, 0, 1, 0, 0, 1}, {0, 0, 0}, 0.9);
    const auto h = oracle::first_passage_times(chain, 2);
    CHECK(h[0] == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(h[1] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(h[2] == doctest::Approx(0.0));
  }
  SUBCASE("geometric escape from a sticky state") {
    // stay with 0.95, reach target with 0.05: expected time 20.
    const Mdp sticky(2, 1, {0.95, 0.05, 0.0, 1.0}, {0, 0}, 0.9);
    const auto h = oracle::first_passage_times(sticky, 1);
    CHECK(h[0] == doctest::Approx(20.0).epsilon(1e-9));
  }
  SUBCASE("unreachable targets are infinite") {
    const Mdp split(2, 1, {1.0, 0.0, 0.0, 1.0}, {0, 0}, 0.9);
    const auto h = oracle::first_passage_times(split, 1);
    CHECK(std::isinf(h[0]));
  }
}
