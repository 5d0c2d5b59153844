#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "uailab/bayes.hpp"
#include "uailab/distribution.hpp"
#include "uailab/errors.hpp"
#include "uailab/planner.hpp"

using namespace uailab;

namespace {

double q_of(const EnvironmentClass& c, ActionId a, PlanningParams p, const History& h = {}) {
  return optimal_q(MixtureBelief::prior_of(c), c, h, a, p);
}

}  // namespace

TEST_CASE("one pull of a known Bernoulli(0.9) arm") {
  EnvironmentClass c({bernoulli_bandit({0.9, 0.2})});
  CHECK(q_of(c, ActionId{0}, {1, 0.9}) == doctest::Approx(0.9).epsilon(1e-15));
}

TEST_CASE("empty horizon leaf is zero") {
  EnvironmentClass c({bernoulli_bandit({0.9, 0.2})});
  MixtureState s(c, MixtureBelief::prior_of(c), History{});
  CHECK(optimal_value_at_depth(s, 0, 0.9) == 0.0);
}

TEST_CASE("deterministic two-arm env, m = 2, gamma = 0.5") {
  EnvironmentClass c({deterministic_chain({{0, 0}}, {{1.0, 0.0}})});
  CHECK(q_of(c, ActionId{0}, {2, 0.5}) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(q_of(c, ActionId{1}, {2, 0.5}) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(aixi_action(MixtureBelief::prior_of(c), c, History{}, {2, 0.5}) == ActionId{0});
}

TEST_CASE("value is the max over actions, ties go to the lowest index") {
  EnvironmentClass c({bernoulli_bandit({0.9, 0.1})});
  const auto b = MixtureBelief::prior_of(c);
  CHECK(optimal_value(b, c, History{}, {1, 0.5}) == q_of(c, ActionId{0}, {1, 0.5}));
  EnvironmentClass flat({bernoulli_bandit({0.4, 0.4, 0.4})});
  const auto q = optimal_q_values(MixtureBelief::prior_of(flat), flat, History{}, {3, 0.7});
  CHECK(q[0] == q[1]);
  CHECK(q[1] == q[2]);
  CHECK(optimal_value(MixtureBelief::prior_of(flat), flat, History{}, {3, 0.7}) == q[0]);
  CHECK(aixi_action(MixtureBelief::prior_of(flat), flat, History{}, {3, 0.7}) == ActionId{0});
  const std::vector<double> manual{0.2, 0.9};
  CHECK(greedy_action(manual) == ActionId{1});
}

TEST_CASE("expectimax equals the trajectory-tree oracle") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const int A = 1 + trial % 3;
    const int E = 1 + (trial / 3) % 3;
    const int m = 1 + (trial / 9) % 3;
    const double gamma = 0.3 + 0.1 * (trial % 6);
    const auto c = oracle::random_class(rng, 1 + trial % 3, A, E, 3);
    const PlanningParams p{m, gamma};
    const auto b = MixtureBelief::prior_of(c);
    const auto q = optimal_q_values(b, c, History{}, p);
    double best = -1.0;
    for (int a = 0; a < A; ++a) {
      const double expected = oracle::expectimax_q(c, History{}, ActionId{a}, m, gamma);
      CHECK(std::abs(q[a] - expected) < 1e-9);
      best = std::max(best, expected);
      CHECK(q[a] >= -1e-12);
      CHECK(q[a] <= (1.0 - std::pow(gamma, m)) / (1.0 - gamma) + 1e-12);
    }
    CHECK(std::abs(optimal_value(b, c, History{}, p) - best) < 1e-9);
  }
}

TEST_CASE("expectimax equals the best closed-loop policy tree") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 12; ++trial) {
    const int A = 2 + trial % 2;
    const int E = 2;
    const auto c = oracle::random_class(rng, 2, A, E, 2);
    const PlanningParams p{2, 0.8};
    const double v = optimal_value(MixtureBelief::prior_of(c), c, History{}, p);
    CHECK(std::abs(v - oracle::policy_tree_value(c, 2, 0.8)) < 1e-9);
  }
}

TEST_CASE("expectimax from a nonempty history") {
  std::mt19937_64 rng(17);
  const auto c = oracle::random_class(rng, 3, 2, 2, 3);
  History h = History{}.extended(ActionId{1}, c.percepts()[0]).extended(ActionId{0},
                                                                          c.percepts()[1]);
  const auto b = posterior_update(
      posterior_update(MixtureBelief::prior_of(c), c, History{}, ActionId{1}, c.percepts()[0]),
      c, h.prefix(1), ActionId{0}, c.percepts()[1]);
  for (int a = 0; a < 2; ++a) {
    CHECK(std::abs(optimal_q(b, c, h, ActionId{a}, {3, 0.6}) -
                   oracle::expectimax_q(c, h, ActionId{a}, 3, 0.6)) < 1e-9);
  }
}

TEST_CASE("softmax policy") {
  const auto flat = softmax_policy(std::vector<double>{0.3, 0.3, 0.3, 0.3});
  for (double x : flat) CHECK(x == doctest::Approx(0.25).epsilon(1e-15));
  const auto two = softmax_policy(std::vector<double>{std::log(2.0), 0.0});
  CHECK(two[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(two[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  const auto big = softmax_policy(std::vector<double>{1000.0, 999.0});
  CHECK(is_distribution(big));
}

TEST_CASE("softmax preserves argmax on random tables") {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> coarse(0, 4);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> q(1 + trial % 6);
    for (auto& x : q) x = 0.25 * coarse(rng);  // coarse grid forces exact ties
    const auto p = softmax_policy(q);
    CHECK(is_distribution(p));
    CHECK(argmax_lowest(p) == argmax_lowest(q));
  }
}

TEST_CASE("AIXI loss") {
  CHECK(aixi_loss(std::vector<double>{0.5, 0.5}) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(aixi_loss(std::vector<double>{0.0, 1.0, 0.0}) == 0.0);
  const double direct = -(2.0 / 3.0) * std::log(2.0 / 3.0) - (1.0 / 3.0) * std::log(1.0 / 3.0);
  CHECK(std::abs(aixi_loss(std::vector<double>{2.0 / 3.0, 1.0 / 3.0}) - direct) < 1e-12);
}

TEST_CASE("planning parameters are validated") {
  CHECK_THROWS_AS((PlanningParams{0, 0.5}.validate()), ConfigError);
  CHECK_THROWS_AS((PlanningParams{2, 1.0}.validate()), ConfigError);
  CHECK_THROWS_AS((PlanningParams{2, -0.1}.validate()), ConfigError);
  CHECK_NOTHROW((PlanningParams{1, 0.0}.validate()));
}

TEST_CASE("state bonus enters as an additive reward at successors") {
  // One model, one state, constant bonus b: Q gains b (1 + gamma + ... ) over m steps.
  EnvironmentClass c({bernoulli_bandit({0.5, 0.5})});
  StateBonus bonus{{{0.2}}};
  const auto b = MixtureBelief::prior_of(c);
  const double plain = optimal_q(b, c, History{}, ActionId{0}, {3, 0.5});
  const double with = optimal_q(b, c, History{}, ActionId{0}, {3, 0.5}, bonus);
  CHECK(with - plain == doctest::Approx(0.2 * (1 + 0.5 + 0.25)).epsilon(1e-12));
}
