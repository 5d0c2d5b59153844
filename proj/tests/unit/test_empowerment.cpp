#include <cmath>
#include <random>

#include "doctest.h"
#include "laws.hpp"
#include "oracles.hpp"
#include "uailab/bayes.hpp"
#include "uailab/distribution.hpp"
#include "uailab/empowerment.hpp"
#include "uailab/errors.hpp"
#include "uailab/self_aixi.hpp"

using namespace uailab;

namespace {

std::vector<std::vector<double>> rows_of(const Channel& ch) {
  std::vector<std::vector<double>> rows;
  for (std::size_t z = 0; z < ch.num_inputs(); ++z) {
    rows.emplace_back(ch.row(z).begin(), ch.row(z).end());
  }
  return rows;
}

}  // namespace

TEST_CASE("deterministic env gives an identity channel") {
  const auto env = deterministic_chain({{0, 1}, {0, 1}}, {{0, 0}, {0, 0}});
  const auto ch = build_channel(env, History{}, 1);
  REQUIRE(ch.num_inputs() == 2);
  REQUIRE(ch.num_outputs() == 2);
  CHECK(ch(0, 0) == 1.0);
  CHECK(ch(0, 1) == 0.0);
  CHECK(ch(1, 1) == 1.0);
  CHECK(ch(1, 0) == 0.0);
}

TEST_CASE("action-independent env gives equal rows") {
  const auto env = bernoulli_bandit({0.3, 0.3, 0.3});
  const auto ch = build_channel(env, History{}, 2);
  CHECK(ch.num_inputs() == 9);
  CHECK(ch.distinct_rows() == 1);
  CHECK(channel_capacity(ch).capacity < 1e-9);
}

TEST_CASE("two-room channels from each room") {
  const auto env = two_room(TwoRoomParams{4, 1, 0.5, 0.5});
  CHECK(build_channel(env, kTwoRoomHigh, 1).distinct_rows() == 4);
  CHECK(build_channel(env, kTwoRoomLow, 1).distinct_rows() == 1);
  CHECK(channel_capacity(build_channel(env, kTwoRoomHigh, 1)).capacity ==
        doctest::Approx(std::log(4.0)).epsilon(1e-9));
  CHECK(channel_capacity(build_channel(env, kTwoRoomLow, 1)).capacity < 1e-12);
}

TEST_CASE("channel rows follow the k-step product of percept laws") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const auto c = oracle::random_class(rng, 2, 2, 2, 3);
    const auto ch = build_channel(MixtureBelief::prior_of(c), c, History{}, 2);
    for (std::size_t z = 0; z < ch.num_inputs(); ++z) {
      CHECK(is_distribution(ch.row(z)));
      for (std::size_t o = 0; o < ch.num_outputs(); ++o) {
        History h;
        for (int i = 0; i < 2; ++i) h = h.extended(ch.inputs()[z][i], ch.outputs()[o][i]);
        History actions_only;
        // P(o | z) = xi(o_1 o_2 | z) via batch joint probability.
        CHECK(std::abs(ch(z, o) - oracle::mixture_history_prob(c, h)) < 1e-12);
      }
    }
  }
}

TEST_CASE("enumeration guard") {
  const auto env = noisy_grid(NoisyGridParams{3, 0.1});
  CHECK_THROWS_AS(build_channel(env, History{}, 6), SizeError);
  CHECK_THROWS_AS(build_channel(env, History{}, 0), ConfigError);
  CHECK_NOTHROW(check_enumeration_size(4, 9, 2));
}

TEST_CASE("mutual information examples") {
  const auto id = noiseless_channel(3);
  CHECK(mutual_information(id, uniform(3)) == doctest::Approx(std::log(3.0)).epsilon(1e-15));
  const auto constant = channel_from_matrix({{0.2, 0.8}, {0.2, 0.8}});
  CHECK(mutual_information(constant, std::vector<double>{0.7, 0.3}) == doctest::Approx(0.0));
  const double bsc = std::log(2.0) + 0.1 * std::log(0.1) + 0.9 * std::log(0.9);
  CHECK(mutual_information(binary_symmetric_channel(0.1), uniform(2)) ==
        doctest::Approx(bsc).epsilon(1e-14));
  CHECK(bsc == doctest::Approx(0.368064).epsilon(1e-6));
}

TEST_CASE("capacity examples") {
  const auto four = channel_capacity(noiseless_channel(4));
  CHECK(std::abs(four.capacity - std::log(4.0)) < 1e-9);
  const auto bsc = channel_capacity(binary_symmetric_channel(0.1));
  CHECK(std::abs(bsc.capacity - 0.368064) < 1e-4);
  CHECK(bsc.residual < 1e-9);
}

TEST_CASE("capacity of random 2-input channels matches a grid search") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const int outs = 2 + trial % 3;
    std::vector<std::vector<double>> rows{oracle::random_distribution(rng, outs, 0.2),
                                          oracle::random_distribution(rng, outs, 0.2)};
    const auto result = channel_capacity(channel_from_matrix(rows));
    CHECK(std::abs(result.capacity - oracle::grid_capacity_two_inputs(rows, 1e-4)) < 1e-5);
  }
}

TEST_CASE("capacity bounds and monotone objective") {
  std::mt19937_64 rng(78);
  for (int trial = 0; trial < 30; ++trial) {
    const int ins = 2 + trial % 4, outs = 2 + trial % 3;
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < ins; ++i) rows.push_back(oracle::random_distribution(rng, outs, 0.3));
    const auto ch = channel_from_matrix(rows);
    const auto r = channel_capacity(ch);
    CHECK(r.capacity >= 0.0);
    CHECK(r.capacity <= std::min(std::log(ins), std::log(outs)) + 1e-9);
    for (std::size_t i = 1; i < r.objective.size(); ++i) {
      CHECK(r.objective[i] >= r.objective[i - 1] - 1e-12);
    }
    CHECK(mutual_information(ch, r.optimal_input) >= r.capacity - 1e-9);
    for (int j = 0; j < 10; ++j) {
      CHECK(mutual_information(ch, oracle::random_distribution(rng, ins, 0.3)) <=
            r.capacity + 1e-9);
    }
  }
}

TEST_CASE("near-identical rows still converge") {
  const auto ch = channel_from_matrix({{0.5 + 1e-4, 0.5 - 1e-4}, {0.5 - 1e-4, 0.5 + 1e-4}});
  const auto r = channel_capacity(ch);
  CHECK(std::abs(r.capacity - oracle::grid_capacity_two_inputs(rows_of(ch), 1e-3)) < 1e-9);
}

TEST_CASE("non-convergence reports both bounds") {
  try {
    channel_capacity(channel_from_matrix({{0.9, 0.1}, {0.4, 0.6}, {0.2, 0.8}}), 1e-12, 1);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.lower_bound() <= e.upper_bound());
    CHECK(e.lower_bound() >= 0.0);
  }
}

TEST_CASE("variational empowerment") {
  const auto id = noiseless_channel(2);
  const auto p = uniform(2);
  CHECK(variational_empowerment(id, p, bayes_posterior(id, p)) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-15));

  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 3; ++i) rows.push_back(oracle::random_distribution(rng, 3, 0.2));
    const auto ch = channel_from_matrix(rows);
    const auto px = oracle::random_distribution(rng, 3);
    const double mi = mutual_information(ch, px);
    CHECK(std::abs(variational_empowerment(ch, px, bayes_posterior(ch, px)) - mi) < 1e-12);
    for (int j = 0; j < 20; ++j) {
      std::vector<std::vector<double>> dec;
      for (std::size_t o = 0; o < ch.num_outputs(); ++o) dec.push_back(oracle::random_distribution(rng, 3));
      CHECK(variational_empowerment(ch, px, Decoder(dec)) <= mi + 1e-9);
    }
  }
  const auto bsc = binary_symmetric_channel(0.2);
  CHECK_THROWS_AS(variational_empowerment(bsc, p, Decoder({{1.0, 0.0}, {0.0, 1.0}})), SupportError);
}

TEST_CASE("policy products") {
  const auto deterministic = [](const History&) { return std::vector<double>{0.0, 1.0}; };
  const ActionSequence z{ActionId{1}, ActionId{1}};
  const PerceptBlock o{{0, 0.0}, {1, 1.0}};
  CHECK(product_policy_prob(deterministic, History{}, z, o) == 1.0);
  const auto flat = [](const History&) { return std::vector<double>{0.5, 0.5}; };
  CHECK(product_policy_prob(flat, History{}, {ActionId{0}, ActionId{1}}, o) == 0.25);

  std::mt19937_64 rng(3);
  const oracle::TableLaw law(rng, 3, 4, 2, 0.0);
  const ActionSequence z3{ActionId{2}, ActionId{0}, ActionId{1}};
  const PerceptBlock o3{{1, 0.0}, {0, 0.0}, {1, 1.0}};
  History h;
  double expected = 1.0;
  for (int i = 0; i < 3; ++i) {
    expected *= law(h)[z3[i].index];
    h = h.extended(z3[i], o3[i]);
  }
  CHECK(std::abs(product_policy_prob(law, History{}, z3, o3) - expected) < 1e-12);
}

TEST_CASE("decomposition report against the brute-force joint") {
  std::mt19937_64 rng(55);
  for (int trial = 0; trial < 40; ++trial) {
    const int A = 2 + trial % 2, E = 2 + (trial / 2) % 2, k = 1 + trial % 2;
    const auto c = oracle::random_class(rng, 1 + trial % 3, A, E, 3);
    const oracle::TableLaw pi_star(rng, A, k + 1, E, 0.4);
    const oracle::TableLaw zeta(rng, A, k + 1, E, 0.0, 1e-6);
    const MixtureState s(c, MixtureBelief::prior_of(c), History{});
    const auto report = decomposition_report(s, History{}, k, pi_star, zeta);
    const auto expected = oracle::joint_oracle(c, History{}, k, pi_star, zeta);
    CHECK(std::abs(report.kl_sum_term - expected.kl_sum_term) < 1e-9);
    CHECK(std::abs(report.pseudo_mi - expected.pseudo_mi) < 1e-9);
    CHECK(std::abs(report.true_mi - expected.true_mi) < 1e-9);
    CHECK(std::abs(report.variational_empowerment - expected.variational_empowerment) < 1e-9);
    CHECK(report.residual_identity < 1e-9);
    CHECK(report.pseudo_mi <= report.true_mi + 1e-9);
  }
}

TEST_CASE("zeta = pi* collapses the KL sum") {
  std::mt19937_64 rng(56);
  const auto env = oracle::random_model(rng, 2, 3, 2);
  const oracle::TableLaw law(rng, 2, 3, 3, 0.0, 1e-6);
  const auto report = decomposition_report(env, History{}, 2, law, law);
  CHECK(std::abs(report.kl_sum_term) < 1e-15);
  CHECK(std::abs(report.variational_empowerment - report.pseudo_mi) < 1e-12);
}
