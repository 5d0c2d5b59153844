#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include "doctest.h"
#include "laws.hpp"
#include "oracles.hpp"
#include "uailab/bayes.hpp"
#include "uailab/empowerment.hpp"
#include "uailab/errors.hpp"
#include "uailab/free_energy.hpp"

using namespace uailab;

namespace {

// q(o | z) = p(z, o) / p(z): the observational conditional of the joint.
OutputModel conditional_of(const JointTable& joint) {
  auto rows = std::make_shared<std::vector<std::vector<double>>>(
      joint.inputs.size(), std::vector<double>(joint.outputs.size(), 0.0));
  for (const auto& e : joint.entries) {
    (*rows)[e.input][e.output] = e.prob / joint.input_marginal[e.input];
  }
  auto inputs = std::make_shared<std::vector<ActionSequence>>(joint.inputs);
  auto outputs = std::make_shared<std::vector<PerceptBlock>>(joint.outputs);
  return [=](const ActionSequence& z, const PerceptBlock& o) {
    const auto zi = std::find(inputs->begin(), inputs->end(), z) - inputs->begin();
    const auto oi = std::find(outputs->begin(), outputs->end(), o) - outputs->begin();
    return (*rows)[zi][oi];
  };
}

}  // namespace

TEST_CASE("matching world model gives zero joint KL") {
  std::mt19937_64 rng(90);
  for (int trial = 0; trial < 10; ++trial) {
    const auto c = oracle::random_class(rng, 2, 2, 3, 2);
    const MixtureState s(c, MixtureBelief::prior_of(c), History{});
    const oracle::TableLaw pi(rng, 2, 3, 3, 0.3), zeta(rng, 2, 3, 3, 0.0, 1e-6);
    const auto joint = enumerate_joint(s, History{}, 2, pi, zeta);
    const auto r = free_energy_report(joint, conditional_of(joint));
    CHECK(std::abs(r.true_joint_kl) < 1e-12);
    CHECK(r.predictive_error >= 0.0);
    CHECK(std::abs(r.sum - (r.predictive_error + r.fep_regularization)) < 1e-12);
    CHECK(std::abs(r.approx_residual - std::abs(r.sum - r.true_joint_kl)) < 1e-12);
  }
}

TEST_CASE("for open-loop laws the channel is the observational conditional") {
  std::mt19937_64 rng(93);
  for (int trial = 0; trial < 10; ++trial) {
    const auto c = oracle::random_class(rng, 2, 2, 3, 2);
    const MixtureState s(c, MixtureBelief::prior_of(c), History{});
    // Depends on the step index only, never on percepts.
    const auto per_step = std::make_shared<std::vector<std::vector<double>>>();
    for (int i = 0; i < 2; ++i) per_step->push_back(oracle::random_distribution(rng, 2, 0.3));
    const ActionLaw open_loop = [per_step](const History& h) { return (*per_step)[h.size()]; };
    const auto q = output_model_from_channel(build_channel(s, 2));
    const auto r = free_energy_report(s, History{}, 2, open_loop, [](const History&) {
      return std::vector<double>{0.5, 0.5};
    }, q);
    CHECK(std::abs(r.true_joint_kl) < 1e-12);
  }
}

TEST_CASE("deterministic env with a matching model has no surprise") {
  const auto env = deterministic_chain({{1, 0}, {0, 1}}, {{1, 0}, {0.5, 1}});
  const auto law = [](const History&) { return std::vector<double>{0.5, 0.5}; };
  const auto q = output_model_from_channel(build_channel(env, History{}, 2));
  const auto r = free_energy_report(env, History{}, 2, law, law, q);
  CHECK(r.predictive_error == doctest::Approx(0.0));
  CHECK(std::abs(r.true_joint_kl) < 1e-12);
}

TEST_CASE("free-energy fields match the brute-force oracle") {
  std::mt19937_64 rng(91);
  for (int trial = 0; trial < 30; ++trial) {
    const int A = 2 + trial % 2, E = 2 + (trial / 2) % 2, k = 1 + trial % 2;
    const auto c = oracle::random_class(rng, 2, A, E, 2);
    const MixtureState s(c, MixtureBelief::prior_of(c), History{});
    const oracle::TableLaw pi(rng, A, k + 1, E, 0.3), zeta(rng, A, k + 1, E, 0.0, 1e-6);
    // A deliberately wrong world model: another random class's channel, floored.
    const auto other = oracle::random_class(rng, 1, A, E, 2);
    const auto other_ch = build_channel(other.model(0), History{}, k);
    const auto q_raw = output_model_from_channel(other_ch);
    const double blocks = std::pow(E, k);
    const OutputModel q = [&](const ActionSequence& z, const PerceptBlock& o) {
      return 0.9 * q_raw(z, o) + 0.1 / blocks;
    };
    const auto r = free_energy_report(s, History{}, k, pi, zeta, q);
    const auto expected = oracle::joint_oracle(c, History{}, k, pi, zeta, q);
    CHECK(std::abs(r.predictive_error - expected.predictive_error) < 1e-9);
    CHECK(std::abs(r.fep_regularization - expected.fep_regularization) < 1e-9);
    CHECK(std::abs(r.true_joint_kl - expected.true_joint_kl) < 1e-9);
    CHECK(r.true_joint_kl >= 0.0);
    CHECK(r.reverse_joint_kl >= 0.0);
  }
}

TEST_CASE("zero world-model probability on the support is an error") {
  const auto env = bernoulli_bandit({0.5, 0.5});
  const auto law = [](const History&) { return std::vector<double>{0.5, 0.5}; };
  const OutputModel q = [](const ActionSequence&, const PerceptBlock& o) {
    return o[0].observation == 1 ? 1.0 : 0.0;
  };
  CHECK_THROWS_AS(free_energy_report(env, History{}, 1, law, law, q), SupportError);
  const OutputModel bad = [](const ActionSequence&, const PerceptBlock&) { return 0.7; };
  CHECK_THROWS_AS(free_energy_report(env, History{}, 1, law, law, bad), ConfigError);
}

TEST_CASE("regularization decomposition") {
  std::mt19937_64 rng(92);
  for (int trial = 0; trial < 30; ++trial) {
    const int A = 2 + trial % 2, E = 2 + (trial / 2) % 2, k = 1 + trial % 2;
    const auto env = oracle::random_model(rng, A, E, 3, 0.2);
    const oracle::TableLaw pi(rng, A, k + 1, E, 0.3), zeta(rng, A, k + 1, E, 0.0, 1e-6);
    const auto r = regularization_decomposition(env, History{}, k, pi, zeta);
    CHECK(r.residual_decomposition < 1e-9);
    CHECK(r.residual_sign_flip < 1e-9);
    CHECK(r.decomposition.residual_identity < 1e-9);
  }
  const auto env = oracle::random_model(rng, 2, 2, 2);
  const oracle::TableLaw law(rng, 2, 3, 2, 0.0, 1e-6);
  const auto same = regularization_decomposition(env, History{}, 2, law, law);
  CHECK(std::abs(same.fep_regularization + same.decomposition.pseudo_mi) < 1e-12);
}
