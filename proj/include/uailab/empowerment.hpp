#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "uailab/bayes.hpp"
#include "uailab/env.hpp"

namespace uailab {

using ActionSequence = std::vector<ActionId>;
using PerceptBlock = std::vector<Percept>;
using InputDistribution = std::vector<double>;

// Joint-entry guard for every k-step enumeration: A^k * E^k.
inline constexpr double kEnumerationLimit = 1e6;

// Row-stochastic P(o | z) from k-step action sequences to percept blocks.
class Channel {
 public:
  Channel(std::vector<ActionSequence> inputs, std::vector<PerceptBlock> outputs,
          std::vector<double> matrix);

  std::size_t num_inputs() const { return inputs_.size(); }
  std::size_t num_outputs() const { return outputs_.size(); }
  const std::vector<ActionSequence>& inputs() const { return inputs_; }
  const std::vector<PerceptBlock>& outputs() const { return outputs_; }

  double operator()(std::size_t z, std::size_t o) const { return matrix_[z * outputs_.size() + o]; }
  std::span<const double> row(std::size_t z) const {
    return {matrix_.data() + z * outputs_.size(), outputs_.size()};
  }

  // Number of pairwise-distinct rows (max abs difference > tol).
  std::size_t distinct_rows(double tol = 1e-12) const;

 private:
  std::vector<ActionSequence> inputs_;
  std::vector<PerceptBlock> outputs_;
  std::vector<double> matrix_;
};

// Inputs are all A^k sequences in lexicographic order; outputs are the
// percept blocks reachable from at least one input.
Channel build_channel(const EnvironmentModel& model, const History& h, int k);
Channel build_channel(const EnvironmentModel& model, int machine_state, int k);
// Bayes-adaptive: the belief is updated along each rollout.
Channel build_channel(const MixtureBelief& b, const EnvironmentClass& c, const History& h, int k);
Channel build_channel(const MixtureState& s, int k);

// Channels not derived from an environment; inputs are length-1 sequences
// and outputs synthetic single-percept blocks.
Channel channel_from_matrix(const std::vector<std::vector<double>>& rows);
Channel binary_symmetric_channel(double crossover);
Channel noiseless_channel(int size);

double mutual_information(const Channel& ch, std::span<const double> p);

struct EmpowermentResult {
  double capacity = 0.0;          // nats
  InputDistribution optimal_input;
  int iterations = 0;
  double residual = 0.0;          // upper - lower capacity bound at exit
  std::vector<double> objective;  // I(p_t) per iteration
};

// Alternating maximization started at the uniform input. Stops when the
// upper bound max_z KL(P(.|z) || q) and the lower bound I(p) differ by < tol.
// Throws ConvergenceError (carrying both bounds) after max_iter iterations.
EmpowermentResult channel_capacity(const Channel& ch, double tol = 1e-9, int max_iter = 10000);

// q(z | o) for every output block of a channel.
class Decoder {
 public:
  // rows[o] is a distribution over the channel's inputs.
  explicit Decoder(std::vector<std::vector<double>> rows);

  std::size_t num_outputs() const { return rows_.size(); }
  double operator()(std::size_t z, std::size_t o) const { return rows_[o][z]; }
  const std::vector<double>& row(std::size_t o) const { return rows_[o]; }

 private:
  std::vector<std::vector<double>> rows_;
};

// Exact posterior p(z | o) ∝ p(z) P(o | z); unreachable outputs get a
// uniform row.
Decoder bayes_posterior(const Channel& ch, std::span<const double> p);

// E_{p(z) P(o|z)}[ln q(z | o) - ln p(z)]. Throws SupportError if q is zero
// on a point with positive mass.
double variational_empowerment(const Channel& ch, std::span<const double> p, const Decoder& q);

// History -> distribution over actions. Used for the optimal policy pi* and
// the mixture policy zeta evaluated at hypothetical future histories.
using ActionLaw = std::function<std::vector<double>(const History&)>;

// prod_i law(a_{t+i} | h_{<t+i}) along the history interleaving z and o.
double product_policy_prob(const ActionLaw& law, const History& h, const ActionSequence& z,
                           const PerceptBlock& o);

// Full enumeration of the joint p(z, o) generated by acting with pi* for k
// steps from h while percepts come from the (Bayes-adaptive) environment.
struct JointEntry {
  std::size_t input = 0;   // index into JointTable::inputs
  std::size_t output = 0;  // index into JointTable::outputs
  double prob = 0.0;
  double log_pi_star = 0.0;  // ln prod_i pi*(a_i | h_i)
  double log_zeta = 0.0;     // ln prod_i zeta(a_i | h_i); -inf if zeta is zero
};

struct JointTable {
  std::vector<ActionSequence> inputs;   // all A^k sequences
  std::vector<PerceptBlock> outputs;    // all E^k blocks
  std::vector<JointEntry> entries;      // positive-probability points only
  std::vector<double> input_marginal;   // p(z | h)
  std::vector<double> output_marginal;  // p(o | h)
  double expected_kl_sum = 0.0;         // E[sum_i KL(pi*_i || zeta_i)], node-wise
};

JointTable enumerate_joint(const MixtureState& root, const History& h, int k,
                           const ActionLaw& pi_star, const ActionLaw& zeta);

struct DecompositionReport {
  double kl_sum_term = 0.0;
  double pseudo_mi = 0.0;                 // E[ln prod pi* - ln p(z)]
  double true_mi = 0.0;                   // I(z; o) with the Bayes posterior
  double variational_empowerment = 0.0;   // E[ln prod zeta - ln p(z)]
  double residual_identity = 0.0;         // |VE - (-kl_sum_term + pseudo_mi)|
};

DecompositionReport decomposition_report(const JointTable& joint);
DecompositionReport decomposition_report(const MixtureState& env, const History& h, int k,
                                         const ActionLaw& pi_star, const ActionLaw& zeta);
DecompositionReport decomposition_report(const EnvironmentModel& env, const History& h, int k,
                                         const ActionLaw& pi_star, const ActionLaw& zeta);

void check_enumeration_size(int num_actions, int num_percepts, int k);

}  // namespace uailab
