#pragma once

#include <span>
#include <vector>

#include "uailab/env.hpp"

namespace uailab {

// Posterior weights w(nu | h) over an EnvironmentClass. Held in log space so
// that long runs do not underflow; weights() is the normalized linear view.
class MixtureBelief {
 public:
  explicit MixtureBelief(std::vector<double> weights);

  static MixtureBelief prior_of(const EnvironmentClass& c) { return MixtureBelief(c.prior()); }
  // Normalizes; entries may be -inf. Throws ImpossibleEvidenceError if all are.
  static MixtureBelief from_log_weights(std::vector<double> log_weights);

  std::size_t size() const { return weights_.size(); }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& log_weights() const { return log_weights_; }
  double operator[](std::size_t i) const { return weights_[i]; }

 private:
  MixtureBelief() = default;

  std::vector<double> log_weights_;
  std::vector<double> weights_;
};

// w'(nu) ∝ w(nu) nu(e | h, a). Throws ImpossibleEvidenceError when every
// hypothesis assigns e probability zero, ConfigError on misalignment.
MixtureBelief posterior_update(const MixtureBelief& b, const EnvironmentClass& c,
                               const History& h, ActionId a, const Percept& e);

// xi(e | h, a) = sum_nu w(nu) nu(e | h, a).
double mixture_percept_prob(const MixtureBelief& b, const EnvironmentClass& c,
                            const History& h, ActionId a, const Percept& e);

std::vector<double> mixture_percept_distribution(const MixtureBelief& b,
                                                 const EnvironmentClass& c,
                                                 const History& h, ActionId a);

// A belief together with each model's machine state at the end of some
// history. Lets recursive consumers (planner, channel builder) step forward
// in O(|class|) instead of replaying the history. The class must outlive it.
class MixtureState {
 public:
  MixtureState(const EnvironmentClass& c, MixtureBelief b, const History& h);
  MixtureState(const EnvironmentClass& c, MixtureBelief b, std::vector<int> states);

  const EnvironmentClass& env_class() const { return *class_; }
  const MixtureBelief& belief() const { return belief_; }
  const std::vector<int>& states() const { return states_; }

  // xi(. | h, a) written into `out` (size = number of percepts).
  void predictive(ActionId a, std::span<double> out) const;
  std::vector<double> predictive(ActionId a) const;

  // Bayes-updated state after (a, e). Throws ImpossibleEvidenceError if e
  // has probability zero under every model with positive weight.
  MixtureState advanced(ActionId a, int percept_index) const;

 private:
  const EnvironmentClass* class_;
  MixtureBelief belief_;
  std::vector<int> states_;
};

}  // namespace uailab
