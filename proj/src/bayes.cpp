#include "uailab/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "uailab/distribution.hpp"
#include "uailab/errors.hpp"

namespace uailab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_aligned(const MixtureBelief& b, const EnvironmentClass& c) {
  if (b.size() != c.size()) {
    throw ConfigError("mixture belief has " + std::to_string(b.size()) +
                      " weights but the class has " + std::to_string(c.size()) + " models");
  }
}

int percept_index_or_throw(const EnvironmentClass& c, const Percept& e) {
  const auto idx = c.model(0).percept_index(e);
  if (!idx) throw ConfigError("percept outside the class's percept alphabet");
  return *idx;
}

}  // namespace

MixtureBelief::MixtureBelief(std::vector<double> weights) : weights_(std::move(weights)) {
  require_distribution(weights_, "mixture belief");
  log_weights_.resize(weights_.size());
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    log_weights_[i] = weights_[i] > 0.0 ? std::log(weights_[i]) : kNegInf;
  }
}

MixtureBelief MixtureBelief::from_log_weights(std::vector<double> log_weights) {
  const double norm = log_sum_exp(log_weights);
  if (!std::isfinite(norm)) {
    throw ImpossibleEvidenceError("evidence has probability zero under every hypothesis");
  }
  MixtureBelief b;
  b.log_weights_ = std::move(log_weights);
  b.weights_.resize(b.log_weights_.size());
  for (std::size_t i = 0; i < b.log_weights_.size(); ++i) {
    b.log_weights_[i] -= norm;
    b.weights_[i] = std::exp(b.log_weights_[i]);
  }
  return b;
}

MixtureBelief posterior_update(const MixtureBelief& b, const EnvironmentClass& c,
                               const History& h, ActionId a, const Percept& e) {
  check_aligned(b, c);
  c.model(0).check_action(a);
  const int idx = percept_index_or_throw(c, e);
  std::vector<double> lw(b.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto& m = c.model(i);
    const double lik = m.law(m.state_after(h), a)[idx];
    lw[i] = lik > 0.0 ? b.log_weights()[i] + std::log(lik) : kNegInf;
  }
  return MixtureBelief::from_log_weights(std::move(lw));
}

double mixture_percept_prob(const MixtureBelief& b, const EnvironmentClass& c,
                            const History& h, ActionId a, const Percept& e) {
  check_aligned(b, c);
  c.model(0).check_action(a);
  const int idx = percept_index_or_throw(c, e);
  double p = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (b[i] == 0.0) continue;
    const auto& m = c.model(i);
    p += b[i] * m.law(m.state_after(h), a)[idx];
  }
  return p;
}

std::vector<double> mixture_percept_distribution(const MixtureBelief& b,
                                                 const EnvironmentClass& c,
                                                 const History& h, ActionId a) {
  return MixtureState(c, b, h).predictive(a);
}

// ---- MixtureState --------------------------------------------------------

MixtureState::MixtureState(const EnvironmentClass& c, MixtureBelief b, const History& h)
    : class_(&c), belief_(std::move(b)) {
  check_aligned(belief_, c);
  states_.reserve(c.size());
  for (const auto& m : c.models()) states_.push_back(m.state_after(h));
}

MixtureState::MixtureState(const EnvironmentClass& c, MixtureBelief b, std::vector<int> states)
    : class_(&c), belief_(std::move(b)), states_(std::move(states)) {
  check_aligned(belief_, c);
  if (states_.size() != c.size()) throw ConfigError("one machine state per model required");
}

void MixtureState::predictive(ActionId a, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < class_->size(); ++i) {
    const double w = belief_[i];
    if (w == 0.0) continue;
    const auto row = class_->model(i).law(states_[i], a);
    for (std::size_t e = 0; e < out.size(); ++e) out[e] += w * row[e];
  }
}

std::vector<double> MixtureState::predictive(ActionId a) const {
  class_->model(0).check_action(a);
  std::vector<double> out(class_->num_percepts());
  predictive(a, out);
  return out;
}

MixtureState MixtureState::advanced(ActionId a, int percept_index) const {
  std::vector<double> lw(class_->size());
  std::vector<int> next(class_->size());
  for (std::size_t i = 0; i < class_->size(); ++i) {
    const auto& m = class_->model(i);
    const double lik = m.law(states_[i], a)[percept_index];
    const double prior = belief_.log_weights()[i];
    lw[i] = (lik > 0.0 && prior != kNegInf) ? prior + std::log(lik) : kNegInf;
    next[i] = m.next_state(states_[i], a, percept_index);
  }
  return MixtureState(*class_, MixtureBelief::from_log_weights(std::move(lw)), std::move(next));
}

}  // namespace uailab
