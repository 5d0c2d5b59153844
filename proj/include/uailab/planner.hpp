#pragma once

#include <span>
#include <vector>

#include "uailab/bayes.hpp"
#include "uailab/env.hpp"

namespace uailab {

struct PlanningParams {
  int horizon = 1;        // lookahead depth m >= 1
  double discount = 0.9;  // gamma in [0, 1)

  void validate() const;
};

using ActionValues = std::vector<double>;

// Additive reward bonus evaluated at every successor history h' inside the
// lookahead: sum_nu w(nu | h') * per_model[nu][state_nu(h')]. Because the
// bonus is posterior-weighted per hypothesis, mixture values stay linear in
// the per-hypothesis values. An empty table means no bonus.
struct StateBonus {
  std::vector<std::vector<double>> per_model;

  bool empty() const { return per_model.empty(); }
  double at(const MixtureState& s) const;
  double at_model(std::size_t model, int state) const { return per_model[model][state]; }
};

// Bayes-adaptive expectimax. Q(h, a) = sum_e xi(e | h, a) (r(e) + gamma V(h a e))
// with the belief updated on every hypothetical percept and V = 0 at depth m.
double optimal_q(const MixtureBelief& b, const EnvironmentClass& c, const History& h,
                 ActionId a, const PlanningParams& p, const StateBonus& bonus = {});

double optimal_value(const MixtureBelief& b, const EnvironmentClass& c, const History& h,
                     const PlanningParams& p, const StateBonus& bonus = {});

ActionValues optimal_q_values(const MixtureBelief& b, const EnvironmentClass& c,
                              const History& h, const PlanningParams& p,
                              const StateBonus& bonus = {});

ActionValues optimal_q_values(const MixtureState& s, const PlanningParams& p,
                              const StateBonus& bonus = {});

// V at an explicit remaining depth; depth 0 is the empty-horizon leaf.
double optimal_value_at_depth(const MixtureState& s, int depth, double discount,
                              const StateBonus& bonus = {});

// Lowest-index argmax of Q.
ActionId aixi_action(const MixtureBelief& b, const EnvironmentClass& c, const History& h,
                     const PlanningParams& p, const StateBonus& bonus = {});

ActionId greedy_action(std::span<const double> q);

// exp(Q(a)) / sum exp(Q(a')), temperature 1, max-shifted.
std::vector<double> softmax_policy(std::span<const double> q);

// Self-expected negative log-likelihood -sum p ln p of an action distribution.
double aixi_loss(std::span<const double> policy);

}  // namespace uailab
