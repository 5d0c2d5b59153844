#pragma once

#include <span>
#include <string>
#include <vector>

#include "uailab/bayes.hpp"
#include "uailab/env.hpp"
#include "uailab/planner.hpp"

namespace uailab {

// A stationary action law keyed by the most recent observation: context 0
// before the first step, context 1 + o after observation o.
class PolicyModel {
 public:
  PolicyModel(std::string name, int num_actions, std::vector<std::vector<double>> law_by_context);

  const std::string& name() const { return name_; }
  int num_actions() const { return num_actions_; }
  int num_contexts() const { return static_cast<int>(law_.size()); }

  std::span<const double> law(int context) const;
  std::span<const double> action_distribution(const History& h) const {
    return law(context_of(h));
  }

  static int context_of(const History& h) {
    return h.empty() ? 0 : context_after(h.back().percept);
  }
  static int context_after(const Percept& e) { return 1 + e.observation; }

 private:
  std::string name_;
  int num_actions_;
  std::vector<std::vector<double>> law_;
};

// (1 - epsilon) on `action`, epsilon spread uniformly over all actions.
PolicyModel constant_policy(int num_actions, ActionId action, int num_observations,
                            double epsilon = 0.0);
PolicyModel uniform_policy(int num_actions, int num_observations);
// Every deterministic map from context to action (num_actions^(obs+1) of them).
std::vector<PolicyModel> stationary_policies(int num_actions, int num_observations);

class PolicyClass {
 public:
  PolicyClass(std::vector<PolicyModel> policies, std::vector<double> prior);
  explicit PolicyClass(std::vector<PolicyModel> policies);  // uniform prior

  std::size_t size() const { return policies_.size(); }
  const PolicyModel& policy(std::size_t i) const { return policies_[i]; }
  const std::vector<PolicyModel>& policies() const { return policies_; }
  const std::vector<double>& prior() const { return prior_; }
  int num_actions() const { return policies_.front().num_actions(); }

 private:
  std::vector<PolicyModel> policies_;
  std::vector<double> prior_;
};

// Posterior omega(pi | h). Same log-space representation as MixtureBelief.
class PolicyBelief {
 public:
  explicit PolicyBelief(std::vector<double> weights) : weights_(std::move(weights)) {}
  static PolicyBelief prior_of(const PolicyClass& pc) { return PolicyBelief(pc.prior()); }

  std::size_t size() const { return weights_.size(); }
  const std::vector<double>& weights() const { return weights_.weights(); }
  const std::vector<double>& log_weights() const { return weights_.log_weights(); }
  double operator[](std::size_t i) const { return weights_[i]; }

 private:
  explicit PolicyBelief(MixtureBelief w) : weights_(std::move(w)) {}
  friend PolicyBelief policy_posterior_update(const PolicyBelief&, const PolicyClass&,
                                              const History&, ActionId);
  MixtureBelief weights_;
};

struct RegularizationParams {
  double lambda = 0.1;   // signed
  double kappa = 1e-6;   // probability floor, in (0, 1/A)

  void validate(int num_actions) const;
};

// zeta(. | h) = sum_pi omega(pi) pi(. | h), floor-mixed with kappa.
std::vector<double> zeta_distribution(const PolicyBelief& pb, const PolicyClass& pc,
                                      const History& h, double kappa);
double zeta_prob(const PolicyBelief& pb, const PolicyClass& pc, const History& h, ActionId a,
                 double kappa);

// omega'(pi) ∝ omega(pi) pi(a | h). Throws ImpossibleEvidenceError when no
// policy in the class can emit a.
PolicyBelief policy_posterior_update(const PolicyBelief& pb, const PolicyClass& pc,
                                     const History& h, ActionId a);

// Exact finite-horizon evaluation of a single (policy, environment) pair.
// `bonus_row`, when non-empty, holds a per-machine-state reward bonus.
ActionValues policy_q_values(const PolicyModel& pi, const EnvironmentModel& nu,
                             const History& h, const PlanningParams& p,
                             std::span<const double> bonus_row = {});
double policy_value(const PolicyModel& pi, const EnvironmentModel& nu, const History& h,
                    const PlanningParams& p, std::span<const double> bonus_row = {});

// Q_xi^zeta(h, a) = sum_pi omega(pi | h) sum_nu w(nu | h) Q_nu^pi(h, a).
ActionValues q_zeta_values(const PolicyBelief& pb, const PolicyClass& pc,
                           const MixtureBelief& b, const EnvironmentClass& c,
                           const History& h, const PlanningParams& p,
                           const StateBonus& bonus = {});
// Same, for a belief already paired with machine states.
ActionValues q_zeta_values(const PolicyBelief& pb, const PolicyClass& pc,
                           const MixtureState& s, const PlanningParams& p,
                           const StateBonus& bonus = {});
double q_zeta(const PolicyBelief& pb, const PolicyClass& pc, const MixtureBelief& b,
              const EnvironmentClass& c, const History& h, ActionId a,
              const PlanningParams& p, const StateBonus& bonus = {});

// sum_pi omega(pi | h) sum_nu w(nu | h) V_nu^pi(h): the value of the mixture
// policy zeta under xi.
double mixture_policy_value(const PolicyBelief& pb, const PolicyClass& pc,
                            const MixtureBelief& b, const EnvironmentClass& c,
                            const History& h, const PlanningParams& p,
                            const StateBonus& bonus = {});
// `context` is the policy context of the history `s` belongs to.
double mixture_policy_value(const PolicyBelief& pb, const PolicyClass& pc,
                            const MixtureState& s, int context, const PlanningParams& p,
                            const StateBonus& bonus = {});

// Q(a) - lambda ln(pi*(a) / zeta(a)).
std::vector<double> self_aixi_scores(std::span<const double> q_values,
                                     std::span<const double> pi_star,
                                     std::span<const double> zeta,
                                     const RegularizationParams& reg);

// Lowest-index argmax of self_aixi_scores.
ActionId self_aixi_action(std::span<const double> q_values, std::span<const double> pi_star,
                          std::span<const double> zeta, const RegularizationParams& reg);

// KL(pi* || zeta) in nats.
double kl_policy(std::span<const double> pi_star, std::span<const double> zeta);

// H(q_phi) + lambda KL(pi* || zeta).
double self_aixi_loss(std::span<const double> q_phi, std::span<const double> pi_star,
                      std::span<const double> zeta, const RegularizationParams& reg);

}  // namespace uailab
