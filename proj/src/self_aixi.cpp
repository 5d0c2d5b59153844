#include "uailab/self_aixi.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "uailab/distribution.hpp"
#include "uailab/errors.hpp"

namespace uailab {

// ---- policies ----------------------------------------------------------------

PolicyModel::PolicyModel(std::string name, int num_actions,
                         std::vector<std::vector<double>> law_by_context)
    : name_(std::move(name)), num_actions_(num_actions), law_(std::move(law_by_context)) {
  if (num_actions_ < 1 || num_actions_ > kMaxActions) {
    throw ConfigError("policy '" + name_ + "': num_actions must be in [1, 16]");
  }
  if (law_.empty()) throw ConfigError("policy '" + name_ + "': needs at least one context");
  for (const auto& row : law_) {
    if (static_cast<int>(row.size()) != num_actions_) {
      throw ConfigError("policy '" + name_ + "': law row length differs from num_actions");
    }
    require_distribution(row, "policy law");
  }
}

std::span<const double> PolicyModel::law(int context) const {
  if (context < 0 || context >= num_contexts()) {
    throw ConfigError("policy '" + name_ + "': no law for context " + std::to_string(context));
  }
  return law_[context];
}

PolicyModel constant_policy(int num_actions, ActionId action, int num_observations,
                            double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("policy epsilon must be in [0, 1]");
  if (action.index < 0 || action.index >= num_actions) {
    throw ConfigError("constant policy action outside alphabet");
  }
  std::vector<double> row(num_actions, epsilon / num_actions);
  row[action.index] += 1.0 - epsilon;
  std::string name = "always-a" + std::to_string(action.index);
  if (epsilon > 0.0) name += "(eps)";
  return {name, num_actions, std::vector<std::vector<double>>(num_observations + 1, row)};
}

PolicyModel uniform_policy(int num_actions, int num_observations) {
  return {"uniform", num_actions,
          std::vector<std::vector<double>>(num_observations + 1, uniform(num_actions))};
}

std::vector<PolicyModel> stationary_policies(int num_actions, int num_observations) {
  const int contexts = num_observations + 1;
  double count = std::pow(static_cast<double>(num_actions), contexts);
  if (count > 4096) throw SizeError("stationary policy class would exceed 4096 policies");
  std::vector<PolicyModel> out;
  std::vector<int> choice(contexts, 0);
  for (long n = 0; n < static_cast<long>(count); ++n) {
    long code = n;
    std::string name = "det[";
    std::vector<std::vector<double>> law;
    for (int c = 0; c < contexts; ++c) {
      const int a = static_cast<int>(code % num_actions);
      code /= num_actions;
      law.push_back(one_hot(num_actions, a));
      name += std::to_string(a);
    }
    out.emplace_back(name + "]", num_actions, std::move(law));
  }
  return out;
}

PolicyClass::PolicyClass(std::vector<PolicyModel> policies, std::vector<double> prior)
    : policies_(std::move(policies)), prior_(std::move(prior)) {
  if (policies_.empty()) throw ConfigError("policy class: at least one policy required");
  if (prior_.size() != policies_.size()) {
    throw ConfigError("policy class: prior length differs from policy count");
  }
  require_distribution(prior_, "policy class prior");
  for (double w : prior_) {
    if (w <= 0.0) throw ConfigError("policy class: prior must be strictly positive");
  }
  for (const auto& p : policies_) {
    if (p.num_actions() != num_actions()) {
      throw ConfigError("policy class: policies disagree on the action alphabet");
    }
  }
}

PolicyClass::PolicyClass(std::vector<PolicyModel> policies)
    : PolicyClass(policies, uniform(policies.size())) {}

void RegularizationParams::validate(int num_actions) const {
  if (!std::isfinite(lambda)) throw ConfigError("regularization.lambda must be finite");
  if (!(kappa > 0.0 && kappa * num_actions < 1.0)) {
    throw ConfigError("regularization.kappa must be in (0, 1/A)");
  }
}

// ---- policy mixture ---------------------------------------------------------

namespace {

void check_aligned(const PolicyBelief& pb, const PolicyClass& pc) {
  if (pb.size() != pc.size()) {
    throw ConfigError("policy belief has " + std::to_string(pb.size()) +
                      " weights but the class has " + std::to_string(pc.size()) + " policies");
  }
}

}  // namespace

std::vector<double> zeta_distribution(const PolicyBelief& pb, const PolicyClass& pc,
                                      const History& h, double kappa) {
  check_aligned(pb, pc);
  std::vector<double> zeta(pc.num_actions(), 0.0);
  for (std::size_t i = 0; i < pc.size(); ++i) {
    if (pb[i] == 0.0) continue;
    const auto row = pc.policy(i).action_distribution(h);
    for (std::size_t a = 0; a < zeta.size(); ++a) zeta[a] += pb[i] * row[a];
  }
  return floor_mix(zeta, kappa);
}

double zeta_prob(const PolicyBelief& pb, const PolicyClass& pc, const History& h, ActionId a,
                 double kappa) {
  if (a.index < 0 || a.index >= pc.num_actions()) throw ConfigError("action outside alphabet");
  return zeta_distribution(pb, pc, h, kappa)[a.index];
}

PolicyBelief policy_posterior_update(const PolicyBelief& pb, const PolicyClass& pc,
                                     const History& h, ActionId a) {
  check_aligned(pb, pc);
  if (a.index < 0 || a.index >= pc.num_actions()) throw ConfigError("action outside alphabet");
  std::vector<double> lw(pb.size());
  for (std::size_t i = 0; i < pc.size(); ++i) {
    const double lik = pc.policy(i).action_distribution(h)[a.index];
    lw[i] = lik > 0.0 ? pb.log_weights()[i] + std::log(lik)
                      : -std::numeric_limits<double>::infinity();
  }
  try {
    return PolicyBelief(MixtureBelief::from_log_weights(std::move(lw)));
  } catch (const ImpossibleEvidenceError&) {
    throw ImpossibleEvidenceError("action " + std::to_string(a.index) +
                                  " has probability zero under every policy in the class");
  }
}

// ---- exact policy evaluation ---------------------------------------------

namespace {

// Q_nu^pi and V_nu^pi by dynamic programming over (machine state, policy
// context, remaining depth); both are finite so the trajectory tree folds.
class PolicyEvaluator {
 public:
  PolicyEvaluator(const PolicyModel& pi, const EnvironmentModel& nu, double discount,
                  std::span<const double> bonus_row, int max_depth)
      : pi_(pi),
        nu_(nu),
        discount_(discount),
        bonus_(bonus_row),
        contexts_(pi.num_contexts()),
        depth_stride_(static_cast<std::size_t>(max_depth) + 1),
        memo_(static_cast<std::size_t>(nu.num_states()) * contexts_ * (max_depth + 1),
              std::numeric_limits<double>::quiet_NaN()) {
    if (pi.num_actions() != nu.num_actions()) {
      throw ConfigError("policy '" + pi.name() + "' and environment '" + nu.name() +
                        "' disagree on the action alphabet");
    }
    if (!bonus_.empty() && static_cast<int>(bonus_.size()) != nu.num_states()) {
      throw ConfigError("bonus row: one entry per machine state");
    }
    if (nu.num_observations() + 1 > contexts_) {
      throw ConfigError("policy '" + pi.name() + "' has no law for some observation of '" +
                        nu.name() + "'");
    }
  }

  double q(int state, ActionId a, int depth) {
    if (depth <= 0) return 0.0;
    const auto row = nu_.law(state, a);
    double total = 0.0;
    for (std::size_t e = 0; e < row.size(); ++e) {
      if (row[e] <= 0.0) continue;
      const int next = nu_.next_state(state, a, static_cast<int>(e));
      double ret = nu_.percept(static_cast<int>(e)).reward;
      if (!bonus_.empty()) ret += bonus_[next];
      if (depth > 1) {
        ret += discount_ * value(next, PolicyModel::context_after(nu_.percept(e)), depth - 1);
      }
      total += row[e] * ret;
    }
    return total;
  }

  double value(int state, int context, int depth) {
    if (depth <= 0) return 0.0;
    double& slot =
        memo_[(static_cast<std::size_t>(state) * contexts_ + context) * depth_stride_ + depth];
    if (!std::isnan(slot)) return slot;
    const auto law = pi_.law(context);
    double v = 0.0;
    for (int a = 0; a < nu_.num_actions(); ++a) {
      if (law[a] > 0.0) v += law[a] * q(state, ActionId{a}, depth);
    }
    slot = v;
    return v;
  }

 private:
  const PolicyModel& pi_;
  const EnvironmentModel& nu_;
  double discount_;
  std::span<const double> bonus_;
  int contexts_;
  std::size_t depth_stride_;
  std::vector<double> memo_;
};

}  // namespace

ActionValues policy_q_values(const PolicyModel& pi, const EnvironmentModel& nu,
                             const History& h, const PlanningParams& p,
                             std::span<const double> bonus_row) {
  p.validate();
  PolicyEvaluator eval(pi, nu, p.discount, bonus_row, p.horizon);
  const int state = nu.state_after(h);
  ActionValues q(nu.num_actions());
  for (int a = 0; a < nu.num_actions(); ++a) q[a] = eval.q(state, ActionId{a}, p.horizon);
  return q;
}

double policy_value(const PolicyModel& pi, const EnvironmentModel& nu, const History& h,
                    const PlanningParams& p, std::span<const double> bonus_row) {
  p.validate();
  PolicyEvaluator eval(pi, nu, p.discount, bonus_row, p.horizon);
  return eval.value(nu.state_after(h), PolicyModel::context_of(h), p.horizon);
}

namespace {

std::span<const double> bonus_row_of(const StateBonus& bonus, std::size_t model) {
  if (bonus.empty()) return {};
  return bonus.per_model.at(model);
}

}  // namespace

ActionValues q_zeta_values(const PolicyBelief& pb, const PolicyClass& pc,
                           const MixtureState& s, const PlanningParams& p,
                           const StateBonus& bonus) {
  check_aligned(pb, pc);
  const auto& c = s.env_class();
  if (!bonus.empty() && bonus.per_model.size() != c.size()) {
    throw ConfigError("bonus table: one row per model");
  }
  p.validate();
  const auto& w = s.belief().weights();
  ActionValues q(c.num_actions(), 0.0);
  for (std::size_t j = 0; j < c.size(); ++j) {
    if (w[j] == 0.0) continue;
    for (std::size_t i = 0; i < pc.size(); ++i) {
      if (pb[i] == 0.0) continue;
      PolicyEvaluator eval(pc.policy(i), c.model(j), p.discount, bonus_row_of(bonus, j),
                           p.horizon);
      const double weight = pb[i] * w[j];
      for (int a = 0; a < c.num_actions(); ++a) {
        q[a] += weight * eval.q(s.states()[j], ActionId{a}, p.horizon);
      }
    }
  }
  return q;
}

ActionValues q_zeta_values(const PolicyBelief& pb, const PolicyClass& pc,
                           const MixtureBelief& b, const EnvironmentClass& c,
                           const History& h, const PlanningParams& p,
                           const StateBonus& bonus) {
  return q_zeta_values(pb, pc, MixtureState(c, b, h), p, bonus);
}

double q_zeta(const PolicyBelief& pb, const PolicyClass& pc, const MixtureBelief& b,
              const EnvironmentClass& c, const History& h, ActionId a,
              const PlanningParams& p, const StateBonus& bonus) {
  c.model(0).check_action(a);
  return q_zeta_values(pb, pc, b, c, h, p, bonus)[a.index];
}

double mixture_policy_value(const PolicyBelief& pb, const PolicyClass& pc,
                            const MixtureState& s, int context, const PlanningParams& p,
                            const StateBonus& bonus) {
  check_aligned(pb, pc);
  const auto& c = s.env_class();
  if (!bonus.empty() && bonus.per_model.size() != c.size()) {
    throw ConfigError("bonus table: one row per model");
  }
  p.validate();
  const auto& w = s.belief().weights();
  double v = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j) {
    if (w[j] == 0.0) continue;
    for (std::size_t i = 0; i < pc.size(); ++i) {
      if (pb[i] == 0.0) continue;
      PolicyEvaluator eval(pc.policy(i), c.model(j), p.discount, bonus_row_of(bonus, j),
                           p.horizon);
      v += pb[i] * w[j] * eval.value(s.states()[j], context, p.horizon);
    }
  }
  return v;
}

double mixture_policy_value(const PolicyBelief& pb, const PolicyClass& pc,
                            const MixtureBelief& b, const EnvironmentClass& c,
                            const History& h, const PlanningParams& p,
                            const StateBonus& bonus) {
  return mixture_policy_value(pb, pc, MixtureState(c, b, h), PolicyModel::context_of(h), p,
                              bonus);
}

// ---- regularized action rule -------------------------------------------------

std::vector<double> self_aixi_scores(std::span<const double> q_values,
                                     std::span<const double> pi_star,
                                     std::span<const double> zeta,
                                     const RegularizationParams& reg) {
  if (pi_star.size() != q_values.size() || zeta.size() != q_values.size()) {
    throw ConfigError("Q, pi* and zeta must have one entry per action");
  }
  std::vector<double> score(q_values.begin(), q_values.end());
  if (reg.lambda == 0.0) return score;
  for (std::size_t a = 0; a < score.size(); ++a) {
    if (!(pi_star[a] > 0.0 && zeta[a] > 0.0)) {
      throw ConfigError("pi* and zeta must be floored (strictly positive) in the action rule");
    }
    score[a] -= reg.lambda * std::log(pi_star[a] / zeta[a]);
  }
  return score;
}

ActionId self_aixi_action(std::span<const double> q_values, std::span<const double> pi_star,
                          std::span<const double> zeta, const RegularizationParams& reg) {
  return greedy_action(self_aixi_scores(q_values, pi_star, zeta, reg));
}

double kl_policy(std::span<const double> pi_star, std::span<const double> zeta) {
  if (pi_star.size() != zeta.size()) throw ConfigError("pi* and zeta differ in length");
  return kl_divergence(pi_star, zeta);
}

double self_aixi_loss(std::span<const double> q_phi, std::span<const double> pi_star,
                      std::span<const double> zeta, const RegularizationParams& reg) {
  double loss = entropy(q_phi);
  if (reg.lambda != 0.0) loss += reg.lambda * kl_policy(pi_star, zeta);
  return loss;
}

}  // namespace uailab
