#include "uailab/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "uailab/distribution.hpp"
#include "uailab/errors.hpp"

namespace uailab {

void PlanningParams::validate() const {
  if (horizon < 1) throw ConfigError("planning.horizon must be >= 1");
  if (!(discount >= 0.0 && discount < 1.0)) throw ConfigError("planning.gamma must be in [0, 1)");
}

double StateBonus::at(const MixtureState& s) const {
  if (empty()) return 0.0;
  const auto& w = s.belief().weights();
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] > 0.0) total += w[i] * per_model[i][s.states()[i]];
  }
  return total;
}

namespace {

class Expectimax {
 public:
  Expectimax(double discount, const StateBonus& bonus) : discount_(discount), bonus_(bonus) {}

  double value(const MixtureState& s, int depth) const {
    if (depth <= 0) return 0.0;
    const int actions = s.env_class().num_actions();
    double best = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < actions; ++a) best = std::max(best, q(s, ActionId{a}, depth));
    return best;
  }

  double q(const MixtureState& s, ActionId a, int depth) const {
    if (depth <= 0) return 0.0;
    const auto& cls = s.env_class();
    std::vector<double> xi(cls.num_percepts());
    s.predictive(a, xi);
    double total = 0.0;
    for (std::size_t e = 0; e < xi.size(); ++e) {
      if (xi[e] <= 0.0) continue;
      double ret = cls.percepts()[e].reward;
      if (depth > 1 || !bonus_.empty()) {
        const MixtureState next = s.advanced(a, static_cast<int>(e));
        ret += bonus_.at(next);
        if (depth > 1) ret += discount_ * value(next, depth - 1);
      }
      total += xi[e] * ret;
    }
    return total;
  }

 private:
  double discount_;
  const StateBonus& bonus_;
};

void check_bonus(const StateBonus& bonus, const EnvironmentClass& c) {
  if (bonus.empty()) return;
  if (bonus.per_model.size() != c.size()) throw ConfigError("bonus table: one row per model");
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (static_cast<int>(bonus.per_model[i].size()) != c.model(i).num_states()) {
      throw ConfigError("bonus table: one entry per machine state");
    }
  }
}

}  // namespace

ActionValues optimal_q_values(const MixtureState& s, const PlanningParams& p,
                              const StateBonus& bonus) {
  p.validate();
  check_bonus(bonus, s.env_class());
  const Expectimax solver(p.discount, bonus);
  ActionValues q(s.env_class().num_actions());
  for (int a = 0; a < static_cast<int>(q.size()); ++a) q[a] = solver.q(s, ActionId{a}, p.horizon);
  return q;
}

ActionValues optimal_q_values(const MixtureBelief& b, const EnvironmentClass& c,
                              const History& h, const PlanningParams& p,
                              const StateBonus& bonus) {
  return optimal_q_values(MixtureState(c, b, h), p, bonus);
}

double optimal_q(const MixtureBelief& b, const EnvironmentClass& c, const History& h,
                 ActionId a, const PlanningParams& p, const StateBonus& bonus) {
  p.validate();
  c.model(0).check_action(a);
  check_bonus(bonus, c);
  return Expectimax(p.discount, bonus).q(MixtureState(c, b, h), a, p.horizon);
}

double optimal_value(const MixtureBelief& b, const EnvironmentClass& c, const History& h,
                     const PlanningParams& p, const StateBonus& bonus) {
  const auto q = optimal_q_values(b, c, h, p, bonus);
  return *std::max_element(q.begin(), q.end());
}

double optimal_value_at_depth(const MixtureState& s, int depth, double discount,
                              const StateBonus& bonus) {
  check_bonus(bonus, s.env_class());
  return Expectimax(discount, bonus).value(s, depth);
}

ActionId aixi_action(const MixtureBelief& b, const EnvironmentClass& c, const History& h,
                     const PlanningParams& p, const StateBonus& bonus) {
  return greedy_action(optimal_q_values(b, c, h, p, bonus));
}

ActionId greedy_action(std::span<const double> q) {
  return ActionId{static_cast<int>(argmax_lowest(q))};
}

std::vector<double> softmax_policy(std::span<const double> q) {
  const double hi = *std::max_element(q.begin(), q.end());
  std::vector<double> p(q.size());
  double z = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    p[i] = std::exp(q[i] - hi);
    z += p[i];
  }
  for (double& x : p) x /= z;
  return p;
}

double aixi_loss(std::span<const double> policy) { return entropy(policy); }

}  // namespace uailab
