#include "uailab/env.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "uailab/distribution.hpp"
#include "uailab/errors.hpp"

namespace uailab {

// ---- History ---------------------------------------------------------------

History History::extended(ActionId a, const Percept& e) const {
  auto node = std::make_shared<const Node>(Node{Step{a, e}, tail_, size() + 1});
  return History(std::move(node));
}

std::vector<Step> History::steps() const {
  std::vector<Step> out(size());
  std::size_t i = out.size();
  for (const Node* n = tail_.get(); n != nullptr; n = n->parent.get()) out[--i] = n->step;
  return out;
}

History History::prefix(std::size_t length) const {
  if (length > size()) throw ConfigError("history prefix longer than history");
  std::shared_ptr<const Node> n = tail_;
  while (n && n->length > length) n = n->parent;
  return History(std::move(n));
}

bool operator==(const History& lhs, const History& rhs) {
  if (lhs.size() != rhs.size()) return false;
  const History::Node* a = lhs.tail_.get();
  const History::Node* b = rhs.tail_.get();
  while (a != b) {
    if (!(a->step == b->step)) return false;
    a = a->parent.get();
    b = b->parent.get();
  }
  return true;
}

History extend_history(const History& h, ActionId a, const Percept& e) {
  return h.extended(a, e);
}

// ---- EnvironmentModel ------------------------------------------------------

EnvironmentModel::EnvironmentModel(std::string name, int num_actions,
                                   std::vector<Percept> percepts, int num_states,
                                   int initial_state, std::vector<double> law,
                                   std::vector<int> next)
    : name_(std::move(name)),
      num_actions_(num_actions),
      percepts_(std::move(percepts)),
      num_states_(num_states),
      initial_state_(initial_state),
      law_(std::move(law)),
      next_(std::move(next)) {
  const std::string where = "environment '" + name_ + "'";
  if (num_actions_ < 1 || num_actions_ > kMaxActions) {
    throw ConfigError(where + ": num_actions must be in [1, 16]");
  }
  if (percepts_.empty()) throw ConfigError(where + ": empty percept alphabet");
  if (num_states_ < 1) throw ConfigError(where + ": num_states must be >= 1");
  if (initial_state_ < 0 || initial_state_ >= num_states_) {
    throw ConfigError(where + ": initial_state out of range");
  }
  for (std::size_t i = 0; i < percepts_.size(); ++i) {
    const Percept& e = percepts_[i];
    if (e.observation < 0 || e.observation >= kMaxObservations) {
      throw ConfigError(where + ": observation must be in [0, 16)");
    }
    if (!(e.reward >= 0.0 && e.reward <= 1.0)) {
      throw ConfigError(where + ": reward must be in [0, 1]");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (percepts_[j] == e) throw ConfigError(where + ": duplicate percept in alphabet");
    }
    num_observations_ = std::max(num_observations_, e.observation + 1);
  }
  const std::size_t cells =
      static_cast<std::size_t>(num_states_) * num_actions_ * percepts_.size();
  if (law_.size() != cells || next_.size() != cells) {
    throw ConfigError(where + ": law/next tables must have states*actions*percepts entries");
  }
  for (int s = 0; s < num_states_; ++s) {
    for (int a = 0; a < num_actions_; ++a) {
      if (!is_distribution(this->law(s, ActionId{a}))) {
        throw ConfigError(where + ": percept law of state " + std::to_string(s) + ", action " +
                          std::to_string(a) + " is not a distribution");
      }
    }
  }
  for (int n : next_) {
    if (n < 0 || n >= num_states_) throw ConfigError(where + ": successor state out of range");
  }
}

std::optional<int> EnvironmentModel::percept_index(const Percept& e) const {
  for (std::size_t i = 0; i < percepts_.size(); ++i) {
    if (percepts_[i] == e) return static_cast<int>(i);
  }
  return std::nullopt;
}

void EnvironmentModel::check_action(ActionId a) const {
  if (a.index < 0 || a.index >= num_actions_) {
    throw ConfigError("environment '" + name_ + "': action " + std::to_string(a.index) +
                      " outside alphabet of size " + std::to_string(num_actions_));
  }
}

int EnvironmentModel::state_after(const History& h) const {
  int state = initial_state_;
  for (const Step& step : h.steps()) {
    check_action(step.action);
    const auto e = percept_index(step.percept);
    if (!e) throw ConfigError("environment '" + name_ + "': history percept outside alphabet");
    state = next_state(state, step.action, *e);
  }
  return state;
}

std::vector<double> percept_distribution(const EnvironmentModel& env, const History& h,
                                         ActionId a) {
  env.check_action(a);
  const auto row = env.law(env.state_after(h), a);
  return {row.begin(), row.end()};
}

// ---- EnvironmentClass ------------------------------------------------------

EnvironmentClass::EnvironmentClass(std::vector<EnvironmentModel> models,
                                   std::vector<double> prior)
    : models_(std::move(models)), prior_(std::move(prior)) {
  if (models_.empty()) throw ConfigError("environment class: at least one model required");
  if (prior_.size() != models_.size()) {
    throw ConfigError("environment class: prior length differs from model count");
  }
  require_distribution(prior_, "environment class prior");
  for (double w : prior_) {
    if (w <= 0.0) throw ConfigError("environment class: prior must be strictly positive");
  }
  for (const auto& m : models_) {
    if (!m.same_alphabets(models_.front())) {
      throw ConfigError("environment class: model '" + m.name() +
                        "' has a different action or percept alphabet");
    }
  }
}

EnvironmentClass::EnvironmentClass(std::vector<EnvironmentModel> models)
    : EnvironmentClass(models, uniform(models.size())) {}

// ---- builders ----------------------------------------------------------------

namespace {

// Collects distinct percepts in first-seen order, then sorts them by
// (observation, reward) so that alphabets are canonical across builders.
class PerceptTable {
 public:
  void add(const Percept& e) {
    if (std::find(percepts_.begin(), percepts_.end(), e) == percepts_.end()) {
      percepts_.push_back(e);
    }
  }
  std::vector<Percept> finish() {
    std::sort(percepts_.begin(), percepts_.end(), [](const Percept& x, const Percept& y) {
      return x.observation != y.observation ? x.observation < y.observation
                                            : x.reward < y.reward;
    });
    return percepts_;
  }

 private:
  std::vector<Percept> percepts_;
};

int index_of(const std::vector<Percept>& alphabet, const Percept& e) {
  return static_cast<int>(std::find(alphabet.begin(), alphabet.end(), e) - alphabet.begin());
}

std::string default_name(std::string name, const std::string& fallback) {
  return name.empty() ? fallback : name;
}

}  // namespace

EnvironmentModel bernoulli_bandit(std::vector<double> probabilities, std::string name) {
  if (probabilities.empty() || probabilities.size() > kMaxActions) {
    throw ConfigError("bernoulli_bandit.probabilities: need between 1 and 16 arms");
  }
  for (double p : probabilities) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ConfigError("bernoulli_bandit.probabilities: entries must be in [0, 1]");
    }
  }
  const int arms = static_cast<int>(probabilities.size());
  std::vector<Percept> alphabet{{0, 0.0}, {1, 1.0}};
  std::vector<double> law;
  for (double p : probabilities) {
    law.push_back(1.0 - p);
    law.push_back(p);
  }
  std::vector<int> next(law.size(), 0);
  std::string label = "bandit(";
  for (int i = 0; i < arms; ++i) {
    if (i) label += ",";
    label += std::to_string(probabilities[i]).substr(0, 5);
  }
  label += ")";
  return {default_name(std::move(name), label), arms, std::move(alphabet), 1, 0,
          std::move(law), std::move(next)};
}

EnvironmentModel deterministic_chain(const std::vector<std::vector<int>>& next,
                                     const std::vector<std::vector<double>>& rewards,
                                     std::string name) {
  const int states = static_cast<int>(next.size());
  if (states < 1 || states > kMaxObservations) {
    throw ConfigError("deterministic_chain.transitions: need between 1 and 16 states");
  }
  if (rewards.size() != next.size()) {
    throw ConfigError("deterministic_chain.rewards: one row per state required");
  }
  const int actions = static_cast<int>(next.front().size());
  PerceptTable table;
  for (int s = 0; s < states; ++s) {
    if (static_cast<int>(next[s].size()) != actions ||
        static_cast<int>(rewards[s].size()) != actions) {
      throw ConfigError("deterministic_chain.transitions: ragged table at state " +
                        std::to_string(s));
    }
    for (int a = 0; a < actions; ++a) {
      if (next[s][a] < 0 || next[s][a] >= states) {
        throw ConfigError("deterministic_chain.transitions: successor out of range");
      }
      if (!(rewards[s][a] >= 0.0 && rewards[s][a] <= 1.0)) {
        throw ConfigError("deterministic_chain.rewards: entries must be in [0, 1]");
      }
      table.add({next[s][a], rewards[s][a]});
    }
  }
  const auto alphabet = table.finish();
  const std::size_t e_count = alphabet.size();
  std::vector<double> law(static_cast<std::size_t>(states) * actions * e_count, 0.0);
  std::vector<int> succ(law.size(), 0);
  for (int s = 0; s < states; ++s) {
    for (int a = 0; a < actions; ++a) {
      const std::size_t base = (static_cast<std::size_t>(s) * actions + a) * e_count;
      const int e = index_of(alphabet, {next[s][a], rewards[s][a]});
      law[base + e] = 1.0;
      // Percepts that cannot occur still need a well-defined successor;
      // the observation names the successor state.
      for (std::size_t j = 0; j < e_count; ++j) {
        succ[base + j] = std::min(alphabet[j].observation, states - 1);
      }
    }
  }
  return {default_name(std::move(name), "chain"), actions, alphabet, states, 0,
          std::move(law), std::move(succ)};
}

EnvironmentModel two_room(const TwoRoomParams& params, std::string name) {
  const int bh = params.branch_high;
  const int bl = params.branch_low;
  if (bh < 1) throw ConfigError("two_room.branch_high must be >= 1");
  if (bl < 1) throw ConfigError("two_room.branch_low must be >= 1");
  if (bh + bl > kMaxObservations) {
    throw ConfigError("two_room: branch_high + branch_low must be <= 16");
  }
  for (double r : {params.reward_high, params.reward_low}) {
    if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("two_room rewards must be in [0, 1]");
  }
  const int actions = std::max({bh, bl, 2});
  // Observations: low cells 0..bl-1, high cells bl..bl+bh-1.
  PerceptTable table;
  for (int i = 0; i < bl; ++i) table.add({i, params.reward_low});
  for (int i = 0; i < bh; ++i) table.add({bl + i, params.reward_high});
  const auto alphabet = table.finish();
  const std::size_t e_count = alphabet.size();
  constexpr int kStates = 3;
  std::vector<double> law(static_cast<std::size_t>(kStates) * actions * e_count, 0.0);
  std::vector<int> succ(law.size(), 0);
  auto cell = [&](int state, int a, const Percept& e, int successor) {
    const std::size_t base = (static_cast<std::size_t>(state) * actions + a) * e_count;
    law[base + index_of(alphabet, e)] = 1.0;
    for (std::size_t j = 0; j < e_count; ++j) succ[base + j] = successor;
  };
  const Percept low_entry{0, params.reward_low};
  const Percept high_entry{bl, params.reward_high};
  for (int a = 0; a < actions; ++a) {
    if (a == 0) {
      cell(kTwoRoomStart, a, low_entry, kTwoRoomLow);
    } else {
      cell(kTwoRoomStart, a, high_entry, kTwoRoomHigh);
    }
    cell(kTwoRoomLow, a, {std::min(a, bl - 1), params.reward_low}, kTwoRoomLow);
    cell(kTwoRoomHigh, a, {bl + std::min(a, bh - 1), params.reward_high}, kTwoRoomHigh);
  }
  return {default_name(std::move(name), "two_room"), actions, alphabet, kStates,
          kTwoRoomStart, std::move(law), std::move(succ)};
}

EnvironmentModel noisy_grid(const NoisyGridParams& params, std::string name) {
  const int n = params.size;
  if (n < 1 || n * n > kMaxObservations) throw ConfigError("noisy_grid.size must be in [1, 4]");
  if (!(params.slip >= 0.0 && params.slip <= 1.0)) {
    throw ConfigError("noisy_grid.slip must be in [0, 1]");
  }
  const int cells = n * n;
  const int goal = cells - 1;
  constexpr int kActions = 4;
  constexpr int dr[kActions] = {-1, 1, 0, 0};
  constexpr int dc[kActions] = {0, 0, -1, 1};
  std::vector<Percept> alphabet;
  for (int c = 0; c < cells; ++c) alphabet.push_back({c, c == goal ? 1.0 : 0.0});
  std::vector<double> law(static_cast<std::size_t>(cells) * kActions * cells, 0.0);
  std::vector<int> succ(law.size(), 0);
  for (int s = 0; s < cells; ++s) {
    const int r = s / n;
    const int c = s % n;
    for (int a = 0; a < kActions; ++a) {
      const std::size_t base = (static_cast<std::size_t>(s) * kActions + a) * cells;
      const int nr = r + dr[a];
      const int nc = c + dc[a];
      const bool inside = nr >= 0 && nr < n && nc >= 0 && nc < n;
      const int target = inside ? nr * n + nc : s;
      law[base + target] += 1.0 - params.slip;
      law[base + s] += params.slip;
      for (int j = 0; j < cells; ++j) succ[base + j] = j;
    }
  }
  return {default_name(std::move(name), "noisy_grid"), kActions, std::move(alphabet), cells,
          0, std::move(law), std::move(succ)};
}

}  // namespace uailab
