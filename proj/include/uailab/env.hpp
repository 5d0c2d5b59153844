#pragma once

#include <compare>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace uailab {

inline constexpr int kMaxActions = 16;
inline constexpr int kMaxObservations = 16;

struct ActionId {
  int index = 0;
  friend auto operator<=>(const ActionId&, const ActionId&) = default;
};

// Joint observation/reward symbol emitted once per interaction step.
struct Percept {
  int observation = 0;
  double reward = 0.0;
  friend bool operator==(const Percept&, const Percept&) = default;
};

struct Step {
  ActionId action;
  Percept percept;
  friend bool operator==(const Step&, const Step&) = default;
};

// Interleaved action/percept sequence. Persistent: extension shares the
// prefix and never mutates an existing value, so copies are cheap.
class History {
 public:
  History() = default;

  std::size_t size() const { return tail_ ? tail_->length : 0; }
  bool empty() const { return size() == 0; }

  // Last completed step. Precondition: !empty().
  const Step& back() const { return tail_->step; }

  History extended(ActionId a, const Percept& e) const;

  // Steps in chronological order.
  std::vector<Step> steps() const;

  // The first `length` steps.
  History prefix(std::size_t length) const;

  friend bool operator==(const History& lhs, const History& rhs);

 private:
  struct Node {
    Step step;
    std::shared_ptr<const Node> parent;
    std::size_t length;
  };
  explicit History(std::shared_ptr<const Node> tail) : tail_(std::move(tail)) {}

  std::shared_ptr<const Node> tail_;
};

History extend_history(const History& h, ActionId a, const Percept& e);

// A history-based environment realized as a finite transducer: a hidden
// machine state that is a deterministic function of the history, a percept
// law per (state, action) and a successor state per (state, action, percept).
class EnvironmentModel {
 public:
  // `law` and `next` are indexed [state][action][percept], flattened.
  EnvironmentModel(std::string name, int num_actions, std::vector<Percept> percepts,
                   int num_states, int initial_state, std::vector<double> law,
                   std::vector<int> next);

  const std::string& name() const { return name_; }
  int num_actions() const { return num_actions_; }
  int num_percepts() const { return static_cast<int>(percepts_.size()); }
  int num_states() const { return num_states_; }
  int initial_state() const { return initial_state_; }
  int num_observations() const { return num_observations_; }
  const std::vector<Percept>& percepts() const { return percepts_; }
  const Percept& percept(int index) const { return percepts_[index]; }

  std::span<const double> law(int state, ActionId a) const {
    return {law_.data() + offset(state, a), percepts_.size()};
  }
  int next_state(int state, ActionId a, int percept_index) const {
    return next_[offset(state, a) + percept_index];
  }

  std::optional<int> percept_index(const Percept& e) const;

  // Machine state reached after replaying `h`. Throws ConfigError if `h`
  // contains an action or percept outside this model's alphabets.
  int state_after(const History& h) const;

  void check_action(ActionId a) const;

  bool same_alphabets(const EnvironmentModel& other) const {
    return num_actions_ == other.num_actions_ && percepts_ == other.percepts_;
  }

 private:
  std::size_t offset(int state, ActionId a) const {
    return (static_cast<std::size_t>(state) * num_actions_ + a.index) * percepts_.size();
  }

  std::string name_;
  int num_actions_;
  std::vector<Percept> percepts_;
  int num_states_;
  int initial_state_;
  int num_observations_ = 0;
  std::vector<double> law_;
  std::vector<int> next_;
};

// nu(. | h, a), aligned with env.percepts().
std::vector<double> percept_distribution(const EnvironmentModel& env, const History& h,
                                         ActionId a);

// Finite hypothesis set with a strictly positive prior.
class EnvironmentClass {
 public:
  EnvironmentClass(std::vector<EnvironmentModel> models, std::vector<double> prior);
  explicit EnvironmentClass(std::vector<EnvironmentModel> models);  // uniform prior

  std::size_t size() const { return models_.size(); }
  const EnvironmentModel& model(std::size_t i) const { return models_[i]; }
  const std::vector<EnvironmentModel>& models() const { return models_; }
  const std::vector<double>& prior() const { return prior_; }

  int num_actions() const { return models_.front().num_actions(); }
  int num_percepts() const { return models_.front().num_percepts(); }
  const std::vector<Percept>& percepts() const { return models_.front().percepts(); }

 private:
  std::vector<EnvironmentModel> models_;
  std::vector<double> prior_;
};

// ---- builtin environments -------------------------------------------------

// One state; arm i pays (obs 1, reward 1) with probability p_i and
// (obs 0, reward 0) otherwise.
EnvironmentModel bernoulli_bandit(std::vector<double> probabilities, std::string name = {});

// next[s][a] is the successor state, rewards[s][a] the reward for taking a
// in s. The observation is the successor state.
EnvironmentModel deterministic_chain(const std::vector<std::vector<int>>& next,
                                     const std::vector<std::vector<double>>& rewards,
                                     std::string name = {});

struct TwoRoomParams {
  int branch_high = 4;
  int branch_low = 1;
  double reward_high = 0.5;
  double reward_low = 0.5;
};

// From the start state, action 0 enters the low-control room and every other
// action enters the high-control room. Inside a room the agent stays put; in
// a room with branching b, action i shows cell min(i, b-1) so exactly b
// distinguishable percepts are reachable. Each step in a room pays that
// room's reward.
EnvironmentModel two_room(const TwoRoomParams& params, std::string name = {});

inline constexpr int kTwoRoomStart = 0;
inline constexpr int kTwoRoomLow = 1;
inline constexpr int kTwoRoomHigh = 2;
inline bool two_room_enters_high(ActionId a) { return a.index != 0; }

struct NoisyGridParams {
  int size = 3;
  double slip = 0.1;
};

// size x size grid, actions up/down/left/right. The intended move succeeds
// with probability 1 - slip, otherwise the agent stays. Observation is the
// cell index; reward 1 in the last cell, 0 elsewhere.
EnvironmentModel noisy_grid(const NoisyGridParams& params, std::string name = {});

}  // namespace uailab
