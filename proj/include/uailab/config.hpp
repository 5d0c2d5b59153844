#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "uailab/env.hpp"
#include "uailab/planner.hpp"
#include "uailab/self_aixi.hpp"

namespace uailab {

// Everything a run needs, as read from the JSON configuration document.
//
//   {
//     "environment":   <env descriptor> | {"class_index": i},
//     "env_class":     {"models": [<env descriptor>...], "prior": [...]},
//     "policy_class":  {"kind": "constant" | "stationary", "epsilon": 0.0,
//                       "include_uniform": true, "prior": [...]},
//     "planning":      {"horizon": m, "gamma": g},
//     "regularization":{"lambda": l, "kappa": 1e-6},
//     "empowerment":   {"k": 1, "beta": 0.0},
//     "run":           {"steps": T, "seeds": [...]},
//     "output":        {"dir": "results", "bits": false}
//   }
//
// Env descriptors: {"type": "bernoulli_bandit", "probabilities": [...]},
// {"type": "deterministic_chain", "transitions": [[...]], "rewards": [[...]]},
// {"type": "two_room", "branch_high", "branch_low", "reward_high", "reward_low"},
// {"type": "noisy_grid", "size", "slip"}. Each accepts an optional "name".
struct RunConfig {
  nlohmann::json environment;
  nlohmann::json env_class;     // null: the class is {environment}
  nlohmann::json policy_class;  // null: constant policies + uniform
  PlanningParams planning{4, 0.3};
  RegularizationParams regularization{};
  int empowerment_k = 1;
  double beta = 0.0;
  int steps = 100;
  std::vector<std::uint64_t> seeds{0};
  std::string output_dir = "results";
  bool bits = false;

  void validate() const;
};

RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& cfg);

EnvironmentModel make_env(const nlohmann::json& descriptor);
EnvironmentClass make_env_class(const nlohmann::json& descriptor);
PolicyClass make_policy_class(const nlohmann::json& descriptor, int num_actions,
                              int num_observations);

// The concrete objects a RunConfig resolves to.
struct Scenario {
  EnvironmentModel truth;
  EnvironmentClass env_class;
  PolicyClass policy_class;
};

Scenario resolve(const RunConfig& cfg);

}  // namespace uailab
