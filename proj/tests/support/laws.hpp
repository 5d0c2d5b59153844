// Random history-dependent action laws for the k-step enumeration tests.
#pragma once

#include <map>
#include <memory>
#include <random>
#include <utility>
#include <vector>

#include "oracles.hpp"
#include "uailab/distribution.hpp"

namespace oracle {

// A law keyed by (history length, last observation), drawn once up front.
class TableLaw {
 public:
  TableLaw(std::mt19937_64& rng, int num_actions, int max_len, int num_obs, double zero_chance,
           double kappa = 0.0) {
    for (int len = 0; len <= max_len; ++len) {
      for (int o = -1; o < num_obs; ++o) {
        auto p = random_distribution(rng, num_actions, zero_chance);
        if (kappa > 0.0) p = uailab::floor_mix(p, kappa);
        table_->emplace(std::make_pair(len, o), std::move(p));
      }
    }
  }

  std::vector<double> operator()(const uailab::History& h) const {
    const int o = h.empty() ? -1 : h.back().percept.observation;
    return table_->at({static_cast<int>(h.size()), o});
  }

 private:
  std::shared_ptr<std::map<std::pair<int, int>, std::vector<double>>> table_ =
      std::make_shared<std::map<std::pair<int, int>, std::vector<double>>>();
};

}  // namespace oracle
