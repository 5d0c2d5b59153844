#include "uailab/free_energy.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <utility>
#include <vector>

#include "uailab/errors.hpp"

namespace uailab {

namespace {

using BlockKey = std::pair<std::vector<int>, std::vector<std::pair<int, double>>>;

BlockKey key_of(const ActionSequence& z, const PerceptBlock& o) {
  BlockKey key;
  for (const auto& a : z) key.first.push_back(a.index);
  for (const auto& e : o) key.second.emplace_back(e.observation, e.reward);
  return key;
}

}  // namespace

OutputModel output_model_from_channel(const Channel& ch) {
  auto table = std::make_shared<std::map<BlockKey, double>>();
  for (std::size_t z = 0; z < ch.num_inputs(); ++z) {
    for (std::size_t o = 0; o < ch.num_outputs(); ++o) {
      (*table)[key_of(ch.inputs()[z], ch.outputs()[o])] = ch(z, o);
    }
  }
  return [table](const ActionSequence& z, const PerceptBlock& o) {
    const auto it = table->find(key_of(z, o));
    return it == table->end() ? 0.0 : it->second;
  };
}

FreeEnergyReport free_energy_report(const JointTable& joint, const OutputModel& q_outputs) {
  // q(o | z) for every block, for every z the joint can emit.
  std::vector<std::vector<double>> q_rows(joint.inputs.size());
  for (std::size_t z = 0; z < joint.inputs.size(); ++z) {
    if (joint.input_marginal[z] <= 0.0) continue;
    auto& row = q_rows[z];
    row.resize(joint.outputs.size());
    double total = 0.0;
    for (std::size_t o = 0; o < joint.outputs.size(); ++o) {
      row[o] = q_outputs(joint.inputs[z], joint.outputs[o]);
      if (!(row[o] >= 0.0)) throw ConfigError("q_outputs returned a negative probability");
      total += row[o];
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw ConfigError("q_outputs(. | z) is not a distribution over percept blocks");
    }
  }

  FreeEnergyReport r;
  // p(z, o) on its support, for the reverse direction.
  std::map<std::pair<std::size_t, std::size_t>, double> p_joint;
  for (const auto& e : joint.entries) {
    const double q_o = q_rows[e.input][e.output];
    if (q_o <= 0.0) throw SupportError("q_outputs is zero on a supported (z, o) pair");
    if (!std::isfinite(e.log_zeta)) {
      throw SupportError("product of zeta is zero on a supported trajectory");
    }
    const double log_pz = std::log(joint.input_marginal[e.input]);
    r.predictive_error -= e.prob * std::log(q_o);
    r.fep_regularization += e.prob * (log_pz - e.log_zeta);
    r.true_joint_kl += e.prob * (std::log(e.prob) - log_pz - std::log(q_o));
    p_joint[{e.input, e.output}] = e.prob;
  }
  for (std::size_t z = 0; z < joint.inputs.size(); ++z) {
    const double pz = joint.input_marginal[z];
    if (pz <= 0.0) continue;
    for (std::size_t o = 0; o < joint.outputs.size(); ++o) {
      const double q = pz * q_rows[z][o];
      if (q <= 0.0) continue;
      const auto it = p_joint.find({z, o});
      if (it == p_joint.end()) {
        r.reverse_joint_kl = std::numeric_limits<double>::infinity();
        break;
      }
      r.reverse_joint_kl += q * std::log(q / it->second);
    }
    if (std::isinf(r.reverse_joint_kl)) break;
  }
  r.true_joint_kl = std::max(r.true_joint_kl, 0.0);
  if (std::isfinite(r.reverse_joint_kl)) r.reverse_joint_kl = std::max(r.reverse_joint_kl, 0.0);
  r.sum = r.predictive_error + r.fep_regularization;
  r.approx_residual = std::abs(r.sum - r.true_joint_kl);
  return r;
}

FreeEnergyReport free_energy_report(const MixtureState& env, const History& h, int k,
                                    const ActionLaw& pi_star, const ActionLaw& zeta,
                                    const OutputModel& q_outputs) {
  return free_energy_report(enumerate_joint(env, h, k, pi_star, zeta), q_outputs);
}

FreeEnergyReport free_energy_report(const EnvironmentModel& env, const History& h, int k,
                                    const ActionLaw& pi_star, const ActionLaw& zeta,
                                    const OutputModel& q_outputs) {
  const EnvironmentClass single({env}, {1.0});
  return free_energy_report(MixtureState(single, MixtureBelief({1.0}), h), h, k, pi_star, zeta,
                            q_outputs);
}

RegularizationReport regularization_decomposition(const JointTable& joint) {
  RegularizationReport r;
  r.decomposition = decomposition_report(joint);
  for (const auto& e : joint.entries) {
    r.fep_regularization += e.prob * (std::log(joint.input_marginal[e.input]) - e.log_zeta);
  }
  const auto& d = r.decomposition;
  r.residual_decomposition = std::abs(r.fep_regularization - (d.kl_sum_term - d.pseudo_mi));
  r.residual_sign_flip = std::abs(r.fep_regularization + d.variational_empowerment);
  return r;
}

RegularizationReport regularization_decomposition(const MixtureState& env, const History& h,
                                                  int k, const ActionLaw& pi_star,
                                                  const ActionLaw& zeta) {
  return regularization_decomposition(enumerate_joint(env, h, k, pi_star, zeta));
}

RegularizationReport regularization_decomposition(const EnvironmentModel& env,
                                                  const History& h, int k,
                                                  const ActionLaw& pi_star,
                                                  const ActionLaw& zeta) {
  const EnvironmentClass single({env}, {1.0});
  return regularization_decomposition(MixtureState(single, MixtureBelief({1.0}), h), h, k,
                                      pi_star, zeta);
}

}  // namespace uailab
