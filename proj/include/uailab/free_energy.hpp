#pragma once

#include <functional>

#include "uailab/bayes.hpp"
#include "uailab/empowerment.hpp"
#include "uailab/env.hpp"

namespace uailab {

// Conditional world model q(o | z, h) over whole k-step percept blocks.
using OutputModel = std::function<double(const ActionSequence&, const PerceptBlock&)>;

// Looks blocks up in a channel's matrix; blocks the channel never reaches get 0.
OutputModel output_model_from_channel(const Channel& ch);

// Terms of the free-energy functional over the k-step joint p(z, o) produced
// by pi* and the environment, with q(z | .) = prod zeta.
//
// The comparison joint for the exact divergence is q(z, o) = p(z) q(o | z):
// action prior shared with p, percepts from the supplied world model.
struct FreeEnergyReport {
  double predictive_error = 0.0;    // -E ln q(o | z)
  double fep_regularization = 0.0;  // E[-ln prod zeta + ln p(z)]
  double sum = 0.0;                 // predictive_error + fep_regularization
  double true_joint_kl = 0.0;       // KL(p(z, o) || q(z, o)), the direction as written
  double reverse_joint_kl = 0.0;    // KL(q(z, o) || p(z, o)); may be +inf
  double approx_residual = 0.0;     // |sum - true_joint_kl|, reported only
};

FreeEnergyReport free_energy_report(const JointTable& joint, const OutputModel& q_outputs);
FreeEnergyReport free_energy_report(const MixtureState& env, const History& h, int k,
                                    const ActionLaw& pi_star, const ActionLaw& zeta,
                                    const OutputModel& q_outputs);
FreeEnergyReport free_energy_report(const EnvironmentModel& env, const History& h, int k,
                                    const ActionLaw& pi_star, const ActionLaw& zeta,
                                    const OutputModel& q_outputs);

struct RegularizationReport {
  DecompositionReport decomposition;
  double fep_regularization = 0.0;
  // |fep_regularization - (kl_sum_term - pseudo_mi)|
  double residual_decomposition = 0.0;
  // |fep_regularization + variational_empowerment|
  double residual_sign_flip = 0.0;
};

RegularizationReport regularization_decomposition(const JointTable& joint);
RegularizationReport regularization_decomposition(const MixtureState& env, const History& h,
                                                  int k, const ActionLaw& pi_star,
                                                  const ActionLaw& zeta);
RegularizationReport regularization_decomposition(const EnvironmentModel& env,
                                                  const History& h, int k,
                                                  const ActionLaw& pi_star,
                                                  const ActionLaw& zeta);

}  // namespace uailab
