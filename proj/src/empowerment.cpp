#include "uailab/empowerment.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <string>

#include "uailab/distribution.hpp"
#include "uailab/errors.hpp"

namespace uailab {

void check_enumeration_size(int num_actions, int num_percepts, int k) {
  if (k < 1) throw ConfigError("empowerment horizon k must be >= 1");
  const double joint = std::pow(static_cast<double>(num_actions) * num_percepts, k);
  if (joint > kEnumerationLimit) {
    throw SizeError("k-step enumeration needs " + std::to_string(joint) +
                    " joint entries, limit is 1e6");
  }
}

// ---- Channel ---------------------------------------------------------------

Channel::Channel(std::vector<ActionSequence> inputs, std::vector<PerceptBlock> outputs,
                 std::vector<double> matrix)
    : inputs_(std::move(inputs)), outputs_(std::move(outputs)), matrix_(std::move(matrix)) {
  if (inputs_.empty() || outputs_.empty()) throw ConfigError("channel: empty input or output set");
  if (matrix_.size() != inputs_.size() * outputs_.size()) {
    throw ConfigError("channel: matrix must be inputs x outputs");
  }
  for (std::size_t z = 0; z < inputs_.size(); ++z) require_distribution(row(z), "channel row");
}

std::size_t Channel::distinct_rows(double tol) const {
  std::vector<std::size_t> reps;
  for (std::size_t z = 0; z < num_inputs(); ++z) {
    const bool seen = std::any_of(reps.begin(), reps.end(), [&](std::size_t r) {
      for (std::size_t o = 0; o < num_outputs(); ++o) {
        if (std::abs((*this)(z, o) - (*this)(r, o)) > tol) return false;
      }
      return true;
    });
    if (!seen) reps.push_back(z);
  }
  return reps.size();
}

namespace {

std::vector<ActionSequence> all_sequences(int num_actions, int k) {
  std::size_t count = 1;
  for (int i = 0; i < k; ++i) count *= num_actions;
  std::vector<ActionSequence> out(count, ActionSequence(k));
  for (std::size_t code = 0; code < count; ++code) {
    std::size_t c = code;
    for (int i = k - 1; i >= 0; --i) {
      out[code][i] = ActionId{static_cast<int>(c % num_actions)};
      c /= num_actions;
    }
  }
  return out;
}

std::vector<PerceptBlock> all_blocks(const std::vector<Percept>& alphabet, int k) {
  const std::size_t n = alphabet.size();
  std::size_t count = 1;
  for (int i = 0; i < k; ++i) count *= n;
  std::vector<PerceptBlock> out(count, PerceptBlock(k));
  for (std::size_t code = 0; code < count; ++code) {
    std::size_t c = code;
    for (int i = k - 1; i >= 0; --i) {
      out[code][i] = alphabet[c % n];
      c /= n;
    }
  }
  return out;
}

class ChannelBuilder {
 public:
  ChannelBuilder(int num_actions, int num_percepts, int k)
      : actions_(num_actions),
        percepts_(num_percepts),
        k_(k),
        out_count_(static_cast<std::size_t>(std::pow(num_percepts, k) + 0.5)),
        dense_(static_cast<std::size_t>(std::pow(num_actions, k) + 0.5) * out_count_, 0.0) {}

  void rollout(const MixtureState& s, int depth, std::size_t z, std::size_t o, double prob) {
    if (depth == k_) {
      dense_[z * out_count_ + o] += prob;
      return;
    }
    std::vector<double> xi(percepts_);
    for (int a = 0; a < actions_; ++a) {
      s.predictive(ActionId{a}, xi);
      for (int e = 0; e < percepts_; ++e) {
        if (xi[e] <= 0.0) continue;
        const std::size_t zz = z * actions_ + a;
        const std::size_t oo = o * percepts_ + e;
        if (depth + 1 == k_) {
          dense_[zz * out_count_ + oo] += prob * xi[e];
        } else {
          rollout(s.advanced(ActionId{a}, e), depth + 1, zz, oo, prob * xi[e]);
        }
      }
    }
  }

  Channel finish(const std::vector<Percept>& alphabet) const {
    const std::size_t in_count = dense_.size() / out_count_;
    std::vector<std::size_t> reachable;
    for (std::size_t o = 0; o < out_count_; ++o) {
      for (std::size_t z = 0; z < in_count; ++z) {
        if (dense_[z * out_count_ + o] > 0.0) {
          reachable.push_back(o);
          break;
        }
      }
    }
    const auto blocks = all_blocks(alphabet, k_);
    std::vector<PerceptBlock> outputs;
    for (std::size_t o : reachable) outputs.push_back(blocks[o]);
    std::vector<double> matrix;
    matrix.reserve(in_count * reachable.size());
    for (std::size_t z = 0; z < in_count; ++z) {
      for (std::size_t o : reachable) matrix.push_back(dense_[z * out_count_ + o]);
    }
    return {all_sequences(actions_, k_), std::move(outputs), std::move(matrix)};
  }

 private:
  int actions_;
  int percepts_;
  int k_;
  std::size_t out_count_;
  std::vector<double> dense_;
};

}  // namespace

Channel build_channel(const MixtureState& s, int k) {
  const auto& c = s.env_class();
  check_enumeration_size(c.num_actions(), c.num_percepts(), k);
  ChannelBuilder builder(c.num_actions(), c.num_percepts(), k);
  builder.rollout(s, 0, 0, 0, 1.0);
  return builder.finish(c.percepts());
}

Channel build_channel(const MixtureBelief& b, const EnvironmentClass& c, const History& h,
                      int k) {
  return build_channel(MixtureState(c, b, h), k);
}

Channel build_channel(const EnvironmentModel& model, int machine_state, int k) {
  const EnvironmentClass single({model}, {1.0});
  return build_channel(MixtureState(single, MixtureBelief({1.0}), {machine_state}), k);
}

Channel build_channel(const EnvironmentModel& model, const History& h, int k) {
  return build_channel(model, model.state_after(h), k);
}

Channel channel_from_matrix(const std::vector<std::vector<double>>& rows) {
  if (rows.empty() || rows.front().empty()) throw ConfigError("channel matrix is empty");
  const std::size_t cols = rows.front().size();
  std::vector<ActionSequence> inputs;
  std::vector<double> matrix;
  for (std::size_t z = 0; z < rows.size(); ++z) {
    if (rows[z].size() != cols) throw ConfigError("channel matrix is ragged");
    inputs.push_back({ActionId{static_cast<int>(z)}});
    matrix.insert(matrix.end(), rows[z].begin(), rows[z].end());
  }
  std::vector<PerceptBlock> outputs;
  for (std::size_t o = 0; o < cols; ++o) outputs.push_back({Percept{static_cast<int>(o), 0.0}});
  return {std::move(inputs), std::move(outputs), std::move(matrix)};
}

Channel binary_symmetric_channel(double crossover) {
  if (!(crossover >= 0.0 && crossover <= 1.0)) throw ConfigError("crossover must be in [0, 1]");
  return channel_from_matrix({{1.0 - crossover, crossover}, {crossover, 1.0 - crossover}});
}

Channel noiseless_channel(int size) {
  if (size < 1) throw ConfigError("noiseless channel size must be >= 1");
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < size; ++i) rows.push_back(one_hot(size, i));
  return channel_from_matrix(rows);
}

// ---- information quantities ----------------------------------------------

namespace {

std::vector<double> output_marginal(const Channel& ch, std::span<const double> p) {
  std::vector<double> q(ch.num_outputs(), 0.0);
  for (std::size_t z = 0; z < ch.num_inputs(); ++z) {
    if (p[z] == 0.0) continue;
    const auto row = ch.row(z);
    for (std::size_t o = 0; o < q.size(); ++o) q[o] += p[z] * row[o];
  }
  return q;
}

// KL(P(. | z) || q) for every input.
std::vector<double> row_divergences(const Channel& ch, const std::vector<double>& q) {
  std::vector<double> d(ch.num_inputs(), 0.0);
  for (std::size_t z = 0; z < ch.num_inputs(); ++z) {
    const auto row = ch.row(z);
    double s = 0.0;
    for (std::size_t o = 0; o < row.size(); ++o) {
      if (row[o] > 0.0) s += row[o] * std::log(row[o] / q[o]);
    }
    d[z] = s;
  }
  return d;
}

void check_input(const Channel& ch, std::span<const double> p) {
  if (p.size() != ch.num_inputs()) throw ConfigError("input distribution size mismatch");
  require_distribution(p, "input distribution");
}

}  // namespace

double mutual_information(const Channel& ch, std::span<const double> p) {
  check_input(ch, p);
  const auto q = output_marginal(ch, p);
  double info = 0.0;
  for (std::size_t z = 0; z < ch.num_inputs(); ++z) {
    if (p[z] == 0.0) continue;
    const auto row = ch.row(z);
    for (std::size_t o = 0; o < row.size(); ++o) {
      if (row[o] > 0.0) info += p[z] * row[o] * std::log(row[o] / q[o]);
    }
  }
  return std::max(info, 0.0);
}

EmpowermentResult channel_capacity(const Channel& ch, double tol, int max_iter) {
  if (!(tol > 0.0)) throw ConfigError("capacity tolerance must be positive");
  EmpowermentResult result;
  std::vector<double> p = uniform(ch.num_inputs());
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
  // Over-relaxed steps p_z ~ p_z exp(mu D_z). mu = 1 is the classic update;
  // larger mu is tried and kept only while it beats the classic step, which
  // rescues near-identical rows where the classic update crawls.
  double mu = 1.0;
  auto step = [&](const std::vector<double>& d, double scale) {
    std::vector<double> next(p.size());
    const double top = *std::max_element(d.begin(), d.end());
    double z_norm = 0.0;
    for (std::size_t z = 0; z < p.size(); ++z) {
      next[z] = p[z] * std::exp(scale * (d[z] - top));
      z_norm += next[z];
    }
    for (double& x : next) x /= z_norm;
    return next;
  };
  for (int it = 0; it <= max_iter; ++it) {
    const auto q = output_marginal(ch, p);
    const auto d = row_divergences(ch, q);
    lower = 0.0;
    for (std::size_t z = 0; z < p.size(); ++z) lower += p[z] * d[z];
    lower = std::max(lower, 0.0);
    upper = *std::max_element(d.begin(), d.end());
    assert(result.objective.empty() || lower >= result.objective.back() - 1e-12);
    result.objective.push_back(lower);
    result.iterations = it;
    if (upper - lower < tol) {
      result.capacity = lower;
      result.optimal_input = std::move(p);
      result.residual = std::max(upper - lower, 0.0);
      return result;
    }
    if (it == max_iter) break;
    auto classic = step(d, 1.0);
    if (mu > 1.0 || it > 0) {
      auto relaxed = step(d, 2.0 * mu);
      bool keeps_support = true;
      for (std::size_t z = 0; z < p.size(); ++z) keeps_support &= relaxed[z] > 0.0 || p[z] == 0.0;
      if (keeps_support && mutual_information(ch, relaxed) > mutual_information(ch, classic)) {
        mu *= 2.0;
        p = std::move(relaxed);
        continue;
      }
      mu = std::max(1.0, mu / 2.0);
    }
    p = std::move(classic);
  }
  throw ConvergenceError("channel capacity did not converge within " + std::to_string(max_iter) +
                             " iterations",
                         lower, upper);
}

Decoder::Decoder(std::vector<std::vector<double>> rows) : rows_(std::move(rows)) {
  if (rows_.empty()) throw ConfigError("decoder needs one row per output");
  for (const auto& r : rows_) {
    if (r.size() != rows_.front().size()) throw ConfigError("decoder rows differ in length");
    require_distribution(r, "decoder row", 1e-9);
  }
}

Decoder bayes_posterior(const Channel& ch, std::span<const double> p) {
  check_input(ch, p);
  const auto q = output_marginal(ch, p);
  std::vector<std::vector<double>> rows(ch.num_outputs(), std::vector<double>(ch.num_inputs()));
  for (std::size_t o = 0; o < ch.num_outputs(); ++o) {
    if (q[o] <= 0.0) {
      rows[o] = uniform(ch.num_inputs());
      continue;
    }
    for (std::size_t z = 0; z < ch.num_inputs(); ++z) rows[o][z] = p[z] * ch(z, o) / q[o];
  }
  return Decoder(std::move(rows));
}

double variational_empowerment(const Channel& ch, std::span<const double> p, const Decoder& q) {
  check_input(ch, p);
  if (q.num_outputs() != ch.num_outputs() || q.row(0).size() != ch.num_inputs()) {
    throw ConfigError("decoder shape does not match the channel");
  }
  double total = 0.0;
  for (std::size_t z = 0; z < ch.num_inputs(); ++z) {
    if (p[z] == 0.0) continue;
    for (std::size_t o = 0; o < ch.num_outputs(); ++o) {
      const double mass = p[z] * ch(z, o);
      if (mass == 0.0) continue;
      if (q(z, o) <= 0.0) {
        throw SupportError("decoder assigns zero probability to a supported (z, o) pair");
      }
      total += mass * (std::log(q(z, o)) - std::log(p[z]));
    }
  }
  return total;
}

// ---- product-form policy quantities --------------------------------------------

double product_policy_prob(const ActionLaw& law, const History& h, const ActionSequence& z,
                           const PerceptBlock& o) {
  if (z.size() != o.size()) throw ConfigError("action sequence and percept block differ in length");
  History cur = h;
  double prob = 1.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const auto dist = law(cur);
    if (z[i].index < 0 || z[i].index >= static_cast<int>(dist.size())) {
      throw ConfigError("action outside the policy's alphabet");
    }
    prob *= dist[z[i].index];
    cur = cur.extended(z[i], o[i]);
  }
  return prob;
}

namespace {

class JointEnumerator {
 public:
  JointEnumerator(const ActionLaw& pi_star, const ActionLaw& zeta, int actions, int percepts,
                  int k, JointTable& out)
      : pi_star_(pi_star), zeta_(zeta), actions_(actions), percepts_(percepts), k_(k), out_(out) {}

  void visit(const MixtureState& s, const History& h, int depth, std::size_t z, std::size_t o,
             double prob, double log_pi, double log_zeta) {
    if (depth == k_) {
      out_.entries.push_back({z, o, prob, log_pi, log_zeta});
      return;
    }
    const auto ps = pi_star_(h);
    const auto zs = zeta_(h);
    if (static_cast<int>(ps.size()) != actions_ || static_cast<int>(zs.size()) != actions_) {
      throw ConfigError("pi* and zeta must return one probability per action");
    }
    require_distribution(ps, "pi*", 1e-9);
    require_distribution(zs, "zeta", 1e-9);
    const double kl = kl_divergence(ps, zs);
    if (!std::isfinite(kl)) throw SupportError("zeta is zero where pi* has mass");
    out_.expected_kl_sum += prob * kl;
    std::vector<double> xi(percepts_);
    for (int a = 0; a < actions_; ++a) {
      if (ps[a] <= 0.0) continue;
      const ActionId act{a};
      s.predictive(act, xi);
      const double lz = zs[a] > 0.0 ? std::log(zs[a]) : -std::numeric_limits<double>::infinity();
      for (int e = 0; e < percepts_; ++e) {
        if (xi[e] <= 0.0) continue;
        const Percept& percept = s.env_class().percepts()[e];
        const double p_next = prob * ps[a] * xi[e];
        const std::size_t zz = z * actions_ + a;
        const std::size_t oo = o * percepts_ + e;
        if (depth + 1 == k_) {
          out_.entries.push_back({zz, oo, p_next, log_pi + std::log(ps[a]), log_zeta + lz});
        } else {
          visit(s.advanced(act, e), h.extended(act, percept), depth + 1, zz, oo, p_next,
                log_pi + std::log(ps[a]), log_zeta + lz);
        }
      }
    }
  }

 private:
  const ActionLaw& pi_star_;
  const ActionLaw& zeta_;
  int actions_;
  int percepts_;
  int k_;
  JointTable& out_;
};

}  // namespace

JointTable enumerate_joint(const MixtureState& root, const History& h, int k,
                           const ActionLaw& pi_star, const ActionLaw& zeta) {
  const auto& c = root.env_class();
  check_enumeration_size(c.num_actions(), c.num_percepts(), k);
  JointTable table;
  table.inputs = all_sequences(c.num_actions(), k);
  table.outputs = all_blocks(c.percepts(), k);
  JointEnumerator(pi_star, zeta, c.num_actions(), c.num_percepts(), k, table)
      .visit(root, h, 0, 0, 0, 1.0, 0.0, 0.0);
  table.input_marginal.assign(table.inputs.size(), 0.0);
  table.output_marginal.assign(table.outputs.size(), 0.0);
  for (const auto& entry : table.entries) {
    table.input_marginal[entry.input] += entry.prob;
    table.output_marginal[entry.output] += entry.prob;
  }
  return table;
}

DecompositionReport decomposition_report(const JointTable& joint) {
  DecompositionReport r;
  r.kl_sum_term = joint.expected_kl_sum;
  for (const auto& e : joint.entries) {
    if (!std::isfinite(e.log_zeta)) {
      throw SupportError("product of zeta is zero on a supported trajectory");
    }
    const double log_pz = std::log(joint.input_marginal[e.input]);
    r.pseudo_mi += e.prob * (e.log_pi_star - log_pz);
    r.variational_empowerment += e.prob * (e.log_zeta - log_pz);
    r.true_mi += e.prob * (std::log(e.prob) - log_pz - std::log(joint.output_marginal[e.output]));
  }
  r.residual_identity = std::abs(r.variational_empowerment - (-r.kl_sum_term + r.pseudo_mi));
  return r;
}

DecompositionReport decomposition_report(const MixtureState& env, const History& h, int k,
                                         const ActionLaw& pi_star, const ActionLaw& zeta) {
  return decomposition_report(enumerate_joint(env, h, k, pi_star, zeta));
}

DecompositionReport decomposition_report(const EnvironmentModel& env, const History& h, int k,
                                         const ActionLaw& pi_star, const ActionLaw& zeta) {
  const EnvironmentClass single({env}, {1.0});
  return decomposition_report(MixtureState(single, MixtureBelief({1.0}), h), h, k, pi_star,
                              zeta);
}

}  // namespace uailab
