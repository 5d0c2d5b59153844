#include "uailab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "uailab/distribution.hpp"
#include "uailab/errors.hpp"

namespace uailab {

using nlohmann::json;

std::size_t Rng::sample(std::span<const double> probabilities) {
  const double u = uniform01();
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    if (probabilities[i] <= 0.0) continue;
    last_positive = i;
    cumulative += probabilities[i];
    if (u < cumulative) return i;
  }
  return last_positive;
}

AgentParams agent_params(const RunConfig& cfg) {
  return {cfg.planning, cfg.regularization, cfg.empowerment_k, cfg.beta};
}

// ---- records ---------------------------------------------------------------

json to_json(const StepRecord& r) {
  return {
      {"seed", r.seed},
      {"t", r.t},
      {"action", r.action},
      {"greedy_action", r.greedy_action},
      {"percept", {{"observation", r.percept.observation}, {"reward", r.percept.reward}}},
      {"env_posterior", r.env_posterior},
      {"policy_posterior", r.policy_posterior},
      {"q_star", r.q_star},
      {"q_zeta", r.q_zeta},
      {"pi_star", r.pi_star},
      {"zeta", r.zeta},
      {"lambda", r.lambda},
      {"v_star", r.v_star},
      {"v_policy", r.v_policy},
      {"value_gap", r.value_gap},
      {"kl_pi_star_zeta", r.kl_pi_star_zeta},
      {"l_aixi", r.l_aixi},
      {"l_self_aixi", r.l_self_aixi},
      {"loss_gap", r.loss_gap},
      {"empowerment_at_state", r.empowerment_at_state},
  };
}

namespace {

template <typename T>
void read_field(const json& j, const char* key, T& out) {
  if (!j.contains(key)) throw ConfigError(std::string("step record: missing field '") + key + "'");
  try {
    j.at(key).get_to(out);
  } catch (const json::exception&) {
    throw ConfigError(std::string("step record: field '") + key + "' has the wrong type");
  }
}

}  // namespace

StepRecord step_record_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("step record: expected a JSON object");
  StepRecord r;
  read_field(j, "seed", r.seed);
  read_field(j, "t", r.t);
  read_field(j, "action", r.action);
  read_field(j, "greedy_action", r.greedy_action);
  json percept;
  read_field(j, "percept", percept);
  read_field(percept, "observation", r.percept.observation);
  read_field(percept, "reward", r.percept.reward);
  read_field(j, "env_posterior", r.env_posterior);
  read_field(j, "policy_posterior", r.policy_posterior);
  read_field(j, "q_star", r.q_star);
  read_field(j, "q_zeta", r.q_zeta);
  read_field(j, "pi_star", r.pi_star);
  read_field(j, "zeta", r.zeta);
  read_field(j, "lambda", r.lambda);
  read_field(j, "v_star", r.v_star);
  read_field(j, "v_policy", r.v_policy);
  read_field(j, "value_gap", r.value_gap);
  read_field(j, "kl_pi_star_zeta", r.kl_pi_star_zeta);
  read_field(j, "l_aixi", r.l_aixi);
  read_field(j, "l_self_aixi", r.l_self_aixi);
  read_field(j, "loss_gap", r.loss_gap);
  read_field(j, "empowerment_at_state", r.empowerment_at_state);
  return r;
}

double recompute_loss_gap(const StepRecord& r) {
  const double l_aixi = aixi_loss(softmax_policy(r.q_star));
  const double l_self = self_aixi_loss(softmax_policy(r.q_zeta), r.pi_star, r.zeta,
                                       RegularizationParams{r.lambda, 1e-6});
  return std::abs(l_aixi - l_self);
}

// ---- episode runner ------------------------------------------------------------

StateBonus empowerment_bonus(const EnvironmentClass& c, int k, double beta) {
  StateBonus bonus;
  if (beta == 0.0) return bonus;
  for (const auto& m : c.models()) {
    std::vector<double> row(m.num_states());
    for (int s = 0; s < m.num_states(); ++s) {
      row[s] = beta * channel_capacity(build_channel(m, s, k)).capacity;
    }
    bonus.per_model.push_back(std::move(row));
  }
  return bonus;
}

std::vector<StepRecord> run_episode(const Scenario& sc, const AgentParams& params, int steps,
                                    std::uint64_t seed) {
  params.planning.validate();
  params.regularization.validate(sc.env_class.num_actions());
  if (steps < 1) throw ConfigError("run.steps must be >= 1");
  check_enumeration_size(sc.env_class.num_actions(), sc.env_class.num_percepts(),
                         params.empowerment_k);

  const auto& cls = sc.env_class;
  const auto& pc = sc.policy_class;
  const int actions = cls.num_actions();
  const double kappa = params.regularization.kappa;
  const StateBonus bonus = empowerment_bonus(cls, params.empowerment_k, params.beta);

  Rng rng(seed);
  History h;
  MixtureState belief(cls, MixtureBelief::prior_of(cls), h);
  PolicyBelief omega = PolicyBelief::prior_of(pc);
  int truth_state = sc.truth.initial_state();

  std::vector<StepRecord> records;
  records.reserve(steps);
  for (int t = 0; t < steps; ++t) {
    StepRecord r;
    r.seed = seed;
    r.t = t;
    r.lambda = params.regularization.lambda;

    r.q_star = optimal_q_values(belief, params.planning, bonus);
    r.v_star = *std::max_element(r.q_star.begin(), r.q_star.end());
    r.pi_star = floor_mix(one_hot(actions, argmax_lowest(r.q_star)), kappa);
    r.zeta = zeta_distribution(omega, pc, h, kappa);
    r.q_zeta = q_zeta_values(omega, pc, belief, params.planning, bonus);
    r.v_policy = mixture_policy_value(omega, pc, belief, PolicyModel::context_of(h),
                                      params.planning, bonus);
    r.value_gap = r.v_star - r.v_policy;

    r.greedy_action = greedy_action(r.q_zeta).index;
    const ActionId action =
        self_aixi_action(r.q_zeta, r.pi_star, r.zeta, params.regularization);
    r.action = action.index;

    r.kl_pi_star_zeta = kl_policy(r.pi_star, r.zeta);
    r.l_aixi = aixi_loss(softmax_policy(r.q_star));
    r.l_self_aixi =
        self_aixi_loss(softmax_policy(r.q_zeta), r.pi_star, r.zeta, params.regularization);
    r.loss_gap = std::abs(r.l_aixi - r.l_self_aixi);
    r.empowerment_at_state =
        channel_capacity(build_channel(belief, params.empowerment_k)).capacity;

    const auto law = sc.truth.law(truth_state, action);
    const int e = static_cast<int>(rng.sample(law));
    r.percept = sc.truth.percept(e);
    truth_state = sc.truth.next_state(truth_state, action, e);

    omega = policy_posterior_update(omega, pc, h, action);
    belief = belief.advanced(action, e);
    h = h.extended(action, r.percept);

    r.env_posterior = belief.belief().weights();
    r.policy_posterior = omega.weights();
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<StepRecord> run_episode(const RunConfig& cfg, std::uint64_t seed) {
  return run_episode(resolve(cfg), agent_params(cfg), cfg.steps, seed);
}

// ---- statistics ----------------------------------------------------------------

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw ConfigError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

TrendSummary decile_trend(const std::vector<std::vector<double>>& per_seed_series) {
  std::vector<double> first;
  std::vector<double> last;
  for (const auto& series : per_seed_series) {
    const std::size_t n = series.size();
    const std::size_t width = std::max<std::size_t>(1, n / 10);
    first.push_back(std::accumulate(series.begin(), series.begin() + width, 0.0) / width);
    last.push_back(std::accumulate(series.end() - width, series.end(), 0.0) / width);
  }
  TrendSummary s;
  s.first_decile = median(first);
  s.final_decile = median(last);
  s.decreasing = s.final_decile <= s.first_decile + 1e-12;
  return s;
}

namespace {

template <typename F>
std::vector<std::vector<double>> per_seed(const std::vector<std::vector<StepRecord>>& runs,
                                          F metric) {
  std::vector<std::vector<double>> out;
  for (const auto& run : runs) {
    std::vector<double> series;
    for (const auto& r : run) series.push_back(metric(r));
    out.push_back(std::move(series));
  }
  return out;
}

std::vector<SeriesPoint> pointwise(const std::vector<std::vector<double>>& series) {
  std::vector<SeriesPoint> out(series.front().size());
  for (std::size_t t = 0; t < out.size(); ++t) {
    std::vector<double> column;
    for (const auto& s : series) column.push_back(s[t]);
    out[t] = {median(column), quantile(column, 0.25), quantile(column, 0.75)};
  }
  return out;
}

std::vector<std::vector<StepRecord>> run_seeds(const Scenario& sc, const AgentParams& params,
                                               int steps,
                                               const std::vector<std::uint64_t>& seeds) {
  std::vector<std::vector<StepRecord>> runs;
  runs.reserve(seeds.size());
  for (auto seed : seeds) runs.push_back(run_episode(sc, params, steps, seed));
  return runs;
}

}  // namespace

ConvergenceResult convergence_experiment(const RunConfig& cfg,
                                         const std::vector<std::uint64_t>& seeds) {
  if (seeds.size() < 2) throw ConfigError("convergence experiment needs at least 2 seeds");
  const Scenario sc = resolve(cfg);
  const AgentParams params = agent_params(cfg);
  const double lambda = params.regularization.lambda;

  ConvergenceResult result;
  result.lambda = lambda;
  result.runs = run_seeds(sc, params, cfg.steps, seeds);

  const auto gap = per_seed(result.runs, [](const StepRecord& r) { return r.value_gap; });
  const auto kl = per_seed(result.runs, [](const StepRecord& r) { return r.kl_pi_star_zeta; });
  const auto loss = per_seed(result.runs, [](const StepRecord& r) { return r.loss_gap; });
  const auto lkl = per_seed(result.runs, [&](const StepRecord& r) {
    return std::abs(lambda) * r.kl_pi_star_zeta;
  });
  const auto diff = per_seed(result.runs, [&](const StepRecord& r) {
    return std::abs(r.loss_gap - lambda * r.kl_pi_star_zeta);
  });

  result.value_gap = pointwise(gap);
  result.kl = pointwise(kl);
  result.loss_gap = pointwise(loss);
  result.lambda_kl = pointwise(lkl);
  result.loss_gap_minus_lambda_kl = pointwise(diff);
  result.value_gap_trend = decile_trend(gap);
  result.kl_trend = decile_trend(kl);
  result.loss_gap_trend = decile_trend(loss);
  result.lambda_kl_trend = decile_trend(lkl);
  result.loss_gap_minus_lambda_kl_trend = decile_trend(diff);
  return result;
}

namespace {

json series_json(const std::vector<SeriesPoint>& s) {
  json out = {{"median", json::array()}, {"q25", json::array()}, {"q75", json::array()}};
  for (const auto& p : s) {
    out["median"].push_back(p.median);
    out["q25"].push_back(p.q25);
    out["q75"].push_back(p.q75);
  }
  return out;
}

json trend_json(const TrendSummary& t) {
  return {{"first_decile", t.first_decile},
          {"final_decile", t.final_decile},
          {"decreasing", t.decreasing}};
}

}  // namespace

json to_json(const ConvergenceResult& r, bool include_runs) {
  json out = {
      {"lambda", r.lambda},
      {"seeds", r.runs.size()},
      {"series",
       {{"value_gap", series_json(r.value_gap)},
        {"kl_pi_star_zeta", series_json(r.kl)},
        {"loss_gap", series_json(r.loss_gap)},
        {"abs_lambda_kl", series_json(r.lambda_kl)},
        {"abs_loss_gap_minus_lambda_kl", series_json(r.loss_gap_minus_lambda_kl)}}},
      {"trends",
       {{"value_gap", trend_json(r.value_gap_trend)},
        {"kl_pi_star_zeta", trend_json(r.kl_trend)},
        {"loss_gap", trend_json(r.loss_gap_trend)},
        {"abs_lambda_kl", trend_json(r.lambda_kl_trend)},
        {"abs_loss_gap_minus_lambda_kl", trend_json(r.loss_gap_minus_lambda_kl_trend)}}},
  };
  if (include_runs) {
    out["runs"] = json::array();
    for (const auto& run : r.runs) {
      json rows = json::array();
      for (const auto& rec : run) rows.push_back(to_json(rec));
      out["runs"].push_back(std::move(rows));
    }
  }
  return out;
}

// ---- lambda sweep --------------------------------------------------------------

std::vector<SweepResult> lambda_sweep(const RunConfig& cfg, const std::vector<double>& lambdas,
                                      const std::vector<std::uint64_t>& seeds) {
  if (lambdas.empty()) throw ConfigError("lambda sweep needs at least one lambda");
  if (seeds.empty()) throw ConfigError("lambda sweep needs at least one seed");
  const Scenario sc = resolve(cfg);
  AgentParams params = agent_params(cfg);

  params.regularization.lambda = 0.0;
  const auto baseline = run_seeds(sc, params, cfg.steps, seeds);

  std::vector<SweepResult> out;
  for (double lambda : lambdas) {
    params.regularization.lambda = lambda;
    SweepResult row;
    row.lambda = lambda;
    row.runs = lambda == 0.0 ? baseline : run_seeds(sc, params, cfg.steps, seeds);
    const auto gap = per_seed(row.runs, [](const StepRecord& r) { return r.value_gap; });
    const auto kl = per_seed(row.runs, [](const StepRecord& r) { return r.kl_pi_star_zeta; });
    row.final_value_gap = decile_trend(gap).final_decile;
    row.final_kl = decile_trend(kl).final_decile;
    double differing = 0.0;
    double reward = 0.0;
    double total = 0.0;
    for (std::size_t s = 0; s < row.runs.size(); ++s) {
      for (std::size_t t = 0; t < row.runs[s].size(); ++t) {
        if (row.runs[s][t].action != baseline[s][t].action) differing += 1.0;
        reward += row.runs[s][t].percept.reward;
        total += 1.0;
      }
    }
    row.action_divergence = differing / total;
    row.mean_reward = reward / total;
    out.push_back(std::move(row));
  }
  return out;
}

// ---- power-seeking demo --------------------------------------------------------

std::vector<DemoCell> power_seeking_demo(const RunConfig& cfg,
                                         const std::vector<std::uint64_t>& seeds,
                                         const DemoParams& params) {
  if (!cfg.environment.is_object() || cfg.environment.value("type", "") != "two_room") {
    throw ConfigError("demo: environment.type must be 'two_room'");
  }
  if (seeds.empty()) throw ConfigError("demo needs at least one seed");
  const auto base = make_env(cfg.environment);  // validates the descriptor
  (void)base;
  TwoRoomParams room;
  room.branch_high = cfg.environment.value("branch_high", room.branch_high);
  room.branch_low = cfg.environment.value("branch_low", room.branch_low);
  room.reward_high = cfg.environment.value("reward_high", room.reward_high);

  struct Rewards {
    const char* label;
    double low;
  };
  const Rewards layouts[] = {{"equal", room.reward_high},
                             {"low_advantage", room.reward_high + params.low_advantage}};

  std::vector<DemoCell> cells;
  for (double beta : params.betas) {
    for (const auto& layout : layouts) {
      TwoRoomParams p = room;
      p.reward_low = layout.low;
      const auto env = two_room(p);
      EnvironmentClass cls({env}, {1.0});
      int observations = env.num_observations();
      Scenario sc{env, cls, make_policy_class(cfg.policy_class, env.num_actions(), observations)};
      AgentParams agent = agent_params(cfg);
      agent.beta = beta;

      DemoCell cell;
      cell.beta = beta;
      cell.rewards = layout.label;
      cell.reward_low = p.reward_low;
      cell.reward_high = p.reward_high;
      double high = 0.0;
      for (auto seed : seeds) {
        const auto run = run_episode(sc, agent, 1, seed);
        if (two_room_enters_high(ActionId{run.front().action})) high += 1.0;
        cell.q_low = run.front().q_zeta[0];
        cell.q_high = run.front().q_zeta[1];
      }
      cell.fraction_high = high / static_cast<double>(seeds.size());
      cells.push_back(cell);
    }
  }
  return cells;
}

// ---- persistence ---------------------------------------------------------------

void write_trace(const std::filesystem::path& path,
                 const std::vector<std::vector<StepRecord>>& runs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  for (const auto& run : runs) {
    for (const auto& r : run) out << to_json(r).dump() << '\n';
  }
}

std::vector<StepRecord> read_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trace '" + path.string() + "'");
  std::vector<StepRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(step_record_from_json(json::parse(line)));
  }
  return out;
}

void write_summary_csv(const std::filesystem::path& path,
                       const std::vector<std::vector<StepRecord>>& runs, bool bits) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  const double scale = bits ? 1.0 / std::log(2.0) : 1.0;
  const char* unit = bits ? "bits" : "nats";
  out << "seed,steps,mean_reward,final_value_gap,final_kl_" << unit << ",final_loss_gap_"
      << unit << ",final_empowerment_" << unit << "\n";
  out << std::setprecision(10);
  std::vector<std::vector<double>> columns(5);
  for (const auto& run : runs) {
    if (run.empty()) continue;
    const std::size_t width = std::max<std::size_t>(1, run.size() / 10);
    double reward = 0.0;
    for (const auto& r : run) reward += r.percept.reward;
    double gap = 0.0, kl = 0.0, loss = 0.0, emp = 0.0;
    for (std::size_t t = run.size() - width; t < run.size(); ++t) {
      gap += run[t].value_gap;
      kl += run[t].kl_pi_star_zeta;
      loss += run[t].loss_gap;
      emp += run[t].empowerment_at_state;
    }
    const double n = static_cast<double>(width);
    const double row[5] = {reward / run.size(), gap / n, scale * kl / n, scale * loss / n,
                           scale * emp / n};
    out << run.front().seed << "," << run.size();
    for (int c = 0; c < 5; ++c) {
      out << "," << row[c];
      columns[c].push_back(row[c]);
    }
    out << "\n";
  }
  if (!columns.front().empty()) {
    out << "median," << runs.front().size();
    for (const auto& c : columns) out << "," << median(c);
    out << "\n";
  }
}

// ---- audit ---------------------------------------------------------------------------

namespace {

// Replays a hypothetical suffix of `h` (beyond the first `root_length`
// steps) on top of a root belief.
MixtureState advance_along(const MixtureState& root, std::size_t root_length,
                           const History& h) {
  MixtureState s = root;
  const auto steps = h.steps();
  for (std::size_t i = root_length; i < steps.size(); ++i) {
    const auto e = s.env_class().model(0).percept_index(steps[i].percept);
    if (!e) throw ConfigError("percept outside the class alphabet");
    s = s.advanced(steps[i].action, *e);
  }
  return s;
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

json audit_report(const RunConfig& cfg, bool bits) {
  const Scenario sc = resolve(cfg);
  const AgentParams params = agent_params(cfg);
  const auto& cls = sc.env_class;
  const auto& pc = sc.policy_class;
  const int k = params.empowerment_k;
  const double kappa = params.regularization.kappa;
  const StateBonus bonus = empowerment_bonus(cls, k, params.beta);
  const History root_history;
  const MixtureState root(cls, MixtureBelief::prior_of(cls), root_history);
  const PolicyBelief omega = PolicyBelief::prior_of(pc);

  const ActionLaw pi_star = [&](const History& h) {
    const auto s = advance_along(root, 0, h);
    const auto q = optimal_q_values(s, params.planning, bonus);
    return floor_mix(one_hot(q.size(), argmax_lowest(q)), kappa);
  };
  const ActionLaw zeta = [&](const History& h) {
    PolicyBelief w = omega;
    const auto steps = h.steps();
    History prefix;
    for (const auto& step : steps) {
      w = policy_posterior_update(w, pc, prefix, step.action);
      prefix = prefix.extended(step.action, step.percept);
    }
    return zeta_distribution(w, pc, h, kappa);
  };

  const auto joint = enumerate_joint(root, root_history, k, pi_star, zeta);
  const auto channel = build_channel(root, k);
  const auto fe = free_energy_report(joint, output_model_from_channel(channel));
  const auto reg = regularization_decomposition(joint);
  const auto& d = reg.decomposition;
  const auto cap = channel_capacity(channel);

  const double s = bits ? 1.0 / std::log(2.0) : 1.0;
  return {
      {"units", bits ? "bits" : "nats"},
      {"history_length", 0},
      {"k", k},
      {"capacity", s * cap.capacity},
      {"decomposition",
       {{"kl_sum_term", s * d.kl_sum_term},
        {"pseudo_mi", s * d.pseudo_mi},
        {"true_mi", s * d.true_mi},
        {"variational_empowerment", s * d.variational_empowerment},
        {"residual_identity", s * d.residual_identity}}},
      {"free_energy",
       {{"predictive_error", s * fe.predictive_error},
        {"fep_regularization", s * fe.fep_regularization},
        {"sum", s * fe.sum},
        {"true_joint_kl", s * fe.true_joint_kl},
        {"reverse_joint_kl", finite_or_null(s * fe.reverse_joint_kl)},
        {"approx_residual", s * fe.approx_residual}}},
      {"regularization",
       {{"fep_regularization", s * reg.fep_regularization},
        {"residual_decomposition", s * reg.residual_decomposition},
        {"residual_sign_flip", s * reg.residual_sign_flip}}},
  };
}

}  // namespace uailab
