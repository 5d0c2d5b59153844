#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "uailab/config.hpp"
#include "uailab/empowerment.hpp"
#include "uailab/free_energy.hpp"

namespace uailab {

// Reproducible stream: std::mt19937_64 seeded with the run seed (its output
// sequence is fixed by the C++ standard). Uniforms take the top 53 bits of
// one draw; percepts are sampled by inverse CDF over the alphabet order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::size_t sample(std::span<const double> probabilities);

 private:
  std::mt19937_64 engine_;
};

struct AgentParams {
  PlanningParams planning;
  RegularizationParams regularization;
  int empowerment_k = 1;
  double beta = 0.0;
};

AgentParams agent_params(const RunConfig& cfg);

// One interaction step. Decision-time quantities refer to h_<t; the
// posteriors are the ones after conditioning on (action, percept).
struct StepRecord {
  std::uint64_t seed = 0;
  int t = 0;
  int action = 0;
  int greedy_action = 0;  // argmax of q_zeta, the lambda = 0 choice
  Percept percept;
  std::vector<double> env_posterior;
  std::vector<double> policy_posterior;
  std::vector<double> q_star;   // Q*_xi(h, .)
  std::vector<double> q_zeta;   // Q_xi^zeta(h, .)
  std::vector<double> pi_star;  // floored one-hot argmax of q_star
  std::vector<double> zeta;     // floored mixture policy
  double lambda = 0.0;
  double v_star = 0.0;
  double v_policy = 0.0;
  double value_gap = 0.0;
  double kl_pi_star_zeta = 0.0;
  double l_aixi = 0.0;
  double l_self_aixi = 0.0;
  double loss_gap = 0.0;
  double empowerment_at_state = 0.0;  // nats

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

nlohmann::json to_json(const StepRecord& r);
// Throws ConfigError naming the first missing or mistyped field.
StepRecord step_record_from_json(const nlohmann::json& j);

// Per-hypothesis bonus table beta * capacity(k-step channel at each state);
// empty when beta == 0.
StateBonus empowerment_bonus(const EnvironmentClass& c, int k, double beta);

std::vector<StepRecord> run_episode(const Scenario& sc, const AgentParams& params, int steps,
                                    std::uint64_t seed);
std::vector<StepRecord> run_episode(const RunConfig& cfg, std::uint64_t seed);

// |L_AIXI - L_SelfAIXI| recomputed from the distributions stored in a record.
double recompute_loss_gap(const StepRecord& r);

// ---- convergence -----------------------------------------------------------------

struct SeriesPoint {
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
};

// First- and final-decile aggregates: per seed, the mean over the first and
// last 10% of steps, then the median across seeds.
struct TrendSummary {
  double first_decile = 0.0;
  double final_decile = 0.0;
  bool decreasing = false;
};

struct ConvergenceResult {
  double lambda = 0.0;
  std::vector<SeriesPoint> value_gap;
  std::vector<SeriesPoint> kl;
  std::vector<SeriesPoint> loss_gap;
  std::vector<SeriesPoint> lambda_kl;               // |lambda| * KL
  std::vector<SeriesPoint> loss_gap_minus_lambda_kl;  // | loss_gap - lambda KL |
  TrendSummary value_gap_trend;
  TrendSummary kl_trend;
  TrendSummary loss_gap_trend;
  TrendSummary lambda_kl_trend;
  TrendSummary loss_gap_minus_lambda_kl_trend;
  std::vector<std::vector<StepRecord>> runs;  // one per seed
};

double median(std::vector<double> values);
double quantile(std::vector<double> values, double q);
TrendSummary decile_trend(const std::vector<std::vector<double>>& per_seed_series);

ConvergenceResult convergence_experiment(const RunConfig& cfg,
                                         const std::vector<std::uint64_t>& seeds);
nlohmann::json to_json(const ConvergenceResult& r, bool include_runs = false);

// ---- lambda sweep ------------------------------------------------------------------

struct SweepResult {
  double lambda = 0.0;
  double final_value_gap = 0.0;
  double final_kl = 0.0;
  double action_divergence = 0.0;  // fraction of steps whose action differs from lambda = 0
  double mean_reward = 0.0;
  std::vector<std::vector<StepRecord>> runs;
};

std::vector<SweepResult> lambda_sweep(const RunConfig& cfg, const std::vector<double>& lambdas,
                                      const std::vector<std::uint64_t>& seeds);

// ---- power-seeking demo ------------------------------------------------------------

struct DemoCell {
  double beta = 0.0;
  std::string rewards;  // "equal" or "low_advantage"
  double reward_low = 0.0;
  double reward_high = 0.0;
  double fraction_high = 0.0;  // share of seeds entering the high-control room at t = 0
  double q_low = 0.0;          // Q_xi^zeta of entering each room
  double q_high = 0.0;
};

struct DemoParams {
  std::vector<double> betas{0.0, 0.1};
  double low_advantage = 0.2;  // reward_low - reward_high in the asymmetric cell
};

std::vector<DemoCell> power_seeking_demo(const RunConfig& cfg,
                                         const std::vector<std::uint64_t>& seeds,
                                         const DemoParams& params = {});

// ---- persistence --------------------------------------------------------------------

void write_trace(const std::filesystem::path& path,
                 const std::vector<std::vector<StepRecord>>& runs);
std::vector<StepRecord> read_trace(const std::filesystem::path& path);
// One row per seed plus an aggregate row; information columns in nats or bits.
void write_summary_csv(const std::filesystem::path& path,
                       const std::vector<std::vector<StepRecord>>& runs, bool bits);

// The k-step decomposition and free-energy audit at the empty history for a
// resolved scenario: pi* from expectimax, zeta from the policy prior, the
// agent's mixture channel as world model.
nlohmann::json audit_report(const RunConfig& cfg, bool bits);

}  // namespace uailab
