// Command-line front end for the agent laboratory.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "uailab/config.hpp"
#include "uailab/empowerment.hpp"
#include "uailab/errors.hpp"
#include "uailab/harness.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace uailab;

namespace {

constexpr int kUsageError = 2;
constexpr int kRuntimeError = 1;

struct Common {
  std::string config;
  std::string out;
  bool bits = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON configuration file")->required();
  cmd->add_option("--out", c.out, "output directory (overrides output.dir)");
  cmd->add_flag("--bits", c.bits, "report information quantities in bits");
}

RunConfig load(const Common& c) {
  RunConfig cfg = load_run_config(c.config);
  if (!c.out.empty()) cfg.output_dir = c.out;
  cfg.bits = cfg.bits || c.bits;
  return cfg;
}

fs::path prepare_dir(const RunConfig& cfg) {
  fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir.string() + "'");
  return dir;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

double unit_scale(bool bits) { return bits ? 1.0 / std::log(2.0) : 1.0; }

int cmd_run(const Common& c) {
  const RunConfig cfg = load(c);
  const fs::path dir = prepare_dir(cfg);
  std::vector<std::vector<StepRecord>> runs;
  for (auto seed : cfg.seeds) runs.push_back(run_episode(cfg, seed));
  write_trace(dir / "trace.jsonl", runs);
  write_summary_csv(dir / "summary.csv", runs, cfg.bits);
  json per_seed = json::array();
  for (const auto& run : runs) {
    double reward = 0.0;
    for (const auto& r : run) reward += r.percept.reward;
    per_seed.push_back({{"seed", run.empty() ? 0 : run.front().seed},
                        {"steps", run.size()},
                        {"total_reward", reward}});
  }
  write_json(dir / "report.json", {{"config", to_json(cfg)},
                                   {"units", cfg.bits ? "bits" : "nats"},
                                   {"runs", per_seed}});
  std::cout << "wrote " << runs.size() << " run(s) to " << dir.string() << "\n";
  return 0;
}

int cmd_converge(const Common& c) {
  const RunConfig cfg = load(c);
  const fs::path dir = prepare_dir(cfg);
  const auto result = convergence_experiment(cfg, cfg.seeds);
  write_trace(dir / "trace.jsonl", result.runs);
  write_summary_csv(dir / "summary.csv", result.runs, cfg.bits);
  json report = to_json(result);
  report["config"] = to_json(cfg);
  write_json(dir / "report.json", report);
  const double s = unit_scale(cfg.bits);
  std::cout << std::setprecision(6) << "lambda " << result.lambda << "\n"
            << "value_gap  first " << result.value_gap_trend.first_decile << "  final "
            << result.value_gap_trend.final_decile << "\n"
            << "kl         first " << s * result.kl_trend.first_decile << "  final "
            << s * result.kl_trend.final_decile << "\n"
            << "loss_gap   first " << s * result.loss_gap_trend.first_decile << "  final "
            << s * result.loss_gap_trend.final_decile << "\n";
  return 0;
}

int cmd_sweep(const Common& c, const std::vector<double>& lambdas) {
  const RunConfig cfg = load(c);
  const fs::path dir = prepare_dir(cfg);
  const auto rows = lambda_sweep(cfg, lambdas, cfg.seeds);
  const double s = unit_scale(cfg.bits);
  const char* unit = cfg.bits ? "bits" : "nats";

  std::ofstream csv(dir / "summary.csv", std::ios::binary);
  if (!csv) throw std::runtime_error("cannot write summary.csv");
  csv << std::setprecision(10) << "lambda,final_value_gap,final_kl_" << unit
      << ",action_divergence,mean_reward\n";
  json report = json::array();
  std::vector<std::vector<StepRecord>> all_runs;
  for (const auto& r : rows) {
    csv << r.lambda << "," << r.final_value_gap << "," << s * r.final_kl << ","
        << r.action_divergence << "," << r.mean_reward << "\n";
    report.push_back({{"lambda", r.lambda},
                      {"final_value_gap", r.final_value_gap},
                      {"final_kl", s * r.final_kl},
                      {"action_divergence", r.action_divergence},
                      {"mean_reward", r.mean_reward}});
    all_runs.insert(all_runs.end(), r.runs.begin(), r.runs.end());
    std::cout << "lambda " << r.lambda << "  final_value_gap " << r.final_value_gap
              << "  final_kl " << s * r.final_kl << "  action_divergence "
              << r.action_divergence << "\n";
  }
  write_trace(dir / "trace.jsonl", all_runs);
  write_json(dir / "report.json", {{"units", unit}, {"rows", report}});
  return 0;
}

int cmd_demo(const Common& c, const std::vector<double>& betas, double low_advantage) {
  const RunConfig cfg = load(c);
  const fs::path dir = prepare_dir(cfg);
  DemoParams params;
  if (!betas.empty()) params.betas = betas;
  params.low_advantage = low_advantage;
  const auto cells = power_seeking_demo(cfg, cfg.seeds, params);
  json report = json::array();
  for (const auto& cell : cells) {
    report.push_back({{"beta", cell.beta},
                      {"rewards", cell.rewards},
                      {"reward_low", cell.reward_low},
                      {"reward_high", cell.reward_high},
                      {"fraction_high", cell.fraction_high},
                      {"q_low", cell.q_low},
                      {"q_high", cell.q_high}});
    std::cout << "beta " << cell.beta << "  rewards " << cell.rewards << "  fraction_high "
              << cell.fraction_high << "\n";
  }
  write_json(dir / "report.json", {{"seeds", cfg.seeds.size()}, {"cells", report}});
  return 0;
}

struct CapacityArgs {
  std::string channel = "bsc";
  double crossover = 0.1;
  int size = 2;
  std::string config;
  bool bits = false;
};

int cmd_capacity(const CapacityArgs& a) {
  std::optional<Channel> ch;
  if (!a.config.empty()) {
    const RunConfig cfg = load_run_config(a.config);
    const Scenario sc = resolve(cfg);
    ch = build_channel(sc.truth, sc.truth.initial_state(), cfg.empowerment_k);
  } else if (a.channel == "bsc") {
    ch = binary_symmetric_channel(a.crossover);
  } else if (a.channel == "noiseless") {
    ch = noiseless_channel(a.size);
  } else {
    throw ConfigError("unknown channel '" + a.channel + "' (expected bsc or noiseless)");
  }
  const auto result = channel_capacity(*ch);
  std::cout << std::fixed << std::setprecision(6) << result.capacity * unit_scale(a.bits)
            << "\n";
  return 0;
}

int cmd_audit(const Common& c) {
  const RunConfig cfg = load(c);
  const fs::path dir = prepare_dir(cfg);
  const json report = audit_report(cfg, cfg.bits);
  write_json(dir / "report.json", report);
  std::cout << report.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Desk-scale universal agent laboratory"};
  app.require_subcommand(1);

  Common run_args, conv_args, sweep_args, demo_args, audit_args;
  add_common(app.add_subcommand("run", "run episodes and write trace.jsonl + summary.csv"),
             run_args);
  add_common(app.add_subcommand("converge", "convergence experiment over the seed list"),
             conv_args);
  auto* sweep = app.add_subcommand("sweep", "lambda sweep sharing the seed list");
  add_common(sweep, sweep_args);
  std::vector<double> lambdas{0.0, 0.1, -0.1, 10.0};
  sweep->add_option("--lambdas", lambdas, "lambda values")->delimiter(',');
  auto* demo = app.add_subcommand("demo", "two-room power-seeking demo");
  add_common(demo, demo_args);
  std::vector<double> betas;
  double low_advantage = 0.2;
  demo->add_option("--betas", betas, "bonus weights")->delimiter(',');
  demo->add_option("--low-advantage", low_advantage, "extra reward of the low room");

  auto* capacity = app.add_subcommand("capacity", "channel capacity (empowerment)");
  CapacityArgs cap;
  capacity->add_option("--channel", cap.channel, "bsc | noiseless");
  capacity->add_option("--crossover", cap.crossover, "BSC crossover probability");
  capacity->add_option("--size", cap.size, "noiseless channel size");
  capacity->add_option("--config", cap.config,
                       "use the k-step channel of the configured true environment");
  capacity->add_flag("--bits", cap.bits, "print bits instead of nats");
  add_common(app.add_subcommand("audit-fe", "free-energy and decomposition audit"), audit_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  }

  try {
    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "run") return cmd_run(run_args);
    if (name == "converge") return cmd_converge(conv_args);
    if (name == "sweep") return cmd_sweep(sweep_args, lambdas);
    if (name == "demo") return cmd_demo(demo_args, betas, low_advantage);
    if (name == "capacity") return cmd_capacity(cap);
    return cmd_audit(audit_args);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
}
