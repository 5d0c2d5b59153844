// Python bindings for the main operations. Structured results cross the
// boundary as dicts and lists; configs are passed as JSON strings or dicts.
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "json.hpp"
#include "uailab/bayes.hpp"
#include "uailab/config.hpp"
#include "uailab/distribution.hpp"
#include "uailab/empowerment.hpp"
#include "uailab/errors.hpp"
#include "uailab/free_energy.hpp"
#include "uailab/harness.hpp"
#include "uailab/planner.hpp"
#include "uailab/self_aixi.hpp"

namespace py = pybind11;
using namespace uailab;
using nlohmann::json;

namespace {

RunConfig config_from(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_run_config(doc);
}

py::object to_python(const json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

History history_from(const std::vector<std::tuple<int, int, double>>& steps) {
  History h;
  for (const auto& [a, o, r] : steps) h = h.extended(ActionId{a}, Percept{o, r});
  return h;
}

EnvironmentClass class_from(const std::string& descriptor) {
  return make_env_class(json::parse(descriptor));
}

}  // namespace

PYBIND11_MODULE(_uailab, m) {
  m.doc() = "Desk-scale universal agent laboratory";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ImpossibleEvidenceError>(m, "ImpossibleEvidenceError", PyExc_ValueError);
  py::register_exception<SizeError>(m, "SizeError", PyExc_ValueError);
  py::register_exception<SupportError>(m, "SupportError", PyExc_ArithmeticError);
  py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);

  // Environments and beliefs. Histories are lists of (action, observation, reward).
  m.def(
      "percept_distribution",
      [](const std::string& env, const std::vector<std::tuple<int, int, double>>& h, int a) {
        return percept_distribution(make_env(json::parse(env)), history_from(h), ActionId{a});
      },
      py::arg("env_json"), py::arg("history"), py::arg("action"));
  m.def(
      "percepts",
      [](const std::string& env) {
        std::vector<std::pair<int, double>> out;
        const auto model = make_env(json::parse(env));
        for (const auto& e : model.percepts()) out.emplace_back(e.observation, e.reward);
        return out;
      },
      py::arg("env_json"));
  m.def(
      "posterior",
      [](const std::string& env_class, const std::vector<std::tuple<int, int, double>>& steps) {
        const auto c = class_from(env_class);
        MixtureBelief b = MixtureBelief::prior_of(c);
        History h;
        for (const auto& [a, o, r] : steps) {
          b = posterior_update(b, c, h, ActionId{a}, Percept{o, r});
          h = h.extended(ActionId{a}, Percept{o, r});
        }
        return b.weights();
      },
      py::arg("env_class_json"), py::arg("history"),
      "Posterior weights over the class after the given history.");

  // Planning.
  m.def(
      "optimal_q_values",
      [](const std::string& env_class, const std::vector<std::tuple<int, int, double>>& steps,
         int horizon, double gamma) {
        const auto c = class_from(env_class);
        const History h = history_from(steps);
        MixtureBelief b = MixtureBelief::prior_of(c);
        History prefix;
        for (const auto& s : h.steps()) {
          b = posterior_update(b, c, prefix, s.action, s.percept);
          prefix = prefix.extended(s.action, s.percept);
        }
        return optimal_q_values(b, c, h, PlanningParams{horizon, gamma});
      },
      py::arg("env_class_json"), py::arg("history"), py::arg("horizon"), py::arg("gamma"));
  m.def("softmax_policy", [](const std::vector<double>& q) { return softmax_policy(q); });
  m.def("aixi_loss", [](const std::vector<double>& p) { return aixi_loss(p); });
  m.def(
      "self_aixi_action",
      [](const std::vector<double>& q, const std::vector<double>& pi_star,
         const std::vector<double>& zeta, double lambda, double kappa) {
        return self_aixi_action(q, pi_star, zeta, RegularizationParams{lambda, kappa}).index;
      },
      py::arg("q"), py::arg("pi_star"), py::arg("zeta"), py::arg("lambda_"), py::arg("kappa") = 1e-6);
  m.def("kl_policy", [](const std::vector<double>& p, const std::vector<double>& q) {
    return kl_policy(p, q);
  });

  // Information theory.
  m.def(
      "channel_capacity",
      [](const std::vector<std::vector<double>>& rows, double tol, int max_iter) {
        const auto r = channel_capacity(channel_from_matrix(rows), tol, max_iter);
        py::dict out;
        out["capacity"] = r.capacity;
        out["optimal_input"] = r.optimal_input;
        out["iterations"] = r.iterations;
        out["residual"] = r.residual;
        return out;
      },
      py::arg("rows"), py::arg("tol") = 1e-9, py::arg("max_iter") = 10000);
  m.def(
      "mutual_information",
      [](const std::vector<std::vector<double>>& rows, const std::vector<double>& p) {
        return mutual_information(channel_from_matrix(rows), p);
      },
      py::arg("rows"), py::arg("p"));
  m.def(
      "empowerment",
      [](const std::string& env, int state, int k) {
        return channel_capacity(build_channel(make_env(json::parse(env)), state, k)).capacity;
      },
      py::arg("env_json"), py::arg("state"), py::arg("k"),
      "Capacity (nats) of the k-step channel from a machine state.");

  // Experiments.
  m.def(
      "run_episode",
      [](const std::string& cfg, std::uint64_t seed) {
        json rows = json::array();
        for (const auto& r : run_episode(config_from(cfg), seed)) rows.push_back(to_json(r));
        return to_python(rows);
      },
      py::arg("config_json"), py::arg("seed"));
  m.def(
      "convergence_experiment",
      [](const std::string& cfg) {
        const auto c = config_from(cfg);
        return to_python(to_json(convergence_experiment(c, c.seeds)));
      },
      py::arg("config_json"));
  m.def(
      "lambda_sweep",
      [](const std::string& cfg, const std::vector<double>& lambdas) {
        const auto c = config_from(cfg);
        json rows = json::array();
        for (const auto& r : lambda_sweep(c, lambdas, c.seeds)) {
          rows.push_back({{"lambda", r.lambda},
                          {"final_value_gap", r.final_value_gap},
                          {"final_kl", r.final_kl},
                          {"action_divergence", r.action_divergence},
                          {"mean_reward", r.mean_reward}});
        }
        return to_python(rows);
      },
      py::arg("config_json"), py::arg("lambdas"));
  m.def(
      "power_seeking_demo",
      [](const std::string& cfg, const std::vector<double>& betas, double low_advantage) {
        const auto c = config_from(cfg);
        json rows = json::array();
        for (const auto& cell : power_seeking_demo(c, c.seeds, DemoParams{betas, low_advantage})) {
          rows.push_back({{"beta", cell.beta},
                          {"rewards", cell.rewards},
                          {"fraction_high", cell.fraction_high},
                          {"q_low", cell.q_low},
                          {"q_high", cell.q_high}});
        }
        return to_python(rows);
      },
      py::arg("config_json"), py::arg("betas") = std::vector<double>{0.0, 0.1},
      py::arg("low_advantage") = 0.2);
  m.def(
      "audit",
      [](const std::string& cfg, bool bits) { return to_python(audit_report(config_from(cfg), bits)); },
      py::arg("config_json"), py::arg("bits") = false);
}
