#include "uailab/config.hpp"

#include <fstream>
#include <sstream>

#include "uailab/errors.hpp"

namespace uailab {

using nlohmann::json;

namespace {

// Reads `doc[key]` as T, reporting the dotted field path on failure.
template <typename T>
T field(const json& doc, const std::string& path, const char* key) {
  if (!doc.is_object() || !doc.contains(key)) {
    throw ConfigError(path + "." + key + ": missing");
  }
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path + "." + key + ": wrong type");
  }
}

template <typename T>
T field_or(const json& doc, const std::string& path, const char* key, T fallback) {
  if (!doc.is_object() || !doc.contains(key) || doc.at(key).is_null()) return fallback;
  return field<T>(doc, path, key);
}

void require_object(const json& doc, const std::string& path) {
  if (!doc.is_object()) throw ConfigError(path + ": expected a JSON object");
}

}  // namespace

EnvironmentModel make_env(const json& d) {
  require_object(d, "environment");
  const auto type = field<std::string>(d, "environment", "type");
  const auto name = field_or<std::string>(d, "environment", "name", "");
  const std::string path = "environment(" + type + ")";
  if (type == "bernoulli_bandit") {
    return bernoulli_bandit(field<std::vector<double>>(d, path, "probabilities"), name);
  }
  if (type == "deterministic_chain") {
    return deterministic_chain(field<std::vector<std::vector<int>>>(d, path, "transitions"),
                               field<std::vector<std::vector<double>>>(d, path, "rewards"), name);
  }
  if (type == "two_room") {
    TwoRoomParams p;
    p.branch_high = field_or(d, path, "branch_high", p.branch_high);
    p.branch_low = field_or(d, path, "branch_low", p.branch_low);
    p.reward_high = field_or(d, path, "reward_high", p.reward_high);
    p.reward_low = field_or(d, path, "reward_low", p.reward_low);
    return two_room(p, name);
  }
  if (type == "noisy_grid") {
    NoisyGridParams p;
    p.size = field_or(d, path, "size", p.size);
    p.slip = field_or(d, path, "slip", p.slip);
    return noisy_grid(p, name);
  }
  throw ConfigError("environment.type: unknown environment type '" + type + "'");
}

EnvironmentClass make_env_class(const json& d) {
  require_object(d, "env_class");
  if (!d.contains("models") || !d.at("models").is_array() || d.at("models").empty()) {
    throw ConfigError("env_class.models: expected a nonempty array");
  }
  std::vector<EnvironmentModel> models;
  for (const auto& m : d.at("models")) models.push_back(make_env(m));
  if (d.contains("prior") && !d.at("prior").is_null()) {
    return {std::move(models), field<std::vector<double>>(d, "env_class", "prior")};
  }
  return EnvironmentClass(std::move(models));
}

PolicyClass make_policy_class(const json& d, int num_actions, int num_observations) {
  const json doc = d.is_null() ? json::object() : d;
  require_object(doc, "policy_class");
  const auto kind = field_or<std::string>(doc, "policy_class", "kind", "constant");
  const double epsilon = field_or(doc, "policy_class", "epsilon", 0.0);
  const bool with_uniform = field_or(doc, "policy_class", "include_uniform", true);
  std::vector<PolicyModel> policies;
  if (kind == "constant") {
    for (int a = 0; a < num_actions; ++a) {
      policies.push_back(constant_policy(num_actions, ActionId{a}, num_observations, epsilon));
    }
  } else if (kind == "stationary") {
    if (epsilon != 0.0) throw ConfigError("policy_class.epsilon: only supported for 'constant'");
    policies = stationary_policies(num_actions, num_observations);
  } else if (kind == "uniform") {
  } else {
    throw ConfigError("policy_class.kind: unknown kind '" + kind + "'");
  }
  if (with_uniform || policies.empty()) {
    policies.push_back(uniform_policy(num_actions, num_observations));
  }
  if (doc.contains("prior") && !doc.at("prior").is_null()) {
    return {std::move(policies), field<std::vector<double>>(doc, "policy_class", "prior")};
  }
  return PolicyClass(std::move(policies));
}

void RunConfig::validate() const {
  planning.validate();
  if (steps < 1) throw ConfigError("run.steps must be >= 1");
  if (empowerment_k < 1) throw ConfigError("empowerment.k must be >= 1");
  if (!(beta >= 0.0)) throw ConfigError("empowerment.beta must be >= 0");
  if (seeds.empty()) throw ConfigError("run.seeds must be nonempty");
  if (environment.is_null()) throw ConfigError("environment: missing");
}

RunConfig parse_run_config(const json& doc) {
  require_object(doc, "config");
  RunConfig cfg;
  cfg.environment = doc.value("environment", json());
  cfg.env_class = doc.value("env_class", json());
  cfg.policy_class = doc.value("policy_class", json());
  if (doc.contains("planning")) {
    const auto& p = doc.at("planning");
    require_object(p, "planning");
    cfg.planning.horizon = field_or(p, "planning", "horizon", cfg.planning.horizon);
    cfg.planning.discount = field_or(p, "planning", "gamma", cfg.planning.discount);
  }
  if (doc.contains("regularization")) {
    const auto& r = doc.at("regularization");
    require_object(r, "regularization");
    cfg.regularization.lambda = field_or(r, "regularization", "lambda", cfg.regularization.lambda);
    cfg.regularization.kappa = field_or(r, "regularization", "kappa", cfg.regularization.kappa);
  }
  if (doc.contains("empowerment")) {
    const auto& e = doc.at("empowerment");
    require_object(e, "empowerment");
    cfg.empowerment_k = field_or(e, "empowerment", "k", cfg.empowerment_k);
    cfg.beta = field_or(e, "empowerment", "beta", cfg.beta);
  }
  if (doc.contains("run")) {
    const auto& r = doc.at("run");
    require_object(r, "run");
    cfg.steps = field_or(r, "run", "steps", cfg.steps);
    cfg.seeds = field_or(r, "run", "seeds", cfg.seeds);
  }
  if (doc.contains("output")) {
    const auto& o = doc.at("output");
    require_object(o, "output");
    cfg.output_dir = field_or(o, "output", "dir", cfg.output_dir);
    cfg.bits = field_or(o, "output", "bits", cfg.bits);
  }
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_run_config(doc);
}

json to_json(const RunConfig& cfg) {
  return {
      {"environment", cfg.environment},
      {"env_class", cfg.env_class},
      {"policy_class", cfg.policy_class},
      {"planning", {{"horizon", cfg.planning.horizon}, {"gamma", cfg.planning.discount}}},
      {"regularization",
       {{"lambda", cfg.regularization.lambda}, {"kappa", cfg.regularization.kappa}}},
      {"empowerment", {{"k", cfg.empowerment_k}, {"beta", cfg.beta}}},
      {"run", {{"steps", cfg.steps}, {"seeds", cfg.seeds}}},
      {"output", {{"dir", cfg.output_dir}, {"bits", cfg.bits}}},
  };
}

Scenario resolve(const RunConfig& cfg) {
  cfg.validate();
  std::optional<EnvironmentClass> cls;
  if (!cfg.env_class.is_null()) cls.emplace(make_env_class(cfg.env_class));

  std::optional<EnvironmentModel> truth;
  if (cfg.environment.is_object() && cfg.environment.contains("class_index")) {
    if (!cls) throw ConfigError("environment.class_index: requires env_class");
    const auto idx = field<std::size_t>(cfg.environment, "environment", "class_index");
    if (idx >= cls->size()) throw ConfigError("environment.class_index: out of range");
    truth.emplace(cls->model(idx));
  } else {
    truth.emplace(make_env(cfg.environment));
  }
  if (!cls) cls.emplace(std::vector<EnvironmentModel>{*truth});
  if (!truth->same_alphabets(cls->model(0))) {
    throw ConfigError("environment: alphabets differ from the env_class models");
  }
  int observations = 0;
  for (const auto& m : cls->models()) observations = std::max(observations, m.num_observations());
  auto policies = make_policy_class(cfg.policy_class, cls->num_actions(), observations);
  cfg.regularization.validate(cls->num_actions());
  return {std::move(*truth), std::move(*cls), std::move(policies)};
}

}  // namespace uailab
