#include "krc/config.hpp"

#include <cmath>
#include <fstream>

namespace krc {

namespace {

using nlohmann::json;

Eigen::VectorXd vector_from_json(const json& j, const std::string& field) {
  if (!j.is_array()) throw ConfigError(field + ": expected an array of numbers");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(field + ": expected an array of numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json j = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

const json& require(const json& j, const std::string& key, const std::string& scope) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(scope + "." + key + ": missing");
  return *it;
}

template <typename T>
T number(const json& j, const std::string& key, const std::string& scope) {
  const json& v = require(j, key, scope);
  if (!v.is_number()) throw ConfigError(scope + "." + key + ": expected a number");
  return v.get<T>();
}

Box box_from_json(const json& j, const std::string& scope) {
  return Box(vector_from_json(require(j, "lower", scope), scope + ".lower"),
             vector_from_json(require(j, "upper", scope), scope + ".upper"));
}

json box_to_json(const Box& b) {
  return json{{"lower", vector_to_json(b.lower)}, {"upper", vector_to_json(b.upper)}};
}

}  // namespace

void ExperimentConfig::validate() const {
  if (plant.order < 1) throw ConfigError("plant.order: must be >= 1");
  if (!(plant.step_seconds > 0.0)) throw ConfigError("plant.step_seconds: must be > 0");
  if (plant.noise_bound < 0.0) throw ConfigError("plant.noise_bound: must be >= 0");
  if (plant.nonlinearity.empty()) throw ConfigError("plant.nonlinearity: must be set");
  if (plant.domain.dim() != plant.order)
    throw ConfigError("plant.domain: dimension must equal plant.order");
  if (plant.safe_set.dim() != plant.order)
    throw ConfigError("plant.safe_set: dimension must equal plant.order");
  if (!plant.domain.contains(plant.safe_set))
    throw ConfigError("plant.safe_set: must be contained in plant.domain");

  if (!(kernel.sigma_f > 0.0)) throw ConfigError("kernel.sigma_f: must be > 0");
  if (!(kernel.length_scale > 0.0)) throw ConfigError("kernel.length_scale: must be > 0");
  if (!(rkhs_bound > 0.0)) throw ConfigError("rkhs_bound: must be > 0");

  if (reference.driver.empty()) throw ConfigError("reference.driver: must be set");
  if (reference.initial_state.size() != plant.order)
    throw ConfigError("reference.initial_state: dimension must equal plant.order");

  if (static_cast<Eigen::Index>(poles.controller.size()) != plant.order)
    throw ConfigError("poles.controller: need exactly plant.order values");
  if (static_cast<Eigen::Index>(poles.observer.size()) != plant.order)
    throw ConfigError("poles.observer: need exactly plant.order values");

  if (lyapunov_q.type != "identity") throw ConfigError("lyapunov_q.type: only 'identity' is supported");
  if (!(lyapunov_q.scale > 0.0)) throw ConfigError("lyapunov_q.scale: must be > 0");

  if (acquisition.max_episodes < 0) throw ConfigError("acquisition.max_episodes: must be >= 0");
  if (acquisition.target_samples < 0) throw ConfigError("acquisition.target_samples: must be >= 0");
  if (acquisition.max_steps_per_episode < 1)
    throw ConfigError("acquisition.max_steps_per_episode: must be >= 1");

  if (simulation.steps < 1) throw ConfigError("simulation.steps: must be >= 1");
  if (simulation.initial_state.size() != plant.order)
    throw ConfigError("simulation.initial_state: dimension must equal plant.order");
  if (!simulation.observer_starts_at_reference &&
      simulation.observer_initial_state.size() != plant.order)
    throw ConfigError("simulation.observer_initial_state: dimension must equal plant.order");
  if (simulation.seeds.empty()) throw ConfigError("simulation.seeds: need at least one seed");

  if (grid_per_dim < 2) throw ConfigError("grid_per_dim: must be >= 2");
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;

  const json& plant = require(j, "plant", "config");
  cfg.plant.order = number<Eigen::Index>(plant, "order", "plant");
  cfg.plant.step_seconds = number<double>(plant, "step_seconds", "plant");
  cfg.plant.nonlinearity = require(plant, "nonlinearity", "plant").get<std::string>();
  cfg.plant.noise_bound = number<double>(plant, "noise_bound", "plant");
  cfg.plant.domain = box_from_json(require(plant, "domain", "plant"), "plant.domain");
  cfg.plant.safe_set = box_from_json(require(plant, "safe_set", "plant"), "plant.safe_set");
  const json& input_set = require(plant, "input_set", "plant");
  cfg.plant.input_set = Interval(number<double>(input_set, "lower", "plant.input_set"),
                                 number<double>(input_set, "upper", "plant.input_set"));

  const json& kernel = require(j, "kernel", "config");
  cfg.kernel.sigma_f = number<double>(kernel, "sigma_f", "kernel");
  cfg.kernel.length_scale = number<double>(kernel, "length_scale", "kernel");

  cfg.rkhs_bound = number<double>(j, "rkhs_bound", "config");

  const json& ref = require(j, "reference", "config");
  cfg.reference.driver = require(ref, "driver", "reference").get<std::string>();
  cfg.reference.initial_state =
      vector_from_json(require(ref, "initial_state", "reference"), "reference.initial_state");

  const json& poles = require(j, "poles", "config");
  cfg.poles.controller =
      require(poles, "controller", "poles").get<std::vector<double>>();
  cfg.poles.observer = require(poles, "observer", "poles").get<std::vector<double>>();

  if (j.contains("lyapunov_q")) {
    const json& q = j["lyapunov_q"];
    if (q.contains("type")) cfg.lyapunov_q.type = q["type"].get<std::string>();
    if (q.contains("scale")) cfg.lyapunov_q.scale = q["scale"].get<double>();
  }

  const json& acq = require(j, "acquisition", "config");
  cfg.acquisition.max_episodes = number<int>(acq, "max_episodes", "acquisition");
  cfg.acquisition.target_samples = number<Eigen::Index>(acq, "target_samples", "acquisition");
  cfg.acquisition.max_steps_per_episode =
      number<long>(acq, "max_steps_per_episode", "acquisition");
  cfg.acquisition.seed = number<std::uint64_t>(acq, "seed", "acquisition");
  if (acq.contains("strict_paper_pairing"))
    cfg.acquisition.strict_paper_pairing = acq["strict_paper_pairing"].get<bool>();

  const json& sim = require(j, "simulation", "config");
  cfg.simulation.steps = number<long>(sim, "steps", "simulation");
  cfg.simulation.initial_state =
      vector_from_json(require(sim, "initial_state", "simulation"), "simulation.initial_state");
  const json& obs0 = require(sim, "observer_initial", "simulation");
  if (obs0.is_string() && obs0.get<std::string>() == "reference") {
    cfg.simulation.observer_starts_at_reference = true;
  } else if (obs0.is_array()) {
    cfg.simulation.observer_starts_at_reference = false;
    cfg.simulation.observer_initial_state =
        vector_from_json(obs0, "simulation.observer_initial");
  } else {
    throw ConfigError("simulation.observer_initial: expected \"reference\" or a vector");
  }
  cfg.simulation.seeds = require(sim, "seeds", "simulation").get<std::vector<std::uint64_t>>();

  cfg.grid_per_dim = number<int>(j, "grid_per_dim", "config");

  cfg.validate();
  return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["plant"] = {
      {"order", cfg.plant.order},
      {"step_seconds", cfg.plant.step_seconds},
      {"nonlinearity", cfg.plant.nonlinearity},
      {"noise_bound", cfg.plant.noise_bound},
      {"domain", box_to_json(cfg.plant.domain)},
      {"safe_set", box_to_json(cfg.plant.safe_set)},
      {"input_set", {{"lower", cfg.plant.input_set.lower}, {"upper", cfg.plant.input_set.upper}}},
  };
  j["kernel"] = {{"sigma_f", cfg.kernel.sigma_f}, {"length_scale", cfg.kernel.length_scale}};
  j["rkhs_bound"] = cfg.rkhs_bound;
  j["reference"] = {{"driver", cfg.reference.driver},
                    {"initial_state", vector_to_json(cfg.reference.initial_state)}};
  j["poles"] = {{"controller", cfg.poles.controller}, {"observer", cfg.poles.observer}};
  j["lyapunov_q"] = {{"type", cfg.lyapunov_q.type}, {"scale", cfg.lyapunov_q.scale}};
  j["acquisition"] = {{"max_episodes", cfg.acquisition.max_episodes},
                      {"target_samples", cfg.acquisition.target_samples},
                      {"max_steps_per_episode", cfg.acquisition.max_steps_per_episode},
                      {"seed", cfg.acquisition.seed},
                      {"strict_paper_pairing", cfg.acquisition.strict_paper_pairing}};
  j["simulation"] = {{"steps", cfg.simulation.steps},
                     {"initial_state", vector_to_json(cfg.simulation.initial_state)},
                     {"observer_initial",
                      cfg.simulation.observer_starts_at_reference
                          ? json("reference")
                          : vector_to_json(cfg.simulation.observer_initial_state)},
                     {"seeds", cfg.simulation.seeds}};
  j["grid_per_dim"] = cfg.grid_per_dim;
  return j;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return config_from_json(j);
}

void save_config(const ExperimentConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config file: " + path);
  out << config_to_json(cfg).dump(2) << "\n";
}

ExperimentConfig paper_config() {
  ExperimentConfig cfg;
  cfg.plant.order = 2;
  cfg.plant.step_seconds = 0.2;
  cfg.plant.nonlinearity = "paper_sim";
  cfg.plant.noise_bound = 0.01;
  cfg.plant.domain = Box((Eigen::VectorXd(2) << -12.0, -6.0).finished(),
                         (Eigen::VectorXd(2) << 12.0, 6.0).finished());
  cfg.plant.safe_set = Box((Eigen::VectorXd(2) << -10.8, -5.4).finished(),
                           (Eigen::VectorXd(2) << 10.8, 5.4).finished());
  // With |f| < 1 on the domain, u in [-5, 5] keeps x(t_{k+1}) inside the
  // domain from anywhere in the safe set: the one-step-invariance property
  // the safe set is supposed to have.
  cfg.plant.input_set = Interval(-5.0, 5.0);

  cfg.kernel.sigma_f = 0.5;
  cfg.kernel.length_scale = 5.0;
  cfg.rkhs_bound = 0.3;

  cfg.reference.driver = "paper_sim";
  cfg.reference.initial_state = (Eigen::VectorXd(2) << 0.0, 50.0 * std::sin(0.1)).finished();

  cfg.poles.controller = {0.8, 0.7};
  cfg.poles.observer = {0.01, 0.02};

  cfg.acquisition.max_episodes = 100;
  cfg.acquisition.target_samples = 200;
  cfg.acquisition.max_steps_per_episode = 60;
  cfg.acquisition.seed = 18;

  cfg.simulation.steps = 200;
  cfg.simulation.initial_state = cfg.reference.initial_state;
  cfg.simulation.observer_starts_at_reference = true;
  cfg.simulation.seeds = {0,  1,  2,  3,  4,  5,  6,  7,  8,  9,
                          10, 11, 12, 13, 14, 15, 16, 17, 18, 19};

  cfg.grid_per_dim = 101;
  return cfg;
}

}  // namespace krc
