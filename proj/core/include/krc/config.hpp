#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "krc/geometry.hpp"

namespace krc {

// One JSON document drives every pipeline stage. Field names carry units
// where that prevents ambiguity (step_seconds).
struct ExperimentConfig {
  struct Plant {
    Eigen::Index order = 2;
    double step_seconds = 0.2;
    std::string nonlinearity = "paper_sim";
    double noise_bound = 0.0;  // v_bar
    Box domain;
    Box safe_set;
    Interval input_set;
  } plant;

  struct KernelParams {
    double sigma_f = 1.0;
    double length_scale = 1.0;
  } kernel;

  double rkhs_bound = 1.0;  // B

  struct Reference {
    std::string driver = "zero";
    Eigen::VectorXd initial_state;
  } reference;

  struct Poles {
    std::vector<double> controller;
    std::vector<double> observer;
  } poles;

  struct LyapunovQ {
    std::string type = "identity";  // only "identity" ships; scaled by `scale`
    double scale = 1.0;
  } lyapunov_q;

  struct Acquisition {
    int max_episodes = 100;
    Eigen::Index target_samples = 0;
    long max_steps_per_episode = 10000;
    std::uint64_t seed = 0;
    bool strict_paper_pairing = false;
  } acquisition;

  struct Simulation {
    long steps = 200;
    Eigen::VectorXd initial_state;
    // "reference" (default x^(0) = s(0)) or an explicit vector in the JSON
    bool observer_starts_at_reference = true;
    Eigen::VectorXd observer_initial_state;
    std::vector<std::uint64_t> seeds{0};
  } simulation;

  int grid_per_dim = 101;

  // Field-precise validation of every module-level precondition that can be
  // checked without running anything.
  void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

ExperimentConfig load_config(const std::string& path);
void save_config(const ExperimentConfig& cfg, const std::string& path);

// The embedded reproduction setup: n = 2, T = 0.2, v_bar = 0.01,
// sigma_f = 0.5, l = 5, B = 0.3, poles {0.8, 0.7} / {0.01, 0.02},
// r(k) = 50 (sin(0.1k + 0.2) - sin(0.1k + 0.1)), x(0) = s(0) = (0, 50 sin 0.1),
// 200 samples, 200 steps, domain [-12,12]x[-6,6] with a 10% safe-set margin.
ExperimentConfig paper_config();

}  // namespace krc
