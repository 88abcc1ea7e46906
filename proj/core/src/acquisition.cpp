#include "krc/acquisition.hpp"

#include <cmath>
#include <iostream>

namespace krc {

AuxiliaryStates auxiliary_states(const AcquisitionRun& run, Eigen::Index order) {
  if (order < 1) throw ConfigError("auxiliary_states: order must be >= 1");
  if (run.length() != run.exit_index + 1)
    throw DimensionError("auxiliary_states: outputs length != exit_index + 1");
  if (run.inputs.size() != run.outputs.size())
    throw DimensionError("auxiliary_states: inputs/outputs length mismatch");

  AuxiliaryStates aux;
  const long kstar = run.exit_index;
  if (kstar < order) {  // Algorithm-1 guard: skip short episodes
    aux.x_tilde.resize(0, order);
    return aux;
  }

  // level i (0-based) has kstar + 1 - i entries
  std::vector<Eigen::VectorXd> levels(order);
  levels[0] = run.outputs;
  for (Eigen::Index i = 1; i < order; ++i) {
    const Eigen::VectorXd& prev = levels[i - 1];
    levels[i] = (prev.tail(prev.size() - 1) - prev.head(prev.size() - 1)) / run.step;
  }

  const Eigen::Index rows = kstar - order + 2;  // k = 0 .. kstar - n + 1
  aux.x_tilde.resize(rows, order);
  for (Eigen::Index i = 0; i < order; ++i) aux.x_tilde.col(i) = levels[i].head(rows);
  return aux;
}

Dataset build_dataset(const AcquisitionRun& run, Eigen::Index order, double w_bar,
                      TargetPairing pairing) {
  Dataset data;
  data.noise_bound = w_bar;
  const AuxiliaryStates aux = auxiliary_states(run, order);
  if (aux.empty()) {
    data.inputs.resize(0, order);
    data.targets.resize(0);
    return data;
  }

  const Eigen::Index pairs = aux.rows() - 1;  // k = 0 .. kstar - n
  data.inputs = aux.x_tilde.topRows(pairs);
  data.targets.resize(pairs);
  for (Eigen::Index k = 0; k < pairs; ++k) {
    const double xn = pairing == TargetPairing::shifted ? aux.x_tilde(k + 1, order - 1)
                                                        : aux.x_tilde(k, order - 1);
    data.targets[k] = xn - run.inputs[k];
  }
  return data;
}

double noise_bound(Eigen::Index order, double step, double v_bar, double f_lipschitz) {
  if (order < 1) throw ConfigError("noise_bound: order must be >= 1");
  if (!(step > 0.0)) throw ConfigError("noise_bound: step must be > 0");
  if (v_bar < 0.0 || f_lipschitz < 0.0)
    throw ConfigError("noise_bound: v_bar and f_lipschitz must be >= 0");

  const double rho = 2.0 / step;
  double geometric;  // sum_{i=1..n} rho^{2(i-1)}
  if (rho == 1.0) {
    geometric = static_cast<double>(order);  // removable singularity at T = 2
  } else {
    geometric = (1.0 - std::pow(rho, 2.0 * static_cast<double>(order))) / (1.0 - rho * rho);
  }
  return (std::pow(rho, static_cast<double>(order - 1)) + f_lipschitz * std::sqrt(geometric)) *
         v_bar;
}

CollectResult collect(const PlantConfig& cfg, ExplorationPolicy& policy, std::uint64_t seed,
                      const CollectOptions& options, double w_bar) {
  cfg.validate();
  CollectResult result;
  result.w_bar = w_bar;
  result.dataset.noise_bound = w_bar;
  result.dataset.inputs.resize(0, cfg.order);
  result.dataset.targets.resize(0);

  UniformSampler resets(derive_seed(seed, 0xA11));

  for (int episode = 0; episode < options.max_episodes; ++episode) {
    if (options.target_samples > 0 && result.dataset.size() >= options.target_samples) break;

    EpisodeRecord record;
    record.seed = derive_seed(seed, static_cast<std::uint64_t>(episode) + 1);
    NoiseSource noise(record.seed, cfg.noise_bound);

    Eigen::VectorXd x = cfg.safe_set.sample(resets);
    policy.begin_episode();

    std::vector<double> outputs, inputs;
    long k = 0;
    while (true) {
      const double y = measure(x, noise);
      double u = policy.act(k, y);
      if (!std::isfinite(u)) throw SimulationError("collect: exploration policy produced non-finite input");
      if (!cfg.input_set.contains(u)) {
        u = cfg.input_set.clamp(u);
        ++result.clamped_inputs;
      }
      outputs.push_back(y);
      inputs.push_back(u);
      if (options.keep_trajectories) {
        record.states.push_back(x);
        record.references.push_back(policy.reference_state());
        record.inputs.push_back(u);
        record.outputs.push_back(y);
      }

      const bool in_safe = cfg.safe_set.contains(x);
      if (!in_safe && !cfg.domain.contains(x)) ++result.safety_violations;
      if (!in_safe || k >= options.max_steps_per_episode) break;

      x = plant_step(cfg, x, u);
      ++k;
    }

    AcquisitionRun run;
    run.outputs = Eigen::Map<Eigen::VectorXd>(outputs.data(), static_cast<Eigen::Index>(outputs.size()));
    run.inputs = Eigen::Map<Eigen::VectorXd>(inputs.data(), static_cast<Eigen::Index>(inputs.size()));
    run.exit_index = k;
    run.step = cfg.step;
    record.exit_index = k;

    const Dataset harvest = build_dataset(run, cfg.order, w_bar, options.pairing);
    Eigen::Index take = harvest.size();
    if (options.target_samples > 0)
      take = std::min(take, options.target_samples - result.dataset.size());
    if (take > 0) {
      const Eigen::Index old = result.dataset.size();
      result.dataset.inputs.conservativeResize(old + take, cfg.order);
      result.dataset.inputs.bottomRows(take) = harvest.inputs.topRows(take);
      result.dataset.targets.conservativeResize(old + take);
      result.dataset.targets.tail(take) = harvest.targets.head(take);
    }
    record.samples = take;
    result.episodes.push_back(std::move(record));
  }

  if (result.clamped_inputs > 0)
    std::cerr << "[krc] warning: exploration policy left the admissible input set "
              << result.clamped_inputs << " times (clamped)\n";
  return result;
}

}  // namespace krc
