#pragma once

/*
  Data acquisition from output measurements only.

  Auxiliary states reconstruct the full state by forward differencing the
  output:

      x~_1(t_k)     = y(t_k)
      x~_{i+1}(t_k) = (x~_i(t_{k+1}) - x~_i(t_k)) / T

  Targets pair x~(t_k) with z(t_k) = x~_n(t_{k+1}) - u(t_k), which satisfies
  z(t_k) - f(x(t_k)) = v_n(t_{k+1}) under the chain dynamics. Note the t_{k+1}
  index on x~_n: pairing x~_n(t_k) with u(t_k) instead (TargetPairing::literal,
  exposed for comparison) aligns z with f(x(t_{k-1})) + u(t_{k-1}) - u(t_k) and
  breaks the noise analysis.

  The propagated noise bound is

      w_bar = ((2/T)^{n-1} + L_f sqrt((1-(2/T)^{2n})/(1-(2/T)^2))) v_bar

  with the T = 2 singularity removable (the geometric sum degenerates to n
  equal terms).
*/

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "krc/krr.hpp"
#include "krc/plant.hpp"

namespace krc {

// One episode's raw measurements. outputs/inputs have length exit_index + 1.
struct AcquisitionRun {
  Eigen::VectorXd outputs;  // Y = { y(t_k) }
  Eigen::VectorXd inputs;   // U = { u(t_k) }
  long exit_index = 0;      // k*, first index with x not in S (or the step cap)
  double step = 1.0;        // T

  long length() const { return static_cast<long>(outputs.size()); }
};

// Divided-difference table rows; row k is defined for k = 0 .. k* - n + 1.
struct AuxiliaryStates {
  Eigen::MatrixXd x_tilde;

  Eigen::Index rows() const { return x_tilde.rows(); }
  bool empty() const { return x_tilde.rows() == 0; }
};

// Empty result when the run is too short (k* < n); the algorithm skips
// such episodes.
AuxiliaryStates auxiliary_states(const AcquisitionRun& run, Eigen::Index order);

enum class TargetPairing {
  shifted,  // z(t_k) = x~_n(t_{k+1}) - u(t_k); consistent with the dynamics
  literal,  // z(t_k) = x~_n(t_k)     - u(t_k)
};

Dataset build_dataset(const AcquisitionRun& run, Eigen::Index order, double w_bar,
                      TargetPairing pairing = TargetPairing::shifted);

// Eq-form of w_bar above. Arguments must be nonnegative.
double noise_bound(Eigen::Index order, double step, double v_bar, double f_lipschitz);

// Episode-scoped exploration control law: begin_episode() resets internal
// state, act(k, y) maps the current measurement to an input. The policy also
// reports the reference it is tracking so episode traces can be dumped.
class ExplorationPolicy {
 public:
  virtual ~ExplorationPolicy() = default;
  virtual void begin_episode() = 0;
  virtual double act(long k, double y) = 0;
  virtual Eigen::VectorXd reference_state() const = 0;
};

struct CollectOptions {
  int max_episodes = 100;
  Eigen::Index target_samples = 0;     // 0 = no target, run all episodes
  long max_steps_per_episode = 10000;  // cap for episodes that never leave S
  TargetPairing pairing = TargetPairing::shifted;
  bool keep_trajectories = false;
};

struct EpisodeRecord {
  long exit_index = 0;
  Eigen::Index samples = 0;
  std::uint64_t seed = 0;
  // populated only with keep_trajectories
  std::vector<Eigen::VectorXd> states;
  std::vector<Eigen::VectorXd> references;
  std::vector<double> inputs;
  std::vector<double> outputs;
};

struct CollectResult {
  Dataset dataset;
  std::vector<EpisodeRecord> episodes;
  long clamped_inputs = 0;     // policy outputs that had to be clamped into U
  long safety_violations = 0;  // S was left only after the state already left X
  double w_bar = 0.0;
};

// Algorithm-1 loop: reset uniformly in S, run the policy until the state
// leaves S (or the step cap), harvest, repeat. The concatenated dataset is
// truncated to target_samples when one is set.
CollectResult collect(const PlantConfig& cfg, ExplorationPolicy& policy, std::uint64_t seed,
                      const CollectOptions& options, double w_bar);

}  // namespace krc
