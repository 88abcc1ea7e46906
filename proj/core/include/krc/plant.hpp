#pragma once

/*
  Ground-truth discrete-time integrator chain

      x_i(t_{k+1}) = x_i(t_k) + x_{i+1}(t_k) T     i < n
      x_n(t_{k+1}) = f(x(t_k)) + u(t_k)
      y(t_k)       = x_1(t_k) + v(t_k),  |v| <= v_bar

  plus the reference chain driven by r(k), bounded measurement noise, and a
  registry of named nonlinearities f. "rkhs_sample:<seed>" produces a finite
  kernel expansion whose RKHS norm is known exactly, which is what the
  bound-containment tests need.
*/

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "krc/geometry.hpp"
#include "krc/kernel.hpp"
#include "krc/random.hpp"

namespace krc {

struct Nonlinearity {
  std::string name;
  std::function<double(const Eigen::VectorXd&)> fn;
  // exact RKHS norm, known for kernel expansions only
  std::optional<double> rkhs_norm;

  double operator()(const Eigen::VectorXd& x) const { return fn(x); }
};

struct PlantConfig {
  Eigen::Index order = 1;  // n
  double step = 1.0;       // T, seconds
  Nonlinearity f;
  double noise_bound = 0.0;  // v_bar
  Box domain;                // X
  Box safe_set;              // S, must be inside X
  Interval input_set;        // U, admissible input during acquisition

  void validate() const {
    if (order < 1) throw ConfigError("PlantConfig: order must be >= 1");
    if (!(step > 0.0)) throw ConfigError("PlantConfig: step must be > 0");
    if (noise_bound < 0.0) throw ConfigError("PlantConfig: noise_bound must be >= 0");
    if (domain.dim() != order) throw ConfigError("PlantConfig: domain dimension != order");
    if (!domain.contains(safe_set))
      throw ConfigError("PlantConfig: safe_set must be contained in domain");
    if (!f.fn) throw ConfigError("PlantConfig: nonlinearity not set");
  }
};

// Bounded i.i.d. uniform noise on [-bound, bound]. Stateful, single-owner:
// one trajectory per source. Identical seeds give bit-identical sequences.
class NoiseSource {
 public:
  NoiseSource(std::uint64_t seed, double bound) : rng_(seed), bound_(bound) {
    if (bound < 0.0) throw ConfigError("NoiseSource: bound must be >= 0");
  }

  double next() { return bound_ == 0.0 ? 0.0 : rng_.symmetric(bound_); }
  double bound() const { return bound_; }

 private:
  UniformSampler rng_;
  double bound_;
};

// One step of the true plant. States outside the domain propagate anyway --
// divergence has to stay observable in traces.
Eigen::VectorXd plant_step(const PlantConfig& cfg, const Eigen::VectorXd& x, double u);

// y = x_1 + v
double measure(const Eigen::VectorXd& x, NoiseSource& noise);

struct ReferenceSpec {
  std::string driver_name;
  std::function<double(long)> driver;  // r(k), indexed by step
  Eigen::VectorXd initial_state;       // s(0)
};

// Chain update with the top component replaced by r(k).
Eigen::VectorXd reference_step(const ReferenceSpec& spec, const Eigen::VectorXd& s, long k,
                               double step);

// Context needed only to materialize kernel-expansion samples.
struct NonlinearityContext {
  const Kernel* kernel = nullptr;
  const Box* domain = nullptr;
  double target_norm = 0.3;
  int centers = 12;
};

// Known names: "zero", "paper_sim", "rkhs_sample:<seed>".
Nonlinearity lookup_nonlinearity(const std::string& name, const NonlinearityContext& ctx = {});

// f = sum_j a_j kappa(c_j, .), rescaled so ||f||_kappa equals target_norm
// exactly (computed through the Gram quadratic form).
struct RkhsSample {
  Nonlinearity nonlinearity;
  Eigen::MatrixXd centers;   // m x n
  Eigen::VectorXd coefficients;
  double norm = 0.0;
};

RkhsSample make_rkhs_sample(const Kernel& kernel, const Box& domain, std::uint64_t seed,
                            int num_centers, double target_norm);

// Named reference drivers: "zero", "paper_sim".
std::function<double(long)> lookup_reference_driver(const std::string& name);

}  // namespace krc
