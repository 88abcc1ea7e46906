#pragma once

/*
  Kernel functions and the Lipschitz machinery attached to them.

  Only the squared-exponential kernel is shipped, but the interface is kept
  abstract so other positive-definite kernels can be dropped in; any new
  kernel must supply its own lipschitz() since the error-propagation chain
  (noise_bound, certificates) depends on it.

  lipschitz() returns L such that sup over x of ||d kappa(x, x') / dx|| <= L
  uniformly in x'. For a single-argument reading kappa(x) the quantity would
  be ill-defined for stationary kernels, so the two-argument reading is the
  contract here.
*/

#include <Eigen/Dense>
#include <memory>
#include <string>

#include "krc/errors.hpp"

namespace krc {

// Squared-exponential hyperparameters. Degenerate scales are rejected at
// construction instead of surfacing later as NaN.
struct KernelSpec {
  double sigma_f = 1.0;
  double length_scale = 1.0;
  Eigen::Index input_dim = 1;

  KernelSpec() = default;
  KernelSpec(double sigma_f_, double length_scale_, Eigen::Index input_dim_)
      : sigma_f(sigma_f_), length_scale(length_scale_), input_dim(input_dim_) {
    if (!(sigma_f > 0.0)) throw ConfigError("KernelSpec: sigma_f must be > 0");
    if (!(length_scale > 0.0)) throw ConfigError("KernelSpec: length_scale must be > 0");
    if (input_dim < 1) throw ConfigError("KernelSpec: input_dim must be >= 1");
  }
};

class Kernel {
 public:
  virtual ~Kernel() = default;

  virtual Eigen::Index input_dim() const = 0;

  // kappa(x, x')
  virtual double operator()(const Eigen::VectorXd& x, const Eigen::VectorXd& x_prime) const = 0;

  // d kappa(x, x') / dx
  virtual Eigen::VectorXd gradient(const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& x_prime) const = 0;

  // L_kappa: supremum of ||gradient|| over all argument pairs.
  virtual double lipschitz() const = 0;

  virtual std::string name() const = 0;
  virtual std::unique_ptr<Kernel> clone() const = 0;

  // kappa(x, x); stationary kernels override with the constant.
  virtual double diagonal(const Eigen::VectorXd& x) const { return (*this)(x, x); }

 protected:
  void check_dim(const Eigen::VectorXd& x) const {
    if (x.size() != input_dim())
      throw DimensionError("Kernel: argument dimension " + std::to_string(x.size()) +
                           " != input_dim " + std::to_string(input_dim()));
  }
};

// kappa(x, x') = sigma_f^2 exp(-||x - x'||^2 / (2 l^2))
class SquaredExponentialKernel final : public Kernel {
 public:
  explicit SquaredExponentialKernel(KernelSpec spec) : spec_(spec) {}

  Eigen::Index input_dim() const override { return spec_.input_dim; }

  double operator()(const Eigen::VectorXd& x, const Eigen::VectorXd& x_prime) const override;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x,
                           const Eigen::VectorXd& x_prime) const override;

  // sigma_f^2 / (l sqrt(e)); the gradient norm r exp(-r^2/(2l^2))/l^2 peaks
  // at r = l.
  double lipschitz() const override;

  std::string name() const override { return "squared_exponential"; }
  std::unique_ptr<Kernel> clone() const override {
    return std::make_unique<SquaredExponentialKernel>(spec_);
  }
  double diagonal(const Eigen::VectorXd&) const override { return spec_.sigma_f * spec_.sigma_f; }

  const KernelSpec& spec() const { return spec_; }

 private:
  KernelSpec spec_;
};

// K[p][q] = kappa(x_p, x_q) for row-wise inputs (N x n). Symmetric PSD.
Eigen::MatrixXd gram_matrix(const Kernel& kernel, const Eigen::MatrixXd& inputs);

// Lipschitz constant of any function in the kernel's RKHS ball of radius B.
struct LipschitzInfo {
  double kappa_lipschitz = 0.0;  // L_kappa
  double rkhs_bound = 0.0;       // B
  double f_lipschitz = 0.0;      // L_f = sqrt(2 L_kappa) B
};

LipschitzInfo function_lipschitz(const Kernel& kernel, double rkhs_bound);

}  // namespace krc
