#pragma once

/*
  Kernel ridge regression with the deterministic error bound

      |mu(x) - f(x)| <= beta * P(x)

  valid for every f in the RKHS ball of radius B when the target noise is
  within +-noise_bound. The regularizer is exactly N * noise_bound^2 -- it is
  not a tuning knob; noise_bound comes out of the acquisition analysis.

  The regularized Gram factorization is computed once at fit time and reused
  for both the coefficients and power-function queries; no matrix inverse is
  ever formed.

  The empty model (N = 0) is a first-class state: mu = 0, P(x) = sqrt(kappa(x,x)),
  beta = sqrt(B^2 + 1). Running a controller "without learning" is this model.
*/

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <memory>

#include "krc/kernel.hpp"

namespace krc {

struct Dataset {
  Eigen::MatrixXd inputs;   // N x n, one sample per row
  Eigen::VectorXd targets;  // N
  double noise_bound = 0.0;  // w_bar

  Eigen::Index size() const { return targets.size(); }

  void validate() const {
    if (inputs.rows() != targets.size())
      throw DimensionError("Dataset: inputs rows (" + std::to_string(inputs.rows()) +
                           ") != targets length (" + std::to_string(targets.size()) + ")");
    if (noise_bound < 0.0) throw ConfigError("Dataset: noise_bound must be >= 0");
  }
};

class KrrModel {
 public:
  // N = 0 falls back to the empty-model convention; otherwise requires
  // noise_bound > 0 (the regularizer must be positive) and rkhs_bound > 0.
  static KrrModel fit(const Kernel& kernel, Dataset data, double rkhs_bound);

  static KrrModel empty(const Kernel& kernel, double rkhs_bound);

  // Rehydrate a serialized model: coefficients taken verbatim, factorization
  // rebuilt for power queries.
  static KrrModel restore(const Kernel& kernel, Dataset data, double rkhs_bound,
                          Eigen::VectorXd alpha, double beta, bool beta_clamped);

  double predict(const Eigen::VectorXd& x) const;

  // P(x) = sqrt(kappa(x,x) - k(x)^T (K + N w^2 I)^-1 k(x)).
  // Radicands in [-1e-12, 0) clamp to 0; anything lower is an inconsistency.
  double power(const Eigen::VectorXd& x) const;

  double beta() const { return beta_; }
  double beta_fallback() const;  // sqrt(B^2 + 1), data-independent
  bool beta_clamped() const { return beta_clamped_; }

  double error_envelope(const Eigen::VectorXd& x) const { return beta_ * power(x); }

  // ||(K + N w^2 I) alpha - z||_inf after the solve.
  double fit_residual() const { return fit_residual_; }

  const Dataset& data() const { return data_; }
  const Kernel& kernel() const { return *kernel_; }
  const Eigen::VectorXd& alpha() const { return alpha_; }
  double rkhs_bound() const { return rkhs_bound_; }
  Eigen::Index size() const { return data_.size(); }

 private:
  KrrModel() = default;
  void factorize();  // fills llt_ from data_, throws FitError on failure
  Eigen::VectorXd kernel_vector(const Eigen::VectorXd& x) const;

  std::shared_ptr<const Kernel> kernel_;
  Dataset data_;
  double rkhs_bound_ = 0.0;
  Eigen::VectorXd alpha_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double beta_ = 0.0;
  bool beta_clamped_ = false;
  double fit_residual_ = 0.0;
};

}  // namespace krc
