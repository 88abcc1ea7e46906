#include "krc/krr.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>
#include <iostream>

namespace krc {

namespace {

constexpr double kPowerClampTol = 1e-12;

std::string format_sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return buf;
}

}  // namespace

KrrModel KrrModel::empty(const Kernel& kernel, double rkhs_bound) {
  if (rkhs_bound < 0.0) throw ConfigError("KrrModel: rkhs_bound must be >= 0");
  KrrModel m;
  m.kernel_ = std::shared_ptr<const Kernel>(kernel.clone());
  m.data_.inputs.resize(0, kernel.input_dim());
  m.data_.targets.resize(0);
  m.rkhs_bound_ = rkhs_bound;
  m.beta_ = std::sqrt(rkhs_bound * rkhs_bound + 1.0);
  return m;
}

void KrrModel::factorize() {
  const Eigen::Index n = data_.size();
  Eigen::MatrixXd R = gram_matrix(*kernel_, data_.inputs);
  R.diagonal().array() += static_cast<double>(n) * data_.noise_bound * data_.noise_bound;
  llt_.compute(R);
  if (llt_.info() != Eigen::Success) {
    const double pivot = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(R).eigenvalues().minCoeff();
    throw FitError("KrrModel: regularized Gram matrix is not positive definite "
                   "(smallest pivot " + format_sci(pivot) + ")",
                   pivot);
  }
}

KrrModel KrrModel::fit(const Kernel& kernel, Dataset data, double rkhs_bound) {
  data.validate();
  if (data.size() == 0) return empty(kernel, rkhs_bound);
  if (!(data.noise_bound > 0.0))
    throw ConfigError("KrrModel::fit: noise_bound must be > 0 when N > 0 "
                      "(the regularizer N*noise_bound^2 must be positive)");
  if (!(rkhs_bound > 0.0)) throw ConfigError("KrrModel::fit: rkhs_bound must be > 0");
  if (data.inputs.cols() != kernel.input_dim())
    throw DimensionError("KrrModel::fit: data dimension != kernel input_dim");

  KrrModel m;
  m.kernel_ = std::shared_ptr<const Kernel>(kernel.clone());
  m.data_ = std::move(data);
  m.rkhs_bound_ = rkhs_bound;
  m.factorize();

  m.alpha_ = m.llt_.solve(m.data_.targets);

  // residual against the regularized system we just solved
  const Eigen::Index n = m.data_.size();
  Eigen::MatrixXd R = gram_matrix(*m.kernel_, m.data_.inputs);
  R.diagonal().array() += static_cast<double>(n) * m.data_.noise_bound * m.data_.noise_bound;
  m.fit_residual_ = (R * m.alpha_ - m.data_.targets).lpNorm<Eigen::Infinity>();

  const double quad = m.data_.targets.dot(m.alpha_);  // z^T (K + N w^2 I)^-1 z
  const double radicand = rkhs_bound * rkhs_bound - quad + 1.0;
  if (radicand < 0.0) {
    m.beta_ = 0.0;
    m.beta_clamped_ = true;
    std::cerr << "[krc] warning: beta radicand " << radicand
              << " < 0, clamped to 0 -- the RKHS bound B=" << rkhs_bound
              << " is inconsistent with the data (error envelope degenerates)\n";
  } else {
    m.beta_ = std::sqrt(radicand);
  }
  return m;
}

KrrModel KrrModel::restore(const Kernel& kernel, Dataset data, double rkhs_bound,
                           Eigen::VectorXd alpha, double beta, bool beta_clamped) {
  data.validate();
  if (data.size() == 0) return empty(kernel, rkhs_bound);
  if (alpha.size() != data.size())
    throw DimensionError("KrrModel::restore: alpha length != dataset size");
  KrrModel m;
  m.kernel_ = std::shared_ptr<const Kernel>(kernel.clone());
  m.data_ = std::move(data);
  m.rkhs_bound_ = rkhs_bound;
  m.factorize();
  m.alpha_ = std::move(alpha);
  m.beta_ = beta;
  m.beta_clamped_ = beta_clamped;

  const Eigen::Index n = m.data_.size();
  Eigen::MatrixXd R = gram_matrix(*m.kernel_, m.data_.inputs);
  R.diagonal().array() += static_cast<double>(n) * m.data_.noise_bound * m.data_.noise_bound;
  m.fit_residual_ = (R * m.alpha_ - m.data_.targets).lpNorm<Eigen::Infinity>();
  return m;
}

Eigen::VectorXd KrrModel::kernel_vector(const Eigen::VectorXd& x) const {
  const Eigen::Index n = data_.size();
  Eigen::VectorXd k(n);
  for (Eigen::Index i = 0; i < n; ++i) k[i] = (*kernel_)(data_.inputs.row(i), x);
  return k;
}

double KrrModel::predict(const Eigen::VectorXd& x) const {
  if (x.size() != kernel_->input_dim())
    throw DimensionError("KrrModel::predict: query dimension mismatch");
  if (data_.size() == 0) return 0.0;
  return kernel_vector(x).dot(alpha_);
}

double KrrModel::power(const Eigen::VectorXd& x) const {
  if (x.size() != kernel_->input_dim())
    throw DimensionError("KrrModel::power: query dimension mismatch");
  const double diag = kernel_->diagonal(x);
  if (data_.size() == 0) return std::sqrt(diag);
  const Eigen::VectorXd k = kernel_vector(x);
  const double p2 = diag - k.dot(llt_.solve(k));
  if (p2 < -kPowerClampTol)
    throw NumericalError("KrrModel::power: radicand " + format_sci(p2) +
                         " below clamping tolerance");
  return p2 > 0.0 ? std::sqrt(p2) : 0.0;
}

double KrrModel::beta_fallback() const {
  return std::sqrt(rkhs_bound_ * rkhs_bound_ + 1.0);
}

}  // namespace krc
