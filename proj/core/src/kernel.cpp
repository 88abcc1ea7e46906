#include "krc/kernel.hpp"

#include <cmath>

namespace krc {

double SquaredExponentialKernel::operator()(const Eigen::VectorXd& x,
                                            const Eigen::VectorXd& x_prime) const {
  check_dim(x);
  check_dim(x_prime);
  const double sq = (x - x_prime).squaredNorm();
  const double l2 = spec_.length_scale * spec_.length_scale;
  return spec_.sigma_f * spec_.sigma_f * std::exp(-0.5 * sq / l2);
}

Eigen::VectorXd SquaredExponentialKernel::gradient(const Eigen::VectorXd& x,
                                                   const Eigen::VectorXd& x_prime) const {
  // d/dx kappa = -kappa(x,x') (x - x') / l^2
  const double k = (*this)(x, x_prime);
  const double l2 = spec_.length_scale * spec_.length_scale;
  return -(k / l2) * (x - x_prime);
}

double SquaredExponentialKernel::lipschitz() const {
  return spec_.sigma_f * spec_.sigma_f / (spec_.length_scale * std::sqrt(std::exp(1.0)));
}

Eigen::MatrixXd gram_matrix(const Kernel& kernel, const Eigen::MatrixXd& inputs) {
  if (inputs.rows() >= 1 && inputs.cols() != kernel.input_dim())
    throw DimensionError("gram_matrix: inputs have " + std::to_string(inputs.cols()) +
                         " columns, kernel expects " + std::to_string(kernel.input_dim()));
  const Eigen::Index n = inputs.rows();
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index p = 0; p < n; ++p) {
    K(p, p) = kernel.diagonal(inputs.row(p));
    for (Eigen::Index q = p + 1; q < n; ++q) {
      const double v = kernel(inputs.row(p), inputs.row(q));
      K(p, q) = v;
      K(q, p) = v;
    }
  }
  return K;
}

LipschitzInfo function_lipschitz(const Kernel& kernel, double rkhs_bound) {
  if (rkhs_bound < 0.0) throw ConfigError("function_lipschitz: rkhs_bound must be >= 0");
  LipschitzInfo info;
  info.kappa_lipschitz = kernel.lipschitz();
  info.rkhs_bound = rkhs_bound;
  info.f_lipschitz = std::sqrt(2.0 * info.kappa_lipschitz) * rkhs_bound;
  return info;
}

}  // namespace krc
