#include "krc/synthesis.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>

namespace krc {

namespace {

constexpr double kLyapunovResidualTol = 1e-9;
constexpr double kSymmetryTol = 1e-10;

double spectral_norm(const Eigen::MatrixXd& M) {
  return M.jacobiSvd().singularValues()(0);
}

std::string format_sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return buf;
}

// Real coefficients of prod (lambda - p_i), leading coefficient first.
// Requires the pole multiset to be closed under conjugation.
Eigen::VectorXd characteristic_coefficients(const PoleSet& poles) {
  std::vector<std::complex<double>> coeffs{1.0};
  for (const auto& p : poles) {
    std::vector<std::complex<double>> next(coeffs.size() + 1, 0.0);
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
      next[i] += coeffs[i];
      next[i + 1] -= coeffs[i] * p;
    }
    coeffs = std::move(next);
  }
  Eigen::VectorXd real_coeffs(coeffs.size());
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (std::abs(coeffs[i].imag()) > 1e-9 * (1.0 + std::abs(coeffs[i].real())))
      throw SynthesisError("pole set is not closed under conjugation");
    real_coeffs[static_cast<Eigen::Index>(i)] = coeffs[i].real();
  }
  return real_coeffs;
}

void warn_if_unstable(const PoleSet& poles, const char* which) {
  for (const auto& p : poles) {
    if (std::abs(p) >= 1.0) {
      std::cerr << "[krc] warning: " << which << " pole " << p
                << " on or outside the unit circle; the certificate will be infeasible\n";
      return;
    }
  }
}

}  // namespace

SystemMatrices build_matrices(Eigen::Index order, double step) {
  if (order < 1) throw ConfigError("build_matrices: order must be >= 1");
  if (!(step > 0.0)) throw ConfigError("build_matrices: step must be > 0");
  SystemMatrices m;
  m.A = Eigen::MatrixXd::Zero(order, order);
  for (Eigen::Index i = 0; i + 1 < order; ++i) {
    m.A(i, i) = 1.0;
    m.A(i, i + 1) = step;
  }
  m.b = Eigen::VectorXd::Zero(order);
  m.b[order - 1] = 1.0;
  m.c = Eigen::VectorXd::Zero(order);
  m.c[0] = 1.0;
  return m;
}

Eigen::VectorXd place_controller(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                 const PoleSet& poles) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || b.size() != n)
    throw DimensionError("place_controller: inconsistent A/b dimensions");
  if (static_cast<Eigen::Index>(poles.size()) != n)
    throw ConfigError("place_controller: need exactly n poles");
  warn_if_unstable(poles, "controller");

  // controllability matrix [b, Ab, ..., A^{n-1} b]
  Eigen::MatrixXd ctrb(n, n);
  Eigen::VectorXd col = b;
  for (Eigen::Index i = 0; i < n; ++i) {
    ctrb.col(i) = col;
    col = A * col;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(ctrb);
  if (!lu.isInvertible())
    throw SynthesisError("place_controller: (A, b) is not controllable");

  // Delta(A) by Horner on the desired characteristic polynomial
  const Eigen::VectorXd coeffs = characteristic_coefficients(poles);
  Eigen::MatrixXd delta = Eigen::MatrixXd::Identity(n, n) * coeffs[0];
  for (Eigen::Index i = 1; i < coeffs.size(); ++i)
    delta = delta * A + coeffs[i] * Eigen::MatrixXd::Identity(n, n);

  // Ackermann: K = e_n^T C^-1 Delta(A); the feedback here is +b phi^T, so
  // phi = -K^T.
  Eigen::VectorXd en = Eigen::VectorXd::Zero(n);
  en[n - 1] = 1.0;
  const Eigen::VectorXd y = lu.transpose().solve(en);  // y = C^-T e_n
  return -(delta.transpose() * y);
}

Eigen::VectorXd place_observer(const Eigen::MatrixXd& A, const Eigen::VectorXd& c,
                               const PoleSet& poles) {
  // spectrum(A + theta c^T) = spectrum(A^T + c theta^T)
  try {
    return place_controller(A.transpose(), c, poles);
  } catch (const SynthesisError& e) {
    if (std::string(e.what()).find("not controllable") != std::string::npos)
      throw SynthesisError("place_observer: (A, c^T) is not observable");
    throw;
  }
}

void assemble_concatenated(GainSet& gains) {
  const Eigen::Index n = gains.order;
  gains.A_tilde = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  gains.A_tilde.topLeftCorner(n, n) = gains.controller_closed_loop();
  gains.A_tilde.topRightCorner(n, n) = gains.b * gains.phi.transpose();
  gains.A_tilde.bottomRightCorner(n, n) = gains.observer_closed_loop();
  gains.b_tilde.resize(2 * n);
  gains.b_tilde << gains.b, -gains.b;
  // the measurement noise reaches the estimation block through the
  // innovation x^_1 - y = c^T e^ - v, hence the sign
  gains.theta_tilde = Eigen::VectorXd::Zero(2 * n);
  gains.theta_tilde.tail(n) = -gains.theta;
}

GainSet synthesize_gains(Eigen::Index order, double step, const PoleSet& controller_poles,
                         const PoleSet& observer_poles) {
  GainSet g;
  g.order = order;
  g.step = step;
  SystemMatrices m = build_matrices(order, step);
  g.A = std::move(m.A);
  g.b = std::move(m.b);
  g.c = std::move(m.c);
  g.controller_poles = controller_poles;
  g.observer_poles = observer_poles;
  g.phi = place_controller(g.A, g.b, controller_poles);
  g.theta = place_observer(g.A, g.c, observer_poles);
  assemble_concatenated(g);
  return g;
}

double spectral_radius(const Eigen::MatrixXd& M) {
  return M.eigenvalues().cwiseAbs().maxCoeff();
}

double multiset_pole_distance(const PoleSet& requested, const Eigen::VectorXcd& achieved) {
  if (static_cast<Eigen::Index>(requested.size()) != achieved.size())
    throw DimensionError("multiset_pole_distance: cardinality mismatch");
  std::vector<std::complex<double>> pool(achieved.data(), achieved.data() + achieved.size());
  double worst = 0.0;
  for (const auto& p : requested) {
    std::size_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pool.size(); ++i) {
      const double d = std::abs(pool[i] - p);
      if (d < best_dist) {
        best_dist = d;
        best = i;
      }
    }
    worst = std::max(worst, best_dist);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return worst;
}

Eigen::MatrixXd solve_discrete_lyapunov(const Eigen::MatrixXd& A_tilde,
                                        const Eigen::MatrixXd& Q) {
  const Eigen::Index m = A_tilde.rows();
  if (A_tilde.cols() != m || Q.rows() != m || Q.cols() != m)
    throw DimensionError("solve_discrete_lyapunov: dimension mismatch");
  if (m > 20)
    throw ConfigError("solve_discrete_lyapunov: Kronecker solve guarded to dimension 20");
  if (!Q.isApprox(Q.transpose(), 1e-12))
    throw ConfigError("solve_discrete_lyapunov: Q must be symmetric");
  if (spectral_radius(A_tilde) >= 1.0)
    throw InfeasibleError("solve_discrete_lyapunov: A~ is not Schur, no PD solution exists");

  // (I - kron(A~^T, A~^T)) vec(P) = vec(Q); kron(A~^T, A~^T) maps
  // vec(P) -> vec(A~^T P A~) in either storage order.
  const Eigen::MatrixXd At = A_tilde.transpose();
  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(m * m, m * m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      system.block(i * m, j * m, m, m) -= At(i, j) * At;

  const Eigen::VectorXd q = Eigen::Map<const Eigen::VectorXd>(Q.data(), m * m);
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
  Eigen::VectorXd p = lu.solve(q);
  p += lu.solve(q - system * p);  // one refinement pass
  Eigen::MatrixXd P = Eigen::Map<const Eigen::MatrixXd>(p.data(), m, m);

  const double asymmetry = (P - P.transpose()).lpNorm<Eigen::Infinity>();
  if (asymmetry > kSymmetryTol)
    throw NumericalError("solve_discrete_lyapunov: solution asymmetry " + format_sci(asymmetry));
  P = 0.5 * (P + P.transpose());

  const double residual = (At * P * A_tilde - P + Q).lpNorm<Eigen::Infinity>();
  if (residual > kLyapunovResidualTol)
    throw NumericalError("solve_discrete_lyapunov: residual " + format_sci(residual));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P);
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw NumericalError("solve_discrete_lyapunov: solution not positive definite");
  return P;
}

StabilityCertificate certificate(const GainSet& gains, const Eigen::MatrixXd& Q,
                                 double f_lipschitz, double beta, double v_bar, double p_bar) {
  if (!std::isfinite(f_lipschitz) || !std::isfinite(beta) || !std::isfinite(v_bar) ||
      !std::isfinite(p_bar))
    throw ConfigError("certificate: inputs must be finite");

  StabilityCertificate cert;
  cert.Q = Q;
  cert.P = solve_discrete_lyapunov(gains.A_tilde, Q);
  cert.beta = beta;
  cert.v_bar = v_bar;
  cert.f_lipschitz = f_lipschitz;
  cert.p_bar = p_bar;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_p(cert.P);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_q(Q);
  const double lam_min_q = es_q.eigenvalues().minCoeff();
  const double norm_p = es_p.eigenvalues().maxCoeff();  // spectral norm of symmetric PD P
  const double norm_atp = spectral_norm(gains.A_tilde.transpose() * cert.P);
  const double theta_norm = gains.theta.norm();

  cert.xi0 = lam_min_q - 2.0 * std::sqrt(2.0) * f_lipschitz * norm_atp -
             2.0 * f_lipschitz * f_lipschitz * norm_p;
  cert.xi1 = norm_atp + 2.0 * beta * f_lipschitz * norm_p * p_bar +
             std::sqrt(2.0) * f_lipschitz * norm_p * theta_norm * v_bar;
  cert.xi2 = norm_p;
  cert.chi = std::sqrt(es_p.eigenvalues().maxCoeff() / es_p.eigenvalues().minCoeff());
  cert.feasible = cert.xi0 > 0.0;

  if (cert.feasible) {
    cert.xi = (cert.xi1 + std::sqrt(cert.xi1 * cert.xi1 + cert.xi0 * cert.xi2)) / cert.xi0;
    cert.xi_statement = cert.xi1 / cert.xi0 + std::sqrt(1.0 + cert.xi2 / cert.xi0);
    const double disturbance = std::sqrt(2.0) * beta * p_bar + theta_norm * v_bar;
    cert.tracking_bound = cert.chi * cert.xi * disturbance;
    cert.observation_bound = cert.tracking_bound;
    cert.conservative_bound = cert.chi * std::max(cert.xi, cert.xi_statement) * disturbance;
  } else {
    cert.xi = std::numeric_limits<double>::quiet_NaN();
    cert.xi_statement = std::numeric_limits<double>::quiet_NaN();
  }
  return cert;
}

double power_sup(const KrrModel& model, const Box& domain, int grid_per_dim) {
  if (grid_per_dim < 2) throw ConfigError("power_sup: grid_per_dim must be >= 2");
  const Eigen::Index dim = domain.dim();
  std::vector<Eigen::Index> index(dim, 0);
  Eigen::VectorXd x(dim);
  double best = 0.0;
  while (true) {
    for (Eigen::Index d = 0; d < dim; ++d) {
      const double t = static_cast<double>(index[d]) / (grid_per_dim - 1);
      x[d] = domain.lower[d] + t * (domain.upper[d] - domain.lower[d]);
    }
    best = std::max(best, model.power(x));
    Eigen::Index d = 0;
    for (; d < dim; ++d) {
      if (++index[d] < grid_per_dim) break;
      index[d] = 0;
    }
    if (d == dim) break;
  }
  return best;
}

}  // namespace krc
