#pragma once

/*
  Gain synthesis and stability certification for the observer-based tracking
  loop.

  The chain matrices are

      A = [ I_{n-1} | T I_{n-1} ]      b = e_n,   c = e_1
          [    0    |     0     ]  (unit diagonal except A[n][n] = 0,
                                    superdiagonal T)

  phi and theta come from Ackermann's formula (the observer dually, on
  (A^T, c)). The concatenated error dynamics use

      A~ = [ A + b phi^T   b phi^T     ]   b~ = [ b; -b ]   theta~ = [ 0; -theta ]
           [      0        A + theta c^T ]

  theta~ carries a minus sign: the measurement noise enters the estimation
  block through the innovation x^_1 - y = c^T e^ - v, so the recursion driven
  by the physical noise sequence needs -theta. ||theta~|| = ||theta|| either
  way, which is all the certificate uses.

  The certificate evaluates, for P solving A~^T P A~ - P = -Q,

      xi0 = lambda_min(Q) - 2 sqrt(2) L_f ||A~^T P|| - 2 L_f^2 ||P||
      xi1 = ||A~^T P|| + 2 beta L_f ||P|| P_bar + sqrt(2) L_f ||P|| ||theta|| v_bar
      xi2 = ||P||

  (spectral norms throughout) and the ultimate bound

      ||e||, ||e^|| <= chi * xi * (sqrt(2) beta P_bar + ||theta|| v_bar)

  with chi = sqrt(lambda_max(P)/lambda_min(P)). Two algebraic forms of xi are
  in circulation; both are computed (xi = xi0^-1 (xi1 + sqrt(xi1^2 + xi0 xi2))
  is primary, the alternative xi0^-1 xi1 + sqrt(1 + xi0^-1 xi2) is reported,
  and conservative checks take the larger). xi0 <= 0 means the certificate is
  infeasible and no bound is available; that is a result, not an exception.
*/

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <vector>

#include "krc/geometry.hpp"
#include "krc/krr.hpp"

namespace krc {

struct SystemMatrices {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
};

SystemMatrices build_matrices(Eigen::Index order, double step);

using PoleSet = std::vector<std::complex<double>>;

// phi with spectrum(A + b phi^T) = poles. Poles must be closed under
// conjugation; poles on or outside the unit circle only warn (the
// certificate will come out infeasible).
Eigen::VectorXd place_controller(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                 const PoleSet& poles);

// theta with spectrum(A + theta c^T) = poles, via duality on (A^T, c).
Eigen::VectorXd place_observer(const Eigen::MatrixXd& A, const Eigen::VectorXd& c,
                               const PoleSet& poles);

struct GainSet {
  Eigen::Index order = 0;
  double step = 0.0;
  Eigen::MatrixXd A;
  Eigen::VectorXd b, c;
  Eigen::VectorXd phi, theta;
  PoleSet controller_poles, observer_poles;
  Eigen::MatrixXd A_tilde;      // 2n x 2n
  Eigen::VectorXd b_tilde;      // (b; -b)
  Eigen::VectorXd theta_tilde;  // (0; -theta)

  Eigen::MatrixXd controller_closed_loop() const { return A + b * phi.transpose(); }
  Eigen::MatrixXd observer_closed_loop() const { return A + theta * c.transpose(); }
};

// Fills A_tilde, b_tilde, theta_tilde from the placed gains.
void assemble_concatenated(GainSet& gains);

// build_matrices + both placements + concatenated assembly.
GainSet synthesize_gains(Eigen::Index order, double step, const PoleSet& controller_poles,
                         const PoleSet& observer_poles);

// Unique P > 0 with A~^T P A~ - P = -Q, by Kronecker vectorization
// (dimension-guarded; fine for the 2n <= 20 regime this targets). Throws
// InfeasibleError when A~ is not Schur and NumericalError when the residual
// exceeds 1e-9.
Eigen::MatrixXd solve_discrete_lyapunov(const Eigen::MatrixXd& A_tilde, const Eigen::MatrixXd& Q);

double spectral_radius(const Eigen::MatrixXd& M);

// Greedy nearest-match multiset distance between requested poles and an
// achieved spectrum: max over requested poles of the distance to their match.
double multiset_pole_distance(const PoleSet& requested, const Eigen::VectorXcd& achieved);

struct StabilityCertificate {
  Eigen::MatrixXd P, Q;
  double xi0 = 0.0, xi1 = 0.0, xi2 = 0.0;
  double xi = 0.0;            // proof form, meaningful only when feasible
  double xi_statement = 0.0;  // the alternative published form, reported for comparison
  double chi = 0.0;
  double p_bar = 0.0;
  double beta = 0.0;
  double v_bar = 0.0;
  double f_lipschitz = 0.0;
  bool feasible = false;  // xi0 > 0
  std::optional<double> tracking_bound;      // chi * xi * (sqrt(2) beta P_bar + ||theta|| v_bar)
  std::optional<double> observation_bound;   // identical by construction
  std::optional<double> conservative_bound;  // same, with max(xi, xi_statement)
};

StabilityCertificate certificate(const GainSet& gains, const Eigen::MatrixXd& Q, double f_lipschitz,
                                 double beta, double v_bar, double p_bar);

// Grid maximum of the power function over a box (P_bar estimate). The exact
// ceiling sqrt(kappa(x,x)) brackets it from above for stationary kernels.
double power_sup(const KrrModel& model, const Box& domain, int grid_per_dim);

}  // namespace krc
