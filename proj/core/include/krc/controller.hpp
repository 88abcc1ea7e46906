#pragma once

/*
  Learning-based tracking controller with state observer:

      u(t_k)       = -mu(x^(t_k)) + r(t_k) + phi^T (x^(t_k) - s(t_k))
      x^(t_{k+1})  = (A + b phi^T)(x^(t_k) - s(t_k)) + s(t_{k+1})
                     + theta (x^_1(t_k) - y(t_k))

  and the closed-loop stepping engine. The per-step event order is frozen:
  measure -> control -> plant step -> observer step -> reference advance.
  Any permutation changes the results.

  run_error_dynamics iterates the concatenated recursion

      e~(t_{k+1}) = A~ e~(t_k) + b~ d(t_k) + theta~ v(t_k)

  on given residual/noise sequences; feeding it the realized d = f(x) - mu(x^)
  and v = y - x_1 from a closed-loop trace must reproduce that trace's
  (e, e^) -- the structural check that controller, observer and the derived
  error dynamics agree.
*/

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "krc/acquisition.hpp"
#include "krc/krr.hpp"
#include "krc/plant.hpp"
#include "krc/synthesis.hpp"

namespace krc {

// Resolves mu() in the control law: no model (mu = 0), a fitted KRR model,
// or the ground-truth f. The exact handle exists for the oracle baseline
// only and never touches the learning path.
class Predictor {
 public:
  enum class Kind { none, krr, exact };

  static Predictor none() { return Predictor(Kind::none); }
  static Predictor krr(std::shared_ptr<const KrrModel> model) {
    Predictor p(Kind::krr);
    p.model_ = std::move(model);
    return p;
  }
  static Predictor exact(Nonlinearity f) {
    Predictor p(Kind::exact);
    p.exact_ = std::move(f);
    return p;
  }

  double mu(const Eigen::VectorXd& x) const;
  Kind kind() const { return kind_; }
  std::string label() const;
  const KrrModel* model() const { return model_.get(); }

 private:
  explicit Predictor(Kind kind) : kind_(kind) {}
  Kind kind_;
  std::shared_ptr<const KrrModel> model_;
  std::optional<Nonlinearity> exact_;
};

double control(const GainSet& gains, const Predictor& predictor, const Eigen::VectorXd& x_hat,
               const Eigen::VectorXd& s, double r_k);

Eigen::VectorXd observer_step(const GainSet& gains, const Eigen::VectorXd& x_hat,
                              const Eigen::VectorXd& s_k, const Eigen::VectorXd& s_next,
                              double y_k);

struct TraceRecord {
  long k = 0;
  double t = 0.0;
  Eigen::VectorXd x, x_hat, s;
  double u = 0.0, y = 0.0;
  Eigen::VectorXd e;      // x - s
  Eigen::VectorXd e_hat;  // x^ - x
  double e_norm = 0.0, e_hat_norm = 0.0;
  double residual = 0.0;  // f(x) - mu(x^), as realized in the loop
  double noise = 0.0;     // the drawn v(t_k)
};

struct SimulationTrace {
  std::vector<TraceRecord> records;
  bool aborted = false;
  std::string fault;

  long steps() const { return static_cast<long>(records.size()); }
};

// Deterministic given the seed. Faults abort with the partial trace retained.
SimulationTrace run_closed_loop(const PlantConfig& cfg, const ReferenceSpec& ref,
                                const GainSet& gains, const Predictor& predictor,
                                const Eigen::VectorXd& x0, const Eigen::VectorXd& x_hat0,
                                long steps, std::uint64_t seed);

// Rows k = 0..steps of e~; row 0 is e_tilde0.
Eigen::MatrixXd run_error_dynamics(const GainSet& gains, std::span<const double> residuals,
                                   std::span<const double> noises,
                                   const Eigen::VectorXd& e_tilde0, long steps);

// Smallest k~ such that max(||e||, ||e^||) <= bound for every k >= k~;
// nullopt when even the final step violates.
std::optional<long> detect_settle_index(const SimulationTrace& trace, double bound);

// Median of ||e|| (or ||e^||) over the last `window` records.
double steady_state_median(const SimulationTrace& trace, long window, bool observation = false);

// Exploration policy for Algorithm-1 data collection: the tracking controller
// itself, with mu resolved by any predictor (the default data-acquisition
// setup uses Predictor::none()).
class TrackingExplorationPolicy final : public ExplorationPolicy {
 public:
  TrackingExplorationPolicy(const GainSet& gains, ReferenceSpec ref, Predictor predictor);

  void begin_episode() override;
  double act(long k, double y) override;
  Eigen::VectorXd reference_state() const override { return last_reference_; }

 private:
  GainSet gains_;
  ReferenceSpec ref_;
  Predictor predictor_;
  Eigen::VectorXd x_hat_, s_;
  Eigen::VectorXd last_reference_;
};

}  // namespace krc
