#include "krc/controller.hpp"

#include <algorithm>
#include <cmath>

namespace krc {

double Predictor::mu(const Eigen::VectorXd& x) const {
  switch (kind_) {
    case Kind::none:
      return 0.0;
    case Kind::krr:
      return model_->predict(x);
    case Kind::exact:
      return (*exact_)(x);
  }
  return 0.0;
}

std::string Predictor::label() const {
  switch (kind_) {
    case Kind::none:
      return "none";
    case Kind::krr:
      return "krr";
    case Kind::exact:
      return "exact";
  }
  return "?";
}

double control(const GainSet& gains, const Predictor& predictor, const Eigen::VectorXd& x_hat,
               const Eigen::VectorXd& s, double r_k) {
  const double mu = predictor.mu(x_hat);
  if (!std::isfinite(mu)) throw SimulationError("control: non-finite prediction");
  const double u = -mu + r_k + gains.phi.dot(x_hat - s);
  if (!std::isfinite(u)) throw SimulationError("control: non-finite input");
  return u;
}

Eigen::VectorXd observer_step(const GainSet& gains, const Eigen::VectorXd& x_hat,
                              const Eigen::VectorXd& s_k, const Eigen::VectorXd& s_next,
                              double y_k) {
  Eigen::VectorXd next = gains.controller_closed_loop() * (x_hat - s_k) + s_next +
                         gains.theta * (x_hat[0] - y_k);
  if (!next.allFinite()) throw SimulationError("observer_step: non-finite estimate");
  return next;
}

SimulationTrace run_closed_loop(const PlantConfig& cfg, const ReferenceSpec& ref,
                                const GainSet& gains, const Predictor& predictor,
                                const Eigen::VectorXd& x0, const Eigen::VectorXd& x_hat0,
                                long steps, std::uint64_t seed) {
  cfg.validate();
  if (steps < 1) throw ConfigError("run_closed_loop: steps must be >= 1");
  if (x0.size() != cfg.order || x_hat0.size() != cfg.order)
    throw DimensionError("run_closed_loop: initial state dimension != order");

  SimulationTrace trace;
  trace.records.reserve(static_cast<std::size_t>(steps));
  NoiseSource noise(seed, cfg.noise_bound);

  Eigen::VectorXd x = x0;
  Eigen::VectorXd x_hat = x_hat0;
  Eigen::VectorXd s = ref.initial_state;

  for (long k = 0; k < steps; ++k) {
    TraceRecord rec;
    rec.k = k;
    rec.t = static_cast<double>(k) * cfg.step;
    rec.x = x;
    rec.x_hat = x_hat;
    rec.s = s;

    try {
      const double v = noise.next();
      rec.noise = v;
      rec.y = x[0] + v;
      rec.u = control(gains, predictor, x_hat, s, ref.driver(k));
      rec.residual = cfg.f(x) - predictor.mu(x_hat);
      rec.e = x - s;
      rec.e_hat = x_hat - x;
      rec.e_norm = rec.e.norm();
      rec.e_hat_norm = rec.e_hat.norm();

      const Eigen::VectorXd x_next = plant_step(cfg, x, rec.u);
      const Eigen::VectorXd s_next = reference_step(ref, s, k, cfg.step);
      const Eigen::VectorXd x_hat_next = observer_step(gains, x_hat, s, s_next, rec.y);

      trace.records.push_back(std::move(rec));
      x = x_next;
      s = s_next;
      x_hat = x_hat_next;
    } catch (const SimulationError& err) {
      trace.aborted = true;
      trace.fault = err.what();
      break;
    }
  }
  return trace;
}

Eigen::MatrixXd run_error_dynamics(const GainSet& gains, std::span<const double> residuals,
                                   std::span<const double> noises,
                                   const Eigen::VectorXd& e_tilde0, long steps) {
  const Eigen::Index m = 2 * gains.order;
  if (e_tilde0.size() != m)
    throw DimensionError("run_error_dynamics: e_tilde0 must have dimension 2n");
  if (static_cast<long>(residuals.size()) < steps || static_cast<long>(noises.size()) < steps)
    throw DimensionError("run_error_dynamics: sequences shorter than requested steps");

  Eigen::MatrixXd out(steps + 1, m);
  Eigen::VectorXd e = e_tilde0;
  out.row(0) = e;
  for (long k = 0; k < steps; ++k) {
    e = gains.A_tilde * e + gains.b_tilde * residuals[static_cast<std::size_t>(k)] +
        gains.theta_tilde * noises[static_cast<std::size_t>(k)];
    out.row(k + 1) = e;
  }
  return out;
}

std::optional<long> detect_settle_index(const SimulationTrace& trace, double bound) {
  long settle = -1;
  for (long k = trace.steps() - 1; k >= 0; --k) {
    const auto& rec = trace.records[static_cast<std::size_t>(k)];
    if (std::max(rec.e_norm, rec.e_hat_norm) > bound) {
      settle = k + 1;
      break;
    }
    settle = k;
  }
  if (settle < 0) settle = 0;
  if (settle >= trace.steps()) return std::nullopt;
  return settle;
}

double steady_state_median(const SimulationTrace& trace, long window, bool observation) {
  const long n = trace.steps();
  if (n == 0) throw ConfigError("steady_state_median: empty trace");
  const long w = std::min(window, n);
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(w));
  for (long k = n - w; k < n; ++k) {
    const auto& rec = trace.records[static_cast<std::size_t>(k)];
    values.push_back(observation ? rec.e_hat_norm : rec.e_norm);
  }
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

TrackingExplorationPolicy::TrackingExplorationPolicy(const GainSet& gains, ReferenceSpec ref,
                                                     Predictor predictor)
    : gains_(gains), ref_(std::move(ref)), predictor_(std::move(predictor)) {
  begin_episode();
}

void TrackingExplorationPolicy::begin_episode() {
  s_ = ref_.initial_state;
  x_hat_ = ref_.initial_state;  // no state information before the first output
  last_reference_ = s_;
}

double TrackingExplorationPolicy::act(long k, double y) {
  last_reference_ = s_;
  const double u = control(gains_, predictor_, x_hat_, s_, ref_.driver(k));
  const Eigen::VectorXd s_next = reference_step(ref_, s_, k, gains_.step);
  x_hat_ = observer_step(gains_, x_hat_, s_, s_next, y);
  s_ = s_next;
  return u;
}

}  // namespace krc
