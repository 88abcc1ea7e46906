#include "krc/plant.hpp"

#include <cmath>

namespace krc {

Eigen::VectorXd plant_step(const PlantConfig& cfg, const Eigen::VectorXd& x, double u) {
  if (x.size() != cfg.order) throw DimensionError("plant_step: state dimension != order");
  if (!x.allFinite() || !std::isfinite(u))
    throw SimulationError("plant_step: non-finite state or input");
  if (!cfg.domain.contains(x)) {
    thread_local bool warned = false;
    if (!warned) {
      std::cerr << "[krc] warning: plant state left the domain; propagating anyway "
                   "(repeats suppressed)\n";
      warned = true;
    }
  }
  const Eigen::Index n = cfg.order;
  Eigen::VectorXd next(n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) next[i] = x[i] + x[i + 1] * cfg.step;
  next[n - 1] = cfg.f(x) + u;
  if (!next.allFinite()) throw SimulationError("plant_step: propagation produced non-finite state");
  return next;
}

double measure(const Eigen::VectorXd& x, NoiseSource& noise) {
  return x[0] + noise.next();
}

Eigen::VectorXd reference_step(const ReferenceSpec& spec, const Eigen::VectorXd& s, long k,
                               double step) {
  const Eigen::Index n = s.size();
  Eigen::VectorXd next(n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) next[i] = s[i] + s[i + 1] * step;
  next[n - 1] = spec.driver(k);
  return next;
}

namespace {

double paper_sim_f(const Eigen::VectorXd& x) {
  if (x.size() < 2) throw DimensionError("paper_sim nonlinearity needs at least 2 states");
  return 0.5 * (std::sin(0.2 * x[0]) - 1.0) + 1.0 / (1.0 + std::exp(x[1]));
}

}  // namespace

Nonlinearity lookup_nonlinearity(const std::string& name, const NonlinearityContext& ctx) {
  if (name == "zero") {
    return Nonlinearity{name, [](const Eigen::VectorXd&) { return 0.0; }, std::nullopt};
  }
  if (name == "paper_sim") {
    return Nonlinearity{name, paper_sim_f, std::nullopt};
  }
  constexpr const char* kPrefix = "rkhs_sample:";
  if (name.rfind(kPrefix, 0) == 0) {
    if (ctx.kernel == nullptr || ctx.domain == nullptr)
      throw ConfigError("lookup_nonlinearity: '" + name +
                        "' needs a kernel and domain in the context");
    std::uint64_t seed = 0;
    try {
      seed = std::stoull(name.substr(std::string(kPrefix).size()));
    } catch (const std::exception&) {
      throw ConfigError("lookup_nonlinearity: bad seed in '" + name + "'");
    }
    return make_rkhs_sample(*ctx.kernel, *ctx.domain, seed, ctx.centers, ctx.target_norm)
        .nonlinearity;
  }
  throw ConfigError("lookup_nonlinearity: unknown nonlinearity '" + name + "'");
}

RkhsSample make_rkhs_sample(const Kernel& kernel, const Box& domain, std::uint64_t seed,
                            int num_centers, double target_norm) {
  if (num_centers < 1) throw ConfigError("make_rkhs_sample: need at least one center");
  if (!(target_norm > 0.0)) throw ConfigError("make_rkhs_sample: target_norm must be > 0");
  if (domain.dim() != kernel.input_dim())
    throw DimensionError("make_rkhs_sample: domain dimension != kernel input_dim");

  UniformSampler rng(seed);
  const Eigen::Index m = num_centers;
  Eigen::MatrixXd centers(m, domain.dim());
  for (Eigen::Index j = 0; j < m; ++j) centers.row(j) = domain.sample(rng);
  Eigen::VectorXd a(m);
  for (Eigen::Index j = 0; j < m; ++j) a[j] = rng.in_range(-1.0, 1.0);

  // ||f||^2 = a^T K_C a; rescale so the norm is exactly target_norm
  const Eigen::MatrixXd Kc = gram_matrix(kernel, centers);
  const double q = a.dot(Kc * a);
  if (!(q > 0.0)) throw NumericalError("make_rkhs_sample: degenerate coefficient draw");
  a *= target_norm / std::sqrt(q);

  RkhsSample sample;
  sample.centers = centers;
  sample.coefficients = a;
  sample.norm = target_norm;

  std::shared_ptr<const Kernel> k(kernel.clone());
  Eigen::MatrixXd C = centers;
  Eigen::VectorXd coeff = a;
  sample.nonlinearity = Nonlinearity{
      "rkhs_sample:" + std::to_string(seed),
      [k, C, coeff](const Eigen::VectorXd& x) {
        double v = 0.0;
        for (Eigen::Index j = 0; j < C.rows(); ++j) v += coeff[j] * (*k)(C.row(j), x);
        return v;
      },
      target_norm};
  return sample;
}

std::function<double(long)> lookup_reference_driver(const std::string& name) {
  if (name == "zero") return [](long) { return 0.0; };
  if (name == "paper_sim") {
    return [](long k) {
      return 50.0 * (std::sin(0.1 * k + 0.2) - std::sin(0.1 * k + 0.1));
    };
  }
  throw ConfigError("lookup_reference_driver: unknown driver '" + name + "'");
}

}  // namespace krc
