#include "krc/pipeline.hpp"

#include <filesystem>
#include <limits>
#include <iostream>

namespace krc {
namespace pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

std::unique_ptr<Kernel> make_kernel(const ExperimentConfig& cfg) {
  return std::make_unique<SquaredExponentialKernel>(
      KernelSpec(cfg.kernel.sigma_f, cfg.kernel.length_scale, cfg.plant.order));
}

PlantConfig make_plant(const ExperimentConfig& cfg, const Kernel& kernel) {
  PlantConfig plant;
  plant.order = cfg.plant.order;
  plant.step = cfg.plant.step_seconds;
  plant.noise_bound = cfg.plant.noise_bound;
  plant.domain = cfg.plant.domain;
  plant.safe_set = cfg.plant.safe_set;
  plant.input_set = cfg.plant.input_set;
  NonlinearityContext ctx;
  ctx.kernel = &kernel;
  ctx.domain = &plant.domain;
  ctx.target_norm = cfg.rkhs_bound;
  plant.f = lookup_nonlinearity(cfg.plant.nonlinearity, ctx);
  plant.validate();
  return plant;
}

ReferenceSpec make_reference(const ExperimentConfig& cfg) {
  ReferenceSpec ref;
  ref.driver_name = cfg.reference.driver;
  ref.driver = lookup_reference_driver(cfg.reference.driver);
  ref.initial_state = cfg.reference.initial_state;
  return ref;
}

GainSet make_gains(const ExperimentConfig& cfg) {
  PoleSet ctrl, obs;
  for (double p : cfg.poles.controller) ctrl.emplace_back(p, 0.0);
  for (double p : cfg.poles.observer) obs.emplace_back(p, 0.0);
  return synthesize_gains(cfg.plant.order, cfg.plant.step_seconds, ctrl, obs);
}

Eigen::MatrixXd make_q(const ExperimentConfig& cfg) {
  const Eigen::Index m = 2 * cfg.plant.order;
  return cfg.lyapunov_q.scale * Eigen::MatrixXd::Identity(m, m);
}

double propagated_noise_bound(const ExperimentConfig& cfg) {
  const auto kernel = make_kernel(cfg);
  const LipschitzInfo lip = function_lipschitz(*kernel, cfg.rkhs_bound);
  return noise_bound(cfg.plant.order, cfg.plant.step_seconds, cfg.plant.noise_bound,
                     lip.f_lipschitz);
}

CollectOutput run_collect(const ExperimentConfig& cfg, bool keep_trajectories) {
  cfg.validate();
  const auto kernel = make_kernel(cfg);
  const PlantConfig plant = make_plant(cfg, *kernel);
  const LipschitzInfo lip = function_lipschitz(*kernel, cfg.rkhs_bound);
  const double w_bar = noise_bound(plant.order, plant.step, plant.noise_bound, lip.f_lipschitz);

  // Algorithm-1 exploration: the tracking controller itself, without a model.
  GainSet gains = make_gains(cfg);
  TrackingExplorationPolicy policy(gains, make_reference(cfg), Predictor::none());

  CollectOptions options;
  options.max_episodes = cfg.acquisition.max_episodes;
  options.target_samples = cfg.acquisition.target_samples;
  options.max_steps_per_episode = cfg.acquisition.max_steps_per_episode;
  options.pairing = cfg.acquisition.strict_paper_pairing ? TargetPairing::literal
                                                         : TargetPairing::shifted;
  options.keep_trajectories = keep_trajectories;

  CollectOutput out;
  out.result = collect(plant, policy, cfg.acquisition.seed, options, w_bar);
  out.f_lipschitz = lip.f_lipschitz;
  return out;
}

KrrModel train_model(const ExperimentConfig& cfg, const Dataset& data) {
  const auto kernel = make_kernel(cfg);
  return KrrModel::fit(*kernel, data, cfg.rkhs_bound);
}

AnalysisOutput analyze(const ExperimentConfig& cfg, const KrrModel& model) {
  cfg.validate();
  AnalysisOutput out;
  out.gains = make_gains(cfg);
  const auto kernel = make_kernel(cfg);
  const LipschitzInfo lip = function_lipschitz(*kernel, cfg.rkhs_bound);
  const double p_bar = power_sup(model, cfg.plant.domain, cfg.grid_per_dim);
  out.certificate = certificate(out.gains, make_q(cfg), lip.f_lipschitz, model.beta(),
                                cfg.plant.noise_bound, p_bar);
  return out;
}

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::without_learning:
      return "without_krr";
    case Variant::with_krr:
      return "with_krr";
    case Variant::exact:
      return "exact";
  }
  return "?";
}

SimulationTrace simulate(const ExperimentConfig& cfg, const GainSet& gains, Variant variant,
                         std::shared_ptr<const KrrModel> model, std::uint64_t seed) {
  cfg.validate();
  const auto kernel = make_kernel(cfg);
  const PlantConfig plant = make_plant(cfg, *kernel);
  const ReferenceSpec ref = make_reference(cfg);

  Predictor predictor = Predictor::none();
  if (variant == Variant::with_krr) {
    if (!model) throw ConfigError("simulate: with_krr variant needs a model");
    predictor = Predictor::krr(std::move(model));
  } else if (variant == Variant::exact) {
    predictor = Predictor::exact(plant.f);
  }

  const Eigen::VectorXd x0 = cfg.simulation.initial_state;
  const Eigen::VectorXd x_hat0 = cfg.simulation.observer_starts_at_reference
                                     ? ref.initial_state
                                     : cfg.simulation.observer_initial_state;
  return run_closed_loop(plant, ref, gains, predictor, x0, x_hat0, cfg.simulation.steps, seed);
}

TraceSummary summarize(const SimulationTrace& trace, const std::string& variant,
                       std::uint64_t seed, std::optional<double> bound, long window) {
  TraceSummary s;
  s.variant = variant;
  s.seed = seed;
  s.steps = trace.steps();
  s.window = std::min(window, trace.steps());
  s.aborted = trace.aborted;
  s.fault = trace.fault;
  if (trace.steps() == 0) {
    s.e_median = s.e_hat_median = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  s.e_median = steady_state_median(trace, window, false);
  s.e_hat_median = steady_state_median(trace, window, true);
  if (bound) {
    s.bound = bound;
    s.settle_index = detect_settle_index(trace, *bound);
    if (s.settle_index) {
      for (long k = *s.settle_index; k < trace.steps(); ++k) {
        const auto& rec = trace.records[static_cast<std::size_t>(k)];
        if (std::max(rec.e_norm, rec.e_hat_norm) > *bound) ++s.violations_after_settle;
      }
    }
  }
  return s;
}

json summary_to_json(const TraceSummary& s) {
  json j;
  j["variant"] = s.variant;
  j["seed"] = s.seed;
  j["steps"] = s.steps;
  j["steady_state"] = {{"window", s.window},
                       {"e_median", s.e_median},
                       {"e_hat_median", s.e_hat_median}};
  j["bound"] = s.bound ? json(*s.bound) : json(nullptr);
  j["settle_index"] = s.settle_index ? json(*s.settle_index) : json(nullptr);
  j["violations_after_settle"] = s.violations_after_settle;
  j["aborted"] = s.aborted;
  if (s.aborted) j["fault"] = s.fault;
  return j;
}

ReproduceOutcome reproduce_paper(const std::string& out_dir) {
  return reproduce(paper_config(), out_dir);
}

ReproduceOutcome reproduce(const ExperimentConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  fs::create_directories(out_dir);
  const auto stage_file = [&](const std::string& name) { return (fs::path(out_dir) / name).string(); };

  save_config(cfg, stage_file("config.json"));

  // collect
  CollectOutput collected = run_collect(cfg, /*keep_trajectories=*/true);
  io::write_dataset_csv(stage_file("dataset.csv"), collected.result.dataset);
  io::DatasetSidecar sidecar;
  sidecar.order = cfg.plant.order;
  sidecar.step_seconds = cfg.plant.step_seconds;
  sidecar.v_bar = cfg.plant.noise_bound;
  sidecar.w_bar = collected.result.w_bar;
  sidecar.f_lipschitz = collected.f_lipschitz;
  sidecar.seed = cfg.acquisition.seed;
  sidecar.strict_paper_pairing = cfg.acquisition.strict_paper_pairing;
  sidecar.clamped_inputs = collected.result.clamped_inputs;
  sidecar.safety_violations = collected.result.safety_violations;
  for (const auto& ep : collected.result.episodes) sidecar.episodes.emplace_back(ep.seed, ep.samples);
  io::write_dataset_sidecar(stage_file("dataset.json"), sidecar);
  if (!collected.result.episodes.empty())
    io::write_plant_trajectory_csv(stage_file("acquisition_episode0.csv"),
                                   collected.result.episodes.front(), cfg.plant.step_seconds);

  // train
  auto model = std::make_shared<KrrModel>(train_model(cfg, collected.result.dataset));
  io::save_model(stage_file("model.json"), *model);

  // analyze
  AnalysisOutput analysis = analyze(cfg, *model);
  io::write_json(stage_file("certificate.json"),
                 io::certificate_to_json(analysis.certificate, analysis.gains));

  // simulate all three variants on the first configured seed
  const std::uint64_t seed = cfg.simulation.seeds.front();
  const std::optional<double> bound = analysis.certificate.conservative_bound;

  ReproduceOutcome outcome;
  outcome.beta = model->beta();
  outcome.w_bar = collected.result.w_bar;
  outcome.samples = collected.result.dataset.size();
  outcome.certificate_feasible = analysis.certificate.feasible;
  outcome.certificate_bound = bound;

  const auto run_variant = [&](Variant v) {
    SimulationTrace trace = simulate(cfg, analysis.gains, v,
                                     v == Variant::with_krr ? model : nullptr, seed);
    const std::string name = variant_name(v);
    io::write_trace_csv(stage_file("trace_" + name + ".csv"), trace);
    TraceSummary s = summarize(trace, name, seed, bound);
    io::write_json(stage_file("summary_" + name + ".json"), summary_to_json(s));
    return s;
  };

  outcome.without_learning = run_variant(Variant::without_learning);
  outcome.with_krr = run_variant(Variant::with_krr);
  outcome.exact = run_variant(Variant::exact);
  outcome.improvement_ratio = outcome.without_learning.e_median / outcome.with_krr.e_median;

  if (!analysis.certificate.feasible) {
    outcome.bound_containment_verdict = "not_applicable_certificate_infeasible";
  } else if (!outcome.with_krr.settle_index) {
    outcome.bound_containment_verdict = "violated_never_settles";
  } else if (outcome.with_krr.violations_after_settle > 0) {
    outcome.bound_containment_verdict = "violated_after_settle";
  } else {
    outcome.bound_containment_verdict = "contained";
  }

  json report;
  report["improvement_ratio"] = outcome.improvement_ratio;
  report["bound_containment"] = outcome.bound_containment_verdict;
  report["certificate_feasible"] = outcome.certificate_feasible;
  report["beta"] = outcome.beta;
  report["w_bar"] = outcome.w_bar;
  report["samples"] = outcome.samples;
  report["variants"] = {summary_to_json(outcome.without_learning),
                        summary_to_json(outcome.with_krr), summary_to_json(outcome.exact)};
  io::write_json(stage_file("report.json"), report);
  return outcome;
}

}  // namespace pipeline
}  // namespace krc
