// krc -- kernel-regression tracking control toolbox CLI.
//
// Subcommands: collect, train, analyze, simulate, reproduce-paper.
// Exit codes: 0 ok, 2 configuration error, 3 runtime fault, 4 infeasible
// (closed loop not Schur).

#include <cstdio>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "krc/io.hpp"
#include "krc/pipeline.hpp"

namespace {

using namespace krc;

int guarded(const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

std::string strip_csv_suffix(const std::string& path) {
  const std::string suffix = ".csv";
  if (path.size() > suffix.size() &&
      path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0)
    return path.substr(0, path.size() - suffix.size());
  return path;
}

void do_collect(const std::string& config_path, const std::string& out,
                std::optional<std::uint64_t> seed, bool strict_pairing) {
  ExperimentConfig cfg = load_config(config_path);
  if (seed) cfg.acquisition.seed = *seed;
  if (strict_pairing) cfg.acquisition.strict_paper_pairing = true;

  pipeline::CollectOutput collected = pipeline::run_collect(cfg);
  const std::string base = strip_csv_suffix(out);
  io::write_dataset_csv(base + ".csv", collected.result.dataset);

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
  for (const auto& ep : collected.result.episodes)
    sidecar.episodes.emplace_back(ep.seed, ep.samples);
  io::write_dataset_sidecar(base + ".json", sidecar);

  std::cout << "samples: " << collected.result.dataset.size() << "\n"
            << "episodes: " << collected.result.episodes.size() << "\n"
            << "w_bar: " << io::format_double(collected.result.w_bar) << "\n"
            << "safety_violations: " << collected.result.safety_violations << "\n";
}

void do_train(const std::string& config_path, const std::string& dataset_path,
              const std::string& out) {
  ExperimentConfig cfg = load_config(config_path);
  Dataset data = io::read_dataset_csv(dataset_path);
  const io::DatasetSidecar sidecar = io::read_dataset_sidecar(io::sidecar_path(dataset_path));
  if (sidecar.order != cfg.plant.order)
    throw ConfigError("dataset order " + std::to_string(sidecar.order) +
                      " does not match config plant.order");
  if (data.size() > 0 && data.inputs.cols() != cfg.plant.order)
    throw ConfigError("dataset has " + std::to_string(data.inputs.cols()) +
                      " input columns, config expects " + std::to_string(cfg.plant.order));
  data.noise_bound = sidecar.w_bar;

  if (data.size() == 0)
    std::cerr << "[krc] warning: empty dataset, training the mu = 0 convention model\n";

  KrrModel model = pipeline::train_model(cfg, data);
  io::save_model(out, model);
  std::cout << "beta: " << io::format_double(model.beta())
            << (model.beta_clamped() ? " (radicand clamped to 0)" : "") << "\n"
            << "fit_residual: " << io::format_double(model.fit_residual()) << "\n";
}

void do_analyze(const std::string& config_path, const std::string& model_path,
                std::optional<int> grid_per_dim, const std::string& out) {
  ExperimentConfig cfg = load_config(config_path);
  if (grid_per_dim) cfg.grid_per_dim = *grid_per_dim;
  const KrrModel model = io::load_model(model_path);
  pipeline::AnalysisOutput analysis = pipeline::analyze(cfg, model);
  const nlohmann::json report = io::certificate_to_json(analysis.certificate, analysis.gains);
  if (out.empty())
    std::cout << report.dump(2) << "\n";
  else
    io::write_json(out, report);
}

void do_simulate(const std::string& config_path, const std::string& model_path, bool no_learning,
                 bool exact, const std::string& out, std::optional<long> steps,
                 std::optional<std::uint64_t> seed) {
  ExperimentConfig cfg = load_config(config_path);
  if (steps) cfg.simulation.steps = *steps;
  if (seed) cfg.simulation.seeds = {*seed};

  std::vector<pipeline::Variant> variants;
  std::shared_ptr<const KrrModel> model;
  if (!model_path.empty()) {
    model = std::make_shared<KrrModel>(io::load_model(model_path));
    variants.push_back(pipeline::Variant::with_krr);
  }
  if (no_learning) variants.push_back(pipeline::Variant::without_learning);
  if (exact) variants.push_back(pipeline::Variant::exact);
  if (variants.empty())
    throw ConfigError("simulate: pick at least one of --model, --no-learning, --exact");

  const GainSet gains = pipeline::make_gains(cfg);
  for (const pipeline::Variant variant : variants) {
    for (const std::uint64_t s : cfg.simulation.seeds) {
      SimulationTrace trace = pipeline::simulate(
          cfg, gains, variant, variant == pipeline::Variant::with_krr ? model : nullptr, s);
      const std::string name = pipeline::variant_name(variant);
      const std::string stem = out + "_" + name + "_seed" + std::to_string(s);
      io::write_trace_csv(stem + ".csv", trace);
      pipeline::TraceSummary summary =
          pipeline::summarize(trace, name, s, std::nullopt);
      io::write_json(stem + ".json", pipeline::summary_to_json(summary));
      std::cout << name << " seed " << s
                << ": median ||e|| = " << io::format_double(summary.e_median)
                << ", median ||e_hat|| = " << io::format_double(summary.e_hat_median)
                << (trace.aborted ? "  [aborted: " + trace.fault + "]" : "") << "\n";
      if (trace.aborted) throw SimulationError("simulation aborted: " + trace.fault);
    }
  }
}

void do_reproduce(const std::string& out_dir) {
  const auto print_stage = [](const char* stage) { std::cout << "[" << stage << "] "; };

  pipeline::ReproduceOutcome outcome;
  try {
    outcome = pipeline::reproduce_paper(out_dir);
  } catch (const Error&) {
    std::cerr << "reproduce-paper: stage failed, artifacts in " << out_dir << "\n";
    throw;
  }

  print_stage("reproduce-paper");
  std::cout << "samples=" << outcome.samples << " w_bar=" << io::format_double(outcome.w_bar)
            << " beta=" << io::format_double(outcome.beta) << "\n";
  std::printf("%-14s %14s %14s\n", "variant", "median||e||", "median||e_hat||");
  for (const auto* s : {&outcome.without_learning, &outcome.with_krr, &outcome.exact})
    std::printf("%-14s %14.6g %14.6g\n", s->variant.c_str(), s->e_median, s->e_hat_median);
  std::printf("improvement ratio (without/with): %.4g\n", outcome.improvement_ratio);
  if (outcome.certificate_feasible)
    std::printf("certificate: feasible, conservative bound %.6g, containment: %s\n",
                *outcome.certificate_bound, outcome.bound_containment_verdict.c_str());
  else
    std::printf("certificate: infeasible (xi0 <= 0), containment: %s\n",
                outcome.bound_containment_verdict.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kernel-ridge-regression tracking control: data acquisition, training, "
               "stability certification, and closed-loop simulation"};
  app.require_subcommand(1);

  std::string config_path, dataset_path, model_path, out;
  std::optional<std::uint64_t> seed;
  std::optional<long> steps;
  std::optional<int> grid_per_dim;
  bool strict_pairing = false, no_learning = false, exact = false;

  auto* collect = app.add_subcommand("collect", "run data acquisition, write dataset CSV + sidecar");
  collect->add_option("--config", config_path, "experiment configuration JSON")->required();
  collect->add_option("--out", out, "output path (base or .csv)")->required();
  collect->add_option("--seed", seed, "override acquisition seed");
  collect->add_flag("--strict-paper-pairing", strict_pairing,
                    "pair z(t_k) = x~_n(t_k) - u(t_k) instead of the shifted form");

  auto* train = app.add_subcommand("train", "fit the KRR model from a dataset");
  train->add_option("--config", config_path, "experiment configuration JSON")->required();
  train->add_option("--dataset", dataset_path, "dataset CSV (sidecar JSON alongside)")->required();
  train->add_option("--out", out, "output model JSON")->required();

  auto* analyze = app.add_subcommand("analyze", "synthesize gains and print the stability certificate");
  analyze->add_option("--config", config_path, "experiment configuration JSON")->required();
  analyze->add_option("--model", model_path, "model JSON")->required();
  analyze->add_option("--grid-per-dim", grid_per_dim, "grid resolution for sup P(x)");
  analyze->add_option("--out", out, "write the certificate JSON here instead of stdout");

  auto* simulate = app.add_subcommand("simulate", "run closed-loop variants, write traces + summaries");
  simulate->add_option("--config", config_path, "experiment configuration JSON")->required();
  simulate->add_option("--model", model_path, "model JSON (enables the with-KRR variant)");
  simulate->add_flag("--no-learning", no_learning, "also run with mu = 0");
  simulate->add_flag("--exact", exact, "also run with the ground-truth f as mu");
  simulate->add_option("--out", out, "output prefix for trace/summary files")->required();
  simulate->add_option("--steps", steps, "override simulation steps");
  simulate->add_option("--seed", seed, "run a single seed instead of the configured sweep");

  auto* reproduce = app.add_subcommand("reproduce-paper",
                                       "full embedded reproduction: collect, train, analyze, "
                                       "simulate all variants, summary table");
  reproduce->add_option("--out", out, "output directory for the artifact bundle")->required();

  CLI11_PARSE(app, argc, argv);

  if (collect->parsed())
    return guarded([&] { do_collect(config_path, out, seed, strict_pairing); });
  if (train->parsed()) return guarded([&] { do_train(config_path, dataset_path, out); });
  if (analyze->parsed())
    return guarded([&] { do_analyze(config_path, model_path, grid_per_dim, out); });
  if (simulate->parsed())
    return guarded([&] {
      do_simulate(config_path, model_path, no_learning, exact, out, steps, seed);
    });
  if (reproduce->parsed()) return guarded([&] { do_reproduce(out); });
  return 0;
}
