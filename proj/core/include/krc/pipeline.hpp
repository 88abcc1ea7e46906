#pragma once

/*
  Stage functions behind the CLI subcommands. Everything here is a pure
  function of (config, seeds), so repeated invocations produce byte-identical
  artifacts.
*/

#include <memory>
#include <optional>
#include <string>

#include "krc/config.hpp"
#include "krc/controller.hpp"
#include "krc/io.hpp"

namespace krc {
namespace pipeline {

std::unique_ptr<Kernel> make_kernel(const ExperimentConfig& cfg);
PlantConfig make_plant(const ExperimentConfig& cfg, const Kernel& kernel);
ReferenceSpec make_reference(const ExperimentConfig& cfg);
GainSet make_gains(const ExperimentConfig& cfg);
Eigen::MatrixXd make_q(const ExperimentConfig& cfg);

// w_bar for the configured plant/kernel/B, per the propagation formula.
double propagated_noise_bound(const ExperimentConfig& cfg);

struct CollectOutput {
  CollectResult result;
  double f_lipschitz = 0.0;
};

CollectOutput run_collect(const ExperimentConfig& cfg, bool keep_trajectories = false);

KrrModel train_model(const ExperimentConfig& cfg, const Dataset& data);

struct AnalysisOutput {
  GainSet gains;
  StabilityCertificate certificate;
};

AnalysisOutput analyze(const ExperimentConfig& cfg, const KrrModel& model);

enum class Variant { without_learning, with_krr, exact };

std::string variant_name(Variant v);

SimulationTrace simulate(const ExperimentConfig& cfg, const GainSet& gains, Variant variant,
                         std::shared_ptr<const KrrModel> model, std::uint64_t seed);

// Per-trace summary; bound-relative entries are filled only when a feasible
// certificate is supplied.
struct TraceSummary {
  std::string variant;
  std::uint64_t seed = 0;
  long steps = 0;
  double e_median = 0.0;
  double e_hat_median = 0.0;
  long window = 0;
  std::optional<double> bound;
  std::optional<long> settle_index;
  long violations_after_settle = 0;
  bool aborted = false;
  std::string fault;
};

TraceSummary summarize(const SimulationTrace& trace, const std::string& variant,
                       std::uint64_t seed, std::optional<double> bound, long window = 50);

nlohmann::json summary_to_json(const TraceSummary& s);

// The whole reproduction: collect -> train -> analyze -> simulate all three
// variants -> summary. Artifacts land under out_dir.
struct ReproduceOutcome {
  double improvement_ratio = 0.0;  // without / with, steady-state medians
  TraceSummary without_learning;
  TraceSummary with_krr;
  TraceSummary exact;
  bool certificate_feasible = false;
  std::optional<double> certificate_bound;
  std::string bound_containment_verdict;
  double beta = 0.0;
  double w_bar = 0.0;
  Eigen::Index samples = 0;
};

ReproduceOutcome reproduce_paper(const std::string& out_dir);
ReproduceOutcome reproduce(const ExperimentConfig& cfg, const std::string& out_dir);

}  // namespace pipeline
}  // namespace krc
