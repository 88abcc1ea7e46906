#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "krc/acquisition.hpp"
#include "krc/controller.hpp"
#include "krc/synthesis.hpp"

namespace krc {
namespace io {

// Doubles are printed with %.17g everywhere so files are byte-reproducible
// and parse back to the identical bits.
std::string format_double(double v);

// dataset CSV: x_tilde_1, ..., x_tilde_n, z
void write_dataset_csv(const std::string& path, const Dataset& data);
Dataset read_dataset_csv(const std::string& path);

// sidecar JSON next to the dataset: provenance needed to refit and audit
struct DatasetSidecar {
  Eigen::Index order = 0;
  double step_seconds = 0.0;
  double v_bar = 0.0;
  double w_bar = 0.0;
  double f_lipschitz = 0.0;
  std::uint64_t seed = 0;
  bool strict_paper_pairing = false;
  long clamped_inputs = 0;
  long safety_violations = 0;
  std::vector<std::pair<std::uint64_t, Eigen::Index>> episodes;  // (seed, samples)
};

std::string sidecar_path(const std::string& dataset_csv_path);
void write_dataset_sidecar(const std::string& path, const DatasetSidecar& sidecar);
DatasetSidecar read_dataset_sidecar(const std::string& path);

void save_model(const std::string& path, const KrrModel& model);
KrrModel load_model(const std::string& path);

// trace CSV: k, t, x_*, xhat_*, s_*, u, y, e_*, ehat_*, e_norm, ehat_norm
void write_trace_csv(const std::string& path, const SimulationTrace& trace);

// plant-level trajectory CSV: k, t, x_*, u, y, s_*
void write_plant_trajectory_csv(const std::string& path, const EpisodeRecord& episode,
                                double step_seconds);

nlohmann::json certificate_to_json(const StabilityCertificate& cert, const GainSet& gains);

void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);

}  // namespace io
}  // namespace krc
