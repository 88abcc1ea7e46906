#include "krc/io.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace krc {
namespace io {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::vector<double> split_csv_line(const std::string& line, const std::string& path) {
  std::vector<double> values;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    const std::size_t next = line.find(',', pos);
    const std::string tok =
        line.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str()) throw ConfigError(path + ": malformed CSV value '" + tok + "'");
    values.push_back(v);
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return values;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write file: " + path);
  return out;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vector_from_json(const json& a) {
  Eigen::VectorXd v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

}  // namespace

void write_dataset_csv(const std::string& path, const Dataset& data) {
  data.validate();
  auto out = open_out(path);
  const Eigen::Index n = data.inputs.cols();
  for (Eigen::Index j = 0; j < n; ++j) out << "x_tilde_" << (j + 1) << ",";
  out << "z\n";
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    for (Eigen::Index j = 0; j < n; ++j) out << format_double(data.inputs(i, j)) << ",";
    out << format_double(data.targets[i]) << "\n";
  }
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset file: " + path);
  std::string header;
  if (!std::getline(in, header)) throw ConfigError(path + ": empty dataset file");
  const Eigen::Index cols = static_cast<Eigen::Index>(
      std::count(header.begin(), header.end(), ',') + 1);
  if (cols < 2) throw ConfigError(path + ": expected at least 2 columns");

  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto values = split_csv_line(line, path);
    if (static_cast<Eigen::Index>(values.size()) != cols)
      throw ConfigError(path + ": row with wrong column count");
    rows.push_back(std::move(values));
  }

  Dataset data;
  data.inputs.resize(static_cast<Eigen::Index>(rows.size()), cols - 1);
  data.targets.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (Eigen::Index j = 0; j + 1 < cols; ++j)
      data.inputs(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
    data.targets[static_cast<Eigen::Index>(i)] = rows[i].back();
  }
  return data;
}

std::string sidecar_path(const std::string& dataset_csv_path) {
  const std::size_t dot = dataset_csv_path.rfind('.');
  if (dot == std::string::npos) return dataset_csv_path + ".json";
  return dataset_csv_path.substr(0, dot) + ".json";
}

void write_dataset_sidecar(const std::string& path, const DatasetSidecar& sidecar) {
  json eps = json::array();
  for (const auto& [seed, samples] : sidecar.episodes)
    eps.push_back(json{{"seed", seed}, {"samples", samples}});
  json j{{"order", sidecar.order},
         {"step_seconds", sidecar.step_seconds},
         {"v_bar", sidecar.v_bar},
         {"w_bar", sidecar.w_bar},
         {"f_lipschitz", sidecar.f_lipschitz},
         {"seed", sidecar.seed},
         {"strict_paper_pairing", sidecar.strict_paper_pairing},
         {"clamped_inputs", sidecar.clamped_inputs},
         {"safety_violations", sidecar.safety_violations},
         {"episodes", std::move(eps)}};
  write_json(path, j);
}

DatasetSidecar read_dataset_sidecar(const std::string& path) {
  const json j = read_json(path);
  DatasetSidecar s;
  s.order = j.at("order").get<Eigen::Index>();
  s.step_seconds = j.at("step_seconds").get<double>();
  s.v_bar = j.at("v_bar").get<double>();
  s.w_bar = j.at("w_bar").get<double>();
  s.f_lipschitz = j.at("f_lipschitz").get<double>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.strict_paper_pairing = j.at("strict_paper_pairing").get<bool>();
  s.clamped_inputs = j.at("clamped_inputs").get<long>();
  s.safety_violations = j.at("safety_violations").get<long>();
  for (const auto& e : j.at("episodes"))
    s.episodes.emplace_back(e.at("seed").get<std::uint64_t>(),
                            e.at("samples").get<Eigen::Index>());
  return s;
}

void save_model(const std::string& path, const KrrModel& model) {
  const auto* se = dynamic_cast<const SquaredExponentialKernel*>(&model.kernel());
  if (se == nullptr)
    throw ConfigError("save_model: only squared_exponential kernels are serializable");
  json j;
  j["kernel"] = {{"name", se->name()},
                 {"sigma_f", se->spec().sigma_f},
                 {"length_scale", se->spec().length_scale},
                 {"input_dim", se->spec().input_dim}};
  j["rkhs_bound"] = model.rkhs_bound();
  j["noise_bound"] = model.data().noise_bound;
  j["inputs"] = matrix_to_json(model.data().inputs);
  j["targets"] = vector_to_json(model.data().targets);
  j["alpha"] = vector_to_json(model.alpha());
  j["beta"] = model.beta();
  j["beta_clamped"] = model.beta_clamped();
  write_json(path, j);
}

KrrModel load_model(const std::string& path) {
  const json j = read_json(path);
  const json& jk = j.at("kernel");
  if (jk.at("name").get<std::string>() != "squared_exponential")
    throw ConfigError("load_model: unknown kernel '" + jk.at("name").get<std::string>() + "'");
  SquaredExponentialKernel kernel(KernelSpec(jk.at("sigma_f").get<double>(),
                                             jk.at("length_scale").get<double>(),
                                             jk.at("input_dim").get<Eigen::Index>()));
  Dataset data;
  const json& inputs = j.at("inputs");
  data.inputs.resize(static_cast<Eigen::Index>(inputs.size()), kernel.input_dim());
  for (std::size_t i = 0; i < inputs.size(); ++i)
    data.inputs.row(static_cast<Eigen::Index>(i)) = vector_from_json(inputs[i]).transpose();
  data.targets = vector_from_json(j.at("targets"));
  data.noise_bound = j.at("noise_bound").get<double>();

  if (data.size() == 0) return KrrModel::empty(kernel, j.at("rkhs_bound").get<double>());
  return KrrModel::restore(kernel, std::move(data), j.at("rkhs_bound").get<double>(),
                           vector_from_json(j.at("alpha")), j.at("beta").get<double>(),
                           j.at("beta_clamped").get<bool>());
}

void write_trace_csv(const std::string& path, const SimulationTrace& trace) {
  auto out = open_out(path);
  const Eigen::Index n = trace.records.empty() ? 0 : trace.records.front().x.size();
  out << "k,t";
  for (Eigen::Index j = 0; j < n; ++j) out << ",x_" << (j + 1);
  for (Eigen::Index j = 0; j < n; ++j) out << ",xhat_" << (j + 1);
  for (Eigen::Index j = 0; j < n; ++j) out << ",s_" << (j + 1);
  out << ",u,y";
  for (Eigen::Index j = 0; j < n; ++j) out << ",e_" << (j + 1);
  for (Eigen::Index j = 0; j < n; ++j) out << ",ehat_" << (j + 1);
  out << ",e_norm,ehat_norm\n";
  for (const auto& rec : trace.records) {
    out << rec.k << "," << format_double(rec.t);
    for (Eigen::Index j = 0; j < n; ++j) out << "," << format_double(rec.x[j]);
    for (Eigen::Index j = 0; j < n; ++j) out << "," << format_double(rec.x_hat[j]);
    for (Eigen::Index j = 0; j < n; ++j) out << "," << format_double(rec.s[j]);
    out << "," << format_double(rec.u) << "," << format_double(rec.y);
    for (Eigen::Index j = 0; j < n; ++j) out << "," << format_double(rec.e[j]);
    for (Eigen::Index j = 0; j < n; ++j) out << "," << format_double(rec.e_hat[j]);
    out << "," << format_double(rec.e_norm) << "," << format_double(rec.e_hat_norm) << "\n";
  }
}

void write_plant_trajectory_csv(const std::string& path, const EpisodeRecord& episode,
                                double step_seconds) {
  auto out = open_out(path);
  const Eigen::Index n = episode.states.empty() ? 0 : episode.states.front().size();
  out << "k,t";
  for (Eigen::Index j = 0; j < n; ++j) out << ",x_" << (j + 1);
  out << ",u,y";
  for (Eigen::Index j = 0; j < n; ++j) out << ",s_" << (j + 1);
  out << "\n";
  for (std::size_t k = 0; k < episode.states.size(); ++k) {
    out << k << "," << format_double(static_cast<double>(k) * step_seconds);
    for (Eigen::Index j = 0; j < n; ++j) out << "," << format_double(episode.states[k][j]);
    out << "," << format_double(episode.inputs[k]) << "," << format_double(episode.outputs[k]);
    for (Eigen::Index j = 0; j < n; ++j) out << "," << format_double(episode.references[k][j]);
    out << "\n";
  }
}

json certificate_to_json(const StabilityCertificate& cert, const GainSet& gains) {
  json j;
  j["feasible"] = cert.feasible;
  j["xi0"] = cert.xi0;
  j["xi1"] = cert.xi1;
  j["xi2"] = cert.xi2;
  if (cert.feasible) {
    j["xi_proof_form"] = cert.xi;
    j["xi_statement_form"] = cert.xi_statement;
    j["tracking_bound"] = *cert.tracking_bound;
    j["observation_bound"] = *cert.observation_bound;
    j["conservative_bound"] = *cert.conservative_bound;
  } else {
    j["xi_proof_form"] = nullptr;
    j["xi_statement_form"] = nullptr;
    j["tracking_bound"] = nullptr;
    j["observation_bound"] = nullptr;
    j["conservative_bound"] = nullptr;
  }
  j["chi"] = cert.chi;
  j["p_bar"] = cert.p_bar;
  j["beta"] = cert.beta;
  j["v_bar"] = cert.v_bar;
  j["f_lipschitz"] = cert.f_lipschitz;
  j["P"] = matrix_to_json(cert.P);
  j["Q"] = matrix_to_json(cert.Q);
  j["lyapunov_residual"] =
      (gains.A_tilde.transpose() * cert.P * gains.A_tilde - cert.P + cert.Q)
          .lpNorm<Eigen::Infinity>();
  j["spectral_radius_A_tilde"] = spectral_radius(gains.A_tilde);
  j["pole_error"] = {
      {"controller", multiset_pole_distance(gains.controller_poles,
                                            gains.controller_closed_loop().eigenvalues())},
      {"observer", multiset_pole_distance(gains.observer_poles,
                                          gains.observer_closed_loop().eigenvalues())}};
  j["phi"] = vector_to_json(gains.phi);
  j["theta"] = vector_to_json(gains.theta);
  return j;
}

void write_json(const std::string& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("JSON parse error in " + path + ": " + e.what());
  }
  return j;
}

}  // namespace io
}  // namespace krc
