#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "krc/pipeline.hpp"

using namespace krc;
namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("krc_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

int run_cli(const std::string& args, const std::string& log_path) {
  const std::string cmd = std::string(KRC_CLI_PATH) + " " + args + " > " + log_path + " 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

// quicker variant of the reference setup for file-level tests
ExperimentConfig small_config() {
  ExperimentConfig cfg = paper_config();
  cfg.acquisition.target_samples = 40;
  cfg.simulation.steps = 60;
  cfg.grid_per_dim = 21;
  cfg.simulation.seeds = {0, 1};
  return cfg;
}

}  // namespace

TEST_CASE("dataset files round-trip bit-exactly") {
  TempDir tmp;
  const ExperimentConfig cfg = small_config();
  auto collected = pipeline::run_collect(cfg);
  REQUIRE(collected.result.dataset.size() == 40);

  io::write_dataset_csv(tmp.file("d.csv"), collected.result.dataset);
  const Dataset back = io::read_dataset_csv(tmp.file("d.csv"));
  REQUIRE(back.size() == 40);
  CHECK(back.inputs == collected.result.dataset.inputs);
  CHECK(back.targets == collected.result.dataset.targets);

  io::write_dataset_csv(tmp.file("d2.csv"), collected.result.dataset);
  CHECK(read_file(tmp.file("d.csv")) == read_file(tmp.file("d2.csv")));

  CHECK(io::sidecar_path("foo/dataset.csv") == "foo/dataset.json");
}

TEST_CASE("model files are reproducible and faithful") {
  TempDir tmp;
  const ExperimentConfig cfg = small_config();
  auto collected = pipeline::run_collect(cfg);
  const KrrModel model = pipeline::train_model(cfg, collected.result.dataset);

  io::save_model(tmp.file("m.json"), model);
  const KrrModel loaded = io::load_model(tmp.file("m.json"));

  CHECK(loaded.alpha() == model.alpha());
  CHECK(loaded.beta() == model.beta());
  const Eigen::VectorXd x = (Eigen::VectorXd(2) << 1.2, -0.7).finished();
  CHECK(loaded.predict(x) == model.predict(x));
  CHECK(loaded.power(x) == doctest::Approx(model.power(x)).epsilon(1e-14));

  io::save_model(tmp.file("m2.json"), loaded);
  CHECK(read_file(tmp.file("m.json")) == read_file(tmp.file("m2.json")));
}

TEST_CASE("empty-model file round-trip") {
  TempDir tmp;
  const KrrModel empty = KrrModel::empty(SquaredExponentialKernel(KernelSpec(0.5, 5.0, 2)), 0.3);
  io::save_model(tmp.file("m.json"), empty);
  const KrrModel loaded = io::load_model(tmp.file("m.json"));
  CHECK(loaded.size() == 0);
  CHECK(loaded.predict((Eigen::VectorXd(2) << 1, 1).finished()) == 0.0);
}

TEST_CASE("trace CSV shape and determinism") {
  TempDir tmp;
  ExperimentConfig cfg = small_config();
  cfg.simulation.steps = 1;
  const GainSet gains = pipeline::make_gains(cfg);
  const SimulationTrace trace =
      pipeline::simulate(cfg, gains, pipeline::Variant::without_learning, nullptr, 0);
  io::write_trace_csv(tmp.file("t.csv"), trace);

  const std::string text = read_file(tmp.file("t.csv"));
  // header + exactly one record
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
  CHECK(text.rfind("k,t,x_1,x_2,xhat_1,xhat_2,s_1,s_2,u,y,e_1,e_2,ehat_1,ehat_2,e_norm,ehat_norm",
                   0) == 0);

  io::write_trace_csv(tmp.file("t2.csv"), trace);
  CHECK(read_file(tmp.file("t.csv")) == read_file(tmp.file("t2.csv")));
}

TEST_CASE("reproduce bundle") {
  TempDir tmp;
  ExperimentConfig cfg = small_config();
  const pipeline::ReproduceOutcome outcome = pipeline::reproduce(cfg, tmp.file("bundle"));

  for (const char* name :
       {"config.json", "dataset.csv", "dataset.json", "model.json", "certificate.json",
        "trace_without_krr.csv", "trace_with_krr.csv", "trace_exact.csv",
        "summary_without_krr.json", "summary_with_krr.json", "summary_exact.json",
        "report.json", "acquisition_episode0.csv"})
    CHECK(fs::exists(fs::path(tmp.file("bundle")) / name));

  CHECK(outcome.improvement_ratio > 1.0);
  CHECK(outcome.samples == 40);
  const nlohmann::json report = io::read_json(tmp.file("bundle") + "/report.json");
  CHECK(report.at("improvement_ratio").get<double>() == outcome.improvement_ratio);

  // byte-reproducible under the same seeds
  const pipeline::ReproduceOutcome again = pipeline::reproduce(cfg, tmp.file("bundle2"));
  CHECK(again.improvement_ratio == outcome.improvement_ratio);
  for (const char* name : {"dataset.csv", "model.json", "trace_with_krr.csv", "report.json"})
    CHECK(read_file(tmp.file("bundle") + "/" + name) ==
          read_file(tmp.file("bundle2") + "/" + name));
}

TEST_CASE("certificate report fields") {
  const ExperimentConfig cfg = small_config();
  auto collected = pipeline::run_collect(cfg);
  const KrrModel model = pipeline::train_model(cfg, collected.result.dataset);
  const pipeline::AnalysisOutput analysis = pipeline::analyze(cfg, model);
  const nlohmann::json j = io::certificate_to_json(analysis.certificate, analysis.gains);

  for (const char* key : {"feasible", "xi0", "xi1", "xi2", "chi", "p_bar", "beta", "P", "Q",
                          "lyapunov_residual", "pole_error", "tracking_bound"})
    CHECK(j.contains(key));
  CHECK(j["lyapunov_residual"].get<double>() <= 1e-9);
  CHECK(j["pole_error"]["controller"].get<double>() <= 1e-8);
  CHECK(j["pole_error"]["observer"].get<double>() <= 1e-8);
  // the reference configuration is infeasible at its own Lipschitz constant
  CHECK_FALSE(j["feasible"].get<bool>());
  CHECK(j["tracking_bound"].is_null());
}

TEST_CASE("CLI end to end") {
  TempDir tmp;
  save_config(small_config(), tmp.file("config.json"));

  SUBCASE("collect -> train -> analyze -> simulate") {
    CHECK(run_cli("collect --config " + tmp.file("config.json") + " --out " + tmp.file("data"),
                  tmp.file("log1")) == 0);
    CHECK(fs::exists(tmp.file("data.csv")));
    CHECK(fs::exists(tmp.file("data.json")));

    CHECK(run_cli("train --config " + tmp.file("config.json") + " --dataset " +
                      tmp.file("data.csv") + " --out " + tmp.file("model.json"),
                  tmp.file("log2")) == 0);
    CHECK(fs::exists(tmp.file("model.json")));
    CHECK(read_file(tmp.file("log2")).find("beta:") != std::string::npos);

    CHECK(run_cli("analyze --config " + tmp.file("config.json") + " --model " +
                      tmp.file("model.json") + " --out " + tmp.file("cert.json"),
                  tmp.file("log3")) == 0);
    CHECK(fs::exists(tmp.file("cert.json")));

    CHECK(run_cli("simulate --config " + tmp.file("config.json") + " --model " +
                      tmp.file("model.json") + " --no-learning --exact --seed 0 --out " +
                      tmp.file("run"),
                  tmp.file("log4")) == 0);
    for (const char* stem : {"run_with_krr_seed0", "run_without_krr_seed0", "run_exact_seed0"}) {
      CHECK(fs::exists(tmp.file(std::string(stem) + ".csv")));
      CHECK(fs::exists(tmp.file(std::string(stem) + ".json")));
    }

    // retraining produces a bit-identical model file
    CHECK(run_cli("train --config " + tmp.file("config.json") + " --dataset " +
                      tmp.file("data.csv") + " --out " + tmp.file("model2.json"),
                  tmp.file("log5")) == 0);
    CHECK(read_file(tmp.file("model.json")) == read_file(tmp.file("model2.json")));
  }

  SUBCASE("corrupted config exits 2 naming the field") {
    nlohmann::json j = config_to_json(small_config());
    j["plant"].erase("step_seconds");
    std::ofstream(tmp.file("bad.json")) << j.dump(2);
    CHECK(run_cli("collect --config " + tmp.file("bad.json") + " --out " + tmp.file("x"),
                  tmp.file("log")) == 2);
    CHECK(read_file(tmp.file("log")).find("plant.step_seconds") != std::string::npos);
  }

  SUBCASE("unstable poles exit 4 from analyze") {
    ExperimentConfig cfg = small_config();
    cfg.poles.controller = {1.05, 0.5};
    save_config(cfg, tmp.file("unstable.json"));
    auto collected = pipeline::run_collect(small_config());
    io::save_model(tmp.file("m.json"), pipeline::train_model(small_config(), collected.result.dataset));
    CHECK(run_cli("analyze --config " + tmp.file("unstable.json") + " --model " + tmp.file("m.json"),
                  tmp.file("log")) == 4);
  }

  SUBCASE("zero-episode acquisition writes an empty dataset and trains the empty model") {
    ExperimentConfig cfg = small_config();
    cfg.acquisition.max_episodes = 0;
    cfg.acquisition.target_samples = 0;
    save_config(cfg, tmp.file("zero.json"));
    CHECK(run_cli("collect --config " + tmp.file("zero.json") + " --out " + tmp.file("empty"),
                  tmp.file("log")) == 0);
    const Dataset d = io::read_dataset_csv(tmp.file("empty.csv"));
    CHECK(d.size() == 0);
    CHECK(run_cli("train --config " + tmp.file("zero.json") + " --dataset " +
                      tmp.file("empty.csv") + " --out " + tmp.file("em.json"),
                  tmp.file("log6")) == 0);
    const KrrModel m = io::load_model(tmp.file("em.json"));
    CHECK(m.size() == 0);
  }

  SUBCASE("steps override produces a single-row trace") {
    auto collected = pipeline::run_collect(small_config());
    io::save_model(tmp.file("m.json"),
                   pipeline::train_model(small_config(), collected.result.dataset));
    CHECK(run_cli("simulate --config " + tmp.file("config.json") + " --model " + tmp.file("m.json") +
                      " --steps 1 --seed 5 --out " + tmp.file("one"),
                  tmp.file("log")) == 0);
    const std::string text = read_file(tmp.file("one_with_krr_seed5.csv"));
    CHECK(std::count(text.begin(), text.end(), '\n') == 2);
  }

  SUBCASE("missing variant selection is a config error") {
    CHECK(run_cli("simulate --config " + tmp.file("config.json") + " --out " + tmp.file("x"),
                  tmp.file("log")) == 2);
  }

  SUBCASE("reproduce-paper emits the bundle and summary table") {
    CHECK(run_cli("reproduce-paper --out " + tmp.file("bundle"), tmp.file("log")) == 0);
    CHECK(fs::exists(tmp.file("bundle") + "/report.json"));
    const std::string log = read_file(tmp.file("log"));
    CHECK(log.find("improvement ratio") != std::string::npos);
    CHECK(log.find("with_krr") != std::string::npos);
  }
}
