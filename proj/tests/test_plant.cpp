#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>

#include "krc/plant.hpp"
#include "support/oracles.hpp"

using namespace krc;

namespace {

Eigen::VectorXd vec2(double a, double b) { return (Eigen::VectorXd(2) << a, b).finished(); }

PlantConfig chain2(const Nonlinearity& f, double v_bar = 0.0) {
  PlantConfig cfg;
  cfg.order = 2;
  cfg.step = 0.2;
  cfg.f = f;
  cfg.noise_bound = v_bar;
  cfg.domain = Box(vec2(-12, -6), vec2(12, 6));
  cfg.safe_set = Box(vec2(-10.8, -5.4), vec2(10.8, 5.4));
  cfg.input_set = Interval(-5, 5);
  return cfg;
}

}  // namespace

TEST_CASE("plant step arithmetic") {
  const PlantConfig cfg = chain2(lookup_nonlinearity("zero"));

  SUBCASE("pure integrator") {
    const Eigen::VectorXd next = plant_step(cfg, vec2(1, 2), 0.0);
    CHECK(next[0] == doctest::Approx(1.4).epsilon(1e-15));
    CHECK(next[1] == 0.0);
  }

  SUBCASE("paper nonlinearity vanishes at the origin") {
    const PlantConfig paper = chain2(lookup_nonlinearity("paper_sim"));
    const Eigen::VectorXd next = plant_step(paper, vec2(0, 0), 1.0);
    CHECK(next[0] == 0.0);
    CHECK(next[1] == doctest::Approx(1.0).epsilon(1e-15));
  }

  SUBCASE("order-1 degeneracy") {
    PlantConfig cfg1;
    cfg1.order = 1;
    cfg1.step = 0.5;
    cfg1.f = lookup_nonlinearity("zero");
    cfg1.domain = Box(Eigen::VectorXd::Constant(1, -10), Eigen::VectorXd::Constant(1, 10));
    cfg1.safe_set = cfg1.domain;
    cfg1.input_set = Interval(-1, 1);
    Eigen::VectorXd x(1);
    x << 3.0;
    const Eigen::VectorXd next = plant_step(cfg1, x, 0.25);
    REQUIRE(next.size() == 1);
    CHECK(next[0] == doctest::Approx(0.25).epsilon(1e-15));
  }

  SUBCASE("non-finite state or input is a propagation error") {
    CHECK_THROWS_AS(plant_step(cfg, vec2(std::numeric_limits<double>::quiet_NaN(), 0), 0.0),
                    SimulationError);
    CHECK_THROWS_AS(plant_step(cfg, vec2(0, 0), std::numeric_limits<double>::infinity()),
                    SimulationError);
  }
}

TEST_CASE("integrator consistency along a trajectory") {
  const PlantConfig cfg = chain2(lookup_nonlinearity("paper_sim"));
  Eigen::VectorXd x = vec2(0.5, -1.0);
  for (int k = 0; k < 100; ++k) {
    const double u = 0.3 * std::sin(0.2 * k);
    const Eigen::VectorXd next = plant_step(cfg, x, u);
    CHECK(next[0] - x[0] == doctest::Approx(cfg.step * x[1]).epsilon(1e-13));
    x = next;
  }
}

TEST_CASE("measurement noise") {
  SUBCASE("exact output when the bound is zero") {
    NoiseSource noise(7, 0.0);
    CHECK(measure(vec2(1.25, 0), noise) == 1.25);
  }

  SUBCASE("samples stay inside the bound") {
    NoiseSource noise(123, 0.01);
    for (int i = 0; i < 1000000; ++i) {
      const double v = noise.next();
      CHECK(std::abs(v) <= 0.01);
    }
  }

  SUBCASE("identical seeds reproduce identical sequences bit-exactly") {
    NoiseSource a(99, 0.01), b(99, 0.01);
    for (int i = 0; i < 1000; ++i) CHECK(a.next() == b.next());
    NoiseSource c(100, 0.01);
    bool all_equal = true;
    NoiseSource a2(99, 0.01);
    for (int i = 0; i < 1000; ++i) all_equal = all_equal && (a2.next() == c.next());
    CHECK_FALSE(all_equal);
  }
}

TEST_CASE("reference chain") {
  ReferenceSpec spec;
  spec.driver_name = "zero";
  spec.driver = lookup_reference_driver("zero");
  spec.initial_state = vec2(0, 0);

  SUBCASE("rest trajectory stays at rest") {
    Eigen::VectorXd s = spec.initial_state;
    for (long k = 0; k < 20; ++k) {
      s = reference_step(spec, s, k, 0.2);
      CHECK(s.norm() == 0.0);
    }
  }

  SUBCASE("chain arithmetic") {
    ReferenceSpec r3;
    r3.driver = [](long) { return 3.0; };
    const Eigen::VectorXd next = reference_step(r3, vec2(1, 5), 0, 0.2);
    CHECK(next[0] == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(next[1] == 3.0);
  }

  SUBCASE("paper driver and initial state") {
    const auto r = lookup_reference_driver("paper_sim");
    CHECK(r(0) == doctest::Approx(50.0 * (std::sin(0.2) - std::sin(0.1))).epsilon(1e-15));
    CHECK(r(7) ==
          doctest::Approx(50.0 * (std::sin(0.1 * 7 + 0.2) - std::sin(0.1 * 7 + 0.1))).epsilon(1e-14));

    ReferenceSpec paper;
    paper.driver = r;
    paper.initial_state = vec2(0.0, 50.0 * std::sin(0.1));
    Eigen::VectorXd s = paper.initial_state;
    for (long k = 0; k < 50; ++k) {
      const Eigen::VectorXd next = reference_step(paper, s, k, 0.2);
      CHECK(next[0] - s[0] == doctest::Approx(0.2 * s[1]).epsilon(1e-13));
      CHECK(next[1] == r(k));
      s = next;
    }
  }
}

TEST_CASE("nonlinearity registry") {
  CHECK(lookup_nonlinearity("zero")(vec2(3, -2)) == 0.0);
  CHECK(lookup_nonlinearity("paper_sim")(vec2(0, 0)) == doctest::Approx(0.0).epsilon(1e-15));
  // hand evaluation away from the origin
  CHECK(lookup_nonlinearity("paper_sim")(vec2(5, 1)) ==
        doctest::Approx(0.5 * (std::sin(1.0) - 1.0) + 1.0 / (1.0 + std::exp(1.0))).epsilon(1e-15));
  CHECK_THROWS_AS(lookup_nonlinearity("nope"), ConfigError);
  CHECK_THROWS_AS(lookup_nonlinearity("rkhs_sample:5"), ConfigError);  // context required
}

TEST_CASE("rkhs sample carries its exact norm") {
  const SquaredExponentialKernel kernel(KernelSpec(0.5, 5.0, 2));
  const Box domain(vec2(-12, -6), vec2(12, 6));
  const RkhsSample sample = make_rkhs_sample(kernel, domain, 42, 10, 0.25);

  REQUIRE(sample.nonlinearity.rkhs_norm.has_value());
  CHECK(*sample.nonlinearity.rkhs_norm == 0.25);

  // quadratic-form oracle: ||f||^2 = a^T K_C a with the Gram built elementwise
  Eigen::MatrixXd Kc(10, 10);
  for (int p = 0; p < 10; ++p)
    for (int q = 0; q < 10; ++q)
      Kc(p, q) = oracle::se_kernel(0.5, 5.0, sample.centers.row(p), sample.centers.row(q));
  const double norm = std::sqrt(sample.coefficients.dot(Kc * sample.coefficients));
  CHECK(norm == doctest::Approx(0.25).epsilon(1e-12));

  // the callable agrees with the expansion written out directly
  const Eigen::VectorXd x = vec2(1.5, -2.0);
  double direct = 0.0;
  for (int j = 0; j < 10; ++j)
    direct += sample.coefficients[j] * oracle::se_kernel(0.5, 5.0, sample.centers.row(j), x);
  CHECK(sample.nonlinearity(x) == doctest::Approx(direct).epsilon(1e-14));

  // registry route produces the same function
  NonlinearityContext ctx;
  ctx.kernel = &kernel;
  ctx.domain = &domain;
  ctx.target_norm = 0.25;
  ctx.centers = 10;
  const Nonlinearity via_registry = lookup_nonlinearity("rkhs_sample:42", ctx);
  CHECK(via_registry(x) == sample.nonlinearity(x));
}

TEST_CASE("trajectory is a pure function of config, state, inputs, seed") {
  const PlantConfig cfg = chain2(lookup_nonlinearity("paper_sim"), 0.01);
  const auto run = [&](std::uint64_t seed) {
    NoiseSource noise(seed, cfg.noise_bound);
    Eigen::VectorXd x = vec2(1, 1);
    std::vector<double> ys;
    for (int k = 0; k < 50; ++k) {
      ys.push_back(measure(x, noise));
      x = plant_step(cfg, x, 0.5 * std::cos(0.1 * k));
    }
    ys.push_back(x[0]);
    ys.push_back(x[1]);
    return ys;
  };
  CHECK(run(31) == run(31));
  CHECK(run(31) != run(32));
}

TEST_CASE("plant config validation") {
  PlantConfig cfg = chain2(lookup_nonlinearity("zero"));
  cfg.safe_set = Box(vec2(-20, -6), vec2(12, 6));  // wider than the domain
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  PlantConfig bad_step = chain2(lookup_nonlinearity("zero"));
  bad_step.step = 0.0;
  CHECK_THROWS_AS(bad_step.validate(), ConfigError);
}
