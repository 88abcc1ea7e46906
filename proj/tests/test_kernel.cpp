#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "krc/kernel.hpp"
#include "krc/random.hpp"
#include "support/oracles.hpp"

using namespace krc;

namespace {

Eigen::VectorXd vec2(double a, double b) { return (Eigen::VectorXd(2) << a, b).finished(); }

SquaredExponentialKernel paper_kernel() {
  return SquaredExponentialKernel(KernelSpec(0.5, 5.0, 2));
}

}  // namespace

TEST_CASE("kernel evaluation matches the closed form") {
  const SquaredExponentialKernel k = paper_kernel();

  CHECK(k(vec2(0, 0), vec2(0, 0)) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(k(vec2(0, 0), vec2(5, 0)) == doctest::Approx(0.25 * std::exp(-0.5)).epsilon(1e-15));
  CHECK(k(vec2(0, 0), vec2(5, 0)) == doctest::Approx(0.15163266492815836));

  SquaredExponentialKernel unit(KernelSpec(1.0, 1.0, 1));
  Eigen::VectorXd one(1);
  one << 1.0;
  CHECK(unit(one, one) == doctest::Approx(1.0).epsilon(1e-15));

  CHECK_THROWS_AS(k(vec2(0, 0), Eigen::VectorXd::Zero(3)), DimensionError);
  CHECK_THROWS_AS(k(Eigen::VectorXd::Zero(1), vec2(0, 0)), DimensionError);
}

TEST_CASE("kernel spec rejects degenerate hyperparameters") {
  CHECK_THROWS_AS(KernelSpec(0.0, 1.0, 2), ConfigError);
  CHECK_THROWS_AS(KernelSpec(-1.0, 1.0, 2), ConfigError);
  CHECK_THROWS_AS(KernelSpec(1.0, 0.0, 2), ConfigError);
  CHECK_THROWS_AS(KernelSpec(1.0, 1.0, 0), ConfigError);
}

TEST_CASE("kernel symmetry over sampled pairs") {
  const SquaredExponentialKernel k = paper_kernel();
  UniformSampler rng(11);
  for (int i = 0; i < 200; ++i) {
    const Eigen::VectorXd x = vec2(rng.in_range(-12, 12), rng.in_range(-6, 6));
    const Eigen::VectorXd y = vec2(rng.in_range(-12, 12), rng.in_range(-6, 6));
    CHECK(k(x, y) == k(y, x));
    CHECK(k(x, y) > 0.0);
    CHECK(k(x, y) <= 0.25 + 1e-15);
  }
}

TEST_CASE("gram matrix") {
  const SquaredExponentialKernel k = paper_kernel();

  SUBCASE("single input is [sigma_f^2]") {
    Eigen::MatrixXd one(1, 2);
    one << 0.3, -0.7;
    const Eigen::MatrixXd K = gram_matrix(k, one);
    REQUIRE(K.rows() == 1);
    CHECK(K(0, 0) == doctest::Approx(0.25).epsilon(1e-15));
  }

  SUBCASE("duplicated rows make K singular up to fp tolerance") {
    Eigen::MatrixXd inputs(3, 2);
    inputs << 1.0, 2.0, 1.0, 2.0, -3.0, 0.5;
    const Eigen::MatrixXd K = gram_matrix(k, inputs);
    CHECK((K.row(0) - K.row(1)).lpNorm<Eigen::Infinity>() == 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
    CHECK(std::abs(es.eigenvalues().minCoeff()) < 1e-12);
  }

  SUBCASE("matches the elementwise oracle loop") {
    UniformSampler rng(3);
    Eigen::MatrixXd inputs(3, 2);
    for (int i = 0; i < 3; ++i) inputs.row(i) = vec2(rng.in_range(-5, 5), rng.in_range(-5, 5));
    const Eigen::MatrixXd K = gram_matrix(k, inputs);
    for (int p = 0; p < 3; ++p)
      for (int q = 0; q < 3; ++q)
        CHECK(K(p, q) ==
              doctest::Approx(oracle::se_kernel(0.5, 5.0, inputs.row(p), inputs.row(q)))
                  .epsilon(1e-15));
  }

  SUBCASE("positive semidefinite for random input sets") {
    UniformSampler rng(17);
    for (int trial = 0; trial < 5; ++trial) {
      const int n = 10 + trial * 10;
      Eigen::MatrixXd inputs(n, 2);
      for (int i = 0; i < n; ++i) inputs.row(i) = vec2(rng.in_range(-12, 12), rng.in_range(-6, 6));
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram_matrix(k, inputs));
      CHECK(es.eigenvalues().minCoeff() >= -1e-10);
    }
  }
}

TEST_CASE("kernel Lipschitz constant") {
  SUBCASE("closed form against the grid-search oracle") {
    const SquaredExponentialKernel k = paper_kernel();
    const double grid_max = oracle::se_gradient_norm_max(0.5, 5.0, 50.0);
    CHECK(k.lipschitz() == doctest::Approx(0.25 / (5.0 * std::sqrt(std::exp(1.0)))).epsilon(1e-15));
    CHECK(k.lipschitz() == doctest::Approx(0.030326532985631666));
    CHECK(k.lipschitz() >= grid_max - 1e-12);
    CHECK(k.lipschitz() == doctest::Approx(grid_max).epsilon(1e-8));
  }

  SUBCASE("unit hyperparameters") {
    SquaredExponentialKernel k(KernelSpec(1.0, 1.0, 2));
    CHECK(k.lipschitz() == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
    CHECK(k.lipschitz() == doctest::Approx(oracle::se_gradient_norm_max(1.0, 1.0, 10.0)).epsilon(1e-8));
  }

  SUBCASE("doubling sigma_f quadruples L_kappa") {
    SquaredExponentialKernel k1(KernelSpec(0.5, 5.0, 2));
    SquaredExponentialKernel k2(KernelSpec(1.0, 5.0, 2));
    CHECK(k2.lipschitz() == doctest::Approx(4.0 * k1.lipschitz()).epsilon(1e-15));
  }

  SUBCASE("certifies the kernel over random pairs") {
    const SquaredExponentialKernel k = paper_kernel();
    const double L = k.lipschitz();
    UniformSampler rng(23);
    for (int i = 0; i < 10000; ++i) {
      const Eigen::VectorXd x = vec2(rng.in_range(-12, 12), rng.in_range(-6, 6));
      const Eigen::VectorXd xp = vec2(rng.in_range(-12, 12), rng.in_range(-6, 6));
      const Eigen::VectorXd z = vec2(rng.in_range(-12, 12), rng.in_range(-6, 6));
      CHECK(std::abs(k(x, z) - k(xp, z)) <= L * (x - xp).norm() + 1e-12);
    }
  }
}

TEST_CASE("analytic gradient matches finite differences") {
  const SquaredExponentialKernel k = paper_kernel();
  UniformSampler rng(5);
  for (int i = 0; i < 50; ++i) {
    const Eigen::VectorXd x = vec2(rng.in_range(-10, 10), rng.in_range(-5, 5));
    const Eigen::VectorXd y = vec2(rng.in_range(-10, 10), rng.in_range(-5, 5));
    const Eigen::VectorXd analytic = k.gradient(x, y);
    const Eigen::VectorXd numeric =
        oracle::numeric_gradient([&](const Eigen::VectorXd& p) { return k(p, y); }, x);
    const double scale = std::max(1e-12, analytic.norm());
    CHECK((analytic - numeric).norm() / scale < 1e-6);
  }
}

TEST_CASE("function Lipschitz constant from the RKHS bound") {
  const SquaredExponentialKernel k = paper_kernel();

  const LipschitzInfo info = function_lipschitz(k, 0.3);
  CHECK(info.kappa_lipschitz == doctest::Approx(0.030326532985631666));
  CHECK(info.rkhs_bound == 0.3);
  CHECK(info.f_lipschitz ==
        doctest::Approx(std::sqrt(2.0 * info.kappa_lipschitz) * 0.3).epsilon(1e-15));
  CHECK(info.f_lipschitz == doctest::Approx(0.0738835295408503));

  CHECK(function_lipschitz(k, 0.0).f_lipschitz == 0.0);
  CHECK_THROWS_AS(function_lipschitz(k, -0.1), ConfigError);

  // L_kappa = 0.5 makes the sqrt factor exactly 1
  struct HalfLipschitzKernel final : Kernel {
    Eigen::Index input_dim() const override { return 1; }
    double operator()(const Eigen::VectorXd&, const Eigen::VectorXd&) const override { return 1.0; }
    Eigen::VectorXd gradient(const Eigen::VectorXd& x, const Eigen::VectorXd&) const override {
      return Eigen::VectorXd::Zero(x.size());
    }
    double lipschitz() const override { return 0.5; }
    std::string name() const override { return "half"; }
    std::unique_ptr<Kernel> clone() const override {
      return std::make_unique<HalfLipschitzKernel>();
    }
  } half;
  CHECK(function_lipschitz(half, 1.0).f_lipschitz == doctest::Approx(1.0).epsilon(1e-15));
}
