#include <doctest.h>

#include <cmath>
#include <limits>

#include "ssae/lbfgs.hpp"
#include "ssae/trainer.hpp"

using namespace ssae;

TEST_CASE("minimize solves a separable quadratic within dimension + 5 iterations") {
  for (Index n : {1, 3, 10, 40}) {
    Rng rng(static_cast<std::uint64_t>(n));
    VectorXd target(n);
    for (Index i = 0; i < n; ++i) target(i) = rng.uniform(-5, 5);
    auto objective = [&](const VectorXd& x, VectorXd& g) {
      g = x - target;
      return 0.5 * g.squaredNorm();
    };
    LbfgsOptions opt;
    opt.convergence_tol = 1e-15;
    const auto r = minimize<double>(objective, VectorXd::Zero(n), opt);
    CHECK((r.x - target).lpNorm<Eigen::Infinity>() <= 1e-8);
    CHECK(r.iterations <= n + 5);
  }
}

TEST_CASE("minimize handles an ill-conditioned quadratic") {
  const Index n = 12;
  VectorXd scale(n), target(n);
  for (Index i = 0; i < n; ++i) {
    scale(i) = std::pow(10.0, static_cast<double>(i) / 4.0);
    target(i) = 1.0 / static_cast<double>(i + 1);
  }
  auto objective = [&](const VectorXd& x, VectorXd& g) {
    const VectorXd e = x - target;
    g = scale.cwiseProduct(e);
    return 0.5 * e.dot(g);
  };
  LbfgsOptions opt;
  opt.convergence_tol = 1e-15;
  opt.gradient_tol = 1e-12;
  const auto r = minimize<double>(objective, VectorXd::Zero(n), opt);
  CHECK((r.x - target).lpNorm<Eigen::Infinity>() <= 1e-8);
}

TEST_CASE("minimize returns a stationary start unchanged after one iteration") {
  auto objective = [](const VectorXd& x, VectorXd& g) {
    g = x;
    return 0.5 * x.squaredNorm();
  };
  const auto r = minimize<double>(objective, VectorXd::Zero(4));
  CHECK(r.status == LbfgsStatus::stationary);
  CHECK(r.iterations == 1);
  CHECK(r.x.isZero(0.0));
  CHECK(r.curve.size() == 1);
}

TEST_CASE("minimize reports the iteration of a non-finite evaluation") {
  int calls = 0;
  auto objective = [&](const VectorXd& x, VectorXd& g) {
    g = x;
    return ++calls > 2 ? std::numeric_limits<double>::quiet_NaN() : 0.5 * x.squaredNorm();
  };
  try {
    minimize<double>(objective, VectorXd::Ones(3));
    FAIL("expected NonFiniteError");
  } catch (const NonFiniteError& e) {
    CHECK(e.iteration() >= 1);
  }
}

TEST_CASE("minimize keeps the best point with a warning when no step lowers the cost") {
  // The reported gradient points the wrong way, so no step along -g helps.
  auto objective = [](const VectorXd& x, VectorXd& g) {
    g = -x;
    return 0.5 * x.squaredNorm();
  };
  VectorXd x0 = VectorXd::Constant(2, 1.0);
  const auto r = minimize<double>(objective, x0);
  CHECK(r.status == LbfgsStatus::line_search_failed);
  CHECK(r.warning());
  CHECK(r.x == x0);
  CHECK(r.cost == doctest::Approx(1.0));
}

TEST_CASE("minimize rejects invalid options") {
  auto objective = [](const VectorXd& x, VectorXd& g) {
    g = x;
    return 0.5 * x.squaredNorm();
  };
  LbfgsOptions opt;
  opt.history = 0;
  CHECK_THROWS_AS(minimize<double>(objective, VectorXd::Ones(2), opt), Error);
  opt = {};
  opt.max_iterations = 0;
  CHECK_THROWS_AS(minimize<double>(objective, VectorXd::Ones(2), opt), Error);
  opt = {};
  opt.convergence_tol = 0.0;
  CHECK_THROWS_AS(minimize<double>(objective, VectorXd::Ones(2), opt), Error);
}

TEST_CASE("SSAE training trace is non-increasing") {
  SyntheticSpec spec;
  spec.samples = 400;
  spec.noise = {0.25, 2};
  const DataMatrix x = generate_synthetic(spec);
  const MatrixXd d = sphere_rows(x, dataset_std(x));
  TrainingConfig cfg;
  cfg.k_max = 5;
  cfg.max_iterations = 60;
  const FitResult fit = fit_ssae(d, cfg, 4);
  REQUIRE(fit.curve.size() >= 2);
  for (std::size_t i = 1; i < fit.curve.size(); ++i) CHECK(fit.curve[i].cost <= fit.curve[i - 1].cost + 1e-10);
  CHECK(fit.curve.back().cost < fit.curve.front().cost);
}

TEST_CASE("Rosenbrock") {
  auto objective = [](const VectorXd& x, VectorXd& g) {
    const double a = 1.0 - x(0), b = x(1) - x(0) * x(0);
    g(0) = -2.0 * a - 400.0 * x(0) * b;
    g(1) = 200.0 * b;
    return a * a + 100.0 * b * b;
  };
  VectorXd x0(2);
  x0 << -1.2, 1.0;
  LbfgsOptions opt;
  opt.convergence_tol = 1e-15;
  const auto r = minimize<double>(objective, x0, opt);
  CHECK(r.x(0) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(r.x(1) == doctest::Approx(1.0).epsilon(1e-5));
  for (std::size_t i = 1; i < r.curve.size(); ++i) CHECK(r.curve[i].cost <= r.curve[i - 1].cost);
}
