#include <doctest.h>

#include <cmath>

#include "ssae/cs.hpp"

using namespace ssae;

namespace {

VectorXd random_sparse(Rng& rng, Index l, Index k) {
  VectorXd s = VectorXd::Zero(l);
  const auto idx = shuffled_indices(l, static_cast<std::uint64_t>(rng.below(1u << 30)));
  for (Index i = 0; i < k; ++i) s(idx[static_cast<std::size_t>(i)]) = rng.normal();
  return s;
}

}  // namespace

TEST_CASE("min_measurements") {
  CHECK(min_measurements(5, 25) == 12);
  CHECK(min_measurements(4, 32) == 12);
  CHECK(min_measurements(5, 23) == 12);
  CHECK(min_measurements(4, 30) == 12);
  CHECK(min_measurements(7, 7) == 1);
  CHECK(min_measurements(5, 25, 2.0) == 24);
  CHECK_THROWS_AS(min_measurements(6, 5), Error);
  CHECK_THROWS_AS(min_measurements(0, 5), Error);
  CHECK_THROWS_AS(min_measurements(2, 5, 0.0), Error);
}

TEST_CASE("gaussian_sensing_matrix") {
  const SensingMatrix a = gaussian_sensing_matrix(12, 25, 5);
  const SensingMatrix b = gaussian_sensing_matrix(12, 25, 5);
  CHECK(a.phi == b.phi);
  CHECK(a.seed == 5);
  CHECK(a.measurements() == 12);
  CHECK(a.code_length() == 25);
  CHECK(a.phi != gaussian_sensing_matrix(12, 25, 6).phi);

  const SensingMatrix one = gaussian_sensing_matrix(1, 1, 0);
  CHECK(std::isfinite(one.phi(0, 0)));

  CHECK_THROWS_AS(gaussian_sensing_matrix(26, 25, 1), Error);
  CHECK_THROWS_AS(gaussian_sensing_matrix(0, 25, 1), Error);
}

TEST_CASE("sensing entries have variance 1/m") {
  const Index m = 40, l = 50;
  double sum = 0.0, sq = 0.0;
  int count = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto phi = gaussian_sensing_matrix(m, l, seed);
    sum += phi.phi.sum();
    sq += phi.phi.squaredNorm();
    count += static_cast<int>(phi.phi.size());
  }
  const double mean = sum / count;
  const double var = sq / count - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(var * m == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("measure") {
  SensingMatrix phi{MatrixXd(2, 3), 0};
  phi.phi << 1, 0, 2, 0, 1, 0;
  VectorXd s(3);
  s << 3, 0, -1;
  const Measurement m = measure(phi, s, 4.5);
  CHECK(m.y(0) == 1.0);
  CHECK(m.y(1) == 0.0);
  CHECK(m.frame_mean == 4.5);
  CHECK(m.payload_size() == 3);
  CHECK(measure(phi, VectorXd::Zero(3), 0.0).y.isZero(0.0));
  CHECK_THROWS_AS(measure(phi, VectorXd::Zero(4), 0.0), DimensionError);
}

TEST_CASE("lasso of a zero measurement is zero") {
  const auto phi = gaussian_sensing_matrix(8, 20, 1);
  for (double lambda : {1e-6, 0.1, 10.0}) {
    const auto r = lasso_recover(phi, VectorXd::Zero(8), lambda, 1e-10, 100);
    CHECK(r.s.isZero(0.0));
    CHECK(r.converged);
  }
  CHECK(lasso_recover(phi, VectorXd::Zero(8)).s.isZero(0.0));
}

TEST_CASE("lasso with identity sensing soft-thresholds") {
  const SensingMatrix eye{MatrixXd::Identity(2, 2), 0};
  VectorXd y(2);
  y << 1.0, -0.05;
  const auto r = lasso_recover(eye, y, 0.1, 1e-12, 100);
  CHECK(r.s(0) == doctest::Approx(0.9));
  CHECK(r.s(1) == 0.0);
}

TEST_CASE("lasso with an orthonormal sensing matrix equals soft-thresholding of phi^T y") {
  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    MatrixXd g(6, 6);
    for (Index i = 0; i < g.size(); ++i) g.data()[i] = rng.normal();
    const MatrixXd q = Eigen::HouseholderQR<MatrixXd>(g).householderQ();
    const SensingMatrix phi{q, 0};
    VectorXd y(6);
    for (Index i = 0; i < 6; ++i) y(i) = rng.normal();
    const double lambda = rng.uniform(0.05, 1.0);
    const auto r = lasso_recover(phi, y, lambda, 1e-14, 10000);
    const VectorXd expected = (q.transpose() * y).unaryExpr([&](double v) { return soft_threshold(v, lambda); });
    CHECK((r.s - expected).lpNorm<Eigen::Infinity>() <= 1e-10);
  }
}

TEST_CASE("lasso returns zero once lambda reaches ||phi^T y||_inf") {
  Rng rng(2);
  const auto phi = gaussian_sensing_matrix(10, 25, 3);
  const VectorXd y = phi.phi * random_sparse(rng, 25, 4);
  const double top = (phi.phi.transpose() * y).lpNorm<Eigen::Infinity>();
  CHECK(lasso_recover(phi, y, top, 1e-12, 1000).s.isZero(0.0));
  CHECK(lasso_recover(phi, y, 2.0 * top, 1e-12, 1000).s.isZero(0.0));
  CHECK_FALSE(lasso_recover(phi, y, 0.9 * top, 1e-12, 1000).s.isZero(0.0));
}

TEST_CASE("lasso objective is non-increasing across sweeps") {
  Rng rng(4);
  const auto phi = gaussian_sensing_matrix(12, 25, 8);
  const VectorXd y = phi.phi * random_sparse(rng, 25, 5);
  const double lambda = 1e-3;
  double prev = lasso_objective(phi, y, VectorXd::Zero(25), lambda);
  for (int sweeps = 1; sweeps <= 60; ++sweeps) {
    const auto r = lasso_recover(phi, y, lambda, 1e-300, sweeps);
    const double obj = lasso_objective(phi, y, r.s, lambda);
    CHECK(obj <= prev + 1e-15);
    prev = obj;
  }
}

TEST_CASE("lasso flags non-convergence and keeps the iterate") {
  Rng rng(5);
  const auto phi = gaussian_sensing_matrix(12, 25, 9);
  const VectorXd y = phi.phi * random_sparse(rng, 25, 5);
  const auto r = lasso_recover(phi, y, 1e-6, 1e-14, 2);
  CHECK_FALSE(r.converged);
  CHECK(r.sweeps == 2);
  CHECK_FALSE(r.s.isZero(0.0));
}

TEST_CASE("lasso holds coordinates with an all-zero column at zero") {
  SensingMatrix phi = gaussian_sensing_matrix(5, 8, 1);
  phi.phi.col(3).setZero();
  VectorXd y = VectorXd::Ones(5);
  const auto r = lasso_recover(phi, y, 1e-3, 1e-12, 1000);
  CHECK(r.s(3) == 0.0);
}

TEST_CASE("lasso default lambda scales with ||phi^T y||_inf") {
  Rng rng(7);
  const auto phi = gaussian_sensing_matrix(12, 25, 1);
  const VectorXd y = phi.phi * random_sparse(rng, 25, 5);
  const auto r = lasso_recover(phi, y);
  CHECK(r.lambda == doctest::Approx(1e-4 * (phi.phi.transpose() * y).lpNorm<Eigen::Infinity>()));
  LassoSettings fixed;
  fixed.lambda = 0.25;
  CHECK(lasso_recover(phi, y, fixed).lambda == 0.25);
}

TEST_CASE("lasso rejects invalid settings") {
  const auto phi = gaussian_sensing_matrix(3, 5, 1);
  CHECK_THROWS_AS(lasso_recover(phi, VectorXd::Ones(4), 0.1, 1e-6, 10), DimensionError);
  CHECK_THROWS_AS(lasso_recover(phi, VectorXd::Ones(3), 0.0, 1e-6, 10), Error);
  CHECK_THROWS_AS(lasso_recover(phi, VectorXd::Ones(3), 0.1, 0.0, 10), Error);
  CHECK_THROWS_AS(lasso_recover(phi, VectorXd::Ones(3), 0.1, 1e-6, 0), Error);
}

TEST_CASE("lasso recovers very sparse codes from few measurements") {
  // Well inside the recovery region: K = 2 of L = 25 with 12 measurements.
  Rng rng(10);
  int ok = 0;
  for (std::uint64_t trial = 0; trial < 50; ++trial) {
    const auto phi = gaussian_sensing_matrix(12, 25, 1000 + trial);
    const VectorXd s = random_sparse(rng, 25, 2);
    LassoSettings settings;
    settings.max_iter = 200000;
    const auto r = lasso_recover(phi, phi.phi * s, settings);
    ok += (r.s - s).norm() / s.norm() <= 1e-2;
  }
  CHECK(ok >= 45);
}
