#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "ssae/baselines.hpp"

using namespace ssae;

namespace {

MatrixXd random_matrix(Index rows, Index cols, std::uint64_t seed) {
  Rng rng(seed);
  MatrixXd m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

VectorXd random_vector(Index n, Rng& rng) {
  VectorXd v(n);
  for (Index i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

}  // namespace

TEST_CASE("sparsifier kind names") {
  CHECK(to_string(SparsifierKind::dct) == "dct");
  CHECK(to_string(SparsifierKind::dft) == "dft");
  CHECK(to_string(SparsifierKind::pca) == "pca");
  CHECK(parse_sparsifier_kind("pca") == SparsifierKind::pca);
  CHECK_FALSE(parse_sparsifier_kind("haar"));
}

TEST_CASE("DCT and DFT matrices are orthonormal") {
  for (Index n : {1, 2, 5, 8, 23}) {
    const MatrixXd c = dct_matrix(n);
    const MatrixXd f = real_dft_matrix(n);
    CHECK((c * c.transpose() - MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((f * f.transpose() - MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-12);
  }
  CHECK_THROWS_AS(dct_matrix(0), Error);
}

TEST_CASE("DCT-II entries") {
  const Index n = 6;
  const MatrixXd c = dct_matrix(n);
  for (Index k = 0; k < n; ++k)
    for (Index i = 0; i < n; ++i) {
      const double scale = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
      CHECK(c(k, i) == doctest::Approx(scale * std::cos(std::numbers::pi * (i + 0.5) * k / n)));
    }
}

TEST_CASE("real DFT packing: DC, cosine/sine pairs, Nyquist") {
  const Index n = 6;
  const MatrixXd f = real_dft_matrix(n);
  for (Index i = 0; i < n; ++i) {
    CHECK(f(0, i) == doctest::Approx(1.0 / std::sqrt(6.0)));
    const double a = 2.0 * std::numbers::pi * static_cast<double>(i) / n;
    CHECK(f(1, i) == doctest::Approx(std::sqrt(2.0 / n) * std::cos(a)));
    CHECK(std::abs(f(2, i)) == doctest::Approx(std::abs(std::sqrt(2.0 / n) * std::sin(a))));
    CHECK(f(5, i) == doctest::Approx((i % 2 == 0 ? 1.0 : -1.0) / std::sqrt(6.0)));
  }
}

TEST_CASE("DCT fit keeps no training data") {
  const Sparsifier sp = Sparsifier::fit(SparsifierKind::dct, random_matrix(3, 5, 1));
  CHECK_FALSE(sp.retains_training_data());
  CHECK(sp.offset().isZero(0.0));
  CHECK(sp.eigenvalues().size() == 0);
  CHECK(sp.code_length() == 5);
}

TEST_CASE("orthonormal transforms preserve norms and are lossless at k = N") {
  Rng rng(2);
  for (auto kind : {SparsifierKind::dct, SparsifierKind::dft, SparsifierKind::pca}) {
    const Sparsifier sp = Sparsifier::fit(kind, random_matrix(50, 9, 3));
    for (int t = 0; t < 50; ++t) {
      const VectorXd x = random_vector(9, rng);
      CHECK(sp.transform(x).norm() == doctest::Approx((x - sp.offset()).norm()).epsilon(1e-10));
      CHECK((sp.decode(sp.encode(x, 9)) - x).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }
}

TEST_CASE("truncation error equals the norm of the discarded coefficients and shrinks with k") {
  Rng rng(4);
  for (auto kind : {SparsifierKind::dct, SparsifierKind::dft, SparsifierKind::pca}) {
    const Sparsifier sp = Sparsifier::fit(kind, random_matrix(40, 8, 5));
    for (int t = 0; t < 20; ++t) {
      const VectorXd x = random_vector(8, rng);
      const VectorXd c = sp.transform(x);
      double prev = std::numeric_limits<double>::infinity();
      for (Index k = 1; k <= 8; ++k) {
        const auto code = sp.encode(x, k);
        const double err = (sp.decode(code) - x).norm();
        CHECK(err == doctest::Approx((c - code.values).norm()).epsilon(1e-9));
        CHECK(err <= prev + 1e-12);
        prev = err;
      }
    }
  }
}

TEST_CASE("DC and single-cosine signals are recovered with one coefficient") {
  const Sparsifier sp = Sparsifier::fit(SparsifierKind::dct, MatrixXd::Zero(1, 7));
  const VectorXd flat = VectorXd::Constant(7, 3.5);
  const auto dc = sp.encode(flat, 1);
  CHECK(dc.nonzeros() == 1);
  CHECK(dc.values(0) != 0.0);
  CHECK((sp.decode(dc) - flat).cwiseAbs().maxCoeff() <= 1e-12);

  const VectorXd cosine = 2.0 * dct_matrix(7).row(3).transpose();
  CHECK((sp.decode(sp.encode(cosine, 1)) - cosine).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(sp.decode(VectorXd::Zero(7)).isZero(0.0));
}

TEST_CASE("PCA components are orthonormal and sorted") {
  const Sparsifier sp = Sparsifier::fit(SparsifierKind::pca, random_matrix(200, 10, 7));
  const MatrixXd& b = sp.basis();
  CHECK((b * b.transpose() - MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff() <= 1e-10);
  const VectorXd& ev = sp.eigenvalues();
  REQUIRE(ev.size() == 10);
  for (Index i = 1; i < 10; ++i) CHECK(ev(i) <= ev(i - 1));
  CHECK(sp.retains_training_data());
}

TEST_CASE("PCA of rank-two data has negligible trailing eigenvalues") {
  const MatrixXd coeffs = random_matrix(100, 2, 8);
  const MatrixXd dirs = random_matrix(2, 6, 9);
  MatrixXd x = coeffs * dirs;
  x.rowwise() += Eigen::RowVectorXd::LinSpaced(6, 1.0, 6.0);
  const Sparsifier sp = Sparsifier::fit(SparsifierKind::pca, x);
  CHECK(sp.eigenvalues()(1) > 1e-3);
  for (Index i = 2; i < 6; ++i) CHECK(std::abs(sp.eigenvalues()(i)) <= 1e-10);
  // Two components reconstruct any training row.
  const VectorXd row = x.row(17).transpose();
  CHECK((sp.decode(sp.encode(row, 2)) - row).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("PCA decode of a zero code is the training mean") {
  const MatrixXd x = random_matrix(30, 4, 10);
  const Sparsifier sp = Sparsifier::fit(SparsifierKind::pca, x);
  const VectorXd mean = x.colwise().mean().transpose();
  CHECK((sp.decode(VectorXd::Zero(4)) - mean).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("sparsifier errors") {
  CHECK_THROWS_AS(Sparsifier::fit(SparsifierKind::pca, random_matrix(3, 5, 1)), Error);
  const Sparsifier sp = Sparsifier::fit(SparsifierKind::dft, MatrixXd::Zero(1, 4));
  CHECK_THROWS_AS(sp.encode(VectorXd::Zero(5), 2), DimensionError);
  CHECK_THROWS_AS(sp.decode(VectorXd::Zero(3)), DimensionError);
  CHECK_THROWS_AS(sp.encode(VectorXd::Zero(4), 0), Error);
}
