#include "ssae/baselines.hpp"

#include <numbers>

namespace ssae {

std::string_view to_string(SparsifierKind kind) {
  switch (kind) {
    case SparsifierKind::dct: return "dct";
    case SparsifierKind::dft: return "dft";
    case SparsifierKind::pca: return "pca";
  }
  return "unknown";
}

std::optional<SparsifierKind> parse_sparsifier_kind(std::string_view name) {
  if (name == "dct") return SparsifierKind::dct;
  if (name == "dft") return SparsifierKind::dft;
  if (name == "pca") return SparsifierKind::pca;
  return std::nullopt;
}

MatrixXd dct_matrix(Index n) {
  require(n >= 1, "dct_matrix: size must be positive");
  const double nd = static_cast<double>(n);
  MatrixXd c(n, n);
  for (Index k = 0; k < n; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / nd) : std::sqrt(2.0 / nd);
    for (Index i = 0; i < n; ++i)
      c(k, i) = scale * std::cos(std::numbers::pi * (static_cast<double>(i) + 0.5) * static_cast<double>(k) / nd);
  }
  return c;
}

MatrixXd real_dft_matrix(Index n) {
  require(n >= 1, "real_dft_matrix: size must be positive");
  const double nd = static_cast<double>(n);
  MatrixXd f(n, n);
  f.row(0).setConstant(1.0 / std::sqrt(nd));
  Index row = 1;
  for (Index k = 1; 2 * k < n; ++k) {
    for (Index i = 0; i < n; ++i) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(k * i) / nd;
      f(row, i) = std::sqrt(2.0 / nd) * std::cos(angle);
      f(row + 1, i) = -std::sqrt(2.0 / nd) * std::sin(angle);
    }
    row += 2;
  }
  if (n % 2 == 0) {
    for (Index i = 0; i < n; ++i) f(row, i) = (i % 2 == 0 ? 1.0 : -1.0) / std::sqrt(nd);
  }
  return f;
}

Sparsifier Sparsifier::fit(SparsifierKind kind, const MatrixXd& x) {
  const Index n = x.cols();
  require(n >= 1, "Sparsifier::fit: data has no columns");
  Sparsifier sp;
  sp.kind_ = kind;
  sp.offset_ = VectorXd::Zero(n);
  switch (kind) {
    case SparsifierKind::dct:
      sp.basis_ = dct_matrix(n);
      break;
    case SparsifierKind::dft:
      sp.basis_ = real_dft_matrix(n);
      break;
    case SparsifierKind::pca: {
      require(x.rows() >= n, "Sparsifier::fit: PCA needs at least " + std::to_string(n) + " rows, got " +
                                 std::to_string(x.rows()));
      require(x.allFinite(), "Sparsifier::fit: non-finite data");
      sp.offset_ = x.colwise().mean().transpose();
      const MatrixXd centered = x.rowwise() - sp.offset_.transpose();
      const MatrixXd cov = centered.transpose() * centered / static_cast<double>(x.rows());
      Eigen::SelfAdjointEigenSolver<MatrixXd> eig(cov);
      require(eig.info() == Eigen::Success, "Sparsifier::fit: eigendecomposition failed");
      sp.eigenvalues_ = eig.eigenvalues().reverse();
      sp.basis_ = eig.eigenvectors().rowwise().reverse().transpose();
      break;
    }
  }
  return sp;
}

VectorXd Sparsifier::transform(const VectorXd& x) const {
  require_dims(x.size() == basis_.cols(), "Sparsifier: input has " + std::to_string(x.size()) +
                                              " entries, transform expects " + std::to_string(basis_.cols()));
  return basis_ * (x - offset_);
}

VectorXd Sparsifier::inverse(const VectorXd& coefficients) const {
  require_dims(coefficients.size() == basis_.rows(), "Sparsifier: code has " + std::to_string(coefficients.size()) +
                                                         " entries, transform expects " +
                                                         std::to_string(basis_.rows()));
  return basis_.transpose() * coefficients + offset_;
}

SparseCode<double> Sparsifier::encode(const VectorXd& x, Index k) const { return shrink(transform(x), k); }

VectorXd Sparsifier::decode(const VectorXd& coefficients) const { return inverse(coefficients); }

}  // namespace ssae
