#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "ssae/common.hpp"
#include "ssae/ssae.hpp"

namespace ssae {

enum class SparsifierKind { dct, dft, pca };

std::string_view to_string(SparsifierKind kind);
std::optional<SparsifierKind> parse_sparsifier_kind(std::string_view name);

/// Orthonormal DCT-II matrix; row k is the k-th basis vector.
MatrixXd dct_matrix(Index n);

/// Orthonormal real DFT: DC row, then cosine/sine row pairs for each positive
/// frequency, then the alternating Nyquist row when n is even.
MatrixXd real_dft_matrix(Index n);

/// A square orthonormal transform composed with top-K truncation.
///
/// Coefficients are c = basis * (x - offset); the offset is the training
/// mean for PCA and zero otherwise.
class Sparsifier {
public:
  /// DCT and DFT only look at x.cols(). PCA needs at least as many rows as
  /// columns.
  static Sparsifier fit(SparsifierKind kind, const MatrixXd& x);

  SparsifierKind kind() const { return kind_; }
  Index code_length() const { return basis_.rows(); }
  const MatrixXd& basis() const { return basis_; }
  const VectorXd& offset() const { return offset_; }
  /// PCA covariance eigenvalues in descending order; empty otherwise.
  const VectorXd& eigenvalues() const { return eigenvalues_; }
  bool retains_training_data() const { return kind_ == SparsifierKind::pca; }

  VectorXd transform(const VectorXd& x) const;
  VectorXd inverse(const VectorXd& coefficients) const;

  SparseCode<double> encode(const VectorXd& x, Index k) const;
  VectorXd decode(const SparseCode<double>& s) const { return decode(s.values); }
  VectorXd decode(const VectorXd& coefficients) const;

private:
  SparsifierKind kind_ = SparsifierKind::dct;
  MatrixXd basis_;
  VectorXd offset_;
  VectorXd eigenvalues_;
};

}  // namespace ssae
