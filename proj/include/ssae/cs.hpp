#pragma once

#include <cstdint>
#include <optional>

#include "ssae/common.hpp"
#include "ssae/ssae.hpp"

namespace ssae {

struct SensingMatrix {
  MatrixXd phi;  ///< M x L
  std::uint64_t seed = 0;

  Index measurements() const { return phi.rows(); }
  Index code_length() const { return phi.cols(); }
};

/// What the gateway transmits per frame: M measurements plus the frame mean.
struct Measurement {
  VectorXd y;
  double frame_mean = 0.0;

  Index payload_size() const { return y.size() + 1; }
};

/// ceil(rho * K * log2(L / K)), at least 1.
Index min_measurements(Index k, Index l, double rho = 1.0);

/// I.i.d. N(0, 1/m) entries, regenerated identically from (m, l, seed).
SensingMatrix gaussian_sensing_matrix(Index m, Index l, std::uint64_t seed);

Measurement measure(const SensingMatrix& phi, const VectorXd& s, double frame_mean);

inline Measurement measure(const SensingMatrix& phi, const SparseCode<double>& s, double frame_mean) {
  return measure(phi, s.values, frame_mean);
}

struct LassoSettings {
  std::optional<double> lambda;   ///< absolute penalty; overrides lambda_scale
  double lambda_scale = 1e-4;     ///< lambda = lambda_scale * ||phi^T y||_inf
  double tol = 1e-10;             ///< on the largest coordinate change in a sweep
  int max_iter = 20000;           ///< sweeps
};

struct LassoResult {
  VectorXd s;
  int sweeps = 0;
  bool converged = false;
  double lambda = 0.0;
};

/// argmin_s 0.5 ||y - phi s||^2 + lambda ||s||_1 by cyclic coordinate descent
/// with soft thresholding. Coordinates with an all-zero column stay at zero.
LassoResult lasso_recover(const SensingMatrix& phi, const VectorXd& y, double lambda, double tol, int max_iter);

LassoResult lasso_recover(const SensingMatrix& phi, const VectorXd& y, const LassoSettings& settings = {});

double lasso_objective(const SensingMatrix& phi, const VectorXd& y, const VectorXd& s, double lambda);

}  // namespace ssae
