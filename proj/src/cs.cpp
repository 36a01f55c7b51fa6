#include "ssae/cs.hpp"

#include <string>

namespace ssae {

Index min_measurements(Index k, Index l, double rho) {
  require(k >= 1 && k <= l, "min_measurements: need 1 <= k <= l, got k = " + std::to_string(k) +
                                ", l = " + std::to_string(l));
  require(rho > 0.0, "min_measurements: rho must be positive");
  const double kd = static_cast<double>(k);
  const double m = std::ceil(rho * kd * std::log2(static_cast<double>(l) / kd));
  return std::max<Index>(1, static_cast<Index>(m));
}

SensingMatrix gaussian_sensing_matrix(Index m, Index l, std::uint64_t seed) {
  require(m >= 1 && l >= 1, "gaussian_sensing_matrix: dimensions must be positive");
  require(m <= l, "gaussian_sensing_matrix: m = " + std::to_string(m) + " exceeds l = " + std::to_string(l) +
                      ", not a compression");
  Rng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  SensingMatrix out{MatrixXd(m, l), seed};
  for (Index j = 0; j < l; ++j)
    for (Index i = 0; i < m; ++i) out.phi(i, j) = scale * rng.normal();
  return out;
}

Measurement measure(const SensingMatrix& phi, const VectorXd& s, double frame_mean) {
  require_dims(phi.code_length() == s.size(), "measure: sensing matrix has " +
                                                  std::to_string(phi.code_length()) + " columns, code has " +
                                                  std::to_string(s.size()) + " entries");
  return {phi.phi * s, frame_mean};
}

double lasso_objective(const SensingMatrix& phi, const VectorXd& y, const VectorXd& s, double lambda) {
  return 0.5 * (y - phi.phi * s).squaredNorm() + lambda * s.lpNorm<1>();
}

LassoResult lasso_recover(const SensingMatrix& phi, const VectorXd& y, double lambda, double tol, int max_iter) {
  const MatrixXd& a = phi.phi;
  require_dims(a.rows() == y.size(), "lasso_recover: sensing matrix has " + std::to_string(a.rows()) +
                                         " rows, measurement has " + std::to_string(y.size()) + " entries");
  require(lambda > 0.0 && std::isfinite(lambda), "lasso_recover: lambda must be positive and finite");
  require(tol > 0.0, "lasso_recover: tol must be positive");
  require(max_iter >= 1, "lasso_recover: max_iter must be positive");

  const Index l = a.cols();
  const VectorXd col_sq = a.colwise().squaredNorm().transpose();
  LassoResult out{VectorXd::Zero(l), 0, false, lambda};
  // Zero is optimal once lambda dominates every correlation.
  if (lambda >= (a.transpose() * y).lpNorm<Eigen::Infinity>()) {
    out.converged = true;
    return out;
  }
  VectorXd residual = y;

  for (int sweep = 1; sweep <= max_iter; ++sweep) {
    double max_change = 0.0;
    for (Index j = 0; j < l; ++j) {
      if (col_sq(j) == 0.0) continue;
      const double old = out.s(j);
      const double rho = a.col(j).dot(residual) + col_sq(j) * old;
      const double updated = soft_threshold(rho, lambda) / col_sq(j);
      if (updated != old) {
        residual.noalias() -= (updated - old) * a.col(j);
        out.s(j) = updated;
        max_change = std::max(max_change, std::abs(updated - old));
      }
    }
    out.sweeps = sweep;
    if (max_change < tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

LassoResult lasso_recover(const SensingMatrix& phi, const VectorXd& y, const LassoSettings& settings) {
  require_dims(phi.measurements() == y.size(), "lasso_recover: sensing matrix has " +
                                                   std::to_string(phi.measurements()) + " rows, measurement has " +
                                                   std::to_string(y.size()) + " entries");
  const double lambda =
      settings.lambda ? *settings.lambda : settings.lambda_scale * (phi.phi.transpose() * y).lpNorm<Eigen::Infinity>();
  if (lambda == 0.0) return {VectorXd::Zero(phi.code_length()), 0, true, 0.0};  // y is orthogonal to phi
  return lasso_recover(phi, y, lambda, settings.tol, settings.max_iter);
}

}  // namespace ssae
