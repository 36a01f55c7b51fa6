#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ssae/data.hpp"
#include "ssae/lbfgs.hpp"
#include "ssae/ssae.hpp"

namespace ssae {

using Params = SsaeParams<double>;

/// Sparsity penalty as a linear function of the sparsity ratio K/L.
double gamma_for_eta(double eta);

/// Uniform weights in +-sqrt(6 / (N + L)), zero biases.
Params init_params(Index n_visible, Index n_hidden, std::uint64_t seed);

struct TrainingConfig {
  Index n_hidden = 23;
  Index k_max = 5;
  std::optional<double> gamma;  ///< nullopt: derive from K / L
  int folds = 10;
  int max_iterations = 400;
  double convergence_tol = 1e-7;
  std::uint64_t seed = 1;
  int rounding_places = 3;

  void validate() const;
  double resolved_gamma() const;
};

/// Reads `key = value` lines; `#` starts a comment. Keys: hidden, k, gamma
/// (a number or "auto"), folds, max_iterations, tol, seed, rounding_places.
/// Keys absent from the input keep their value in `base`.
TrainingConfig parse_training_config(std::istream& in, TrainingConfig base = {});
TrainingConfig load_training_config(const std::string& path, TrainingConfig base = {});

struct FitResult {
  Params params;
  std::vector<CurvePoint> curve;
  LbfgsStatus status = LbfgsStatus::max_iterations;
  int iterations = 0;
};

/// Minimises the SSAE cost on already-sphered frames, starting from
/// init_params(seed).
FitResult fit_ssae(const MatrixXd& sphered, const TrainingConfig& config, std::uint64_t seed);

struct TrainingReport {
  std::vector<double> fold_rmse;
  double mean_rmse = 0.0;
  std::vector<CurvePoint> curve;  ///< learning curve of the final fold
  Params params;                  ///< model trained on the final fold split
  double sigma = 0.0;
  double gamma = 0.0;
  std::vector<LbfgsStatus> fold_status;
};

/// Shuffle, split into contiguous folds, train on each complement and score
/// the held-out fold through the full encode/decode round trip.
TrainingReport train(const DataMatrix& x, const TrainingConfig& config);

/// Transform-only round trip of every row:
/// sphere -> encode (shrink, round) -> reconstruct -> desphere.
MatrixXd ssae_round_trip(const Params& params, double sigma, const DataMatrix& x, Index k,
                         std::optional<int> rounding_places);

double rmse(const MatrixXd& estimate, const MatrixXd& truth);

double evaluate_rmse(const Params& params, double sigma, const DataMatrix& x_test, Index k,
                     std::optional<int> rounding_places);

}  // namespace ssae
