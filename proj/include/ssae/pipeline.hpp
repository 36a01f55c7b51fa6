#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ssae/baselines.hpp"
#include "ssae/cs.hpp"
#include "ssae/data.hpp"
#include "ssae/trainer.hpp"

namespace ssae {

inline constexpr int kModelFormatVersion = 1;

/// Everything both ends of the link need. The gateway uses w1/b1, sigma, K
/// and the rounding; the base station uses w2/b2 and sigma. The sensing
/// matrix is regenerated on each side from (measurements, sensing_seed).
struct TrainedModel {
  Params params;
  double sigma = 1.0;
  Index k_max = 1;
  int rounding_places = 3;
  Index measurements = 1;
  std::uint64_t sensing_seed = 0;
  int version = kModelFormatVersion;

  Index n_visible() const { return params.n_visible(); }
  Index n_hidden() const { return params.n_hidden(); }
  void validate() const;
  SensingMatrix sensing_matrix() const;
};

// Model file errors. Each names the offending field or section.
class ModelFormatError : public Error {
public:
  using Error::Error;
};
class UnsupportedVersionError : public ModelFormatError {
public:
  UnsupportedVersionError(const std::string& what, int version) : ModelFormatError(what), version_(version) {}
  int version() const noexcept { return version_; }

private:
  int version_;
};
class TruncatedModelError : public ModelFormatError {
public:
  using ModelFormatError::ModelFormatError;
};
class ModelDimensionError : public ModelFormatError {
public:
  ModelDimensionError(const std::string& what, std::string field)
      : ModelFormatError(what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

void save_model(std::ostream& out, const TrainedModel& model);
void save_model_file(const std::string& path, const TrainedModel& model);
TrainedModel load_model(std::istream& in);
TrainedModel load_model_file(const std::string& path);

/// Gateway side: sphere, encode with w1/b1, shrink, round, measure.
Measurement gw_encode(const TrainedModel& model, const SensingMatrix& phi, const VectorXd& x);

struct DecodeResult {
  VectorXd x_hat;
  bool lasso_converged = true;
  int lasso_sweeps = 0;
};

/// Base-station side: LASSO recovery, reconstruct with w2/b2, desphere.
DecodeResult bs_decode(const TrainedModel& model, const SensingMatrix& phi, const Measurement& m,
                       const LassoSettings& lasso = {});

// Measurement files: an optional `# m=<M> sensing_seed=<S>` line, then one
// CSV row per frame holding y_1..y_M followed by the frame mean.
struct MeasurementHeader {
  Index m = 0;
  std::uint64_t sensing_seed = 0;
};
void write_measurements(std::ostream& out, const MeasurementHeader& header, const std::vector<Measurement>& rows);
std::vector<Measurement> read_measurements(std::istream& in, std::optional<MeasurementHeader>& header);

enum class CsMode { off, on, both };

struct BenchmarkOptions {
  std::vector<double> etas{0.13, 0.217, 0.3, 0.5, 0.8, 1.0};
  std::vector<std::string> methods{"ssae", "dct", "dft", "pca"};
  NoiseSpec test_noise{};  ///< added to the held-out inputs; RMSE is against the un-noised rows
  CsMode cs = CsMode::off;
  std::vector<std::uint64_t> seeds{1};
  Index hidden = 0;              ///< SSAE code length; 0 means one unit per sensor
  std::optional<double> gamma;   ///< overrides gamma_for_eta
  int max_iterations = 400;
  double convergence_tol = 1e-7;
  int rounding_places = 3;
  double train_fraction = 0.8;
  LassoSettings lasso{};
};

struct BenchmarkCell {
  std::string method;
  double eta = 0.0;
  Index code_length = 0;
  Index k = 0;
  Index m = 0;
  double noise_variance = 0.0;
  bool cs_enabled = false;
  double rmse = 0.0;
  std::uint64_t seed = 0;
  std::string status = "ok";
  /// Values sent per frame: M (+1 frame mean for the SSAE) with CS, K values
  /// and K positions (+1 mean) without.
  Index transmitted = 0;

  bool ok() const { return status == "ok"; }
};

struct BenchmarkReport {
  Index sensors = 0;
  Index train_rows = 0;
  Index test_rows = 0;
  std::vector<BenchmarkCell> cells;

  const BenchmarkCell* find(const std::string& method, double eta, bool cs, std::uint64_t seed) const;
};

const std::vector<std::string>& valid_methods();

/// Every (seed, method, eta, cs) cell. Failures are recorded in the cell's
/// status and do not stop the run. RMSE is taken against the held-out rows
/// of `reference` when given (same shape as x, e.g. the noiseless synthetic
/// field), otherwise against the held-out rows of x.
BenchmarkReport run_benchmark(const DataMatrix& x, const BenchmarkOptions& options,
                              const DataMatrix* reference = nullptr);

void write_report_csv(std::ostream& out, const BenchmarkReport& report);
void write_report_summary(std::ostream& out, const BenchmarkReport& report);

struct GammaSweepOptions {
  Index hidden = 0;
  int runs = 10;
  std::uint64_t seed = 1;
  int max_iterations = 400;
  double convergence_tol = 1e-7;
  int rounding_places = 3;
  double train_fraction = 0.8;
};

struct GammaSweepRow {
  double gamma = 0.0;
  double mean_rmse = 0.0;
  double std_rmse = 0.0;
  std::vector<double> runs;
  bool best = false;
};

inline const std::vector<double>& default_gamma_grid() {
  static const std::vector<double> grid{0.5, 0.2, 0.1, 0.05, 0.02, 0.01};
  return grid;
}

/// Held-out RMSE for each gamma over `runs` seeded splits and trainings,
/// sorted by mean RMSE with the best row flagged.
std::vector<GammaSweepRow> sweep_gamma(const DataMatrix& x, double eta, const std::vector<double>& grid,
                                       const GammaSweepOptions& options);

}  // namespace ssae
