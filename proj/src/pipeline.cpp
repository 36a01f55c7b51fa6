#include "ssae/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace ssae {

namespace {

void check_sensing(const TrainedModel& model, const SensingMatrix& phi) {
  require_dims(phi.code_length() == model.n_hidden(),
               "sensing matrix has " + std::to_string(phi.code_length()) + " columns but model has n_hidden = " +
                   std::to_string(model.n_hidden()));
}

struct Split {
  std::vector<Index> train;
  std::vector<Index> test;
};

Split split_rows(Index rows, double train_fraction, std::uint64_t seed) {
  require(train_fraction > 0.0 && train_fraction < 1.0, "train fraction must lie in (0, 1)");
  const auto order = shuffled_indices(rows, seed);
  const auto n_train = static_cast<Index>(std::floor(train_fraction * static_cast<double>(rows)));
  require(n_train >= 1 && n_train < rows, "dataset too small for a train/test split");
  return {{order.begin(), order.begin() + n_train}, {order.begin() + n_train, order.end()}};
}

DataMatrix add_noise(const DataMatrix& x, const NoiseSpec& noise, std::uint64_t salt) {
  require(noise.variance >= 0.0, "noise variance must be nonnegative");
  if (noise.variance == 0.0) return x;
  Rng rng(noise.seed ^ (salt * 0x9E3779B97F4A7C15ull));
  const double sd = std::sqrt(noise.variance);
  DataMatrix out = x;
  for (Index r = 0; r < out.rows(); ++r)
    for (Index c = 0; c < out.cols(); ++c) out(r, c) += sd * rng.normal();
  return out;
}

Index k_for_eta(double eta, Index length) {
  require(eta > 0.0 && eta <= 1.0, "eta must lie in (0, 1]");
  return std::clamp<Index>(static_cast<Index>(std::lround(eta * static_cast<double>(length))), 1, length);
}

// K positions and K values, plus the frame mean for the SSAE, sent without CS.
Index uncompressed_payload(Index k, bool with_mean) { return 2 * k + (with_mean ? 1 : 0); }

}  // namespace

Measurement gw_encode(const TrainedModel& model, const SensingMatrix& phi, const VectorXd& x) {
  check_sensing(model, phi);
  const auto frame = sphere(x, model.sigma);
  const auto code = encode_frame(model.params, frame.d, model.k_max, std::optional<int>(model.rounding_places));
  return measure(phi, code, frame.mean);
}

DecodeResult bs_decode(const TrainedModel& model, const SensingMatrix& phi, const Measurement& m,
                       const LassoSettings& lasso) {
  check_sensing(model, phi);
  const auto rec = lasso_recover(phi, m.y, lasso);
  return {desphere(reconstruct(model.params, rec.s), m.frame_mean, model.sigma), rec.converged, rec.sweeps};
}

void write_measurements(std::ostream& out, const MeasurementHeader& header, const std::vector<Measurement>& rows) {
  out << "# m=" << header.m << " sensing_seed=" << header.sensing_seed << '\n';
  MatrixXd table(static_cast<Index>(rows.size()), header.m + 1);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    require_dims(rows[r].y.size() == header.m, "write_measurements: row has " + std::to_string(rows[r].y.size()) +
                                                   " measurements, header says m = " + std::to_string(header.m));
    table.row(static_cast<Index>(r)) << rows[r].y.transpose(), rows[r].frame_mean;
  }
  write_csv(out, table);
}

std::vector<Measurement> read_measurements(std::istream& in, std::optional<MeasurementHeader>& header) {
  header.reset();
  std::string first;
  std::stringstream body;
  if (in.peek() == '#') {
    std::getline(in, first);
    MeasurementHeader h;
    unsigned long long m = 0, seed = 0;
    if (std::sscanf(first.c_str(), "# m=%llu sensing_seed=%llu", &m, &seed) != 2)
      throw Error("measurement file: malformed header line '" + first + "'");
    h.m = static_cast<Index>(m);
    h.sensing_seed = seed;
    header = h;
  }
  body << in.rdbuf();
  const DataMatrix table = load_csv(body);
  require(table.cols() >= 2, "measurement file: need at least one measurement and the frame mean per row");
  if (header)
    require_dims(table.cols() == header->m + 1, "measurement file: rows have " + std::to_string(table.cols()) +
                                                    " values but header m = " + std::to_string(header->m) +
                                                    " implies " + std::to_string(header->m + 1));
  std::vector<Measurement> rows;
  rows.reserve(static_cast<std::size_t>(table.rows()));
  const Index m = table.cols() - 1;
  for (Index r = 0; r < table.rows(); ++r) rows.push_back({table.row(r).head(m).transpose(), table(r, m)});
  return rows;
}

const BenchmarkCell* BenchmarkReport::find(const std::string& method, double eta, bool cs, std::uint64_t seed) const {
  for (const auto& c : cells)
    if (c.method == method && std::abs(c.eta - eta) < 1e-12 && c.cs_enabled == cs && c.seed == seed) return &c;
  return nullptr;
}

const std::vector<std::string>& valid_methods() {
  static const std::vector<std::string> methods{"ssae", "dct", "dft", "pca"};
  return methods;
}

BenchmarkReport run_benchmark(const DataMatrix& x, const BenchmarkOptions& options, const DataMatrix* reference) {
  require(!options.methods.empty(), "benchmark: no methods given");
  require(!options.etas.empty(), "benchmark: no sparsity ratios given");
  require(!options.seeds.empty(), "benchmark: no seeds given");
  for (const auto& m : options.methods)
    require(std::find(valid_methods().begin(), valid_methods().end(), m) != valid_methods().end(),
            "benchmark: unknown method '" + m + "'");
  for (double eta : options.etas) require(eta > 0.0 && eta <= 1.0, "benchmark: eta must lie in (0, 1]");
  if (reference)
    require_dims(reference->rows() == x.rows() && reference->cols() == x.cols(),
                 "benchmark: reference is " + std::to_string(reference->rows()) + " x " +
                     std::to_string(reference->cols()) + " but data is " + std::to_string(x.rows()) + " x " +
                     std::to_string(x.cols()));

  std::vector<bool> cs_modes;
  if (options.cs != CsMode::on) cs_modes.push_back(false);
  if (options.cs != CsMode::off) cs_modes.push_back(true);

  BenchmarkReport report;
  report.sensors = x.cols();
  const Index n = x.cols();
  const Index hidden = options.hidden > 0 ? options.hidden : n;

  for (const std::uint64_t seed : options.seeds) {
    const Split split = split_rows(x.rows(), options.train_fraction, seed);
    const DataMatrix train_rows = select_rows(x, split.train);
    const DataMatrix test_rows = select_rows(x, split.test);
    const DataMatrix target = reference ? select_rows(*reference, split.test) : test_rows;
    report.train_rows = train_rows.rows();
    report.test_rows = test_rows.rows();
    const DataMatrix test_input = add_noise(test_rows, options.test_noise, seed);

    for (const auto& method : options.methods) {
      const bool is_ssae = method == "ssae";
      const Index length = is_ssae ? hidden : n;

      // Per-method state that does not depend on eta.
      double sigma = 0.0;
      MatrixXd frames;
      std::optional<Sparsifier> sparsifier;
      std::string setup_error;
      try {
        if (is_ssae) {
          sigma = dataset_std(train_rows);
          frames = sphere_rows(train_rows, sigma);
        } else {
          sparsifier = Sparsifier::fit(*parse_sparsifier_kind(method), train_rows);
        }
      } catch (const std::exception& e) {
        setup_error = e.what();
      }

      for (const double eta : options.etas) {
        const Index k = k_for_eta(eta, length);
        const Index m = min_measurements(k, length);
        std::optional<Params> params;
        std::string fit_error = setup_error;
        if (is_ssae && fit_error.empty()) {
          try {
            TrainingConfig cfg;
            cfg.n_hidden = hidden;
            cfg.k_max = k;
            cfg.gamma = options.gamma ? *options.gamma : gamma_for_eta(static_cast<double>(k) / static_cast<double>(hidden));
            cfg.max_iterations = options.max_iterations;
            cfg.convergence_tol = options.convergence_tol;
            cfg.rounding_places = options.rounding_places;
            params = fit_ssae(frames, cfg, seed).params;
          } catch (const std::exception& e) {
            fit_error = e.what();
          }
        }

        for (const bool cs : cs_modes) {
          BenchmarkCell cell;
          cell.method = method;
          cell.eta = eta;
          cell.code_length = length;
          cell.k = k;
          cell.m = m;
          cell.noise_variance = options.test_noise.variance;
          cell.cs_enabled = cs;
          cell.seed = seed;
          cell.transmitted = cs ? (is_ssae ? m + 1 : m) : uncompressed_payload(k, is_ssae);
          if (!fit_error.empty()) {
            cell.status = "failed: " + fit_error;
            cell.rmse = std::numeric_limits<double>::quiet_NaN();
            report.cells.push_back(std::move(cell));
            continue;
          }
          try {
            const SensingMatrix phi = gaussian_sensing_matrix(m, length, seed);
            MatrixXd estimate(test_input.rows(), n);
            if (is_ssae) {
              TrainedModel model{*params, sigma, k, options.rounding_places, m, seed, kModelFormatVersion};
              if (cs) {
                for (Index r = 0; r < test_input.rows(); ++r)
                  estimate.row(r) =
                      bs_decode(model, phi, gw_encode(model, phi, test_input.row(r).transpose()), options.lasso)
                          .x_hat.transpose();
              } else {
                estimate = ssae_round_trip(*params, sigma, test_input, k, options.rounding_places);
              }
            } else {
              for (Index r = 0; r < test_input.rows(); ++r) {
                const auto code = sparsifier->encode(test_input.row(r).transpose(), k);
                VectorXd coefficients = code.values;
                if (cs) coefficients = lasso_recover(phi, measure(phi, code, 0.0).y, options.lasso).s;
                estimate.row(r) = sparsifier->decode(coefficients).transpose();
              }
            }
            cell.rmse = rmse(estimate, target);
          } catch (const std::exception& e) {
            cell.status = std::string("failed: ") + e.what();
            cell.rmse = std::numeric_limits<double>::quiet_NaN();
          }
          report.cells.push_back(std::move(cell));
        }
      }
    }
  }
  return report;
}

void write_report_csv(std::ostream& out, const BenchmarkReport& report) {
  out << "method,eta,L,K,M,noise_variance,cs_enabled,rmse,seed,status\n";
  for (const auto& c : report.cells) {
    std::string status = c.status;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    out << c.method << ',' << format_double(c.eta) << ',' << c.code_length << ',' << c.k << ',' << c.m << ','
        << format_double(c.noise_variance) << ',' << (c.cs_enabled ? 1 : 0) << ','
        << (c.ok() ? format_double(c.rmse) : std::string("nan")) << ',' << c.seed << ',' << status << '\n';
  }
}

void write_report_summary(std::ostream& out, const BenchmarkReport& report) {
  char buf[160];
  out << "sensors " << report.sensors << ", train rows " << report.train_rows << ", test rows " << report.test_rows
      << '\n';
  std::snprintf(buf, sizeof buf, "%-6s %7s %4s %4s %4s %4s %10s %6s %12s\n", "method", "eta", "L", "K", "M", "cs",
                "noise_var", "sent", "rmse");
  out << buf;
  for (const auto& c : report.cells) {
    if (c.ok())
      std::snprintf(buf, sizeof buf, "%-6s %7.3f %4ld %4ld %4ld %4s %10.3g %6ld %12.6f\n", c.method.c_str(), c.eta,
                    static_cast<long>(c.code_length), static_cast<long>(c.k), static_cast<long>(c.m),
                    c.cs_enabled ? "on" : "off", c.noise_variance, static_cast<long>(c.transmitted), c.rmse);
    else
      std::snprintf(buf, sizeof buf, "%-6s %7.3f %4ld %4ld %4ld %4s %10.3g %6ld %12s\n", c.method.c_str(), c.eta,
                    static_cast<long>(c.code_length), static_cast<long>(c.k), static_cast<long>(c.m),
                    c.cs_enabled ? "on" : "off", c.noise_variance, static_cast<long>(c.transmitted), "FAILED");
    out << buf;
  }
}

std::vector<GammaSweepRow> sweep_gamma(const DataMatrix& x, double eta, const std::vector<double>& grid,
                                       const GammaSweepOptions& options) {
  require(!grid.empty(), "sweep_gamma: empty grid");
  require(options.runs >= 1, "sweep_gamma: runs must be positive");
  const Index hidden = options.hidden > 0 ? options.hidden : x.cols();
  const Index k = k_for_eta(eta, hidden);

  std::vector<GammaSweepRow> rows;
  for (double gamma : grid) {
    require(gamma >= 0.0, "sweep_gamma: gamma must be nonnegative");
    rows.push_back({gamma, 0.0, 0.0, {}, false});
  }
  for (int run = 0; run < options.runs; ++run) {
    const std::uint64_t seed = options.seed + static_cast<std::uint64_t>(run);
    const Split split = split_rows(x.rows(), options.train_fraction, seed);
    const DataMatrix train_rows = select_rows(x, split.train);
    const DataMatrix test_rows = select_rows(x, split.test);
    const double sigma = dataset_std(train_rows);
    const MatrixXd frames = sphere_rows(train_rows, sigma);
    for (auto& row : rows) {
      TrainingConfig cfg;
      cfg.n_hidden = hidden;
      cfg.k_max = k;
      cfg.gamma = row.gamma;
      cfg.max_iterations = options.max_iterations;
      cfg.convergence_tol = options.convergence_tol;
      cfg.rounding_places = options.rounding_places;
      const auto fit = fit_ssae(frames, cfg, seed);
      row.runs.push_back(evaluate_rmse(fit.params, sigma, test_rows, k, options.rounding_places));
    }
  }
  for (auto& row : rows) {
    const auto count = static_cast<double>(row.runs.size());
    double sum = 0.0;
    for (double r : row.runs) sum += r;
    row.mean_rmse = sum / count;
    double ss = 0.0;
    for (double r : row.runs) ss += (r - row.mean_rmse) * (r - row.mean_rmse);
    row.std_rmse = row.runs.size() > 1 ? std::sqrt(ss / (count - 1.0)) : 0.0;
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const GammaSweepRow& a, const GammaSweepRow& b) { return a.mean_rmse < b.mean_rmse; });
  rows.front().best = true;
  return rows;
}

}  // namespace ssae
