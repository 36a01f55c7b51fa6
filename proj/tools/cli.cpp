#include "cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "ssae/pipeline.hpp"

namespace ssae::cli {

namespace {

class UsageError : public Error {
public:
  using Error::Error;
};

std::string join(const std::vector<std::string>& items) {
  std::string s;
  for (const auto& i : items) s += (s.empty() ? "" : ", ") + i;
  return s;
}

struct DatagenArgs {
  SyntheticSpec spec;
  std::string out, clean_out;
};

struct TrainArgs {
  std::string data, config, out, gamma;
  Index hidden = 0, k = 0, m = 0;
  int folds = 10, max_iterations = 400, rounding = 3;
  double tol = 1e-7;
  std::uint64_t seed = 1, sensing_seed = 0;
};

struct EncodeArgs {
  std::string model, data, out;
  Index m = 0;
  std::uint64_t sensing_seed = 0;
};

struct DecodeArgs {
  std::string model, measurements, out;
  double lambda = 0.0, lambda_scale = 1e-4;
};

struct BenchArgs {
  std::string data, reference, out, cs = "both";
  std::vector<std::string> methods{"ssae", "dct", "dft", "pca"};
  std::vector<double> etas{0.13, 0.217, 0.3, 0.5, 0.8, 1.0};
  std::vector<std::uint64_t> seeds{1};
  Index hidden = 0;
  double gamma = 0.0, noise_var = 0.0;
  std::uint64_t noise_seed = 99;
  int max_iterations = 400;
};

struct SweepArgs {
  std::string data, grid = "log", out;
  double eta = 0.0;
  int runs = 10, max_iterations = 400;
  Index hidden = 0;
  std::uint64_t seed = 1;
};

int datagen(const DatagenArgs& a, std::ostream& out) {
  const SyntheticData data = generate_synthetic_field(a.spec);
  write_csv_file(a.out, data.noisy);
  out << "wrote " << data.noisy.rows() << " x " << data.noisy.cols() << " readings to " << a.out << '\n';
  if (!a.clean_out.empty()) {
    write_csv_file(a.clean_out, data.clean);
    out << "wrote the noiseless field to " << a.clean_out << '\n';
  }
  return 0;
}

int train(const TrainArgs& a, const CLI::App& cmd, std::ostream& out) {
  const DataMatrix x = load_csv_file(a.data);

  TrainingConfig cfg;
  cfg.n_hidden = x.cols();
  if (!a.config.empty()) cfg = load_training_config(a.config, cfg);
  if (cmd.count("--hidden")) cfg.n_hidden = a.hidden;
  if (cmd.count("--k")) cfg.k_max = a.k;
  if (cmd.count("--gamma")) {
    if (a.gamma == "auto") {
      cfg.gamma.reset();
    } else {
      double g = 0.0;
      std::istringstream in(a.gamma);
      if (!(in >> g) || !in.eof()) throw UsageError("--gamma expects a number or 'auto', got '" + a.gamma + "'");
      cfg.gamma = g;
    }
  }
  if (cmd.count("--folds")) cfg.folds = a.folds;
  if (cmd.count("--max-iter")) cfg.max_iterations = a.max_iterations;
  if (cmd.count("--tol")) cfg.convergence_tol = a.tol;
  if (cmd.count("--seed")) cfg.seed = a.seed;
  if (cmd.count("--rounding")) cfg.rounding_places = a.rounding;
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  const Index m = cmd.count("--m") ? a.m : min_measurements(cfg.k_max, cfg.n_hidden);
  if (m < 1 || m > cfg.n_hidden)
    throw UsageError("--m = " + std::to_string(m) + " must lie in [1, hidden = " + std::to_string(cfg.n_hidden) + "]");

  const double gamma = cfg.resolved_gamma();
  out << std::setprecision(6);
  if (cfg.gamma)
    out << "gamma = " << gamma << '\n';
  else
    out << "gamma = " << gamma << " (auto, eta = " << cfg.k_max << "/" << cfg.n_hidden << ")\n";

  const TrainingReport report = ssae::train(x, cfg);
  for (std::size_t i = 0; i < report.fold_rmse.size(); ++i)
    out << "fold " << (i + 1) << " rmse " << report.fold_rmse[i] << " (" << to_string(report.fold_status[i]) << ")\n";
  out << "mean rmse " << report.mean_rmse << '\n';
  out << "learning curve: " << report.curve.front().cost << " -> " << report.curve.back().cost << " in "
      << report.curve.back().iteration << " iterations\n";

  TrainedModel model{report.params, report.sigma, cfg.k_max, cfg.rounding_places, m,
                     cmd.count("--sensing-seed") ? a.sensing_seed : cfg.seed, kModelFormatVersion};
  save_model_file(a.out, model);
  out << "model written to " << a.out << " (sigma " << report.sigma << ", M " << m << ")\n";
  return 0;
}

int encode(const EncodeArgs& a, const CLI::App& cmd, std::ostream& out) {
  const TrainedModel model = load_model_file(a.model);
  const DataMatrix x = load_csv_file(a.data);
  if (x.cols() != model.n_visible())
    throw DimensionError("data has " + std::to_string(x.cols()) + " sensors but model has n_visible = " +
                         std::to_string(model.n_visible()));
  MeasurementHeader header{cmd.count("--m") ? a.m : model.measurements,
                           cmd.count("--sensing-seed") ? a.sensing_seed : model.sensing_seed};
  if (header.m < 1 || header.m > model.n_hidden())
    throw DimensionError("--m = " + std::to_string(header.m) + " does not fit model n_hidden = " +
                         std::to_string(model.n_hidden()));
  const SensingMatrix phi = gaussian_sensing_matrix(header.m, model.n_hidden(), header.sensing_seed);
  std::vector<Measurement> rows;
  rows.reserve(static_cast<std::size_t>(x.rows()));
  for (Index r = 0; r < x.rows(); ++r) rows.push_back(gw_encode(model, phi, x.row(r).transpose()));
  std::ofstream file(a.out);
  if (!file) throw Error("cannot write " + a.out);
  write_measurements(file, header, rows);
  out << "encoded " << rows.size() << " frames into " << header.m + 1 << " values each\n";
  return 0;
}

int decode(const DecodeArgs& a, const CLI::App& cmd, std::ostream& out, std::ostream& err) {
  const TrainedModel model = load_model_file(a.model);
  std::ifstream in(a.measurements);
  if (!in) throw Error("cannot open " + a.measurements);
  std::optional<MeasurementHeader> header;
  const auto rows = read_measurements(in, header);
  const MeasurementHeader h = header.value_or(MeasurementHeader{model.measurements, model.sensing_seed});
  const Index m = rows.front().y.size();
  if (m > model.n_hidden())
    throw DimensionError("measurements have M = " + std::to_string(m) + " but model has n_hidden = " +
                         std::to_string(model.n_hidden()));
  const SensingMatrix phi = gaussian_sensing_matrix(m, model.n_hidden(), h.sensing_seed);

  LassoSettings lasso;
  if (cmd.count("--lambda")) lasso.lambda = a.lambda;
  lasso.lambda_scale = a.lambda_scale;
  MatrixXd xs(static_cast<Index>(rows.size()), model.n_visible());
  int unconverged = 0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto res = bs_decode(model, phi, rows[r], lasso);
    if (!res.lasso_converged) ++unconverged;
    xs.row(static_cast<Index>(r)) = res.x_hat.transpose();
  }
  write_csv_file(a.out, xs);
  if (unconverged) err << "warning: LASSO hit its sweep limit on " << unconverged << " frames\n";
  out << "decoded " << rows.size() << " frames of " << model.n_visible() << " sensors\n";
  return 0;
}

int bench(const BenchArgs& a, const CLI::App& cmd, std::ostream& out) {
  for (const auto& m : a.methods)
    if (std::find(valid_methods().begin(), valid_methods().end(), m) == valid_methods().end())
      throw UsageError("unknown method '" + m + "'; valid methods: " + join(valid_methods()));
  BenchmarkOptions opt;
  opt.methods = a.methods;
  opt.etas = a.etas;
  opt.seeds = a.seeds;
  opt.cs = a.cs == "on" ? CsMode::on : a.cs == "off" ? CsMode::off : CsMode::both;
  opt.hidden = a.hidden;
  if (cmd.count("--gamma")) opt.gamma = a.gamma;
  opt.test_noise = {a.noise_var, a.noise_seed};
  opt.max_iterations = a.max_iterations;
  for (double eta : opt.etas)
    if (!(eta > 0.0 && eta <= 1.0)) throw UsageError("--etas values must lie in (0, 1]");

  const DataMatrix x = load_csv_file(a.data);
  std::optional<DataMatrix> reference;
  if (!a.reference.empty()) reference = load_csv_file(a.reference);
  const BenchmarkReport report = run_benchmark(x, opt, reference ? &*reference : nullptr);
  std::ofstream file(a.out);
  if (!file) throw Error("cannot write " + a.out);
  write_report_csv(file, report);
  write_report_summary(out, report);
  return 0;
}

int sweep(const SweepArgs& a, std::ostream& out) {
  std::vector<double> grid;
  if (a.grid == "log") {
    grid = default_gamma_grid();
  } else {
    std::stringstream ss(a.grid);
    std::string item;
    while (std::getline(ss, item, ',')) {
      std::istringstream in(item);
      double g = 0.0;
      if (!(in >> g) || !in.eof() || g < 0.0) throw UsageError("--grid expects 'log' or a list of gammas");
      grid.push_back(g);
    }
  }
  if (grid.empty()) throw UsageError("--grid is empty");
  if (!(a.eta > 0.0 && a.eta <= 1.0)) throw UsageError("--eta must lie in (0, 1]");

  const DataMatrix x = load_csv_file(a.data);
  GammaSweepOptions opt;
  opt.hidden = a.hidden;
  opt.runs = a.runs;
  opt.seed = a.seed;
  opt.max_iterations = a.max_iterations;
  const auto rows = sweep_gamma(x, a.eta, grid, opt);

  const Index hidden = a.hidden > 0 ? a.hidden : x.cols();
  out << "eta " << a.eta << ", gamma(eta) = " << gamma_for_eta(a.eta) << ", " << a.runs << " runs, L = " << hidden
      << '\n';
  out << "gamma,mean_rmse,std_rmse,best\n";
  for (const auto& r : rows)
    out << format_double(r.gamma) << ',' << format_double(r.mean_rmse) << ',' << format_double(r.std_rmse) << ','
        << (r.best ? "*" : "") << '\n';
  if (!a.out.empty()) {
    std::ofstream file(a.out);
    if (!file) throw Error("cannot write " + a.out);
    file << "gamma,mean_rmse,std_rmse,best\n";
    for (const auto& r : rows)
      file << format_double(r.gamma) << ',' << format_double(r.mean_rmse) << ',' << format_double(r.std_rmse) << ','
           << (r.best ? 1 : 0) << '\n';
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse coding of sensor readings with a shrinking sparse autoencoder and compressive sensing"};
  app.name("ssae");
  app.require_subcommand(1, 1);

  DatagenArgs dg;
  auto* dg_cmd = app.add_subcommand("datagen", "Generate a synthetic correlated sensor dataset as CSV");
  dg_cmd->add_option("--sensors", dg.spec.sensors, "Number of sensors N")->capture_default_str();
  dg_cmd->add_option("--samples", dg.spec.samples, "Number of time instants T")->capture_default_str();
  dg_cmd->add_option("--corr-len", dg.spec.correlation_length, "Spatial correlation length (sensor spacings)")
      ->capture_default_str();
  dg_cmd->add_option("--amplitude", dg.spec.amplitude, "Signal amplitude")->capture_default_str();
  dg_cmd->add_option("--event-threshold", dg.spec.event_threshold,
                     "Soft threshold on the local drivers; 0 gives a Gaussian field")
      ->capture_default_str();
  dg_cmd->add_option("--noise-var", dg.spec.noise.variance, "Additive Gaussian noise variance")->capture_default_str();
  dg_cmd->add_option("--seed", dg.spec.noise.seed, "Random seed")->capture_default_str();
  dg_cmd->add_option("--out", dg.out, "Output CSV")->required();
  dg_cmd->add_option("--clean-out", dg.clean_out, "Optional CSV of the noiseless field");

  TrainArgs tr;
  auto* tr_cmd = app.add_subcommand("train", "Train an SSAE with k-fold cross-validation");
  tr_cmd->add_option("--data", tr.data, "Training CSV (rows = time, columns = sensors)")->required();
  tr_cmd->add_option("--config", tr.config, "key = value config file; flags override it");
  tr_cmd->add_option("--hidden", tr.hidden, "Hidden units L (default: number of sensors)");
  tr_cmd->add_option("--k", tr.k, "Maximum nonzero code entries K");
  tr_cmd->add_option("--gamma", tr.gamma, "Sparsity penalty, or 'auto' for 0.26 - 0.26 K/L");
  tr_cmd->add_option("--folds", tr.folds, "Cross-validation folds");
  tr_cmd->add_option("--max-iter", tr.max_iterations, "L-BFGS iterations per fold");
  tr_cmd->add_option("--tol", tr.tol, "Relative cost-decrease tolerance");
  tr_cmd->add_option("--seed", tr.seed, "Shuffle and initialisation seed");
  tr_cmd->add_option("--rounding", tr.rounding, "Decimal places kept in the code");
  tr_cmd->add_option("--m", tr.m, "Measurements M stored in the model (default: ceil(K log2(L/K)))");
  tr_cmd->add_option("--sensing-seed", tr.sensing_seed, "Sensing matrix seed stored in the model (default: --seed)");
  tr_cmd->add_option("--out", tr.out, "Output model file")->required();

  EncodeArgs en;
  auto* en_cmd = app.add_subcommand("encode", "Gateway side: readings to M+1 values per frame");
  en_cmd->add_option("--model", en.model, "Model file")->required();
  en_cmd->add_option("--data", en.data, "Readings CSV")->required();
  en_cmd->add_option("--m", en.m, "Measurements M (default: from the model)");
  en_cmd->add_option("--sensing-seed", en.sensing_seed, "Sensing matrix seed (default: from the model)");
  en_cmd->add_option("--out", en.out, "Output measurement file")->required();

  DecodeArgs de;
  auto* de_cmd = app.add_subcommand("decode", "Base-station side: measurements back to readings");
  de_cmd->add_option("--model", de.model, "Model file")->required();
  de_cmd->add_option("--measurements", de.measurements, "Measurement file written by encode")->required();
  de_cmd->add_option("--lambda", de.lambda, "Absolute LASSO penalty");
  de_cmd->add_option("--lambda-scale", de.lambda_scale, "LASSO penalty relative to ||phi^T y||_inf")
      ->capture_default_str();
  de_cmd->add_option("--out", de.out, "Output readings CSV")->required();

  BenchArgs be;
  auto* be_cmd = app.add_subcommand("bench", "RMSE versus sparsity ratio for SSAE and DCT/DFT/PCA");
  be_cmd->add_option("--data", be.data, "Dataset CSV")->required();
  be_cmd->add_option("--reference", be.reference, "Ground-truth CSV the RMSE is measured against (default: --data)");
  be_cmd->add_option("--methods", be.methods, "Comma-separated subset of ssae,dct,dft,pca")
      ->delimiter(',')
      ->capture_default_str();
  be_cmd->add_option("--etas", be.etas, "Comma-separated sparsity ratios in (0, 1]")
      ->delimiter(',')
      ->capture_default_str();
  be_cmd->add_option("--cs", be.cs, "Compressive sensing in the loop")
      ->check(CLI::IsMember({"on", "off", "both"}))
      ->capture_default_str();
  be_cmd->add_option("--seeds", be.seeds, "Comma-separated seeds")->delimiter(',')->capture_default_str();
  be_cmd->add_option("--hidden", be.hidden, "SSAE hidden units L (default: number of sensors)");
  be_cmd->add_option("--gamma", be.gamma, "Fixed sparsity penalty (default: 0.26 - 0.26 K/L)");
  be_cmd->add_option("--noise-var", be.noise_var, "Noise variance added to test inputs")->capture_default_str();
  be_cmd->add_option("--noise-seed", be.noise_seed, "Seed of the test-time noise")->capture_default_str();
  be_cmd->add_option("--max-iter", be.max_iterations, "L-BFGS iterations per SSAE fit")->capture_default_str();
  be_cmd->add_option("--out", be.out, "Report CSV")->required();

  SweepArgs sw;
  auto* sw_cmd = app.add_subcommand("sweep-gamma", "Held-out RMSE over a grid of sparsity penalties");
  sw_cmd->add_option("--data", sw.data, "Dataset CSV")->required();
  sw_cmd->add_option("--eta", sw.eta, "Sparsity ratio K/L")->required();
  sw_cmd->add_option("--grid", sw.grid, "'log' for 0.5,0.2,0.1,0.05,0.02,0.01 or a comma list")
      ->capture_default_str();
  sw_cmd->add_option("--runs", sw.runs, "Seeded trainings per gamma")->capture_default_str();
  sw_cmd->add_option("--hidden", sw.hidden, "Hidden units L (default: number of sensors)");
  sw_cmd->add_option("--seed", sw.seed, "First seed")->capture_default_str();
  sw_cmd->add_option("--max-iter", sw.max_iterations, "L-BFGS iterations per training")->capture_default_str();
  sw_cmd->add_option("--out", sw.out, "Optional CSV copy of the table");

  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.push_back("ssae");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (dg_cmd->parsed()) return datagen(dg, out);
    if (tr_cmd->parsed()) return train(tr, *tr_cmd, out);
    if (en_cmd->parsed()) return encode(en, *en_cmd, out);
    if (de_cmd->parsed()) return decode(de, *de_cmd, out, err);
    if (be_cmd->parsed()) return bench(be, *be_cmd, out);
    if (sw_cmd->parsed()) return sweep(sw, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace ssae::cli
