#include "ssae/trainer.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

namespace ssae {

double gamma_for_eta(double eta) {
  require(eta > 0.0 && eta <= 1.0, "gamma_for_eta: eta must lie in (0, 1]");
  return 0.26 - 0.26 * eta;
}

Params init_params(Index n_visible, Index n_hidden, std::uint64_t seed) {
  require(n_visible >= 1 && n_hidden >= 1, "init_params: dimensions must be positive");
  const double r = std::sqrt(6.0 / static_cast<double>(n_visible + n_hidden));
  Rng rng(seed);
  Params p = Params::zeros(n_visible, n_hidden);
  for (Index j = 0; j < p.w1.cols(); ++j)
    for (Index i = 0; i < p.w1.rows(); ++i) p.w1(i, j) = rng.uniform(-r, r);
  for (Index j = 0; j < p.w2.cols(); ++j)
    for (Index i = 0; i < p.w2.rows(); ++i) p.w2(i, j) = rng.uniform(-r, r);
  return p;
}

void TrainingConfig::validate() const {
  require(n_hidden >= 1, "training config: hidden must be positive");
  require(k_max >= 1 && k_max <= n_hidden,
          "training config: k = " + std::to_string(k_max) + " must lie in [1, hidden = " +
              std::to_string(n_hidden) + "]");
  require(!gamma || *gamma >= 0.0, "training config: gamma must be nonnegative");
  require(folds >= 2, "training config: folds must be at least 2");
  require(max_iterations >= 1, "training config: max_iterations must be positive");
  require(convergence_tol > 0.0, "training config: tol must be positive");
  require(rounding_places >= 0, "training config: rounding_places must be nonnegative");
}

double TrainingConfig::resolved_gamma() const {
  if (gamma) return *gamma;
  return gamma_for_eta(static_cast<double>(k_max) / static_cast<double>(n_hidden));
}

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) throw Error("config: bad value '" + value + "' for key '" + key + "'");
  return out;
}

std::string strip(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

TrainingConfig parse_training_config(std::istream& in, TrainingConfig cfg) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = strip(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error("config: line " + std::to_string(line_no) + " is not key = value");
    const std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));
    if (key == "hidden")
      cfg.n_hidden = parse_number<Index>(key, value);
    else if (key == "k")
      cfg.k_max = parse_number<Index>(key, value);
    else if (key == "gamma")
      cfg.gamma = value == "auto" ? std::nullopt : std::optional<double>(parse_number<double>(key, value));
    else if (key == "folds")
      cfg.folds = parse_number<int>(key, value);
    else if (key == "max_iterations")
      cfg.max_iterations = parse_number<int>(key, value);
    else if (key == "tol")
      cfg.convergence_tol = parse_number<double>(key, value);
    else if (key == "seed")
      cfg.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "rounding_places")
      cfg.rounding_places = parse_number<int>(key, value);
    else
      throw Error("config: unknown key '" + key + "' on line " + std::to_string(line_no));
  }
  return cfg;
}

TrainingConfig load_training_config(const std::string& path, TrainingConfig base) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path);
  return parse_training_config(in, base);
}

FitResult fit_ssae(const MatrixXd& sphered, const TrainingConfig& config, std::uint64_t seed) {
  config.validate();
  const Index n = sphered.cols();
  const Index l = config.n_hidden;
  const ObjectiveOptions<double> objective{config.resolved_gamma(), config.k_max, config.rounding_places};

  auto value_and_gradient = [&](const VectorXd& v, VectorXd& grad) {
    const auto cg = cost_and_gradient(Params::unpack(v, n, l), sphered, objective);
    grad = cg.gradient.pack();
    return cg.cost;
  };

  LbfgsOptions opt;
  opt.max_iterations = config.max_iterations;
  opt.convergence_tol = config.convergence_tol;
  auto res = minimize<double>(value_and_gradient, init_params(n, l, seed).pack(), opt);
  return {Params::unpack(res.x, n, l), std::move(res.curve), res.status, res.iterations};
}

TrainingReport train(const DataMatrix& x, const TrainingConfig& config) {
  config.validate();
  const Index t = x.rows();
  require(t >= config.folds, "train: " + std::to_string(t) + " rows cannot fill " +
                                 std::to_string(config.folds) + " folds");

  TrainingReport report;
  report.sigma = dataset_std(x);
  report.gamma = config.resolved_gamma();
  const auto order = shuffled_indices(t, config.seed);

  for (int fold = 0; fold < config.folds; ++fold) {
    const Index begin = t * fold / config.folds;
    const Index end = t * (fold + 1) / config.folds;
    std::vector<Index> train_rows, test_rows;
    for (Index i = 0; i < t; ++i)
      (i >= begin && i < end ? test_rows : train_rows).push_back(order[static_cast<std::size_t>(i)]);

    const MatrixXd frames = sphere_rows(select_rows(x, train_rows), report.sigma);
    FitResult fit;
    try {
      fit = fit_ssae(frames, config, config.seed + static_cast<std::uint64_t>(fold));
    } catch (const NonFiniteError& e) {
      throw NonFiniteError("fold " + std::to_string(fold + 1) + ": " + e.what(), e.iteration());
    }
    report.fold_rmse.push_back(
        evaluate_rmse(fit.params, report.sigma, select_rows(x, test_rows), config.k_max, config.rounding_places));
    report.fold_status.push_back(fit.status);
    report.curve = std::move(fit.curve);
    report.params = std::move(fit.params);
  }

  double sum = 0.0;
  for (double r : report.fold_rmse) sum += r;
  report.mean_rmse = sum / static_cast<double>(report.fold_rmse.size());
  return report;
}

MatrixXd ssae_round_trip(const Params& params, double sigma, const DataMatrix& x, Index k,
                         std::optional<int> rounding_places) {
  require_dims(x.cols() == params.n_visible(), "round trip: data has " + std::to_string(x.cols()) +
                                                   " columns, model has n_visible = " +
                                                   std::to_string(params.n_visible()));
  MatrixXd out(x.rows(), x.cols());
  for (Index r = 0; r < x.rows(); ++r) {
    const auto frame = sphere(x.row(r).transpose(), sigma);
    const auto code = encode_frame(params, frame.d, k, rounding_places);
    out.row(r) = desphere(reconstruct(params, code), frame.mean, sigma).transpose();
  }
  return out;
}

double rmse(const MatrixXd& estimate, const MatrixXd& truth) {
  require_dims(estimate.rows() == truth.rows() && estimate.cols() == truth.cols(), "rmse: shape mismatch");
  require(truth.size() > 0, "rmse: empty input");
  return std::sqrt((estimate - truth).squaredNorm() / static_cast<double>(truth.size()));
}

double evaluate_rmse(const Params& params, double sigma, const DataMatrix& x_test, Index k,
                     std::optional<int> rounding_places) {
  return rmse(ssae_round_trip(params, sigma, x_test, k, rounding_places), x_test);
}

}  // namespace ssae
