#include "ssae/data.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <numbers>
#include <string_view>

namespace ssae {

namespace {

constexpr double kDiurnalPeriod = 720.0;  // one day at one sample per two minutes
constexpr double kTemporalCorrelation = 0.99;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_double(std::string_view field, double& out) {
  field = trim(field);
  if (field.empty()) return false;
  if (field.front() == '+') field.remove_prefix(1);
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

// Squared-exponential kernel on a line, each row scaled to unit norm so a
// field built from unit-variance drivers has unit variance at every sensor.
MatrixXd spatial_kernel(Index n, double length) {
  MatrixXd g(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      const double dist = static_cast<double>(i - j);
      g(i, j) = std::isinf(length) ? 1.0 : std::exp(-dist * dist / (2.0 * length * length));
    }
  return g.rowwise().normalized();
}

// E[soft_threshold(u, c)^2] for standard normal u.
double event_variance(double c) {
  const double tail = 0.5 * std::erfc(c / std::numbers::sqrt2);
  const double density = std::exp(-0.5 * c * c) / std::sqrt(2.0 * std::numbers::pi);
  return 2.0 * ((1.0 + c * c) * tail - c * density);
}

}  // namespace

MatrixXd sphere_rows(const MatrixXd& x, double sigma, VectorXd* means) {
  MatrixXd d(x.rows(), x.cols());
  if (means) means->resize(x.rows());
  for (Index r = 0; r < x.rows(); ++r) {
    auto frame = sphere(x.row(r).transpose(), sigma);
    d.row(r) = frame.d.transpose();
    if (means) (*means)(r) = frame.mean;
  }
  return d;
}

double dataset_std(const DataMatrix& x) {
  require(x.size() >= 2, "dataset_std: need at least two entries");
  require(x.allFinite(), "dataset_std: non-finite entries");
  const double mean = x.mean();
  const double var = (x.array() - mean).square().sum() / static_cast<double>(x.size());
  const double sd = std::sqrt(var);
  require(sd > 0.0, "dataset_std: data has zero spread, sphering is undefined");
  return sd;
}

DataMatrix load_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  Index line_no = 0;
  Index width = -1;
  bool first_content_line = true;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    const auto fields = split_fields(view);

    std::vector<double> values(fields.size());
    Index bad_col = 0;
    Index numeric = 0;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (parse_double(fields[c], values[c]))
        ++numeric;
      else if (bad_col == 0)
        bad_col = static_cast<Index>(c) + 1;
    }
    if (first_content_line) {
      first_content_line = false;
      if (numeric == 0) continue;  // header row
    }
    if (width < 0) width = static_cast<Index>(fields.size());
    if (static_cast<Index>(fields.size()) != width)
      throw ParseError("row " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                           " fields, expected " + std::to_string(width),
                       line_no, 0);
    if (bad_col != 0)
      throw ParseError("non-numeric cell at row " + std::to_string(line_no) + " column " +
                           std::to_string(bad_col),
                       line_no, bad_col);
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw ParseError("CSV input contains no data rows", line_no, 0);

  DataMatrix x(static_cast<Index>(rows.size()), width);
  for (Index r = 0; r < x.rows(); ++r)
    for (Index c = 0; c < width; ++c) x(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  return x;
}

DataMatrix load_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return load_csv(in);
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

void write_csv(std::ostream& out, const MatrixXd& x) {
  std::string line;
  for (Index r = 0; r < x.rows(); ++r) {
    line.clear();
    for (Index c = 0; c < x.cols(); ++c) {
      if (c) line += ',';
      line += format_double(x(r, c));
    }
    line += '\n';
    out << line;
  }
}

void write_csv_file(const std::string& path, const MatrixXd& x) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  write_csv(out, x);
  if (!out) throw Error("write failed for " + path);
}

SyntheticData generate_synthetic_field(const SyntheticSpec& spec) {
  const Index n = spec.sensors;
  const Index t = spec.samples;
  require(n >= 2, "generate_synthetic: need at least two sensors for spatial correlation");
  require(t >= 1, "generate_synthetic: need at least one sample");
  require(spec.correlation_length > 0.0, "generate_synthetic: correlation length must be positive");
  require(spec.event_threshold >= 0.0 && std::isfinite(spec.event_threshold),
          "generate_synthetic: event threshold must be finite and nonnegative");
  require(spec.noise.variance >= 0.0, "generate_synthetic: noise variance must be nonnegative");

  Rng rng(spec.noise.seed);
  const MatrixXd kernel = spatial_kernel(n, spec.correlation_length);
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double innovation = std::sqrt(1.0 - kTemporalCorrelation * kTemporalCorrelation);
  VectorXd driver(n), events(n);
  for (Index i = 0; i < n; ++i) driver(i) = rng.normal();

  SyntheticData out{DataMatrix(t, n), DataMatrix(t, n)};
  for (Index r = 0; r < t; ++r) {
    if (r > 0)
      for (Index i = 0; i < n; ++i) driver(i) = kTemporalCorrelation * driver(i) + innovation * rng.normal();
    for (Index i = 0; i < n; ++i) events(i) = soft_threshold(driver(i), spec.event_threshold);
    const double diurnal = std::sin(2.0 * std::numbers::pi * static_cast<double>(r) / kDiurnalPeriod + phase);
    out.clean.row(r) = (spec.amplitude * ((kernel * events).array() + diurnal)).transpose();
  }

  out.noisy = out.clean;
  if (spec.noise.variance > 0.0) {
    const double sd = std::sqrt(spec.noise.variance);
    for (Index r = 0; r < t; ++r)
      for (Index i = 0; i < n; ++i) out.noisy(r, i) += sd * rng.normal();
  }
  return out;
}

double synthetic_total_std(const SyntheticSpec& spec) {
  // sin over whole periods has variance 1/2.
  const double a2 = spec.amplitude * spec.amplitude;
  return std::sqrt(a2 * (0.5 + event_variance(spec.event_threshold)) + spec.noise.variance);
}

}  // namespace ssae
