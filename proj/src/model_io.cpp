#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "ssae/pipeline.hpp"

namespace ssae {

namespace {

constexpr const char* kMagic = "ssae-model";
constexpr const char* kSections[] = {"w1", "b1", "w2", "b2"};

void write_matrix(std::ostream& out, const MatrixXd& m) {
  std::string line;
  for (Index r = 0; r < m.rows(); ++r) {
    line.clear();
    for (Index c = 0; c < m.cols(); ++c) {
      if (c) line += ',';
      line += format_double(m(r, c));
    }
    out << line << '\n';
  }
}

std::vector<double> parse_row(const std::string& line, const std::string& section) {
  std::vector<double> row;
  std::size_t start = 0;
  while (start <= line.size()) {
    auto comma = line.find(',', start);
    if (comma == std::string::npos) comma = line.size();
    double v = 0.0;
    const char* first = line.data() + start;
    const char* last = line.data() + comma;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
      throw ModelFormatError("model file: bad number in section " + section + ": '" + std::string(first, last) + "'");
    row.push_back(v);
    start = comma + 1;
  }
  return row;
}

template <typename T>
T header_value(const std::map<std::string, std::string>& header, const std::string& key) {
  const auto it = header.find(key);
  if (it == header.end()) throw ModelFormatError("model file: missing header field " + key);
  T v{};
  const auto& s = it->second;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ModelFormatError("model file: bad value for header field " + key + ": '" + s + "'");
  return v;
}

}  // namespace

void TrainedModel::validate() const {
  params.validate();
  require(sigma > 0.0 && std::isfinite(sigma), "model: sigma must be positive");
  require(k_max >= 1 && k_max <= n_hidden(), "model: k_max outside [1, n_hidden]");
  require(rounding_places >= 0, "model: rounding_places must be nonnegative");
  require(measurements >= 1 && measurements <= n_hidden(), "model: measurements outside [1, n_hidden]");
}

SensingMatrix TrainedModel::sensing_matrix() const {
  return gaussian_sensing_matrix(measurements, n_hidden(), sensing_seed);
}

void save_model(std::ostream& out, const TrainedModel& model) {
  model.validate();
  out << kMagic << ' ' << model.version << '\n'
      << "n_visible " << model.n_visible() << '\n'
      << "n_hidden " << model.n_hidden() << '\n'
      << "k_max " << model.k_max << '\n'
      << "sigma " << format_double(model.sigma) << '\n'
      << "rounding_places " << model.rounding_places << '\n'
      << "measurements " << model.measurements << '\n'
      << "sensing_seed " << model.sensing_seed << '\n';
  out << "w1\n";
  write_matrix(out, model.params.w1);
  out << "b1\n";
  write_matrix(out, model.params.b1.transpose());
  out << "w2\n";
  write_matrix(out, model.params.w2);
  out << "b2\n";
  write_matrix(out, model.params.b2.transpose());
  out << "end\n";
}

void save_model_file(const std::string& path, const TrainedModel& model) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  save_model(out, model);
  if (!out) throw Error("write failed for " + path);
}

TrainedModel load_model(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw TruncatedModelError("model file: empty input");
  {
    std::istringstream first(line);
    std::string magic;
    int version = -1;
    if (!(first >> magic >> version) || magic != kMagic)
      throw ModelFormatError("model file: missing '" + std::string(kMagic) + " <version>' header line");
    if (version != kModelFormatVersion)
      throw UnsupportedVersionError("model file: unsupported format version " + std::to_string(version) +
                                        " (this build reads version " + std::to_string(kModelFormatVersion) + ")",
                                    version);
  }

  std::map<std::string, std::string> header;
  bool reached_payload = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line == kSections[0]) {
      reached_payload = true;
      break;
    }
    std::istringstream kv(line);
    std::string key, value;
    if (!(kv >> key >> value)) throw ModelFormatError("model file: malformed header line '" + line + "'");
    header[key] = value;
  }
  if (!reached_payload) throw TruncatedModelError("model file: ends before the w1 section");

  std::map<std::string, std::vector<std::vector<double>>> sections;
  std::string current = kSections[0];
  bool ended = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line == "end") {
      ended = true;
      break;
    }
    bool is_marker = false;
    for (const char* name : kSections)
      if (line == name) {
        current = name;
        is_marker = true;
      }
    if (is_marker) continue;
    sections[current].push_back(parse_row(line, current));
  }
  if (!ended) throw TruncatedModelError("model file: truncated in section " + current + " (no end marker)");

  TrainedModel model;
  const auto n = header_value<Index>(header, "n_visible");
  const auto l = header_value<Index>(header, "n_hidden");
  model.k_max = header_value<Index>(header, "k_max");
  model.sigma = header_value<double>(header, "sigma");
  model.rounding_places = header_value<int>(header, "rounding_places");
  model.measurements = header_value<Index>(header, "measurements");
  model.sensing_seed = header_value<std::uint64_t>(header, "sensing_seed");
  if (n < 1) throw ModelDimensionError("model file: n_visible must be positive", "n_visible");
  if (l < 1) throw ModelDimensionError("model file: n_hidden must be positive", "n_hidden");

  auto fill = [&](const char* name, Index rows, const char* row_field, Index cols, const char* col_field) {
    const auto& data = sections[name];
    if (static_cast<Index>(data.size()) != rows)
      throw ModelDimensionError("model file: section " + std::string(name) + " has " + std::to_string(data.size()) +
                                    " rows but header " + row_field + " = " + std::to_string(rows),
                                row_field);
    MatrixXd m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
      const auto& row = data[static_cast<std::size_t>(r)];
      if (static_cast<Index>(row.size()) != cols)
        throw ModelDimensionError("model file: section " + std::string(name) + " row " + std::to_string(r + 1) +
                                      " has " + std::to_string(row.size()) + " values but header " + col_field +
                                      " = " + std::to_string(cols),
                                  col_field);
      for (Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)];
    }
    return m;
  };
  for (const char* vec : {"b1", "b2"})
    if (sections[vec].size() != 1) throw ModelFormatError("model file: section " + std::string(vec) + " must be one row");
  model.params.w1 = fill("w1", l, "n_hidden", n, "n_visible");
  model.params.b1 = fill("b1", 1, "n_hidden", l, "n_hidden").transpose();
  model.params.w2 = fill("w2", n, "n_visible", l, "n_hidden");
  model.params.b2 = fill("b2", 1, "n_visible", n, "n_visible").transpose();

  if (model.k_max < 1 || model.k_max > l)
    throw ModelDimensionError("model file: k_max = " + std::to_string(model.k_max) + " outside [1, n_hidden = " +
                                  std::to_string(l) + "]",
                              "k_max");
  if (model.measurements < 1 || model.measurements > l)
    throw ModelDimensionError("model file: measurements = " + std::to_string(model.measurements) +
                                  " outside [1, n_hidden = " + std::to_string(l) + "]",
                              "measurements");
  model.validate();
  return model;
}

TrainedModel load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model " + path);
  return load_model(in);
}

}  // namespace ssae
