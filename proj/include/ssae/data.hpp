#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>

#include "ssae/common.hpp"

namespace ssae {

/// Malformed CSV input. Row and column are 1-based file coordinates; a zero
/// column means the whole row is at fault.
class ParseError : public Error {
public:
  ParseError(const std::string& what, Index row, Index col)
      : Error(what), row_(row), col_(col) {}
  Index row() const noexcept { return row_; }
  Index col() const noexcept { return col_; }

private:
  Index row_;
  Index col_;
};

struct NoiseSpec {
  double variance = 0.0;
  std::uint64_t seed = 0;
};

template <typename Scalar>
struct SpheredFrame {
  VectorX<Scalar> d;
  Scalar mean{};
};

/// Subtracts the frame's own mean, clips deviations at +-3 sigma and scales
/// the result into [-1, 1].
template <typename Derived>
SpheredFrame<typename Derived::Scalar> sphere(const Eigen::MatrixBase<Derived>& x,
                                              typename Derived::Scalar sigma) {
  using Scalar = typename Derived::Scalar;
  require(sigma > Scalar(0) && std::isfinite(sigma), "sphere: sigma must be positive and finite");
  require(x.size() > 0, "sphere: empty frame");
  require(x.allFinite(), "sphere: non-finite input");
  SpheredFrame<Scalar> out;
  out.mean = x.mean();
  const Scalar bound = Scalar(3) * sigma;
  out.d = ((x.array() - out.mean).cwiseMin(bound).cwiseMax(-bound) / bound).matrix();
  return out;
}

template <typename Derived>
VectorX<typename Derived::Scalar> desphere(const Eigen::MatrixBase<Derived>& d_hat,
                                           typename Derived::Scalar mean,
                                           typename Derived::Scalar sigma) {
  using Scalar = typename Derived::Scalar;
  require(sigma > Scalar(0) && std::isfinite(sigma), "desphere: sigma must be positive and finite");
  return ((Scalar(3) * sigma) * d_hat.array() + mean).matrix();
}

/// Row-wise sphering of a T x N matrix. Frame means are written to `means`
/// when it is non-null.
MatrixXd sphere_rows(const MatrixXd& x, double sigma, VectorXd* means = nullptr);

/// Population standard deviation pooled over every entry.
double dataset_std(const DataMatrix& x);

DataMatrix load_csv(std::istream& in);
DataMatrix load_csv_file(const std::string& path);
void write_csv(std::ostream& out, const MatrixXd& x);
void write_csv_file(const std::string& path, const MatrixXd& x);

/// Formats with 17 significant digits, which round-trips any double.
std::string format_double(double v);

struct SyntheticSpec {
  Index sensors = 23;
  Index samples = 2000;
  double correlation_length = 1.0;  ///< kernel width in sensor spacings; infinity gives one common field
  double amplitude = 10.0;
  double event_threshold = 2.0;  ///< 0 gives a Gaussian field
  NoiseSpec noise{};
};

struct SyntheticData {
  DataMatrix clean;  ///< noiseless field
  DataMatrix noisy;  ///< clean plus i.i.d. Gaussian noise
};

/// Sensors sit at positions 1..N on a line. Each reading is
///   amplitude * (sin(2 pi t / 720 + phase) + sum_j g_ij e_j(t)) + z
/// with g_ij = exp(-(i-j)^2 / (2 R^2)) normalised per row, e_j(t) the
/// soft-thresholded value of a unit-variance AR(1) driver (coefficient 0.99)
/// and z ~ N(0, noise.variance). Thresholding makes the local excursions
/// sparse in time. Pure function of its arguments.
SyntheticData generate_synthetic_field(const SyntheticSpec& spec);

inline DataMatrix generate_synthetic(const SyntheticSpec& spec) {
  return generate_synthetic_field(spec).noisy;
}

/// Stationary standard deviation of the generator's output, pooled over
/// sensors and time.
double synthetic_total_std(const SyntheticSpec& spec);

}  // namespace ssae
