#pragma once

// Shrinking sparse autoencoder: tanh encoder, top-K shrinking of the hidden
// code, decimal rounding, tanh decoder, and the log-penalised reconstruction
// cost with its gradient.

#include <algorithm>
#include <optional>
#include <string>

#include "ssae/common.hpp"

namespace ssae {

template <typename Scalar>
struct SsaeParams {
  MatrixX<Scalar> w1;  ///< L x N, input to hidden
  VectorX<Scalar> b1;  ///< L
  MatrixX<Scalar> w2;  ///< N x L, hidden to output
  VectorX<Scalar> b2;  ///< N

  Index n_visible() const { return w1.cols(); }
  Index n_hidden() const { return w1.rows(); }
  Index size() const { return w1.size() + b1.size() + w2.size() + b2.size(); }

  static SsaeParams zeros(Index n_visible, Index n_hidden) {
    return {MatrixX<Scalar>::Zero(n_hidden, n_visible), VectorX<Scalar>::Zero(n_hidden),
            MatrixX<Scalar>::Zero(n_visible, n_hidden), VectorX<Scalar>::Zero(n_visible)};
  }

  bool consistent() const {
    const Index l = w1.rows(), n = w1.cols();
    return n >= 1 && l >= 1 && b1.size() == l && w2.rows() == n && w2.cols() == l && b2.size() == n;
  }

  void validate() const {
    require_dims(consistent(), "SsaeParams: inconsistent dimensions (w1 " + std::to_string(w1.rows()) +
                                   "x" + std::to_string(w1.cols()) + ", b1 " + std::to_string(b1.size()) +
                                   ", w2 " + std::to_string(w2.rows()) + "x" + std::to_string(w2.cols()) +
                                   ", b2 " + std::to_string(b2.size()) + ")");
    require(w1.allFinite() && b1.allFinite() && w2.allFinite() && b2.allFinite(),
            "SsaeParams: non-finite entries");
  }

  /// Flattens to [w1 (column-major), b1, w2 (column-major), b2].
  VectorX<Scalar> pack() const {
    VectorX<Scalar> v(size());
    Index o = 0;
    auto put = [&](const auto& m) {
      v.segment(o, m.size()) = m.reshaped();
      o += m.size();
    };
    put(w1);
    put(b1);
    put(w2);
    put(b2);
    return v;
  }

  static SsaeParams unpack(const VectorX<Scalar>& v, Index n_visible, Index n_hidden) {
    SsaeParams p = zeros(n_visible, n_hidden);
    require_dims(v.size() == p.size(), "SsaeParams::unpack: vector length does not match dimensions");
    Index o = 0;
    auto take = [&](auto& m) {
      m.reshaped() = v.segment(o, m.size());
      o += m.size();
    };
    take(p.w1);
    take(p.b1);
    take(p.w2);
    take(p.b2);
    return p;
  }
};

/// Partial derivatives of the cost, laid out like the parameters.
template <typename Scalar>
using SsaeGradient = SsaeParams<Scalar>;

template <typename Scalar>
struct SparseCode {
  VectorX<Scalar> values;
  Index k_max = 0;

  Index size() const { return values.size(); }
  Index nonzeros() const { return (values.array() != Scalar(0)).count(); }
};

template <typename Scalar, typename Derived>
VectorX<Scalar> hidden_activation(const SsaeParams<Scalar>& theta, const Eigen::MatrixBase<Derived>& d) {
  require_dims(d.size() == theta.n_visible(), "hidden_activation: input has " + std::to_string(d.size()) +
                                                  " entries, model expects " + std::to_string(theta.n_visible()));
  return (theta.w1 * d + theta.b1).array().tanh().matrix();
}

/// Indices of the k largest magnitudes in h; equal magnitudes favour the
/// lower index. Result is sorted ascending.
template <typename Derived>
std::vector<Index> top_k_indices(const Eigen::MatrixBase<Derived>& h, Index k) {
  std::vector<Index> idx(static_cast<std::size_t>(h.size()));
  std::iota(idx.begin(), idx.end(), Index{0});
  auto before = [&](Index a, Index b) {
    const auto ma = std::abs(h(a)), mb = std::abs(h(b));
    return ma > mb || (ma == mb && a < b);
  };
  const auto kth = idx.begin() + k;
  if (k < h.size()) std::nth_element(idx.begin(), kth, idx.end(), before);
  idx.resize(static_cast<std::size_t>(k));
  std::sort(idx.begin(), idx.end());
  return idx;
}

/// Keeps the k largest-magnitude activations and zeroes the rest.
template <typename Derived>
SparseCode<typename Derived::Scalar> shrink(const Eigen::MatrixBase<Derived>& h, Index k) {
  using Scalar = typename Derived::Scalar;
  require(k >= 1 && k <= h.size(), "shrink: k = " + std::to_string(k) + " outside [1, " +
                                       std::to_string(h.size()) + "]");
  SparseCode<Scalar> out{VectorX<Scalar>::Zero(h.size()), k};
  for (Index i : top_k_indices(h, k)) out.values(i) = h(i);
  return out;
}

template <typename Scalar>
Scalar round_to_places(Scalar v, int places) {
  const Scalar scale = std::pow(Scalar(10), Scalar(places));
  return std::round(v * scale) / scale + Scalar(0);  // + 0 folds -0 into +0
}

/// Rounds half away from zero to `places` decimals.
template <typename Scalar>
SparseCode<Scalar> round_code(const SparseCode<Scalar>& s, int places = 3) {
  require(places >= 0, "round_code: places must be nonnegative");
  SparseCode<Scalar> out{s.values.unaryExpr([places](Scalar v) { return round_to_places(v, places); }), s.k_max};
  return out;
}

template <typename Scalar, typename Derived>
VectorX<Scalar> reconstruct(const SsaeParams<Scalar>& theta, const Eigen::MatrixBase<Derived>& s) {
  require_dims(s.size() == theta.n_hidden(), "reconstruct: code has " + std::to_string(s.size()) +
                                                 " entries, model has n_hidden = " +
                                                 std::to_string(theta.n_hidden()));
  return (theta.w2 * s + theta.b2).array().tanh().matrix();
}

template <typename Scalar>
VectorX<Scalar> reconstruct(const SsaeParams<Scalar>& theta, const SparseCode<Scalar>& s) {
  return reconstruct(theta, s.values);
}

/// Encoder half: hidden activation, shrink to k, optional rounding.
template <typename Scalar, typename Derived>
SparseCode<Scalar> encode_frame(const SsaeParams<Scalar>& theta, const Eigen::MatrixBase<Derived>& d, Index k,
                                std::optional<int> places) {
  auto code = shrink(hidden_activation(theta, d), k);
  return places ? round_code(code, *places) : code;
}

template <typename Scalar>
struct ObjectiveOptions {
  Scalar gamma = Scalar(0);
  Index k = 1;
  /// Decimal places the shrunk code is rounded to; nullopt disables rounding.
  std::optional<int> rounding_places = 3;
};

template <typename Scalar>
struct CostAndGradient {
  Scalar cost{};
  SsaeGradient<Scalar> gradient;
};

namespace detail {

template <typename Scalar>
void check_objective_inputs(const SsaeParams<Scalar>& theta, const MatrixX<Scalar>& frames,
                            const ObjectiveOptions<Scalar>& opt) {
  theta.validate();
  require(frames.rows() >= 1, "cost: no training frames");
  require_dims(frames.cols() == theta.n_visible(), "cost: frames have " + std::to_string(frames.cols()) +
                                                       " columns, model expects " +
                                                       std::to_string(theta.n_visible()));
  require(opt.gamma >= Scalar(0), "cost: gamma must be nonnegative");
  require(opt.k >= 1 && opt.k <= theta.n_hidden(), "cost: k outside [1, n_hidden]");
}

}  // namespace detail

/// Cost and gradient over the T sphered frames held in the rows of `frames`.
///
/// The reconstruction term uses the shrunk (and rounded) code; the log
/// penalty uses the activation before shrinking. In the backward pass the
/// shrink mask and the rounding are constants of the forward pass: error
/// flows to kept hidden units as if rounding were the identity, and pruned
/// units receive only the penalty gradient. Sample sums are Eigen products
/// over the frames in row order, so results are reproducible run to run.
template <typename Scalar>
CostAndGradient<Scalar> cost_and_gradient(const SsaeParams<Scalar>& theta, const MatrixX<Scalar>& frames,
                                          const ObjectiveOptions<Scalar>& opt, bool want_gradient = true) {
  detail::check_objective_inputs(theta, frames, opt);
  const Index t = frames.rows();
  const Index l = theta.n_hidden();
  const Scalar inv_t = Scalar(1) / static_cast<Scalar>(t);

  const MatrixX<Scalar> d = frames.transpose();  // N x T
  MatrixX<Scalar> h = theta.w1 * d;
  h.colwise() += theta.b1;
  h = h.array().tanh().matrix();

  MatrixX<Scalar> mask = MatrixX<Scalar>::Zero(l, t);
  if (opt.k == l) {
    mask.setOnes();
  } else {
    std::vector<Index> order(static_cast<std::size_t>(l));
    for (Index u = 0; u < t; ++u) {
      std::iota(order.begin(), order.end(), Index{0});
      const auto col = h.col(u);
      std::nth_element(order.begin(), order.begin() + opt.k, order.end(), [&](Index a, Index b) {
        const Scalar ma = std::abs(col(a)), mb = std::abs(col(b));
        return ma > mb || (ma == mb && a < b);
      });
      for (Index i = 0; i < opt.k; ++i) mask(order[static_cast<std::size_t>(i)], u) = Scalar(1);
    }
  }
  MatrixX<Scalar> s = h.cwiseProduct(mask);
  if (opt.rounding_places) {
    const Scalar scale = std::pow(Scalar(10), Scalar(*opt.rounding_places));
    s = s.unaryExpr([scale](Scalar v) { return std::round(v * scale) / scale + Scalar(0); });
  }

  MatrixX<Scalar> out = theta.w2 * s;
  out.colwise() += theta.b2;
  out = out.array().tanh().matrix();

  const MatrixX<Scalar> err = out - d;
  const Scalar ln10 = std::log(Scalar(10));
  const Scalar recon = Scalar(0.5) * err.squaredNorm() * inv_t;
  const Scalar penalty = opt.gamma * inv_t * ((Scalar(1) + h.array().square()).log().sum() / ln10);

  CostAndGradient<Scalar> result{recon + penalty, {}};
  if (!want_gradient) return result;

  const MatrixX<Scalar> delta_out = err.cwiseProduct((Scalar(1) - out.array().square()).matrix());
  MatrixX<Scalar> dh = (theta.w2.transpose() * delta_out).cwiseProduct(mask);
  dh.array() += (opt.gamma / ln10) * (Scalar(2) * h.array() / (Scalar(1) + h.array().square()));
  const MatrixX<Scalar> delta_hidden = dh.cwiseProduct((Scalar(1) - h.array().square()).matrix());

  auto& g = result.gradient;
  g.w2 = delta_out * s.transpose() * inv_t;
  g.b2 = delta_out.rowwise().sum() * inv_t;
  g.w1 = delta_hidden * frames * inv_t;
  g.b1 = delta_hidden.rowwise().sum() * inv_t;
  return result;
}

template <typename Scalar>
Scalar cost(const SsaeParams<Scalar>& theta, const MatrixX<Scalar>& frames, const ObjectiveOptions<Scalar>& opt) {
  return cost_and_gradient(theta, frames, opt, false).cost;
}

template <typename Scalar>
SsaeGradient<Scalar> gradient(const SsaeParams<Scalar>& theta, const MatrixX<Scalar>& frames,
                              const ObjectiveOptions<Scalar>& opt) {
  return cost_and_gradient(theta, frames, opt).gradient;
}

}  // namespace ssae
