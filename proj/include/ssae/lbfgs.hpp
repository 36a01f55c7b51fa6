#pragma once

#include <algorithm>
#include <deque>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ssae/common.hpp"

namespace ssae {

struct LbfgsOptions {
  int history = 10;             ///< stored (s, y) pairs
  int max_iterations = 400;
  double convergence_tol = 1e-7;  ///< stop when a Wolfe step lowers the cost by less than this, relatively
  double gradient_tol = 1e-12;  ///< stop when the gradient max-norm falls below this
  double c1 = 1e-4;             ///< sufficient decrease
  double c2 = 0.9;              ///< curvature
  int max_line_search = 30;     ///< function evaluations per line search
};

enum class LbfgsStatus { converged, stationary, max_iterations, line_search_failed };

inline const char* to_string(LbfgsStatus s) {
  switch (s) {
    case LbfgsStatus::converged: return "converged";
    case LbfgsStatus::stationary: return "stationary";
    case LbfgsStatus::max_iterations: return "max_iterations";
    case LbfgsStatus::line_search_failed: return "line_search_failed";
  }
  return "unknown";
}

struct CurvePoint {
  int iteration = 0;
  double cost = 0.0;
};

template <typename Scalar>
struct LbfgsResult {
  VectorX<Scalar> x;
  Scalar cost{};
  int iterations = 0;
  LbfgsStatus status = LbfgsStatus::max_iterations;
  std::vector<CurvePoint> curve;  ///< cost at the start and after every accepted step

  bool warning() const { return status == LbfgsStatus::line_search_failed; }
};

/// Cost or gradient evaluated to inf/nan.
class NonFiniteError : public Error {
public:
  NonFiniteError(const std::string& what, int iteration) : Error(what), iteration_(iteration) {}
  int iteration() const noexcept { return iteration_; }

private:
  int iteration_;
};

namespace detail {

template <typename Scalar>
struct LineTrial {
  Scalar alpha{};
  Scalar f{};
  Scalar slope{};
  VectorX<Scalar> x;
  VectorX<Scalar> g;
};

// Minimiser of the cubic through (a, fa, da) and (b, fb, db), clamped into
// the middle 80% of the bracket; bisection when the fit is degenerate.
template <typename Scalar>
Scalar cubic_step(const LineTrial<Scalar>& a, const LineTrial<Scalar>& b) {
  const Scalar lo = std::min(a.alpha, b.alpha), hi = std::max(a.alpha, b.alpha);
  const Scalar width = hi - lo;
  const Scalar d1 = a.slope + b.slope - Scalar(3) * (a.f - b.f) / (a.alpha - b.alpha);
  const Scalar disc = d1 * d1 - a.slope * b.slope;
  Scalar step = (lo + hi) / Scalar(2);
  if (disc >= Scalar(0)) {
    const Scalar d2 = std::copysign(std::sqrt(disc), b.alpha - a.alpha);
    const Scalar denom = b.slope - a.slope + Scalar(2) * d2;
    if (denom != Scalar(0)) {
      const Scalar cand = b.alpha - (b.alpha - a.alpha) * (b.slope + d2 - d1) / denom;
      if (std::isfinite(cand)) step = cand;
    }
  }
  return std::clamp(step, lo + Scalar(0.1) * width, hi - Scalar(0.1) * width);
}

}  // namespace detail

/// Limited-memory BFGS with a strong-Wolfe line search.
///
/// `objective(x, grad)` returns the cost at x and writes the gradient into
/// grad. Every accepted step lowers the cost, so the final point is the best
/// seen. A line search that cannot satisfy the Wolfe conditions falls back to
/// the lowest sufficient-decrease point it evaluated, then to the lowest
/// point below the current cost; the convergence test is skipped after such
/// a step. With no lower point at all, the history is dropped and the
/// iteration is retried along the steepest-descent direction. Minimisation
/// stops with LbfgsStatus::line_search_failed when that retry fails too.
template <typename Scalar, typename Objective>
LbfgsResult<Scalar> minimize(Objective&& objective, VectorX<Scalar> x0, const LbfgsOptions& opt = {}) {
  require(opt.history >= 1, "minimize: history must be positive");
  require(opt.max_iterations >= 1, "minimize: max_iterations must be positive");
  require(opt.convergence_tol > 0.0, "minimize: convergence_tol must be positive");

  int iteration = 0;
  auto evaluate = [&](const VectorX<Scalar>& x, VectorX<Scalar>& g) {
    g.resize(x.size());
    const Scalar f = objective(x, g);
    if (!std::isfinite(f) || !g.allFinite())
      throw NonFiniteError("minimize: non-finite cost or gradient at iteration " + std::to_string(iteration),
                           iteration);
    return f;
  };

  LbfgsResult<Scalar> result;
  VectorX<Scalar> x = std::move(x0);
  VectorX<Scalar> g;
  Scalar f = evaluate(x, g);
  result.curve.push_back({0, static_cast<double>(f)});

  std::deque<VectorX<Scalar>> s_hist, y_hist;
  std::deque<Scalar> rho_hist;
  result.status = LbfgsStatus::max_iterations;

  for (iteration = 1; iteration <= opt.max_iterations; ++iteration) {
    if (g.size() == 0 || g.template lpNorm<Eigen::Infinity>() <= Scalar(opt.gradient_tol)) {
      result.status = LbfgsStatus::stationary;
      break;
    }

    // Two-loop recursion for p = -H g.
    VectorX<Scalar> q = g;
    const std::size_t m = s_hist.size();
    std::vector<Scalar> alpha(m);
    for (std::size_t i = m; i-- > 0;) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alpha[i] * y_hist[i];
    }
    if (m > 0) q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (std::size_t i = 0; i < m; ++i) {
      const Scalar beta = rho_hist[i] * y_hist[i].dot(q);
      q += (alpha[i] - beta) * s_hist[i];
    }
    VectorX<Scalar> p = -q;
    Scalar slope0 = g.dot(p);
    if (!(slope0 < Scalar(0))) {
      s_hist.clear(), y_hist.clear(), rho_hist.clear();
      p = -g;
      slope0 = -g.squaredNorm();
    }

    // Line search along p.
    const Scalar c1 = Scalar(opt.c1), c2 = Scalar(opt.c2);
    detail::LineTrial<Scalar> zero{Scalar(0), f, slope0, x, g};
    std::optional<detail::LineTrial<Scalar>> accepted;
    std::optional<detail::LineTrial<Scalar>> best_armijo;
    std::optional<detail::LineTrial<Scalar>> best_decrease;
    auto trial_at = [&](Scalar a) {
      detail::LineTrial<Scalar> t{a, {}, {}, x + a * p, {}};
      t.f = evaluate(t.x, t.g);
      t.slope = t.g.dot(p);
      if (t.f <= f + c1 * a * slope0 && t.f < f && (!best_armijo || t.f < best_armijo->f)) best_armijo = t;
      if (t.f < f && (!best_decrease || t.f < best_decrease->f)) best_decrease = t;
      return t;
    };
    auto armijo_fails = [&](const detail::LineTrial<Scalar>& t) { return t.f > f + c1 * t.alpha * slope0; };
    auto curvature_ok = [&](const detail::LineTrial<Scalar>& t) { return std::abs(t.slope) <= -c2 * slope0; };

    int evals = 0;
    auto zoom = [&](detail::LineTrial<Scalar> lo, detail::LineTrial<Scalar> hi) {
      while (evals < opt.max_line_search) {
        if (std::abs(hi.alpha - lo.alpha) <= std::numeric_limits<Scalar>::epsilon() * std::abs(lo.alpha + hi.alpha))
          return;
        auto t = trial_at(detail::cubic_step(lo, hi));
        ++evals;
        if (armijo_fails(t) || t.f >= lo.f) {
          hi = std::move(t);
        } else {
          if (curvature_ok(t)) {
            accepted = std::move(t);
            return;
          }
          if (t.slope * (hi.alpha - lo.alpha) >= Scalar(0)) hi = lo;
          lo = std::move(t);
        }
      }
    };

    Scalar step = m == 0 ? std::min(Scalar(1), Scalar(1) / std::sqrt(-slope0)) : Scalar(1);
    detail::LineTrial<Scalar> prev = zero;
    while (evals < opt.max_line_search && !accepted) {
      auto t = trial_at(step);
      ++evals;
      if (armijo_fails(t) || (prev.alpha > Scalar(0) && t.f >= prev.f)) {
        zoom(prev, t);
        break;
      }
      if (curvature_ok(t)) {
        accepted = std::move(t);
        break;
      }
      if (t.slope >= Scalar(0)) {
        zoom(t, prev);
        break;
      }
      prev = std::move(t);
      step *= Scalar(2);
    }
    const bool wolfe_step = accepted.has_value();
    if (!accepted) accepted = best_armijo;
    if (!accepted) accepted = best_decrease;
    if (!accepted && m > 0) {
      // Retry the iteration along steepest descent with a fresh history.
      s_hist.clear(), y_hist.clear(), rho_hist.clear();
      --iteration;
      continue;
    }
    if (!accepted) {
      result.status = LbfgsStatus::line_search_failed;
      break;
    }

    VectorX<Scalar> s = accepted->x - x;
    VectorX<Scalar> y = accepted->g - g;
    const Scalar sy = s.dot(y);
    const Scalar f_old = f;
    x = std::move(accepted->x);
    g = std::move(accepted->g);
    f = accepted->f;
    result.curve.push_back({iteration, static_cast<double>(f)});

    if (sy > std::numeric_limits<Scalar>::epsilon() * y.squaredNorm()) {
      if (static_cast<int>(s_hist.size()) == opt.history) {
        s_hist.pop_front(), y_hist.pop_front(), rho_hist.pop_front();
      }
      rho_hist.push_back(Scalar(1) / sy);
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
    }

    const Scalar scale = std::max({std::abs(f_old), std::abs(f), std::numeric_limits<Scalar>::min()});
    if (wolfe_step && (f_old - f) / scale < Scalar(opt.convergence_tol)) {
      result.status = LbfgsStatus::converged;
      break;
    }
  }

  result.iterations = std::min(iteration, opt.max_iterations);
  result.x = std::move(x);
  result.cost = f;
  return result;
}

}  // namespace ssae
