#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "nazarov/point.hpp"

namespace nazarov {

/// Raised when an adaptive rule cannot reach its tolerance within budget.
class AccuracyError : public std::runtime_error {
 public:
  AccuracyError(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_(achieved) {}
  double achieved() const { return achieved_; }

 private:
  double achieved_;
};

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule (Newton iteration on P_n), cached per n.
inline const GaussRule& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  if (auto it = cache.find(n); it != cache.end()) return it->second;
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
  GaussRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0, p1 = x;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[static_cast<std::size_t>(i)] = -x;
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    rule.weights[static_cast<std::size_t>(i)] = w;
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  return cache.emplace(n, std::move(rule)).first->second;
}

/// Fixed Gauss-Legendre sum of g over [a, b].
template <class F>
double gauss_integrate(F&& g, double a, double b, int n) {
  const GaussRule& r = gauss_legendre(n);
  const double h = 0.5 * (b - a), m = 0.5 * (a + b);
  double s = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * g(m + h * r.nodes[i]);
  return s * h;
}

namespace detail {

// Gauss-Kronrod 7-15 abscissae and weights.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
void gk15(F& g, double a, double b, double& result, double& err) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const double fc = g(c);
  double kron = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double x = h * kXgk[static_cast<std::size_t>(j)];
    const double f1 = g(c - x), f2 = g(c + x);
    kron += kWgk[static_cast<std::size_t>(j)] * (f1 + f2);
    if (j % 2 == 1) gauss += kWg[static_cast<std::size_t>(j / 2)] * (f1 + f2);
  }
  result = kron * h;
  err = std::abs((kron - gauss) * h);
}

}  // namespace detail

struct AdaptiveResult {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
};

/// Adaptive Gauss-Kronrod (7-15) with recursive bisection; the tolerance is
/// absolute and split proportionally to subinterval length.
template <class F>
AdaptiveResult integrate_adaptive(F&& g, double a, double b, double abs_tol,
                                  int max_depth = 30) {
  AdaptiveResult out;
  if (a == b) return out;
  auto rec = [&](auto&& self, double lo, double hi, double tol, int depth) -> void {
    double r = 0.0, e = 0.0;
    detail::gk15(g, lo, hi, r, e);
    out.evaluations += 15;
    if (e <= tol || depth >= max_depth) {
      out.value += r;
      out.error += e;
      return;
    }
    const double mid = 0.5 * (lo + hi);
    self(self, lo, mid, 0.5 * tol, depth + 1);
    self(self, mid, hi, 0.5 * tol, depth + 1);
  };
  rec(rec, a, b, abs_tol, 0);
  return out;
}

/// Tensor midpoint rule on `rect` with n x n cells.
template <class F>
double midpoint_2d(F&& f, const Rect& rect, int n) {
  const double hx = rect.width() / n, hy = rect.height() / n;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) row += f(Point{rect.x0 + (j + 0.5) * hx, rect.y0 + (i + 0.5) * hy});
    s += row;
  }
  return s * hx * hy;
}

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int cells_per_axis = 0;
  bool converged = false;
};

/// Midpoint rule with grid doubling and Richardson extrapolation (second
/// order), stopping once the extrapolation correction is below rel_tol.
template <class F>
QuadratureResult integrate_midpoint_richardson(F&& f, const Rect& rect, double rel_tol,
                                               int n0 = 32, int n_max = 2048) {
  QuadratureResult res;
  double prev = midpoint_2d(f, rect, n0);
  for (int n = 2 * n0; n <= n_max; n *= 2) {
    const double cur = midpoint_2d(f, rect, n);
    const double corr = (cur - prev) / 3.0;
    res.value = cur + corr;
    res.error_estimate = std::abs(corr);
    res.cells_per_axis = n;
    if (res.error_estimate <= rel_tol * std::abs(res.value) || res.value == 0.0) {
      res.converged = true;
      return res;
    }
    prev = cur;
  }
  return res;
}

/// Midpoint-Richardson over the tiles of a tiles x tiles partition where
/// `sup_bound` is positive.  A zero sum on a nonempty active set is refined
/// further instead of being accepted, so supports narrower than the coarse
/// grid are not lost.
template <class F, class Bound>
QuadratureResult integrate_on_support(F&& f, Bound&& sup_bound, const Rect& rect, double rel_tol, int tiles = 64,
                                      int n_max = 4096) {
  std::vector<Rect> active;
  const double tw = rect.width() / tiles, th = rect.height() / tiles;
  for (int i = 0; i < tiles; ++i)
    for (int j = 0; j < tiles; ++j) {
      const Rect t{rect.x0 + j * tw, rect.y0 + i * th, rect.x0 + (j + 1) * tw, rect.y0 + (i + 1) * th};
      if (sup_bound(t) > 0.0) active.push_back(t);
    }
  QuadratureResult res;
  res.converged = active.empty();
  if (active.empty()) return res;
  auto sweep = [&](int m) {
    double s = 0.0;
    for (const Rect& t : active) s += midpoint_2d(f, t, m);
    return s;
  };
  double prev = sweep(1);
  for (int m = 2; m * tiles <= n_max; m *= 2) {
    const double cur = sweep(m);
    const double corr = (cur - prev) / 3.0;
    res.value = cur + corr;
    res.error_estimate = std::abs(corr);
    res.cells_per_axis = m * tiles;
    if (res.value != 0.0 && res.error_estimate <= rel_tol * std::abs(res.value)) {
      res.converged = true;
      return res;
    }
    prev = cur;
  }
  res.converged = res.value == 0.0;
  return res;
}

}  // namespace nazarov
