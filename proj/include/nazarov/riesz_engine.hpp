#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <numbers>
#include <queue>
#include <span>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include <fftw3.h>

#include "nazarov/cup.hpp"
#include "nazarov/local_majorant.hpp"
#include "nazarov/parallel.hpp"
#include "nazarov/point.hpp"
#include "nazarov/quadrature.hpp"

namespace nazarov {

/// Kernel data of R_j: c_2 (t_j - x_j)/|t - x|^3 - c_2 t_j (1 + |t|^2)^{-3/2},
/// c_2 = 1 / (pi gamma_1), gamma_1 = 2.
struct RieszKernel {
  int j = 1;  // 1 or 2
  bool poisson_correction = true;

  static constexpr double c2 = 1.0 / (2.0 * std::numbers::pi);

  RieszKernel() = default;
  explicit RieszKernel(int comp, bool corr = true) : j(comp), poisson_correction(corr) {
    if (comp != 1 && comp != 2) throw std::invalid_argument("RieszKernel: j must be 1 or 2");
  }

  /// (t_j - x_j) / |t - x|^3.
  double kernel(Point x, Point t) const {
    const Point d = t - x;
    const double r = norm(d);
    return (j == 1 ? d.x : d.y) / (r * r * r);
  }
  /// d/dx_i of the kernel.
  double kernel_dx(Point x, Point t, int i) const {
    const Point d = t - x;
    const double r2 = d.x * d.x + d.y * d.y;
    const double r5 = r2 * r2 * std::sqrt(r2);
    const double dj = j == 1 ? d.x : d.y, di = i == 1 ? d.x : d.y;
    return (3.0 * dj * di - (i == j ? r2 : 0.0)) / r5;
  }
  double correction_weight(Point t) const {
    const double q = 1.0 + t.x * t.x + t.y * t.y;
    return (j == 1 ? t.x : t.y) / (q * std::sqrt(q));
  }
};

/// `accurate`: adaptive polar near field (absolute tolerance `tol`) and
/// tensor rules accurate to ~1e-11 beyond |y|_inf = 3.  `fast`: a fixed polar
/// rule and coarser tensor rules, accurate to a few 1e-6 per cup; meant for
/// Lipschitz sweeps over many probes.
struct RieszOptions {
  enum class Mode { accurate, fast };
  Mode mode = Mode::accurate;
  double tol = 1e-10;
};

namespace riesz_detail {

template <std::size_t N>
using Vec = std::array<double, N>;

template <std::size_t N>
void gk15_vec(auto& g, double a, double b, Vec<N>& result, double& err) {
  using detail::kWg;
  using detail::kWgk;
  using detail::kXgk;
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const Vec<N> fc = g(c);
  Vec<N> kron{}, gauss{};
  for (std::size_t k = 0; k < N; ++k) kron[k] = fc[k] * kWgk[7], gauss[k] = fc[k] * kWg[3];
  for (int jj = 0; jj < 7; ++jj) {
    const auto j = static_cast<std::size_t>(jj);
    const double x = h * kXgk[j];
    const Vec<N> f1 = g(c - x), f2 = g(c + x);
    for (std::size_t k = 0; k < N; ++k) {
      kron[k] += kWgk[j] * (f1[k] + f2[k]);
      if (jj % 2 == 1) gauss[k] += kWg[j / 2] * (f1[k] + f2[k]);
    }
  }
  err = 0.0;
  for (std::size_t k = 0; k < N; ++k) {
    result[k] = kron[k] * h;
    err = std::max(err, std::abs((kron[k] - gauss[k]) * h));
  }
}

/// Globally adaptive GK on a vector integrand over consecutive panels given
/// by `cuts`: the panel with the largest error estimate is bisected until the
/// summed estimate is below tol (absolute) or the panel budget runs out.
template <std::size_t N>
Vec<N> integrate_global(auto& g, const double* cuts, int ncuts, double tol, int max_panels = 4000) {
  struct Panel {
    double a, b, err;
    Vec<N> val;
    bool operator<(const Panel& o) const { return err < o.err; }
  };
  std::priority_queue<Panel> heap;
  double total_err = 0.0;
  for (int k = 0; k + 1 < ncuts; ++k) {
    if (!(cuts[k + 1] - cuts[k] > 0)) continue;
    Panel p{cuts[k], cuts[k + 1], 0.0, {}};
    gk15_vec<N>(g, p.a, p.b, p.val, p.err);
    total_err += p.err;
    heap.push(p);
  }
  int panels = static_cast<int>(heap.size());
  while (!heap.empty() && total_err > tol && panels < max_panels) {
    const Panel p = heap.top();
    if (p.b - p.a < 1e-14 * std::max(1.0, std::abs(p.a))) break;
    heap.pop();
    total_err -= p.err;
    const double m = 0.5 * (p.a + p.b);
    Panel l{p.a, m, 0.0, {}}, r{m, p.b, 0.0, {}};
    gk15_vec<N>(g, l.a, l.b, l.val, l.err);
    gk15_vec<N>(g, r.a, r.b, r.val, r.err);
    total_err += l.err + r.err;
    heap.push(l);
    heap.push(r);
    ++panels;
  }
  Vec<N> acc{};
  std::vector<Panel> rest;
  while (!heap.empty()) {
    rest.push_back(heap.top());
    heap.pop();
  }
  // Sum in position order so the result does not depend on heap internals.
  std::sort(rest.begin(), rest.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
  for (const auto& p : rest)
    for (std::size_t k = 0; k < N; ++k) acc[k] += p.val[k];
  return acc;
}

/// phi and its gradient at t.
inline Vec<3> cup_jet(Point t) {
  const double ex = cup::eta(t.x), ey = cup::eta(t.y);
  return {ex * ey, cup::deta(t.x) * ey, ex * cup::deta(t.y)};
}

inline constexpr double kLines[4] = {-0.75, -0.5, 0.5, 0.75};

/// Ray parameter where y + r e leaves the support box, or 0 if it misses it.
inline double ray_exit(Point y, Point e) {
  double lo = 0.0, hi = std::numeric_limits<double>::infinity();
  const double yc[2] = {y.x, y.y}, ec[2] = {e.x, e.y};
  for (int i = 0; i < 2; ++i) {
    if (std::abs(ec[i]) < 1e-300) {
      if (yc[i] <= -0.75 || yc[i] >= 0.75) return 0.0;
      continue;
    }
    double t0 = (-0.75 - yc[i]) / ec[i], t1 = (0.75 - yc[i]) / ec[i];
    if (t0 > t1) std::swap(t0, t1);
    lo = std::max(lo, t0);
    hi = std::min(hi, t1);
  }
  return hi > lo ? hi : 0.0;
}

/// Angular window (length <= pi) outside of which both rays from y miss
/// the support; the full half-turn when y is inside it.
inline std::pair<double, double> theta_window(Point y) {
  if (std::abs(y.x) < 0.75 + 1e-12 && std::abs(y.y) < 0.75 + 1e-12) return {0.0, std::numbers::pi};
  const double base = std::atan2(-y.y, -y.x);
  double lo = 0.0, hi = 0.0;
  for (double cx : {-0.75, 0.75})
    for (double cy : {-0.75, 0.75}) {
      double a = std::atan2(cy - y.y, cx - y.x) - base;
      while (a > std::numbers::pi) a -= 2 * std::numbers::pi;
      while (a < -std::numbers::pi) a += 2 * std::numbers::pi;
      lo = std::min(lo, a);
      hi = std::max(hi, a);
    }
  return {base + lo, base + hi};
}

/// Integrals over r of (g(y + r e) - g(y - r e)) / r for the three jet
/// components, split at the lines where the cup changes regime.
inline Vec<3> ray_integrals(Point y, double theta, double tol, bool need_value, bool need_grad) {
  const Point e{std::cos(theta), std::sin(theta)};
  const Point me{-e.x, -e.y};
  const double rmax = std::max(ray_exit(y, e), ray_exit(y, me));
  if (rmax <= 0.0) return Vec<3>{0, 0, 0};
  double br[20];
  int nb = 0;
  br[nb++] = 0.0;
  const double yc[2] = {y.x, y.y}, ec[2] = {e.x, e.y};
  for (int i = 0; i < 2; ++i) {
    if (std::abs(ec[i]) < 1e-300) continue;
    for (double v : kLines) {
      const double r = (v - yc[i]) / ec[i];
      const double ra = std::abs(r);  // crossing on the + or the - ray
      if (ra > 0.0 && ra < rmax) br[nb++] = ra;
    }
  }
  br[nb++] = rmax;
  std::sort(br, br + nb);
  auto g = [&](double r) -> Vec<3> {
    const Point p{y.x + r * e.x, y.y + r * e.y}, m{y.x - r * e.x, y.y - r * e.y};
    Vec<3> out{0, 0, 0};
    if (need_value && !need_grad) {
      out[0] = (cup::eval(p) - cup::eval(m)) / r;
      return out;
    }
    const Vec<3> jp = cup_jet(p), jm = cup_jet(m);
    for (int k = need_value ? 0 : 1; k < 3; ++k) out[static_cast<std::size_t>(k)] = (jp[static_cast<std::size_t>(k)] - jm[static_cast<std::size_t>(k)]) / r;
    return out;
  };
  return integrate_global<3>(g, br, nb, tol);
}

}  // namespace riesz_detail

/// Riesz data of the reference cup phi at y (no Poisson correction):
/// value[j-1] = c_2 p.v. int (t_j - y_j)/|t - y|^3 phi(t) dt and
/// grad[i-1][j-1] = d/dy_i of it, computed as the transform of d_i phi.
struct CupRiesz {
  std::array<double, 2> value{0, 0};
  std::array<std::array<double, 2>, 2> grad{};
};

/// Near field: paired opposite rays in polar coordinates about y.  The
/// combined integrand (g(y + r e) - g(y - r e)) / r is bounded, so this is the
/// principal value without any excision radius.
inline CupRiesz cup_riesz_polar(Point y, double tol, bool need_value = true, bool need_grad = true) {
  using riesz_detail::Vec;
  const auto [t0, t1] = riesz_detail::theta_window(y);
  // Inner results must be much more accurate than the outer tolerance, or
  // their noise dominates the outer error estimate.
  const double outer_tol = tol / RieszKernel::c2;
  const double inner_tol = 1e-3 * outer_tol / std::numbers::pi;
  auto h = [&](double th) -> Vec<6> {
    const Vec<3> I = riesz_detail::ray_integrals(y, th, inner_tol, need_value, need_grad);
    const double c = std::cos(th), s = std::sin(th);
    return {c * I[0], s * I[0], c * I[1], s * I[1], c * I[2], s * I[2]};
  };
  double cuts[5];
  for (int k = 0; k <= 4; ++k) cuts[k] = t0 + (t1 - t0) * k / 4;
  const Vec<6> acc = riesz_detail::integrate_global<6>(h, cuts, 5, outer_tol);
  CupRiesz out;
  const double c2 = RieszKernel::c2;
  out.value = {c2 * acc[0], c2 * acc[1]};
  out.grad[0] = {c2 * acc[2], c2 * acc[3]};  // d_1 R_1, d_1 R_2
  out.grad[1] = {c2 * acc[4], c2 * acc[5]};  // d_2 R_1, d_2 R_2
  return out;
}

/// Tensor Gauss rule over the support split at |t_i| = 1/2, with phi and its
/// gradient stored per node.
struct CupNodes {
  std::vector<Point> t;
  std::vector<double> w, phi, d1, d2;
};

inline const CupNodes& cup_nodes(int n) {
  static std::mutex mu;
  static std::map<int, CupNodes> cache;
  std::lock_guard<std::mutex> lock(mu);
  if (auto it = cache.find(n); it != cache.end()) return it->second;
  const GaussRule& g = gauss_legendre(n);
  std::vector<double> x, w;
  const double cuts[4] = {-0.75, -0.5, 0.5, 0.75};
  for (int p = 0; p < 3; ++p) {
    const double a = cuts[p], b = cuts[p + 1], h = 0.5 * (b - a), m = 0.5 * (a + b);
    // The plateau piece is polynomial in the kernel's variable only; it gets
    // the same rule for simplicity.
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      x.push_back(m + h * g.nodes[i]);
      w.push_back(h * g.weights[i]);
    }
  }
  CupNodes nodes;
  for (std::size_t a = 0; a < x.size(); ++a)
    for (std::size_t b = 0; b < x.size(); ++b) {
      const Point t{x[a], x[b]};
      const auto jet = riesz_detail::cup_jet(t);
      if (jet[0] == 0.0 && jet[1] == 0.0 && jet[2] == 0.0) continue;
      nodes.t.push_back(t);
      nodes.w.push_back(w[a] * w[b]);
      nodes.phi.push_back(jet[0]);
      nodes.d1.push_back(jet[1]);
      nodes.d2.push_back(jet[2]);
    }
  return cache.emplace(n, std::move(nodes)).first->second;
}

inline CupRiesz cup_riesz_tensor(Point y, int n, bool need_value = true, bool need_grad = true) {
  const CupNodes& nd = cup_nodes(n);
  double v1 = 0, v2 = 0, g11 = 0, g12 = 0, g21 = 0, g22 = 0;
  for (std::size_t k = 0; k < nd.t.size(); ++k) {
    const double dx = nd.t[k].x - y.x, dy = nd.t[k].y - y.y;
    const double r2 = dx * dx + dy * dy;
    const double inv = nd.w[k] / (r2 * std::sqrt(r2));
    const double kx = dx * inv, ky = dy * inv;
    if (need_value) v1 += kx * nd.phi[k], v2 += ky * nd.phi[k];
    if (need_grad) {
      g11 += kx * nd.d1[k];
      g12 += ky * nd.d1[k];
      g21 += kx * nd.d2[k];
      g22 += ky * nd.d2[k];
    }
  }
  const double c2 = RieszKernel::c2;
  CupRiesz out;
  out.value = {c2 * v1, c2 * v2};
  out.grad[0] = {c2 * g11, c2 * g12};
  out.grad[1] = {c2 * g21, c2 * g22};
  return out;
}

/// Fixed-order polar rule: 8 angular panels of 24 Gauss points, 32 points on
/// every radial piece.
inline CupRiesz cup_riesz_polar_fixed(Point y, bool need_value = true, bool need_grad = true) {
  using namespace riesz_detail;
  constexpr int kPanels = 8, kTheta = 24, kRadial = 32;
  const auto [t0, t1] = theta_window(y);
  const GaussRule& gt = gauss_legendre(kTheta);
  const GaussRule& gr = gauss_legendre(kRadial);
  Vec<6> acc{};
  for (int p = 0; p < kPanels; ++p) {
    const double a = t0 + (t1 - t0) * p / kPanels, b = t0 + (t1 - t0) * (p + 1) / kPanels;
    const double ht = 0.5 * (b - a), mt = 0.5 * (a + b);
    for (int k = 0; k < kTheta; ++k) {
      const double th = mt + ht * gt.nodes[static_cast<std::size_t>(k)];
      const Point e{std::cos(th), std::sin(th)};
      const double rmax = std::max(ray_exit(y, e), ray_exit(y, {-e.x, -e.y}));
      if (rmax <= 0.0) continue;
      double br[20];
      int nb = 0;
      br[nb++] = 0.0;
      const double yc[2] = {y.x, y.y}, ec[2] = {e.x, e.y};
      for (int i = 0; i < 2; ++i) {
        if (std::abs(ec[i]) < 1e-300) continue;
        for (double v : kLines) {
          const double ra = std::abs((v - yc[i]) / ec[i]);
          if (ra > 0.0 && ra < rmax) br[nb++] = ra;
        }
      }
      br[nb++] = rmax;
      std::sort(br, br + nb);
      Vec<3> I{};
      for (int q = 0; q + 1 < nb; ++q) {
        const double hr = 0.5 * (br[q + 1] - br[q]), mr = 0.5 * (br[q] + br[q + 1]);
        if (!(hr > 0)) continue;
        for (int z = 0; z < kRadial; ++z) {
          const double r = mr + hr * gr.nodes[static_cast<std::size_t>(z)];
          const double w = hr * gr.weights[static_cast<std::size_t>(z)] / r;
          const Vec<3> jp = cup_jet({y.x + r * e.x, y.y + r * e.y});
          const Vec<3> jm = cup_jet({y.x - r * e.x, y.y - r * e.y});
          for (std::size_t c = 0; c < 3; ++c) I[c] += w * (jp[c] - jm[c]);
        }
      }
      const double w = ht * gt.weights[static_cast<std::size_t>(k)];
      acc[0] += w * e.x * I[0];
      acc[1] += w * e.y * I[0];
      acc[2] += w * e.x * I[1];
      acc[3] += w * e.y * I[1];
      acc[4] += w * e.x * I[2];
      acc[5] += w * e.y * I[2];
    }
  }
  (void)need_value;
  (void)need_grad;
  const double c2 = RieszKernel::c2;
  CupRiesz out;
  out.value = {c2 * acc[0], c2 * acc[1]};
  out.grad[0] = {c2 * acc[2], c2 * acc[3]};
  out.grad[1] = {c2 * acc[4], c2 * acc[5]};
  return out;
}

/// Reference-cup transform, dispatching on |y|_inf.  Node counts of the tensor
/// rules were chosen from measured errors against the adaptive polar rule.
inline CupRiesz cup_riesz(Point y, const RieszOptions& opt = {}, bool need_value = true,
                          bool need_grad = true) {
  const double d = norm_inf(y);
  if (opt.mode == RieszOptions::Mode::accurate) {
    if (d < 3.0) return cup_riesz_polar(y, opt.tol, need_value, need_grad);
    return cup_riesz_tensor(y, d < 12.0 ? 32 : d < 48.0 ? 24 : 12, need_value, need_grad);
  }
  if (d < 1.5) return cup_riesz_polar_fixed(y, need_value, need_grad);
  return cup_riesz_tensor(y, d < 6.0 ? 20 : d < 24.0 ? 12 : d < 96.0 ? 8 : 6, need_value, need_grad);
}

// ---------------------------------------------------------------------------
// Bump sums

/// c_2 int t_j (1 + |t|^2)^{-3/2} F(t) dt, term by term in cup coordinates.
inline std::array<double, 2> correction(const BumpSum& F) {
  std::array<double, 2> out{0, 0};
  std::vector<double> c1(F.size()), c2v(F.size());
  for (std::size_t k = 0; k < F.size(); ++k) {
    const BumpTerm& b = F.terms()[k];
    // Resolve the weight's unit length scale inside the cup.
    const int n = std::clamp(static_cast<int>(std::ceil(12.0 * b.s)), 12, 200);
    const CupNodes& nd = cup_nodes(n);
    double s1 = 0, s2 = 0;
    for (std::size_t i = 0; i < nd.t.size(); ++i) {
      const Point t{b.cx + b.s * nd.t[i].x, b.cy + b.s * nd.t[i].y};
      const double q = 1.0 + t.x * t.x + t.y * t.y;
      const double w = nd.w[i] * nd.phi[i] / (q * std::sqrt(q));
      s1 += t.x * w;
      s2 += t.y * w;
    }
    const double amp = F.height() * b.s * b.s * b.s;  // height * l * l^2 (Jacobian)
    c1[k] = amp * s1;
    c2v[k] = amp * s2;
  }
  out[0] = RieszKernel::c2 * pairwise_sum(c1);
  out[1] = RieszKernel::c2 * pairwise_sum(c2v);
  return out;
}

/// R_1 F, R_2 F and the Jacobian d_i R_j F at x.
struct RieszJet {
  std::array<double, 2> value{0, 0};                   // includes the correction
  std::array<std::array<double, 2>, 2> grad{};         // grad[i-1][j-1] = d_i R_j F
};

/// Evaluates Riesz transforms of a fixed bump sum; the correction constants
/// are computed once.
class RieszEvaluator {
 public:
  explicit RieszEvaluator(const BumpSum& F, RieszOptions opt = {})
      : F_(&F), opt_(opt), corr_(correction(F)) {}

  const std::array<double, 2>& correction_constants() const { return corr_; }
  const RieszOptions& options() const { return opt_; }

  RieszJet jet(Point x, bool need_value = true, bool need_grad = true) const {
    const std::size_t n = F_->size();
    std::array<std::vector<double>, 6> parts;
    for (auto& p : parts) p.assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      const BumpTerm& b = F_->terms()[k];
      const Point y{(x.x - b.cx) / b.s, (x.y - b.cy) / b.s};
      const CupRiesz c = cup_riesz(y, opt_, need_value, need_grad);
      parts[0][k] = b.s * c.value[0];
      parts[1][k] = b.s * c.value[1];
      parts[2][k] = c.grad[0][0];
      parts[3][k] = c.grad[0][1];
      parts[4][k] = c.grad[1][0];
      parts[5][k] = c.grad[1][1];
    }
    const double h = F_->height();
    RieszJet out;
    if (need_value) {
      out.value[0] = h * pairwise_sum(parts[0]) - corr_[0];
      out.value[1] = h * pairwise_sum(parts[1]) - corr_[1];
    }
    if (need_grad) {
      out.grad[0] = {h * pairwise_sum(parts[2]), h * pairwise_sum(parts[3])};
      out.grad[1] = {h * pairwise_sum(parts[4]), h * pairwise_sum(parts[5])};
    }
    return out;
  }

  double value(int j, Point x) const { return jet(x, true, false).value[static_cast<std::size_t>(j - 1)]; }
  double deriv(int j, int i, Point x) const {
    return jet(x, false, true).grad[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)];
  }

 private:
  const BumpSum* F_;
  RieszOptions opt_;
  std::array<double, 2> corr_;
};

inline double riesz_pv(const BumpSum& F, int j, Point x, const RieszOptions& opt = {}) {
  (void)RieszKernel(j);  // validates j
  return RieszEvaluator(F, opt).value(j, x);
}

inline double riesz_deriv(const BumpSum& F, int j, int i, Point x, const RieszOptions& opt = {}) {
  (void)RieszKernel(j);
  if (i != 1 && i != 2) throw std::invalid_argument("riesz_deriv: i must be 1 or 2");
  return RieszEvaluator(F, opt).deriv(j, i, x);
}

// ---------------------------------------------------------------------------
// Spectral oracle

/// Samples on the periodic node grid x_{ab} = origin + h (b, a), a, b in [0, n).
struct SpectralGrid {
  Point origin;
  double h = 0.0;
  int n = 0;
  std::vector<double> v;  // row-major, index a * n + b (a: y, b: x)

  Point node(int a, int b) const { return {origin.x + h * b, origin.y + h * a}; }
  double at(int a, int b) const { return v[static_cast<std::size_t>(a) * static_cast<std::size_t>(n) + static_cast<std::size_t>(b)]; }
  double period() const { return h * n; }
};

inline SpectralGrid sample_grid(const BumpSum& F, Point center, double period, int n) {
  SpectralGrid g;
  g.n = n;
  g.h = period / n;
  g.origin = {center.x - period / 2, center.y - period / 2};
  g.v.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t a) {
    for (int b = 0; b < n; ++b) g.v[a * static_cast<std::size_t>(n) + static_cast<std::size_t>(b)] = F(g.node(static_cast<int>(a), b));
  });
  return g;
}

struct SpectralResult {
  SpectralGrid field;
  double edge_max = 0.0;    // max |sample| on the outer frame of the box
  bool aliasing_warning = false;
};

/// Applies the multiplier sign * i xi_j / |xi| (zero frequency -> 0) by FFT and
/// subtracts `correction`.  The frame check flags input that is not small on
/// the boundary of the period box.
inline SpectralResult riesz_spectral(const SpectralGrid& in, int j, int sign, double correction = 0.0) {
  if (j != 1 && j != 2) throw std::invalid_argument("riesz_spectral: j must be 1 or 2");
  const int n = in.n;
  const std::size_t nc = static_cast<std::size_t>(n) * static_cast<std::size_t>(n / 2 + 1);
  std::vector<double> real(in.v);
  fftw_complex* spec = fftw_alloc_complex(nc);
  fftw_plan fwd, bwd;
  {
    static std::mutex plan_mu;  // planner calls are not re-entrant
    std::lock_guard<std::mutex> lock(plan_mu);
    fwd = fftw_plan_dft_r2c_2d(n, n, real.data(), spec, FFTW_ESTIMATE);
    bwd = fftw_plan_dft_c2r_2d(n, n, spec, real.data(), FFTW_ESTIMATE);
  }
  fftw_execute(fwd);
  for (int a = 0; a < n; ++a) {
    const int ka = a <= n / 2 ? a : a - n;  // y frequency index
    for (int b = 0; b <= n / 2; ++b) {
      const int kb = b;  // x frequency index
      const std::size_t idx = static_cast<std::size_t>(a) * static_cast<std::size_t>(n / 2 + 1) + static_cast<std::size_t>(b);
      const double kx = kb, ky = ka;
      const double kn = std::hypot(kx, ky);
      double m = 0.0;
      // Nyquist modes have no consistent sign; drop them with the mean.
      const bool nyq = (b == n / 2) || (a == n / 2);
      if (kn > 0 && !nyq) m = sign * (j == 1 ? kx : ky) / kn;
      // multiply by i m
      const double re = spec[idx][0], im = spec[idx][1];
      spec[idx][0] = -m * im;
      spec[idx][1] = m * re;
    }
  }
  fftw_execute(bwd);
  {
    static std::mutex plan_mu2;
    std::lock_guard<std::mutex> lock(plan_mu2);
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
  }
  fftw_free(spec);
  SpectralResult r;
  r.field = in;
  const double scale = 1.0 / (static_cast<double>(n) * n);
  for (std::size_t k = 0; k < real.size(); ++k) r.field.v[k] = real[k] * scale - correction;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (a == 0 || b == 0 || a == n - 1 || b == n - 1) r.edge_max = std::max(r.edge_max, std::abs(in.at(a, b)));
  double peak = 0.0;
  for (double x : in.v) peak = std::max(peak, std::abs(x));
  r.aliasing_warning = r.edge_max > 1e-12 * std::max(peak, 1e-300);
  return r;
}

/// Chooses the multiplier sign that reproduces the principal-value transform
/// of a reference cup at a few probes.
struct SignCalibration {
  int sign = 0;
  double error_plus = 0.0, error_minus = 0.0;
};

inline SignCalibration calibrate_spectral_sign(int n = 256) {
  const BumpSum F({BumpTerm({Rational(0), Rational(0)}, Rational(1))}, 1.0);
  const double L = 16.0;
  const SpectralGrid g = sample_grid(F, {0, 0}, L, n);
  SignCalibration cal;
  const RieszEvaluator ev(F);
  for (int sign : {+1, -1}) {
    const SpectralResult s = riesz_spectral(g, 1, sign, ev.correction_constants()[0]);
    double err = 0.0;
    for (int a : {n / 2 - n / 32, n / 2, n / 2 + n / 20})
      for (int b : {n / 2 - n / 16, n / 2 + n / 40, n / 2 + n / 12}) {
        const Point p = g.node(a, b);
        err = std::max(err, std::abs(s.field.at(a, b) - ev.value(1, p)));
      }
    (sign > 0 ? cal.error_plus : cal.error_minus) = err;
  }
  cal.sign = cal.error_plus <= cal.error_minus ? +1 : -1;
  return cal;
}

// ---------------------------------------------------------------------------
// Lipschitz estimates

struct LipEstimate {
  double grad_sup = 0.0;       // max |grad field| over sample points
  double quotient_sup = 0.0;   // max |field(x) - field(y)| / |x - y| over pairs
  Point grad_argmax;
  std::size_t samples = 0;
  std::size_t pairs = 0;
  double allowance = 1e-3;
};

/// Halton point i (bases 2, 3) in the unit square.
inline Point halton(std::size_t i) {
  auto radical = [](std::size_t k, std::size_t base) {
    double f = 1.0, r = 0.0;
    while (k > 0) {
      f /= static_cast<double>(base);
      r += f * static_cast<double>(k % base);
      k /= base;
    }
    return r;
  };
  return {radical(i + 1, 2), radical(i + 1, 3)};
}

/// Gradient sup over `n_samples` Halton points of `region` and difference
/// quotients over pairs at distance `pair_step` (n_pairs of them).
template <class Value, class Grad>
LipEstimate lip_estimate(Value&& value, Grad&& grad, const Rect& region, std::size_t n_samples,
                         std::size_t n_pairs = 0, double pair_step = 0.0) {
  LipEstimate est;
  est.samples = n_samples;
  est.pairs = n_pairs;
  std::vector<double> g(n_samples);
  parallel_for(n_samples, [&](std::size_t i) {
    const Point u = halton(i);
    const Point p{region.x0 + u.x * region.width(), region.y0 + u.y * region.height()};
    g[i] = norm(grad(p));
  });
  for (std::size_t i = 0; i < n_samples; ++i)
    if (g[i] > est.grad_sup) {
      est.grad_sup = g[i];
      const Point u = halton(i);
      est.grad_argmax = {region.x0 + u.x * region.width(), region.y0 + u.y * region.height()};
    }
  if (n_pairs > 0) {
    const double step = pair_step > 0 ? pair_step : 1e-3 * region.width();
    std::vector<double> q(n_pairs);
    parallel_for(n_pairs, [&](std::size_t i) {
      const Point u = halton(n_samples + i);
      const Point p{region.x0 + u.x * region.width(), region.y0 + u.y * region.height()};
      const double ang = 2.0 * std::numbers::pi * recipes::unit_uniform(0x51ED, i);
      const Point r{p.x + step * std::cos(ang), p.y + step * std::sin(ang)};
      q[i] = std::abs(value(r) - value(p)) / step;
    });
    est.quotient_sup = *std::max_element(q.begin(), q.end());
  }
  return est;
}

/// Estimates for both transforms of F over `region`: sup of the Jacobian
/// row norms |grad R_j F|.
struct RieszLip {
  LipEstimate r1, r2;
};

inline RieszOptions fast_riesz() {
  RieszOptions o;
  o.mode = RieszOptions::Mode::fast;
  return o;
}

/// Radius (in cup units) where |grad R_j phi| peaks, on the x_j axis.
inline constexpr double kSteepestOffset = 0.56;

/// Four probes per term at the steepest points of its own transform, for
/// every stride-th term so that at most `max_terms` terms are used.
inline std::vector<Point> anchor_probes(const BumpSum& F, std::size_t max_terms) {
  std::vector<Point> pts;
  if (F.empty() || max_terms == 0) return pts;
  const std::size_t stride = std::max<std::size_t>(1, (F.size() + max_terms - 1) / max_terms);
  for (std::size_t k = 0; k < F.size(); k += stride) {
    const BumpTerm& b = F.terms()[k];
    const double r = kSteepestOffset * b.s;
    pts.insert(pts.end(), {{b.cx + r, b.cy}, {b.cx - r, b.cy}, {b.cx, b.cy + r}, {b.cx, b.cy - r}});
  }
  return pts;
}

/// Gradient sups of R_1 F and R_2 F over n_samples Halton points of `region`
/// plus the `extra` probes; difference quotients over n_pairs Halton pairs.
inline RieszLip riesz_lip_estimate(const BumpSum& F, const Rect& region, std::size_t n_samples,
                                   std::size_t n_pairs = 0, const RieszOptions& opt = fast_riesz(),
                                   std::span<const Point> extra = {}) {
  const RieszEvaluator ev(F, opt);
  std::vector<Point> pts;
  pts.reserve(n_samples + extra.size());
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Point u = halton(i);
    pts.push_back({region.x0 + u.x * region.width(), region.y0 + u.y * region.height()});
  }
  pts.insert(pts.end(), extra.begin(), extra.end());
  RieszLip out;
  std::vector<RieszJet> jets(pts.size());
  parallel_for(pts.size(), [&](std::size_t i) { jets[i] = ev.jet(pts[i], false, true); });
  for (int j = 0; j < 2; ++j) {
    LipEstimate& e = j == 0 ? out.r1 : out.r2;
    e.samples = pts.size();
    const auto ju = static_cast<std::size_t>(j);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double gn = std::hypot(jets[i].grad[0][ju], jets[i].grad[1][ju]);
      if (gn > e.grad_sup) e.grad_sup = gn, e.grad_argmax = pts[i];
    }
    if (n_pairs > 0) {
      const double step = 1e-3 * region.width();
      std::vector<double> q(n_pairs);
      parallel_for(n_pairs, [&](std::size_t i) {
        const Point u = halton(n_samples + i);
        const Point p{region.x0 + u.x * region.width(), region.y0 + u.y * region.height()};
        const double ang = 2.0 * std::numbers::pi * recipes::unit_uniform(0x51ED, i);
        const Point r{p.x + step * std::cos(ang), p.y + step * std::sin(ang)};
        q[i] = std::abs(ev.value(j + 1, r) - ev.value(j + 1, p)) / step;
      });
      e.pairs = n_pairs;
      e.quotient_sup = *std::max_element(q.begin(), q.end());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Three-term decomposition of d_1 R_1 F at a probe

struct SplitSums {
  double s1 = 0.0;  // b in N(a)
  double s2 = 0.0;  // b not in N(a), l(b) <= 2 l(a)
  double s3 = 0.0;  // b not in N(a), l(b) > 2 l(a)
};

/// Normalized frame (height 1, Q* coordinates); `a` indexes fam.tau and the
/// neighbourhood is the one used by the separation report.
inline SplitSums split_sums(const RegularizedFamily& fam, std::size_t a, Point x, int i = 1, int j = 1,
                            const RieszOptions& opt = {}) {
  const DyadicSquare& ca = fam.tau.at(a);
  const auto nb = neighborhood(fam, ca);
  std::unordered_set<DyadicSquare, DyadicSquareHash> in_n(nb.begin(), nb.end());
  SplitSums s;
  std::vector<double> p1, p2, p3;
  for (const auto& cb : fam.tau) {
    const BumpTerm t = LocalBuild::normalized_term(cb);
    const CupRiesz c = cup_riesz({(x.x - t.cx) / t.s, (x.y - t.cy) / t.s}, opt, false, true);
    const double v = c.grad[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)];
    if (in_n.count(cb) != 0)
      p1.push_back(v);
    else if (cb.depth >= ca.depth - 1)
      p2.push_back(v);
    else
      p3.push_back(v);
  }
  s.s1 = pairwise_sum(p1);
  s.s2 = pairwise_sum(p2);
  s.s3 = pairwise_sum(p3);
  return s;
}

}  // namespace nazarov
