#pragma once

#include <algorithm>
#include <cmath>

#include "nazarov/point.hpp"

namespace nazarov {

/// Smooth plateau cup phi(x) = eta(x1) eta(x2): 1 on [-1/2, 1/2]^2, 0 outside
/// [-3/4, 3/4]^2, with eta(t) = psi(4 (3/4 - |t|)) and the standard transition
/// psi(s) = g(s) / (g(s) + g(1 - s)), g(s) = exp(-1/s) for s > 0.
namespace cup {

inline constexpr const char* kProfile = "tensor-plateau-exp";

/// psi(s) written as 1 / (1 + exp(1/s - 1/(1-s))) to avoid 0/0 near the ends.
inline double psi(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  const double e = 1.0 / s - 1.0 / (1.0 - s);
  if (e > 700.0) return 0.0;
  return 1.0 / (1.0 + std::exp(e));
}

/// psi'(s) = psi (1 - psi) (1/s^2 + 1/(1-s)^2).
inline double dpsi(double s) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  const double p = psi(s);
  return p * (1.0 - p) * (1.0 / (s * s) + 1.0 / ((1.0 - s) * (1.0 - s)));
}

inline double eta(double t) { return psi(4.0 * (0.75 - std::abs(t))); }

inline double deta(double t) {
  const double a = std::abs(t);
  if (a <= 0.5 || a >= 0.75) return 0.0;
  return (t > 0 ? -4.0 : 4.0) * dpsi(4.0 * (0.75 - a));
}

inline double eval(Point x) { return eta(x.x) * eta(x.y); }

/// Minimum of eta over [a, b]: eta decreases in |t|.
inline double eta_min(double a, double b) { return eta(std::max(std::abs(a), std::abs(b))); }

/// Minimum of phi over a box (phi = eta x eta with eta >= 0).
inline double min_on(const Rect& r) { return eta_min(r.x0, r.x1) * eta_min(r.y0, r.y1); }

inline Point grad(Point x) {
  return {deta(x.x) * eta(x.y), eta(x.x) * deta(x.y)};
}

/// Integral of eta over the line: psi(s) + psi(1 - s) = 1 makes the ramps
/// contribute exactly half their width, so it is 1 + 2 * (1/8) = 5/4.
inline constexpr double kEtaIntegral = 1.25;
/// Integral of phi over the plane.
inline constexpr double kIntegral = kEtaIntegral * kEtaIntegral;
/// sup |eta'| = 4 psi'(1/2) = 8; bounds each partial derivative of phi.
inline constexpr double kSupPartial = 8.0;

}  // namespace cup

}  // namespace nazarov
