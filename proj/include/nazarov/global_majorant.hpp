#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "nazarov/local_majorant.hpp"
#include "nazarov/riesz_engine.hpp"

namespace nazarov {

// ---------------------------------------------------------------------------
// Plane cover

/// C_{i,j,k} = [i 2^k, (i+1) 2^k) x [j 2^k, (j+1) 2^k), plus C_{0,0,0} = [-1,1)^2.
struct CoverCell {
  int i = 0, j = 0, k = 0;
  Square square;

  bool contains(Point x) const {
    const Rect r = Rect::of(square);
    return x.x >= r.x0 && x.x < r.x1 && x.y >= r.y0 && x.y < r.y1;
  }
  friend bool operator==(const CoverCell& a, const CoverCell& b) {
    return a.i == b.i && a.j == b.j && a.k == b.k;
  }
};

inline Square cover_square(int i, int j, int k) {
  if (k < 0 || i < -2 || i > 1 || j < -2 || j > 1)
    throw std::invalid_argument("cover_square: index out of range");
  if (i == 0 && j == 0) {
    if (k != 0) throw std::invalid_argument("cover_square: (0,0) only exists at k = 0");
    return {{Rational(0), Rational(0)}, Rational(2)};
  }
  const Rational l = Rational::pow2(k);
  const Rational half(1, 2);
  return {{(Rational(i) + half) * l, (Rational(j) + half) * l}, l};
}

/// verbatim: (i,j) in {-1,0,1}^2 \ {(0,0)}.  Cells with i = -1 or j = -1 and
/// the other index in {-1,0} are nested in k, so the multiplicity at a point x
/// grows like k_max - log2 |x|.
/// annular: (i,j) in {-2,-1,0,1}^2 with (i,j) outside {-1,0}^2, the twelve
/// squares of [-2^(k+1), 2^(k+1))^2 \ [-2^k, 2^k)^2; a partition of the plane.
enum class CoverKind { verbatim, annular };

inline const char* to_string(CoverKind k) { return k == CoverKind::verbatim ? "verbatim" : "annular"; }

/// Every point with |x|_inf below this lies in the cover up to level k_max.
inline double plane_cover_reach(int k_max, CoverKind kind) {
  return std::ldexp(1.0, kind == CoverKind::verbatim ? k_max : k_max + 1);
}

struct PlaneCover {
  CoverKind kind = CoverKind::verbatim;
  int k_max = 0;
  std::vector<CoverCell> cells;  // C_{0,0,0} first, then by k, j, i

  double reach() const { return plane_cover_reach(k_max, kind); }

  /// The first cell containing x (C_{0,0,0} for |x|_inf < 1).
  std::optional<CoverCell> owner(Point x) const {
    for (const auto& c : cells)
      if (c.contains(x)) return c;
    return std::nullopt;
  }
  std::size_t multiplicity(Point x) const {
    std::size_t n = 0;
    for (const auto& c : cells) n += c.contains(x) ? 1 : 0;
    return n;
  }
};

inline PlaneCover plane_cover(int k_max, CoverKind kind = CoverKind::verbatim) {
  if (k_max < 0) throw std::invalid_argument("plane_cover: k_max must be >= 0");
  PlaneCover pc;
  pc.kind = kind;
  pc.k_max = k_max;
  pc.cells.push_back({0, 0, 0, cover_square(0, 0, 0)});
  const int lo = kind == CoverKind::verbatim ? -1 : -2;
  for (int k = 0; k <= k_max; ++k)
    for (int j = lo; j <= 1; ++j)
      for (int i = lo; i <= 1; ++i) {
        const bool inner = kind == CoverKind::verbatim ? (i == 0 && j == 0)
                                                       : (i >= -1 && i <= 0 && j >= -1 && j <= 0);
        if (!inner) pc.cells.push_back({i, j, k, cover_square(i, j, k)});
      }
  return pc;
}

// ---------------------------------------------------------------------------
// Poisson measure

/// dP(t) = dt / (1 + |t|^2)^{3/2}.
inline double poisson_weight(Point t) {
  const double q = 1.0 + t.x * t.x + t.y * t.y;
  return 1.0 / (q * std::sqrt(q));
}

/// P({|t| >= r}) = 2 pi / sqrt(1 + r^2).
inline double poisson_tail_mass(double r) { return 2.0 * std::numbers::pi / std::sqrt(1.0 + r * r); }

namespace global_detail {

/// int eta(t) t^2 dt, by Gauss on the three smooth pieces.
inline double eta_second_moment() {
  static const double value = [] {
    const double cuts[4] = {-0.75, -0.5, 0.5, 0.75};
    double s = 0.0;
    for (int p = 0; p < 3; ++p)
      s += gauss_integrate([](double t) { return cup::eta(t) * t * t; }, cuts[p], cuts[p + 1], 40);
    return s;
  }();
  return value;
}

/// Laplacian of the Poisson weight, (9 r^2 - 6) (1 + r^2)^{-7/2}.
inline double poisson_weight_laplacian(Point t) {
  const double r2 = t.x * t.x + t.y * t.y;
  return (9.0 * r2 - 6.0) * std::pow(1.0 + r2, -3.5);
}

}  // namespace global_detail

/// int F dP.  Terms small against their distance to the origin use the
/// second-order moment expansion (error O((s / (1 + |c|))^4) relative); the
/// rest use a tensor Gauss rule on the cup's pieces.
inline double poisson_integral(const BumpSum& F) {
  const double m2 = global_detail::eta_second_moment() * cup::kEtaIntegral;
  std::vector<double> parts(F.size());
  parallel_for(F.size(), [&](std::size_t k) {
    const BumpTerm& b = F.terms()[k];
    const Point c = b.c();
    double v;
    if (b.s <= (1.0 + norm(c)) / 16.0) {
      v = cup::kIntegral * poisson_weight(c) +
          0.5 * b.s * b.s * m2 * global_detail::poisson_weight_laplacian(c);
    } else {
      const CupNodes& nd = cup_nodes(16);
      double s = 0.0;
      for (std::size_t i = 0; i < nd.t.size(); ++i)
        s += nd.w[i] * nd.phi[i] * poisson_weight({c.x + b.s * nd.t[i].x, c.y + b.s * nd.t[i].y});
      v = s;
    }
    parts[k] = b.s * b.s * b.s * v;
  });
  return F.height() * pairwise_sum(parts);
}

// ---------------------------------------------------------------------------
// Preprocessing

class UnsupportedInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class CoverTruncationError : public std::runtime_error {
 public:
  CoverTruncationError(int required, int given)
      : std::runtime_error("support of the flattened function needs k_max >= " +
                           std::to_string(required) + ", got " + std::to_string(given)),
        required_k_max(required) {}
  int required_k_max;
};

struct PreprocessOptions {
  int grid = 1024;               // radial profile grid per axis
  std::size_t samples = 10'000;  // growth-check samples
};

struct PreprocessRecord {
  double epsilon = 0.0;
  double mu = 0.0;              // Lipschitz constant
  double sigma = 0.0;           // max(Omega(0)/mu, 1)
  double R = 0.0;               // flattening radius
  double tail_at_R = 0.0;       // int_{|t| >= R} Omega dP (quadrature)
  double tail_error = 0.0;      // grid n vs n/2 difference at R
  double M = 0.0;               // max of Omega over B(0, R), upper bracket end
  double integral_P = 0.0;      // int Omega dP
  double integral_P_error = 0.0;
  double C_ky = 0.0;            // sup Omega(x) / (|x| tail(|x|)^{1/3}), sampled
  double delta = 0.0;           // per-cell height used by the local builds
  double support_radius = 0.0;  // of Omega
  // Sample checks on the flattened function.
  std::size_t samples = 0;
  std::size_t flat_violations = 0;     // Omega~ != 0 on |x| <= R
  std::size_t growth_violations = 0;   // Omega~ > 2 mu |x|
  std::size_t ky_violations = 0;       // Omega~ > C_ky eps |x|
  double max_growth_ratio = 0.0;       // Omega~ / (2 mu |x|)
  double max_ky_ratio = 0.0;           // Omega~ / (C_ky eps |x|)
  bool pass() const { return flat_violations == 0 && growth_violations == 0 && ky_violations == 0; }
};

struct Preprocessed {
  FunctionOracle omega;
  FunctionOracle omega_tilde;
  PreprocessRecord record;
};

/// Sup of f over the closed disc B(0, r) by branch and bound on boxes,
/// discarding boxes outside the disc.  Returns the upper bracket end.
inline double disc_sup(const FunctionOracle& f, double r, double abs_tol = 1e-9) {
  struct Node {
    Rect box;
    double ub;
    bool operator<(const Node& o) const { return ub < o.ub; }
  };
  auto dist_to_origin = [](const Rect& b) { return recipes::distance({0, 0}, b); };
  double lower = std::max(0.0, f({0, 0}));
  std::priority_queue<Node> open;
  open.push({Rect{-r, -r, r, r}, f.sup_bound(Rect{-r, -r, r, r})});
  std::size_t boxes = 1;
  while (!open.empty()) {
    const Node n = open.top();
    if (n.ub - lower <= abs_tol || boxes > 400'000) return std::max(lower, n.ub);
    open.pop();
    const Point c = n.box.center();
    const Rect kids[4] = {{n.box.x0, n.box.y0, c.x, c.y}, {c.x, n.box.y0, n.box.x1, c.y},
                          {n.box.x0, c.y, c.x, n.box.y1}, {c.x, c.y, n.box.x1, n.box.y1}};
    for (const Rect& k : kids) {
      ++boxes;
      if (dist_to_origin(k) > r) continue;
      const Point kc = k.center();
      if (norm(kc) <= r) lower = std::max(lower, f(kc));
      const double ub = f.sup_bound(k);
      if (ub > lower) open.push({k, ub});
    }
  }
  return lower;
}

/// Flattening of Omega near the origin: picks R >= sigma with
/// int_{|t| >= R} Omega dP <= eps^3, sets M = max_{B(0,R)} Omega and returns
/// max(0, Omega - M) with the growth checks of the record.
inline Preprocessed preprocess(const FunctionOracle& omega, double epsilon, const PreprocessOptions& opt = {}) {
  if (!(epsilon > 0)) throw std::invalid_argument("preprocess: epsilon must be positive");
  const double rho = omega.support_radius();
  if (!std::isfinite(rho)) throw UnsupportedInput("preprocess: Omega must be compactly supported");
  Preprocessed out{omega, omega, {}};
  PreprocessRecord& rec = out.record;
  rec.epsilon = epsilon;
  rec.mu = omega.kappa();
  rec.support_radius = rho;
  const double omega0 = omega({0, 0});
  rec.sigma = rec.mu > 0 ? std::max(omega0 / rec.mu, 1.0) : 1.0;

  // Radial profile: mass of Omega dP in rings of width h (h from the fine
  // grid), from midpoint grids of n and n/2 cells per axis; the difference of
  // the two tails is the error estimate.
  const int n = std::max(16, opt.grid - opt.grid % 2);
  const double half = std::max(rho, rec.sigma);
  const double h = 2.0 * half / n;
  const int nbins = static_cast<int>(std::ceil(std::sqrt(2.0) * half / h)) + 2;
  struct Profile {
    std::vector<double> tail, peak;
  };
  auto profile = [&](int m) {
    const double hm = 2.0 * half / m;
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(m)), peaks(static_cast<std::size_t>(m));
    parallel_for(static_cast<std::size_t>(m), [&](std::size_t a) {
      rows[a].assign(static_cast<std::size_t>(nbins), 0.0);
      peaks[a].assign(static_cast<std::size_t>(nbins), 0.0);
      for (int b = 0; b < m; ++b) {
        const Point p{-half + (b + 0.5) * hm, -half + (static_cast<double>(a) + 0.5) * hm};
        const double v = omega(p);
        if (v <= 0.0) continue;
        const auto bin = std::min(static_cast<std::size_t>(norm(p) / h), static_cast<std::size_t>(nbins - 1));
        rows[a][bin] += v * poisson_weight(p) * hm * hm;
        peaks[a][bin] = std::max(peaks[a][bin], v);
      }
    });
    Profile pr{std::vector<double>(static_cast<std::size_t>(nbins) + 1, 0.0),
               std::vector<double>(static_cast<std::size_t>(nbins), 0.0)};
    std::vector<double> mass(static_cast<std::size_t>(nbins), 0.0);
    for (std::size_t a = 0; a < rows.size(); ++a)
      for (std::size_t k = 0; k < mass.size(); ++k) {
        mass[k] += rows[a][k];
        pr.peak[k] = std::max(pr.peak[k], peaks[a][k]);
      }
    for (int k = nbins - 1; k >= 0; --k)
      pr.tail[static_cast<std::size_t>(k)] = pr.tail[static_cast<std::size_t>(k) + 1] + mass[static_cast<std::size_t>(k)];
    return pr;
  };
  const Profile fine = profile(n), coarse = profile(n / 2);
  const std::vector<double>& tail = fine.tail;
  const std::vector<double>& peak = fine.peak;
  auto tail_err = [&](int k) {
    return std::abs(fine.tail[static_cast<std::size_t>(k)] - coarse.tail[static_cast<std::size_t>(k)]);
  };

  rec.integral_P = tail[0];
  rec.integral_P_error = tail_err(0);
  const double eps3 = epsilon * epsilon * epsilon;
  int kR = static_cast<int>(std::ceil(rec.sigma / h));
  while (kR < nbins && tail[static_cast<std::size_t>(kR)] + tail_err(kR) > eps3) ++kR;
  rec.R = std::max(rec.sigma, kR * h);
  rec.tail_at_R = kR < nbins ? tail[static_cast<std::size_t>(kR)] : 0.0;
  rec.tail_error = kR < nbins ? tail_err(kR) : 0.0;
  rec.M = disc_sup(omega, rec.R);

  // Growth constant of Omega against its P-tail, over ring peaks.
  for (int k = 1; k < nbins; ++k) {
    const double pk = peak[static_cast<std::size_t>(k)];
    if (pk <= 0.0) continue;
    const double r = k * h;
    if (r < rec.sigma) continue;
    const double t = tail[static_cast<std::size_t>(k)];
    if (t <= 0.0) continue;
    rec.C_ky = std::max(rec.C_ky, pk / (r * std::cbrt(t)));
  }
  // Cells have max |x| <= 2 sqrt2 l(Q), so Omega~ <= C_ky eps |x| gives
  // ||f||_{L^inf(Q)} <= delta l(Q).
  rec.delta = epsilon * std::max(0.5, 2.0 * std::numbers::sqrt2 * rec.C_ky);

  out.omega_tilde = rec.M > 0 ? make_shifted_max(omega, rec.M) : omega;

  // Sample checks on Halton points of the support box.
  rec.samples = opt.samples;
  std::vector<int> flags(opt.samples, 0);
  std::vector<double> gr(opt.samples, 0.0), kr(opt.samples, 0.0);
  parallel_for(opt.samples, [&](std::size_t i) {
    const Point u = halton(i);
    const Point p{-half + 2 * half * u.x, -half + 2 * half * u.y};
    const double v = out.omega_tilde(p);
    const double r = norm(p);
    int fl = 0;
    if (r <= rec.R && v != 0.0) fl |= 1;
    if (v > 0.0) {
      gr[i] = rec.mu > 0 ? v / (2 * rec.mu * r) : std::numeric_limits<double>::infinity();
      if (gr[i] > 1.0) fl |= 2;
      kr[i] = rec.C_ky > 0 ? v / (rec.C_ky * epsilon * r) : std::numeric_limits<double>::infinity();
      if (kr[i] > 1.0) fl |= 4;
    }
    flags[i] = fl;
  });
  for (std::size_t i = 0; i < opt.samples; ++i) {
    rec.flat_violations += (flags[i] & 1) ? 1 : 0;
    rec.growth_violations += (flags[i] & 2) ? 1 : 0;
    rec.ky_violations += (flags[i] & 4) ? 1 : 0;
    rec.max_growth_ratio = std::max(rec.max_growth_ratio, gr[i]);
    rec.max_ky_ratio = std::max(rec.max_ky_ratio, kr[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Global build

struct GlobalOptions {
  int k_max = 8;
  CoverKind cover = CoverKind::annular;
  LocalOptions local{};
  PreprocessOptions pre{};
};

struct CellMajorant {
  CoverCell cell;
  LocalBuild build;
};

struct GlobalMajorant {
  Preprocessed pre;
  double epsilon = 0.0;
  double delta = 0.0;
  PlaneCover cover;
  std::vector<CellMajorant> cells;   // cover cells meeting supp Omega~
  std::vector<CoverCell> skipped;    // cells where Omega~ vanishes
  BumpSum all;                       // union of the cell sums (common height)

  double M() const { return pre.record.M; }
  /// Omega_1(x) = M + sum of the cell majorants.
  double eval(Point x) const { return M() + all(x); }
  double operator()(Point x) const { return eval(x); }
  std::size_t term_count() const { return all.size(); }
};

/// Smallest k_max whose cover reaches past |x|_inf = radius.
inline int required_k_max(double radius, CoverKind kind = CoverKind::annular) {
  int k = 0;
  while (plane_cover_reach(k, kind) <= radius) ++k;
  return k;
}

inline GlobalMajorant build_global(const FunctionOracle& omega, double epsilon, const GlobalOptions& opt = {}) {
  GlobalMajorant g;
  g.pre = preprocess(omega, epsilon, opt.pre);
  g.epsilon = epsilon;
  g.delta = g.pre.record.delta;
  g.cover = plane_cover(opt.k_max, opt.cover);
  const FunctionOracle& ft = g.pre.omega_tilde;
  const double rho = g.pre.record.support_radius;
  // supp Omega~ lies in the disc of radius rho.
  const int need = required_k_max(rho, opt.cover);
  if (need > opt.k_max && ft.sup_bound(Rect{-rho, -rho, rho, rho}) > 0)
    throw CoverTruncationError(need, opt.k_max);
  std::vector<std::optional<CellMajorant>> built(g.cover.cells.size());
  std::vector<int> active(g.cover.cells.size(), 0);
  for (std::size_t c = 0; c < g.cover.cells.size(); ++c)
    active[c] = ft.sup_bound(Rect::of(g.cover.cells[c].square)) > 0.0 ? 1 : 0;
  parallel_for(g.cover.cells.size(), [&](std::size_t c) {
    if (!active[c]) return;
    const CoverCell& cell = g.cover.cells[c];
    LocalBuild b = build_local(ft, cell.square, g.delta, opt.local);
    if (b.F.empty()) return;
    built[c] = CellMajorant{cell, std::move(b)};
  });
  std::vector<BumpTerm> terms;
  for (std::size_t c = 0; c < g.cover.cells.size(); ++c) {
    if (built[c]) {
      terms.insert(terms.end(), built[c]->build.F.terms().begin(), built[c]->build.F.terms().end());
      g.cells.push_back(std::move(*built[c]));
    } else {
      g.skipped.push_back(g.cover.cells[c]);
    }
  }
  g.all = BumpSum(std::move(terms), g.delta);
  return g;
}

// ---------------------------------------------------------------------------
// Verification of (A), (B), (C)

struct GlobalVerifyOptions {
  std::size_t samples_A = 100'000;
  std::size_t probes_C = 128;
  std::size_t pairs_C = 32;
  std::size_t anchor_terms = 64;  // terms with anchored probes
  RieszOptions riesz = fast_riesz();
};

struct CheckA {
  std::size_t samples = 0;
  std::size_t violations = 0;
  double min_gap = std::numeric_limits<double>::infinity();  // min (Omega_1 - Omega)
  Point witness;
  bool pass() const { return violations == 0; }
};

struct CheckB {
  double integral_omega1 = 0.0;      // int Omega_1 dP (including 2 pi M)
  double integral_cells = 0.0;       // int sum F dP
  double integral_omega = 0.0;       // int Omega dP
  double ratio = 0.0;                // int Omega_1 dP / (eps^-2 int Omega dP)
  bool pass() const { return std::isfinite(ratio); }
};

struct ProbeSplit {
  Point x;
  CoverCell owner;
  std::size_t near_cells = 0;
  double near_grad[2] = {0, 0};      // |grad R_j omega_2(x)|
  double far_grad[2] = {0, 0};       // |grad R_j omega_1(x)|, direct
  double far_bound = 0.0;            // 2 c2 int omega_1 / |t - x|^3
  double far_min_distance = std::numeric_limits<double>::infinity();
  bool containment = true;           // supp omega_1 avoids |t - x| < l(S(x))/4 (and |x|/16)
};

struct CheckC {
  RieszLip full;                      // estimates for R_j Omega_1
  double near_sup[2] = {0, 0};
  double far_sup[2] = {0, 0};
  double far_bound_sup = 0.0;
  std::size_t containment_failures = 0;
  std::vector<ProbeSplit> probes;
  Rect region;
  double lip(int j) const { return j == 1 ? full.r1.grad_sup : full.r2.grad_sup; }
};

struct GlobalReport {
  CheckA a;
  CheckB b;
  CheckC c;
};

/// Bounding box of the supports of the cup terms (empty box at the origin if none).
inline Rect support_box(const BumpSum& F) {
  if (F.empty()) return {0, 0, 0, 0};
  Rect r{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
         -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& t : F.terms()) {
    r.x0 = std::min(r.x0, t.cx - 0.75 * t.s);
    r.y0 = std::min(r.y0, t.cy - 0.75 * t.s);
    r.x1 = std::max(r.x1, t.cx + 0.75 * t.s);
    r.y1 = std::max(r.y1, t.cy + 0.75 * t.s);
  }
  return r;
}

inline CheckA verify_A(const GlobalMajorant& g, std::size_t samples) {
  CheckA a;
  a.samples = samples;
  const double rho = std::max(g.pre.record.support_radius, 1.0);
  std::vector<double> gap(samples);
  parallel_for(samples, [&](std::size_t i) {
    const Point u = halton(i);
    const Point p{-rho + 2 * rho * u.x, -rho + 2 * rho * u.y};
    gap[i] = g(p) - g.pre.omega(p);
  });
  for (std::size_t i = 0; i < samples; ++i) {
    const Point u = halton(i);
    const double v = g.pre.omega({-rho + 2 * rho * u.x, -rho + 2 * rho * u.y});
    if (gap[i] < -1e-12 * std::max(1.0, v)) ++a.violations;
    if (gap[i] < a.min_gap) a.min_gap = gap[i], a.witness = {-rho + 2 * rho * u.x, -rho + 2 * rho * u.y};
  }
  return a;
}

inline CheckB verify_B(const GlobalMajorant& g) {
  CheckB b;
  b.integral_cells = poisson_integral(g.all);
  b.integral_omega1 = 2.0 * std::numbers::pi * g.M() + b.integral_cells;
  b.integral_omega = g.pre.record.integral_P;
  const double eps2 = g.epsilon * g.epsilon;
  b.ratio = b.integral_omega > 0 ? b.integral_omega1 * eps2 / b.integral_omega : (b.integral_omega1 == 0 ? 0.0 : INFINITY);
  return b;
}

/// Cells whose (3/2)-dilation meets that of S(x) in positive area.
inline bool cover_neighbors(const CoverCell& a, const CoverCell& b) {
  return interiors_overlap(dilate(a.square, Rational(3, 2)), dilate(b.square, Rational(3, 2)));
}

inline ProbeSplit probe_split(const GlobalMajorant& g, Point x, const RieszOptions& opt) {
  ProbeSplit s;
  s.x = x;
  const auto own = g.cover.owner(x);
  if (!own) throw std::out_of_range("probe_split: probe outside the cover");
  s.owner = *own;
  const double lS = own->square.side.to_double();
  double near[2][2] = {{0, 0}, {0, 0}}, total[2][2] = {{0, 0}, {0, 0}};
  std::vector<double> bounds;
  for (const auto& cm : g.cells) {
    const bool is_near = cover_neighbors(*own, cm.cell);
    s.near_cells += is_near ? 1 : 0;
    const RieszEvaluator ev(cm.build.F, opt);
    const RieszJet jt = ev.jet(x, false, true);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        total[i][j] += jt.grad[i][j];
        if (is_near) near[i][j] += jt.grad[i][j];
      }
    if (is_near) continue;
    for (const auto& t : cm.build.F.terms()) {
      const double dx = std::max(0.0, std::abs(x.x - t.cx) - 0.75 * t.s);
      const double dy = std::max(0.0, std::abs(x.y - t.cy) - 0.75 * t.s);
      const double d = std::hypot(dx, dy);
      s.far_min_distance = std::min(s.far_min_distance, d);
      bounds.push_back(d > 0 ? cup::kIntegral * t.s * t.s * t.s / (d * d * d) : INFINITY);
    }
  }
  // |d_i of (t_j - x_j)/|t - x|^3| has operator norm 2 / |t - x|^3.
  s.far_bound = 2.0 * RieszKernel::c2 * g.delta * pairwise_sum(bounds);
  for (int j = 0; j < 2; ++j) {
    s.near_grad[j] = std::hypot(near[0][j], near[1][j]);
    s.far_grad[j] = std::hypot(total[0][j] - near[0][j], total[1][j] - near[1][j]);
  }
  s.containment = s.far_min_distance >= lS / 4 && s.far_min_distance >= norm(x) / 16;
  return s;
}

inline CheckC verify_C(const GlobalMajorant& g, const GlobalVerifyOptions& opt) {
  CheckC c;
  if (g.all.empty()) return c;
  const Rect box = support_box(g.all);
  // Probe the support box enlarged by a quarter on every side.
  const double mx = 0.25 * box.width(), my = 0.25 * box.height();
  c.region = {box.x0 - mx, box.y0 - my, box.x1 + mx, box.y1 + my};
  const std::vector<Point> anchors = anchor_probes(g.all, opt.anchor_terms);
  c.full = riesz_lip_estimate(g.all, c.region, opt.probes_C, opt.pairs_C, opt.riesz, anchors);
  // Split probes need an owner cell, so they stay inside the covered square.
  const double reach = std::nextafter(g.cover.reach(), 0.0);
  const Rect split{std::max(c.region.x0, -reach), std::max(c.region.y0, -reach), std::min(c.region.x1, reach),
                   std::min(c.region.y1, reach)};
  const std::size_t n_split = std::min<std::size_t>(opt.probes_C, 32);
  c.probes.resize(n_split);
  parallel_for(n_split, [&](std::size_t i) {
    const Point u = halton(i);
    c.probes[i] = probe_split(g, {split.x0 + u.x * split.width(), split.y0 + u.y * split.height()}, opt.riesz);
  });
  for (const auto& p : c.probes) {
    for (int j = 0; j < 2; ++j) {
      c.near_sup[j] = std::max(c.near_sup[j], p.near_grad[j]);
      c.far_sup[j] = std::max(c.far_sup[j], p.far_grad[j]);
    }
    c.far_bound_sup = std::max(c.far_bound_sup, p.far_bound);
    c.containment_failures += p.containment ? 0 : 1;
  }
  return c;
}

inline GlobalReport verify_global(const GlobalMajorant& g, const GlobalVerifyOptions& opt = {}) {
  return {verify_A(g, opt.samples_A), verify_B(g), verify_C(g, opt)};
}

}  // namespace nazarov
