#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "nazarov/cup.hpp"
#include "nazarov/dyadic_geometry.hpp"
#include "nazarov/function_model.hpp"
#include "nazarov/parallel.hpp"
#include "nazarov/quadrature.hpp"
#include "nazarov/regularizer.hpp"

namespace nazarov {

/// One scaled cup, height * s * phi((x - c) / s).
struct BumpTerm {
  RationalPoint center;
  Rational scale;
  double cx = 0.0, cy = 0.0, s = 0.0;

  BumpTerm() = default;
  BumpTerm(RationalPoint c, Rational l)
      : center(c), scale(l), cx(c.x.to_double()), cy(c.y.to_double()), s(l.to_double()) {}
  Point c() const { return {cx, cy}; }
  friend bool operator==(const BumpTerm& a, const BumpTerm& b) {
    return a.center.x == b.center.x && a.center.y == b.center.y && a.scale == b.scale;
  }
};

/// F(x) = sum_a height * l(a) * phi((x - c_a) / l(a)).  The common height
/// factor carries the delta of the normalization (1 in the normalized frame).
class BumpSum {
 public:
  BumpSum() = default;
  BumpSum(std::vector<BumpTerm> terms, double height) : terms_(std::move(terms)), height_(height) {
    build_index();
  }

  const std::vector<BumpTerm>& terms() const { return terms_; }
  double height() const { return height_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  /// Calls fn(term) for every term whose open (3/2)-dilated square contains x.
  template <class Fn>
  void for_each_near(Point x, Fn&& fn) const {
    for (const auto& [s, level] : levels_) {
      const std::int64_t ix0 = cell_index(x.x - 0.75 * s, s), ix1 = cell_index(x.x + 0.75 * s, s);
      const std::int64_t iy0 = cell_index(x.y - 0.75 * s, s), iy1 = cell_index(x.y + 0.75 * s, s);
      for (std::int64_t ix = ix0; ix <= ix1; ++ix)
        for (std::int64_t iy = iy0; iy <= iy1; ++iy) {
          auto it = level.find(key(ix, iy));
          if (it == level.end()) continue;
          for (std::uint32_t t : it->second) {
            const BumpTerm& b = terms_[t];
            if (std::abs(x.x - b.cx) < 0.75 * b.s && std::abs(x.y - b.cy) < 0.75 * b.s) fn(b);
          }
        }
    }
  }

  double eval(Point x) const {
    double v = 0.0;
    for_each_near(x, [&](const BumpTerm& b) {
      v += b.s * cup::eval({(x.x - b.cx) / b.s, (x.y - b.cy) / b.s});
    });
    return height_ * v;
  }
  double operator()(Point x) const { return eval(x); }

  Point grad(Point x) const {
    Point g{0, 0};
    for_each_near(x, [&](const BumpTerm& b) {
      const Point d = cup::grad({(x.x - b.cx) / b.s, (x.y - b.cy) / b.s});
      g = g + d;
    });
    return height_ * g;
  }

  /// Lower bound of F over a box: the sum of the exact minima of its terms
  /// (a term can be positive on all of r only if its support contains the centre).
  double lower_bound(const Rect& r) const {
    double v = 0.0;
    for_each_near(r.center(), [&](const BumpTerm& b) {
      v += b.s * cup::min_on(Rect{(r.x0 - b.cx) / b.s, (r.y0 - b.cy) / b.s, (r.x1 - b.cx) / b.s, (r.y1 - b.cy) / b.s});
    });
    return height_ * v;
  }

  /// Number of terms whose support contains x.
  std::size_t multiplicity_at(Point x) const {
    std::size_t n = 0;
    for_each_near(x, [&](const BumpTerm&) { ++n; });
    return n;
  }

  /// Exact up to the cup constant: c_phi * height * sum l^3.
  double integral() const {
    std::vector<double> cubes(terms_.size());
    for (std::size_t i = 0; i < terms_.size(); ++i) cubes[i] = terms_[i].s * terms_[i].s * terms_[i].s;
    return cup::kIntegral * height_ * pairwise_sum(cubes);
  }

 private:
  using Level = std::unordered_map<std::uint64_t, std::vector<std::uint32_t>>;

  static std::int64_t cell_index(double v, double s) {
    return static_cast<std::int64_t>(std::floor(v / s));
  }
  static std::uint64_t key(std::int64_t ix, std::int64_t iy) {
    return (static_cast<std::uint64_t>(ix) * 0x9E3779B97F4A7C15ull) ^
           (static_cast<std::uint64_t>(iy) + 0x632BE59BD9B4E019ull + (static_cast<std::uint64_t>(ix) << 7));
  }

  void build_index() {
    if (terms_.size() > UINT32_MAX) throw std::length_error("BumpSum: too many terms");
    for (std::uint32_t i = 0; i < terms_.size(); ++i) {
      const BumpTerm& b = terms_[i];
      if (!(b.s > 0)) throw std::invalid_argument("BumpSum: scale must be positive");
      levels_[b.s][key(cell_index(b.cx, b.s), cell_index(b.cy, b.s))].push_back(i);
    }
  }

  std::vector<BumpTerm> terms_;
  double height_ = 1.0;
  std::map<double, Level> levels_;
};

/// sup |grad phi| from a fine grid over the ramp corner [1/2, 3/4]^2 (by
/// symmetry the only region where both partials can be nonzero).  Computed once.
inline double cup_sup_grad() {
  static const double value = [] {
    double best = cup::kSupPartial;  // attained on the edges where eta = 1
    const int n = 400;
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= n; ++j) {
        const Point p{0.5 + 0.25 * i / n, 0.5 + 0.25 * j / n};
        best = std::max(best, norm(cup::grad(p)));
      }
    return best;
  }();
  return value;
}

// ---------------------------------------------------------------------------
// Local build

struct LocalOptions {
  int depth_max = 12;
  TailParameters params{};
  std::size_t cell_budget = 2'000'000;
  // Drop tail cells deeper than this (unset: tails tile the whole root).
  std::optional<int> tail_depth;
};

struct LocalBuild {
  BumpSum F;
  NormalizationRecord frame;
  FunctionOracle f;             // original
  FunctionOracle f_normalized;  // on Q*
  EssentialResult essentials;   // grid coordinates, root (0,0,0)
  RegularizedFamily family;     // grid coordinates
  int depth_max = 12;

  /// Normalized-frame cup sum (height 1, Q* coordinates).
  BumpSum normalized() const {
    std::vector<BumpTerm> ts;
    ts.reserve(family.tau.size());
    for (const auto& c : family.tau) ts.push_back(normalized_term(c));
    return BumpSum(std::move(ts), 1.0);
  }

  static BumpTerm normalized_term(const DyadicSquare& c) {
    const RationalPoint cc = c.center();
    const Rational half(1, 2);
    return BumpTerm({cc.x - half, cc.y - half}, c.side());
  }
};

/// Term of the original frame for grid cell c.
inline BumpTerm denormalized_term(const NormalizationRecord& r, const DyadicSquare& c) {
  const BumpTerm t = LocalBuild::normalized_term(c);
  const Rational l = r.q.side;
  return BumpTerm({r.q.center.x + l * t.center.x, r.q.center.y + l * t.center.y}, l * t.scale);
}

/// normalize -> essential squares -> regularize (root Q*) -> cup sum, mapped
/// back to the frame of Q with height factor delta.
inline LocalBuild build_local(const FunctionOracle& f, const Square& q, double delta,
                              const LocalOptions& opt = {}) {
  if (!(f.kappa() >= 0)) throw std::invalid_argument("build_local: kappa must be nonnegative");
  Normalized n = normalize(f, q, delta);
  LocalBuild b;
  b.frame = n.record;
  b.f = f;
  b.f_normalized = n.f;
  b.depth_max = opt.depth_max;
  const DyadicSquare root{0, 0, 0};
  b.essentials = essential_squares(n.f, root, GridFrame{}, {opt.depth_max});
  RegularizeOptions ro;
  ro.cell_budget = opt.cell_budget;
  ro.depth_limit = opt.tail_depth;
  b.family = regularize(b.essentials.squares, root, opt.params, ro);
  std::vector<BumpTerm> terms;
  terms.reserve(b.family.tau.size());
  for (const auto& c : b.family.tau) terms.push_back(denormalized_term(b.frame, c));
  b.F = BumpSum(std::move(terms), delta);
  return b;
}

/// Grid cell of the normalized frame behind a stored term; throws if the term
/// is not the image of a dyadic cell of Q*.
inline DyadicSquare cell_of_term(const NormalizationRecord& r, const BumpTerm& t) {
  const Rational l = r.q.side;
  const Rational s = t.scale / l;
  int depth = 0;
  while (Rational::pow2(-depth) > s && depth < 60) ++depth;
  if (Rational::pow2(-depth) != s) throw std::invalid_argument("cell_of_term: scale is not a dyadic fraction of l(Q)");
  const Rational half(1, 2);
  const Rational ux = (t.center.x - r.q.center.x) / l + half, uy = (t.center.y - r.q.center.y) / l + half;
  const DyadicSquare c{depth, (ux / s).floor(), (uy / s).floor()};
  if (c.center().x != ux || c.center().y != uy) throw std::invalid_argument("cell_of_term: center is not a cell center");
  return c;
}

/// Rebuilds the parts of a LocalBuild that the certificates read (frame,
/// normalized function, tau) from a stored sum; essentials are left empty.
inline LocalBuild restore_local(const FunctionOracle& f, const Square& q, double delta, const BumpSum& F,
                                const TailParameters& params = TailParameters()) {
  Normalized n = normalize(f, q, delta);
  LocalBuild b;
  b.frame = n.record;
  b.f = f;
  b.f_normalized = n.f;
  b.family.root = DyadicSquare{0, 0, 0};
  b.family.params = params;
  for (const auto& t : F.terms()) {
    b.family.tau.push_back(cell_of_term(b.frame, t));
    b.family.provenance.push_back({});
  }
  b.F = BumpSum(F.terms(), delta);
  b.depth_max = b.family.max_depth();
  return b;
}

// ---------------------------------------------------------------------------
// Certificates

/// Conclusion (1): every term's (3/2)-dilated square lies in (3/2) Q, exactly.
struct SupportCertificate {
  bool pass = true;
  std::size_t terms = 0;
  std::optional<std::size_t> witness;
};

inline SupportCertificate support_certificate(const BumpSum& F, const Square& q) {
  SupportCertificate c;
  c.terms = F.size();
  const Square big = dilate(q, Rational(3, 2));
  for (std::size_t i = 0; i < F.size(); ++i) {
    const BumpTerm& t = F.terms()[i];
    const Square s = dilate(Square{t.center, t.scale}, Rational(3, 2));
    if (s.lo_x() < big.lo_x() || s.hi_x() > big.hi_x() || s.lo_y() < big.lo_y() ||
        s.hi_y() > big.hi_y()) {
      c.pass = false;
      c.witness = i;
      return c;
    }
  }
  return c;
}

/// Largest number of (3/2)-dilated tau cells sharing a point, exact.
inline std::size_t cup_multiplicity(const RegularizedFamily& fam) {
  if (fam.tau.empty()) return 0;
  const int scale = fam.max_depth() + 1;
  std::vector<GridBox> boxes;
  boxes.reserve(fam.tau.size());
  for (const auto& c : fam.tau) boxes.push_back(GridBox::of(c, 6, scale));
  return max_overlap(boxes);
}

/// Conclusion (2) on an n x n grid of cell centres of Q.
struct MajorantCheck {
  int grid = 512;
  double h = 0.0;
  double min_gap = std::numeric_limits<double>::infinity();  // min (F - f)
  Point witness;
  double kappa_F = 0.0;
  double margin = 0.0;             // (kappa_F + kappa) h sqrt(2)/2
  std::size_t violations = 0;      // samples with F < f
  // Cells of the grid where neither certificate holds: F(p) - f(p) >= margin,
  // or inf_cell F >= sup_cell f from interval bounds.
  std::size_t uncertified = 0;
  std::optional<Point> uncertified_witness;
  bool certified_everywhere = false;
  bool pass() const { return violations == 0; }
};

inline MajorantCheck majorant_check(const BumpSum& F, const FunctionOracle& f, const Rect& q,
                                    double kappa_F, int n = 512) {
  MajorantCheck m;
  m.grid = n;
  m.h = q.width() / n;
  m.kappa_F = kappa_F;
  const double radius = m.h * std::sqrt(2.0) / 2;
  m.margin = (kappa_F + f.kappa()) * radius;
  struct Row {
    double min = std::numeric_limits<double>::infinity();
    Point arg;
    std::size_t bad = 0, uncertified = 0;
    std::optional<Point> uncertified_at;
  };
  std::vector<Row> rows(static_cast<std::size_t>(n));
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
    Row& row = rows[i];
    for (int j = 0; j < n; ++j) {
      const Point p{q.x0 + (j + 0.5) * m.h, q.y0 + (static_cast<double>(i) + 0.5) * m.h};
      const double fv = f(p), Fv = F(p);
      const double gap = Fv - fv;
      if (gap < -1e-12 * std::max(1.0, fv)) ++row.bad;
      if (gap < row.min) row.min = gap, row.arg = p;
      if (gap >= m.margin) continue;
      const Rect cell{p.x - m.h / 2, p.y - m.h / 2, p.x + m.h / 2, p.y + m.h / 2};
      if (F.lower_bound(cell) >= f.sup_bound(cell)) continue;
      if (!row.uncertified_at) row.uncertified_at = p;
      ++row.uncertified;
    }
  });
  for (const Row& row : rows) {
    m.violations += row.bad;
    m.uncertified += row.uncertified;
    if (!m.uncertified_witness && row.uncertified_at) m.uncertified_witness = row.uncertified_at;
    if (row.min < m.min_gap) m.min_gap = row.min, m.witness = row.arg;
  }
  m.certified_everywhere = m.uncertified == 0;
  return m;
}

inline MajorantCheck majorant_check(const LocalBuild& b, int n = 512) {
  const double kF = b.frame.delta * cup_sup_grad() *
                    static_cast<double>(std::max<std::size_t>(1, cup_multiplicity(b.family)));
  return majorant_check(b.F, b.f, Rect::of(b.frame.q), kF, n);
}

/// Per-cell bound ||f||_{L^inf(c)} <= l(c) over tau (normalized frame), using
/// the lower end of a sup bracket so a failure is a genuine sample.
struct CellBoundCheck {
  std::size_t checked = 0;
  std::size_t violations = 0;
  double max_ratio = 0.0;  // sup-lower / l(c)
  std::optional<DyadicSquare> witness;
};

inline CellBoundCheck cell_bound_check(const LocalBuild& b) {
  CellBoundCheck c;
  const GridFrame frame;
  for (const auto& cell : b.family.tau) {
    const Rect r = frame.rect(cell);
    const double l = r.width();
    const Threshold t = classify_threshold(b.f_normalized, r, l * (1 + 1e-12), l / 1024);
    ++c.checked;
    if (t == Threshold::above) {
      ++c.violations;
      if (!c.witness) c.witness = cell;
      c.max_ratio = std::max(c.max_ratio, sup_bracket(b.f_normalized, r, l * 1e-6).lower / l);
    }
  }
  return c;
}

/// Conclusion (4): (delta^2 / kappa_e^2) * int F / int_Q f with
/// kappa_e = delta * max(kappa/delta, 1).
struct IntegralCheck {
  double integral_F = 0.0;
  double integral_f = 0.0;
  double integral_f_error = 0.0;
  double kappa_used = 0.0;
  double ratio = 0.0;
  bool contradiction = false;  // F nonempty but int f == 0
};

inline IntegralCheck bound_check_4(const LocalBuild& b, double rel_tol = 1e-4) {
  IntegralCheck c;
  c.integral_F = b.F.integral();
  // int_Q f = delta l^3 int_{Q*} f~, evaluated on the normalized function so
  // that the ratio is independent of the frame up to rounding.
  const double l = b.frame.q.side.to_double();
  const FunctionOracle& fn = b.f_normalized;
  const QuadratureResult q = integrate_on_support(
      fn, [&](const Rect& r) { return fn.sup_bound(r); }, Rect{-0.5, -0.5, 0.5, 0.5}, rel_tol, 64, 4096);
  const double scale = b.frame.delta * l * l * l;
  c.integral_f = q.value * scale;
  c.integral_f_error = q.error_estimate * scale;
  c.kappa_used = b.frame.delta * b.frame.kappa_effective;
  if (c.integral_f <= 0.0) {
    c.contradiction = !b.F.empty();
    c.ratio = 0.0;
    return c;
  }
  c.ratio = b.frame.delta * b.frame.delta / (c.kappa_used * c.kappa_used) * c.integral_F / c.integral_f;
  return c;
}

/// Partial sums of sum_{p >= 1} #t_p(c) 2^{-3p}: the volume of a tail in units
/// of l(c)^3, without the seed itself.
inline std::vector<double> tail_volume_partial_sums(const TailParameters& params, int p_max) {
  std::vector<double> out;
  double s = 0.0;
  for (int p = 1; p <= p_max; ++p) {
    const double mu = static_cast<double>(params.mu(p));
    const double al = static_cast<double>(params.alpha(p)), be = static_cast<double>(params.beta(p));
    const double outer = al + mu - be, hole = al - be - mu;
    s += (outer * outer - hole * hole) * std::ldexp(1.0, -3 * p);
    out.push_back(s);
  }
  return out;
}

/// Partial sums of sum_p mu_p^2 2^{-3p}.
inline std::vector<double> mu_series_partial_sums(const TailParameters& params, int p_max) {
  std::vector<double> out;
  double s = 0.0;
  for (int p = 1; p <= p_max; ++p) {
    const double mu = static_cast<double>(params.mu(p));
    s += mu * mu * std::ldexp(1.0, -3 * p);
    out.push_back(s);
  }
  return out;
}

/// Limit of sum_p mu_p^2 2^{-3p}: exact terms up to the last supported layer
/// plus the geometric tail sum_{p > P} (lambda^2 / 8)^p, which over-counts the
/// floors by a relative 2 lambda^{-P}.
inline double mu_series_limit(const TailParameters& params) {
  const int P = TailParameters::kMaxLayer;
  const double s = mu_series_partial_sums(params, P).back();
  const double l = params.lambda().to_double();
  const double q = l * l / 8.0;
  return s + std::pow(q, P + 1) / (1.0 - q);
}

}  // namespace nazarov
