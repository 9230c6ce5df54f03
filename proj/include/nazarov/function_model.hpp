#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numbers>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nazarov/dyadic_geometry.hpp"
#include "nazarov/point.hpp"
#include "nazarov/quadrature.hpp"

namespace nazarov {

/// A nonnegative Lipschitz test function with a declared constant (Euclidean
/// metric) and a radius about the origin outside which it vanishes.
class Recipe {
 public:
  virtual ~Recipe() = default;
  virtual double eval(Point x) const = 0;
  virtual double kappa() const = 0;
  virtual double support_radius() const = 0;
  virtual nlohmann::json descriptor() const = 0;

  /// Upper bound for f over the closed rectangle r.  The default uses only
  /// the Lipschitz constant; recipes override it with exact box maxima.
  virtual double sup_bound(const Rect& r) const {
    return eval(r.center()) + kappa() * std::hypot(r.width(), r.height()) / 2;
  }
};

namespace recipes {

inline double cone_value(Point x, Point c, double h, double slope) {
  return std::max(0.0, h - slope * norm(x - c));
}

inline nlohmann::json point_json(Point p) { return nlohmann::json::array({p.x, p.y}); }
/// Euclidean distance from p to the closed rectangle r.
inline double distance(Point p, const Rect& r) {
  const double dx = std::max({r.x0 - p.x, 0.0, p.x - r.x1});
  const double dy = std::max({r.y0 - p.y, 0.0, p.y - r.y1});
  return std::hypot(dx, dy);
}

inline Point point_from(const nlohmann::json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

inline void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

/// max(0, h - slope |x - c|).
class Cone final : public Recipe {
 public:
  Cone(Point c, double h, double slope) : c_(c), h_(h), s_(slope) {
    require(h >= 0 && slope > 0, "cone: need height >= 0 and slope > 0");
  }
  double eval(Point x) const override { return cone_value(x, c_, h_, s_); }
  double sup_bound(const Rect& r) const override { return std::max(0.0, h_ - s_ * distance(c_, r)); }
  double kappa() const override { return s_; }
  double support_radius() const override { return norm(c_) + h_ / s_; }
  nlohmann::json descriptor() const override {
    return {{"kind", "cone"}, {"center", point_json(c_)}, {"height", h_}, {"slope", s_}};
  }

 private:
  Point c_;
  double h_, s_;
};

struct Tent {
  Point center;
  double height;
  double slope;
};

/// Sum of cones; Lipschitz constant is the sum of the slopes.
class TentSum final : public Recipe {
 public:
  explicit TentSum(std::vector<Tent> tents) : tents_(std::move(tents)) {
    for (const auto& t : tents_) require(t.height >= 0 && t.slope > 0, "tent-sum: bad tent");
  }
  double eval(Point x) const override {
    double s = 0.0;
    for (const auto& t : tents_) s += cone_value(x, t.center, t.height, t.slope);
    return s;
  }
  double sup_bound(const Rect& r) const override {
    double s = 0.0;
    for (const auto& t : tents_) s += std::max(0.0, t.height - t.slope * distance(t.center, r));
    return s;
  }
  double kappa() const override {
    double k = 0.0;
    for (const auto& t : tents_) k += t.slope;
    return k;
  }
  double support_radius() const override {
    double r = 0.0;
    for (const auto& t : tents_) r = std::max(r, norm(t.center) + t.height / t.slope);
    return r;
  }
  nlohmann::json descriptor() const override {
    nlohmann::json ts = nlohmann::json::array();
    for (const auto& t : tents_)
      ts.push_back({{"center", point_json(t.center)}, {"height", t.height}, {"slope", t.slope}});
    return {{"kind", "tent-sum"}, {"tents", ts}};
  }
  const std::vector<Tent>& tents() const { return tents_; }

 private:
  std::vector<Tent> tents_;
};

/// Counter-based hash: value i of stream `seed` does not depend on how many
/// other values were drawn or in which order.
inline std::uint64_t splitmix64(std::uint64_t seed, std::uint64_t i) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (i + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}
inline double unit_uniform(std::uint64_t seed, std::uint64_t i) {
  return static_cast<double>(splitmix64(seed, i) >> 11) * 0x1.0p-53;
}

/// Pointwise maximum of `count` cones with hashed centers in `box`, heights in
/// (0, height_cap] and a common slope.
class RandomTentField final : public Recipe {
 public:
  RandomTentField(std::uint64_t seed, int count, double height_cap, double slope, Rect box)
      : seed_(seed), count_(count), cap_(height_cap), slope_(slope), box_(box) {
    require(count >= 0 && height_cap >= 0 && slope > 0, "random-tent-field: bad parameters");
    for (int i = 0; i < count; ++i) {
      const auto k = static_cast<std::uint64_t>(3 * i);
      Tent t;
      t.center = {box.x0 + box.width() * unit_uniform(seed, k),
                  box.y0 + box.height() * unit_uniform(seed, k + 1)};
      t.height = cap_ * (0.25 + 0.75 * unit_uniform(seed, k + 2));
      t.slope = slope;
      tents_.push_back(t);
    }
  }
  double eval(Point x) const override {
    double v = 0.0;
    for (const auto& t : tents_) v = std::max(v, cone_value(x, t.center, t.height, t.slope));
    return v;
  }
  double sup_bound(const Rect& r) const override {
    double v = 0.0;
    for (const auto& t : tents_) v = std::max(v, t.height - t.slope * distance(t.center, r));
    return v;
  }
  double kappa() const override { return slope_; }
  double support_radius() const override {
    double r = 0.0;
    for (const auto& t : tents_) r = std::max(r, norm(t.center) + t.height / t.slope);
    return r;
  }
  nlohmann::json descriptor() const override {
    return {{"kind", "random-tent-field"}, {"seed", seed_},    {"count", count_},
            {"height_cap", cap_},          {"slope", slope_},  {"box", {box_.x0, box_.y0, box_.x1, box_.y1}}};
  }

 private:
  std::uint64_t seed_;
  int count_;
  double cap_, slope_;
  Rect box_;
  std::vector<Tent> tents_;
};

/// Constant everywhere (no compact support; meant for restriction to a square).
class Constant final : public Recipe {
 public:
  explicit Constant(double c) : c_(c) { require(c >= 0, "constant: value must be >= 0"); }
  double eval(Point) const override { return c_; }
  double sup_bound(const Rect&) const override { return c_; }
  double kappa() const override { return 0.0; }
  double support_radius() const override {
    return c_ == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  nlohmann::json descriptor() const override { return {{"kind", "constant"}, {"value", c_}}; }

 private:
  double c_;
};

/// Flat-topped cone: min(h, slope (r - |x - c|))_+, a constant patch of height h
/// on the disc of radius r - h/slope with a linear fall-off.
class Patch final : public Recipe {
 public:
  Patch(Point c, double h, double radius, double slope) : c_(c), h_(h), r_(radius), s_(slope) {
    require(h >= 0 && radius > 0 && slope > 0 && h / slope <= radius, "patch: bad parameters");
  }
  double eval(Point x) const override {
    return std::clamp(s_ * (r_ - norm(x - c_)), 0.0, h_);
  }
  double sup_bound(const Rect& r) const override {
    return std::clamp(s_ * (r_ - distance(c_, r)), 0.0, h_);
  }
  double kappa() const override { return s_; }
  double support_radius() const override { return norm(c_) + r_; }
  nlohmann::json descriptor() const override {
    return {{"kind", "patch"}, {"center", point_json(c_)}, {"height", h_}, {"radius", r_}, {"slope", s_}};
  }

 private:
  Point c_;
  double h_, r_, s_;
};

/// max(0, inner - shift).
class ShiftedMax final : public Recipe {
 public:
  ShiftedMax(std::shared_ptr<const Recipe> inner, double shift) : in_(std::move(inner)), m_(shift) {
    require(in_ != nullptr && shift >= 0, "shifted-max: bad parameters");
  }
  double eval(Point x) const override { return std::max(0.0, in_->eval(x) - m_); }
  double sup_bound(const Rect& r) const override { return std::max(0.0, in_->sup_bound(r) - m_); }
  double kappa() const override { return in_->kappa(); }
  double support_radius() const override { return in_->support_radius(); }
  nlohmann::json descriptor() const override {
    return {{"kind", "shifted-max"}, {"shift", m_}, {"inner", in_->descriptor()}};
  }

 private:
  std::shared_ptr<const Recipe> in_;
  double m_;
};

/// amplitude * inner(origin + scale * x).
class Affine final : public Recipe {
 public:
  Affine(std::shared_ptr<const Recipe> inner, Point origin, double scale, double amplitude)
      : in_(std::move(inner)), o_(origin), s_(scale), a_(amplitude) {
    require(in_ != nullptr && scale > 0 && amplitude >= 0, "affine: bad parameters");
  }
  double eval(Point x) const override { return a_ * in_->eval(o_ + s_ * x); }
  double sup_bound(const Rect& r) const override {
    return a_ * in_->sup_bound({o_.x + s_ * r.x0, o_.y + s_ * r.y0, o_.x + s_ * r.x1, o_.y + s_ * r.y1});
  }
  double kappa() const override { return a_ * s_ * in_->kappa(); }
  double support_radius() const override { return (in_->support_radius() + norm(o_)) / s_; }
  nlohmann::json descriptor() const override {
    return {{"kind", "affine"},  {"origin", point_json(o_)}, {"scale", s_},
            {"amplitude", a_},   {"inner", in_->descriptor()}};
  }

 private:
  std::shared_ptr<const Recipe> in_;
  Point o_;
  double s_, a_;
};

/// The inner recipe with a larger declared Lipschitz constant.
class Declared final : public Recipe {
 public:
  Declared(std::shared_ptr<const Recipe> inner, double kappa) : in_(std::move(inner)), k_(kappa) {
    require(in_ != nullptr && kappa >= in_->kappa(), "declared: kappa below the recipe's own constant");
  }
  double eval(Point x) const override { return in_->eval(x); }
  double sup_bound(const Rect& r) const override { return in_->sup_bound(r); }
  double kappa() const override { return k_; }
  double support_radius() const override { return in_->support_radius(); }
  nlohmann::json descriptor() const override {
    return {{"kind", "declared"}, {"kappa", k_}, {"inner", in_->descriptor()}};
  }

 private:
  std::shared_ptr<const Recipe> in_;
  double k_;
};

}  // namespace recipes

/// Value handle around a recipe.  Copies share the immutable recipe.
class FunctionOracle {
 public:
  FunctionOracle() : r_(std::make_shared<recipes::Constant>(0.0)) {}
  explicit FunctionOracle(std::shared_ptr<const Recipe> r) : r_(std::move(r)) {
    if (!r_) throw std::invalid_argument("FunctionOracle: null recipe");
  }

  double operator()(Point x) const { return r_->eval(x); }
  double eval(Point x) const { return r_->eval(x); }
  double kappa() const { return r_->kappa(); }
  double sup_bound(const Rect& r) const { return r_->sup_bound(r); }
  double support_radius() const { return r_->support_radius(); }
  nlohmann::json descriptor() const { return r_->descriptor(); }
  const std::shared_ptr<const Recipe>& recipe() const { return r_; }

  static FunctionOracle from_json(const nlohmann::json& j);

 private:
  std::shared_ptr<const Recipe> r_;
};

inline FunctionOracle make_cone(Point c, double h, double slope) {
  return FunctionOracle(std::make_shared<recipes::Cone>(c, h, slope));
}
inline FunctionOracle make_tent_sum(std::vector<recipes::Tent> tents) {
  return FunctionOracle(std::make_shared<recipes::TentSum>(std::move(tents)));
}
inline FunctionOracle make_random_tent_field(std::uint64_t seed, int count, double height_cap,
                                             double slope, Rect box) {
  return FunctionOracle(
      std::make_shared<recipes::RandomTentField>(seed, count, height_cap, slope, box));
}
inline FunctionOracle make_constant(double c) {
  return FunctionOracle(std::make_shared<recipes::Constant>(c));
}
inline FunctionOracle make_patch(Point c, double h, double radius, double slope) {
  return FunctionOracle(std::make_shared<recipes::Patch>(c, h, radius, slope));
}
inline FunctionOracle make_shifted_max(const FunctionOracle& f, double shift) {
  return FunctionOracle(std::make_shared<recipes::ShiftedMax>(f.recipe(), shift));
}
inline FunctionOracle make_affine(const FunctionOracle& f, Point origin, double scale,
                                  double amplitude) {
  return FunctionOracle(std::make_shared<recipes::Affine>(f.recipe(), origin, scale, amplitude));
}

inline FunctionOracle make_declared(const FunctionOracle& f, double kappa) {
  return FunctionOracle(std::make_shared<recipes::Declared>(f.recipe(), kappa));
}

inline FunctionOracle FunctionOracle::from_json(const nlohmann::json& j) {
  using recipes::point_from;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "cone")
    return make_cone(point_from(j.at("center")), j.at("height"), j.at("slope"));
  if (kind == "tent-sum") {
    std::vector<recipes::Tent> ts;
    for (const auto& t : j.at("tents"))
      ts.push_back({point_from(t.at("center")), t.at("height"), t.at("slope")});
    return make_tent_sum(std::move(ts));
  }
  if (kind == "random-tent-field") {
    const auto& b = j.at("box");
    return make_random_tent_field(j.at("seed").get<std::uint64_t>(), j.at("count"), j.at("height_cap"),
                                  j.at("slope"), Rect{b.at(0), b.at(1), b.at(2), b.at(3)});
  }
  if (kind == "constant") return make_constant(j.at("value"));
  if (kind == "patch")
    return make_patch(point_from(j.at("center")), j.at("height"), j.at("radius"), j.at("slope"));
  if (kind == "declared") return make_declared(from_json(j.at("inner")), j.at("kappa"));
  if (kind == "shifted-max") return make_shifted_max(from_json(j.at("inner")), j.at("shift"));
  if (kind == "affine")
    return make_affine(from_json(j.at("inner")), point_from(j.at("origin")), j.at("scale"),
                       j.at("amplitude"));
  throw std::invalid_argument("unknown recipe kind: " + kind);
}

// ---------------------------------------------------------------------------
// Sup-norm brackets

struct SupBracket {
  double lower = 0.0;
  double upper = 0.0;
  Point argmax;  // sample attaining `lower`
};

/// Grid bracket: sample cell centres of a grid of step <= `step`; any point is
/// within Euclidean distance step*sqrt(2)/2 of a sample.
inline SupBracket certified_sup(const FunctionOracle& f, const Rect& a, double step) {
  if (!(step > 0)) throw std::invalid_argument("certified_sup: step must be positive");
  const int nx = std::max(1, static_cast<int>(std::ceil(a.width() / step)));
  const int ny = std::max(1, static_cast<int>(std::ceil(a.height() / step)));
  const double hx = a.width() / nx, hy = a.height() / ny;
  SupBracket b{-std::numeric_limits<double>::infinity(), 0.0, {}};
  for (int i = 0; i < ny; ++i)
    for (int j = 0; j < nx; ++j) {
      const Point p{a.x0 + (j + 0.5) * hx, a.y0 + (i + 0.5) * hy};
      const double v = f(p);
      if (v > b.lower) b = {v, 0.0, p};
    }
  b.upper = b.lower + f.kappa() * std::hypot(hx, hy) / 2;
  return b;
}

inline SupBracket certified_sup(const FunctionOracle& f, const Square& a, const Rational& step) {
  return certified_sup(f, Rect::of(a), step.to_double());
}

/// Branch-and-bound bracket with upper - lower <= abs_tol (or the box budget
/// is exhausted, in which case the bracket is still valid but wider).
inline SupBracket sup_bracket(const FunctionOracle& f, const Rect& a, double abs_tol,
                              std::size_t max_boxes = 200'000) {
  struct Node {
    Rect r;
    double value, ub;
    bool operator<(const Node& o) const { return ub < o.ub; }
  };
  auto make = [&](const Rect& r) {
    const Point c = r.center();
    const double v = f(c);
    return Node{r, v, std::max(v, f.sup_bound(r))};
  };
  std::priority_queue<Node> open;
  Node root = make(a);
  SupBracket b{root.value, root.ub, root.r.center()};
  open.push(root);
  std::size_t boxes = 1;
  while (!open.empty()) {
    const Node n = open.top();
    b.upper = std::max(b.lower, n.ub);
    if (n.ub - b.lower <= abs_tol || boxes >= max_boxes) return b;
    open.pop();
    const Point c = n.r.center();
    const Rect kids[4] = {{n.r.x0, n.r.y0, c.x, c.y}, {c.x, n.r.y0, n.r.x1, c.y},
                          {n.r.x0, c.y, c.x, n.r.y1}, {c.x, c.y, n.r.x1, n.r.y1}};
    for (const Rect& k : kids) {
      Node m = make(k);
      ++boxes;
      if (m.value > b.lower) b.lower = m.value, b.argmax = m.r.center();
      if (m.ub > b.lower) open.push(m);
    }
  }
  b.upper = b.lower;
  return b;
}

enum class Threshold { above, below, ambiguous };

/// Decides sup_a f >= t: `above` once a sample reaches t, `below` once every
/// box bound is under t, `ambiguous` if boxes of side `resolution` remain.
inline Threshold classify_threshold(const FunctionOracle& f, const Rect& a, double t,
                                    double resolution) {
  std::vector<Rect> stack{a};
  bool ambiguous = false;
  while (!stack.empty()) {
    const Rect r = stack.back();
    stack.pop_back();
    const Point c = r.center();
    const double v = f(c);
    if (v >= t) return Threshold::above;
    if (f.sup_bound(r) < t) continue;
    if (std::max(r.width(), r.height()) <= resolution) {
      ambiguous = true;
      continue;
    }
    stack.push_back({r.x0, r.y0, c.x, c.y});
    stack.push_back({c.x, r.y0, r.x1, c.y});
    stack.push_back({r.x0, c.y, c.x, r.y1});
    stack.push_back({c.x, c.y, r.x1, r.y1});
  }
  return ambiguous ? Threshold::ambiguous : Threshold::below;
}

// ---------------------------------------------------------------------------
// Essential squares

/// Placement of the dyadic grid in function coordinates: grid point (u, v)
/// sits at origin + unit * (u, v).
struct GridFrame {
  Point origin{-0.5, -0.5};
  double unit = 1.0;

  Rect rect(const DyadicSquare& d) const {
    const double s = unit * d.side_d();
    const double x0 = origin.x + unit * d.lo_x().to_double();
    const double y0 = origin.y + unit * d.lo_y().to_double();
    return {x0, y0, x0 + s, y0 + s};
  }
  Point center(const DyadicSquare& d) const {
    return {origin.x + unit * d.center_x_d(), origin.y + unit * d.center_y_d()};
  }
};

struct EssentialOptions {
  int depth_max = 12;
  // B&B cell side, relative to the square being classified.
  double relative_resolution = 1.0 / 1024;
};

struct EssentialResult {
  std::vector<DyadicSquare> squares;
  std::size_t ambiguous = 0;  // squares classified essential without certificate
  std::size_t visited = 0;
};

/// Maximal dyadic subsquares a of `root` with sup_a f >= l(a)/2 (l in function
/// units).  Non-essential squares are refined down to depth_max; squares whose
/// bracket straddles the threshold count as essential.
inline EssentialResult essential_squares(const FunctionOracle& f, const DyadicSquare& root,
                                         const GridFrame& frame, const EssentialOptions& opt = {}) {
  if (opt.depth_max < root.depth)
    throw std::invalid_argument("essential_squares: depth_max above the root depth");
  EssentialResult out;
  const double floor_threshold = frame.unit * std::ldexp(1.0, -(opt.depth_max + 1));
  std::vector<DyadicSquare> stack{root};
  while (!stack.empty()) {
    const DyadicSquare d = stack.back();
    stack.pop_back();
    ++out.visited;
    const Rect r = frame.rect(d);
    const double l = r.width();
    const Threshold t = classify_threshold(f, r, l / 2, l * opt.relative_resolution);
    if (t != Threshold::below) {
      out.squares.push_back(d);
      if (t == Threshold::ambiguous) ++out.ambiguous;
      continue;
    }
    if (d.depth >= opt.depth_max) continue;
    // No descendant can be essential if f stays below the finest threshold.
    if (classify_threshold(f, r, floor_threshold, l * opt.relative_resolution) ==
        Threshold::below)
      continue;
    for (int q = 3; q >= 0; --q) stack.push_back(d.child(q));
  }
  std::sort(out.squares.begin(), out.squares.end());
  return out;
}

/// Normalized coordinates: Q* = [-1/2, 1/2]^2 is the dyadic unit square.
inline EssentialResult essential_squares(const FunctionOracle& f, int depth_max) {
  return essential_squares(f, DyadicSquare{0, 0, 0}, GridFrame{}, {depth_max});
}

// ---------------------------------------------------------------------------
// Normalization

struct NormalizationRecord {
  Square q;
  double delta = 0.0;
  double kappa = 0.0;            // declared constant of f
  double kappa_normalized = 0.0; // kappa / delta
  double kappa_effective = 0.0;  // max(kappa / delta, 1)
};

struct Normalized {
  FunctionOracle f;  // f(x l(Q) + c_Q) / (delta l(Q))
  NormalizationRecord record;
};

/// Checks sup_Q f <= delta l(Q) (throws invalid_argument when a sample
/// violates it) and returns the rescaled function on Q*.
inline Normalized normalize(const FunctionOracle& f, const Square& q, double delta) {
  if (!(delta > 0)) throw std::invalid_argument("normalize: delta must be positive");
  const double l = q.side.to_double();
  const Point c{q.center.x.to_double(), q.center.y.to_double()};
  const double bound = delta * l;
  const Threshold t = classify_threshold(f, Rect::of(q), bound * (1 + 1e-12), l / 4096);
  if (t == Threshold::above)
    throw std::invalid_argument("normalize: sup of f over Q exceeds delta * l(Q)");
  Normalized n{make_affine(f, c, l, 1.0 / bound), {}};
  n.record.q = q;
  n.record.delta = delta;
  n.record.kappa = f.kappa();
  n.record.kappa_normalized = f.kappa() / delta;
  n.record.kappa_effective = std::max(1.0, f.kappa() / delta);
  return n;
}

/// Inverse substitution applied to a normalized-frame point.
inline Point to_original(const NormalizationRecord& r, Point y) {
  const double l = r.q.side.to_double();
  return {r.q.center.x.to_double() + l * y.x, r.q.center.y.to_double() + l * y.y};
}
inline Point to_normalized(const NormalizationRecord& r, Point x) {
  const double l = r.q.side.to_double();
  return {(x.x - r.q.center.x.to_double()) / l, (x.y - r.q.center.y.to_double()) / l};
}

// ---------------------------------------------------------------------------
// Cut-cone lower bound

struct CutConeReport {
  bool applicable = true;
  double integral = 0.0;
  double integral_error = 0.0;
  double sup = 0.0;
  double bound = 0.0;  // (pi/12) sup^3 / kappa^2
  double ratio = std::numeric_limits<double>::infinity();
  double tolerance = 1e-4;
  bool pass = true;
};

inline double cut_cone_bound(double sup, double kappa) {
  return std::numbers::pi / 12.0 * sup * sup * sup / (kappa * kappa);
}

/// Compares the integral of f over `a` with a quarter of the cone volume
/// under the graph at the maximum.  `sup_tol` is the absolute accuracy of the
/// sup bracket; the upper end is used, which makes the check conservative.
inline CutConeReport cut_cone_check(const FunctionOracle& f, const Rect& a, double kappa,
                                    double rel_tol = 1e-4) {
  CutConeReport rep;
  rep.tolerance = rel_tol;
  const double l = a.width();
  const SupBracket sb = sup_bracket(f, a, 1e-7 * std::max(l, 1e-300));
  rep.sup = sb.upper;
  if (!(kappa >= 1.0) || sb.lower > l * (1 + 1e-9)) {
    rep.applicable = false;
    return rep;
  }
  const QuadratureResult q =
      integrate_on_support(f, [&](const Rect& r) { return f.sup_bound(r); }, a, rel_tol / 4, 16, 2048);
  rep.integral = q.value;
  rep.integral_error = q.error_estimate;
  rep.bound = cut_cone_bound(rep.sup, kappa);
  if (rep.bound == 0.0) {
    rep.ratio = std::numeric_limits<double>::infinity();
    rep.pass = true;
    return rep;
  }
  rep.ratio = rep.integral / rep.bound;
  rep.pass = rep.ratio >= 1.0 - rel_tol;
  return rep;
}

}  // namespace nazarov
