#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "nazarov/dyadic_geometry.hpp"
#include "nazarov/tail_builder.hpp"

namespace nazarov {

/// Raised when an explicit P_max cuts a tail before it has left the root.
class TruncationError : public std::runtime_error {
 public:
  TruncationError(const std::string& what, int required)
      : std::runtime_error(what), required_(required) {}
  int required() const { return required_; }

 private:
  int required_;
};

/// Raised when the regularized family would exceed the configured cell budget.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Elements of `family` not strictly contained in another element.  Duplicates
/// collapse to one copy; output order follows first appearance.
inline std::vector<DyadicSquare> maximal_elements(std::span<const DyadicSquare> family) {
  std::unordered_set<DyadicSquare, DyadicSquareHash> present(family.begin(), family.end());
  int min_depth = std::numeric_limits<int>::max();
  for (const auto& c : family) min_depth = std::min(min_depth, c.depth);
  std::unordered_set<DyadicSquare, DyadicSquareHash> emitted;
  std::vector<DyadicSquare> out;
  for (const auto& c : family) {
    bool covered = false;
    for (int d = c.depth - 1; d >= min_depth && !covered; --d)
      covered = present.count(c.ancestor(d)) != 0;
    if (!covered && emitted.insert(c).second) out.push_back(c);
  }
  return out;
}

/// Throws std::invalid_argument naming the first nested or repeated pair.
inline void require_pairwise_disjoint(std::span<const DyadicSquare> family) {
  std::unordered_map<DyadicSquare, std::size_t, DyadicSquareHash> index;
  int min_depth = std::numeric_limits<int>::max();
  for (std::size_t i = 0; i < family.size(); ++i) {
    if (!index.emplace(family[i], i).second)
      throw std::invalid_argument("family contains a repeated square");
    min_depth = std::min(min_depth, family[i].depth);
  }
  for (const auto& c : family)
    for (int d = c.depth - 1; d >= min_depth; --d)
      if (auto it = index.find(c.ancestor(d)); it != index.end()) {
        std::ostringstream os;
        os << "squares overlap: " << c << " lies inside " << it->first;
        throw std::invalid_argument(os.str());
      }
}

/// Layers beyond the returned index lie entirely outside `root`: the layer's
/// inner sup-norm radius already exceeds the farthest point of the root as
/// seen from the seed center.
inline std::optional<int> layers_to_leave(const DyadicSquare& seed, const DyadicSquare& root,
                                          const TailParameters& params) {
  const RationalPoint c = seed.center();
  const Square r = root.to_square();
  Rational reach = max(max(abs(r.lo_x() - c.x), abs(r.hi_x() - c.x)),
                       max(abs(r.lo_y() - c.y), abs(r.hi_y() - c.y)));
  const Rational l = seed.side();
  Rational inner = l / Rational(2);  // inner radius of layer p + 1
  for (int p = 0; p < TailParameters::kMaxLayer; ++p) {
    if (inner >= reach) return p;
    inner += Rational(params.mu(p + 1)) * Rational::pow2(-(p + 1)) * l;
  }
  return std::nullopt;
}

/// Throws TruncationError when the tail needs more than the supported layers.
inline int required_layers(const DyadicSquare& seed, const DyadicSquare& root,
                           const TailParameters& params) {
  if (const auto p = layers_to_leave(seed, root, params)) return *p;
  throw TruncationError("seed too small relative to the root for the supported layer depth",
                        TailParameters::kMaxLayer + 1);
}

struct Provenance {
  int seed = -1;   // index into RegularizedFamily::seeds
  int layer = -1;  // tail layer (0 = the seed itself)
  friend bool operator==(const Provenance&, const Provenance&) = default;
};

/// Maximal tail cells of a disjoint seed family, restricted to the root.
struct RegularizedFamily {
  std::vector<DyadicSquare> tau;
  std::vector<Provenance> provenance;  // parallel to tau
  DyadicSquare root;
  std::vector<DyadicSquare> seeds;
  std::vector<int> layers_used;  // per seed
  TailParameters params;
  std::size_t uncovered_leaves = 0;  // squares at the depth limit left without a tail cell

  std::optional<std::size_t> index_of(const DyadicSquare& c) const {
    if (lookup_.empty() && !tau.empty()) rebuild_index();
    auto it = lookup_.find(c);
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
  }

  int max_depth() const {
    int d = root.depth;
    for (const auto& c : tau) d = std::max(d, c.depth);
    return d;
  }

 private:
  void rebuild_index() const {
    lookup_.reserve(tau.size());
    for (std::size_t i = 0; i < tau.size(); ++i) lookup_.emplace(tau[i], i);
  }
  mutable std::unordered_map<DyadicSquare, std::size_t, DyadicSquareHash> lookup_;
};

struct RegularizeOptions {
  std::optional<int> p_max;  // unset: raise per seed until the tail leaves the root
  std::size_t cell_budget = 2'000'000;
  // Tail cells deeper than this are dropped; the walk stops there.
  std::optional<int> depth_limit;
};

/// tau = maximal elements of the union of all seed tails, restricted to root.
///
/// Walks the dyadic tree below the root: a square is emitted as soon as it is
/// a tail cell of some seed (no strict ancestor was one, so it is maximal);
/// otherwise its four children are visited.  Every point of the root lies in
/// a tail cell of every seed, so the walk terminates.  A seed whose tail needs
/// more than the supported layers to leave the root is capped there; the
/// result is still exact when the other tails cover the rest, and
/// TruncationError is thrown as soon as a square below the cap is needed.
inline RegularizedFamily regularize(std::span<const DyadicSquare> seeds, const DyadicSquare& root,
                                    const TailParameters& params,
                                    const RegularizeOptions& opt = {}) {
  require_pairwise_disjoint(seeds);
  // Deepest square the walk may visit when some tail is capped at the supported
  // layers: below it a cell could have an ancestor in a dropped layer.
  std::optional<int> guard;
  RegularizedFamily out;
  out.root = root;
  out.params = params;
  out.seeds.assign(seeds.begin(), seeds.end());
  for (const auto& s : seeds) {
    if (!s.inside(root)) {
      std::ostringstream os;
      os << "seed " << s << " is not inside the root " << root;
      throw std::invalid_argument(os.str());
    }
    if (opt.depth_limit) {
      // Layers below the limit are never emitted; no coverage requirement.
      if (s.depth > *opt.depth_limit)
        throw std::invalid_argument("regularize: seed below the depth limit");
      int used = std::min(*opt.depth_limit - s.depth, TailParameters::kMaxLayer);
      if (opt.p_max) used = std::min(used, *opt.p_max);
      out.layers_used.push_back(used);
      continue;
    }
    const std::optional<int> leave = layers_to_leave(s, root, params);
    if (!leave && !opt.p_max) {
      // The seed's own tail cannot leave the root within the supported
      // layers; the walk may still be covered by the other tails.
      guard = std::min(guard.value_or(s.depth + TailParameters::kMaxLayer), s.depth + TailParameters::kMaxLayer);
      out.layers_used.push_back(TailParameters::kMaxLayer);
      continue;
    }
    const int need = leave ? *leave : TailParameters::kMaxLayer + 1;
    if (opt.p_max && *opt.p_max < need)
      throw TruncationError("P_max=" + std::to_string(*opt.p_max) +
                                " truncates a tail inside the root; need P_max >= " +
                                std::to_string(need),
                            need);
    int used = opt.p_max ? std::min(*opt.p_max, TailParameters::kMaxLayer) : need;
    out.layers_used.push_back(used);
  }
  if (seeds.empty()) return out;

  std::vector<DyadicSquare> stack{root};
  while (!stack.empty()) {
    DyadicSquare c = stack.back();
    stack.pop_back();
    if (guard && c.depth > *guard)
      throw TruncationError("tail layers beyond the supported depth are needed to cover the root",
                            TailParameters::kMaxLayer + 1);
    Provenance prov;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      int layer = tail_layer_of(seeds[s], c, params, out.layers_used[s]);
      if (layer >= 0) {
        prov = {static_cast<int>(s), layer};
        break;
      }
    }
    if (prov.seed >= 0) {
      out.tau.push_back(c);
      out.provenance.push_back(prov);
      if (out.tau.size() > opt.cell_budget)
        throw BudgetError("regularized family exceeds the cell budget of " +
                          std::to_string(opt.cell_budget));
      continue;
    }
    if (opt.depth_limit && c.depth >= *opt.depth_limit) {
      ++out.uncovered_leaves;
      continue;
    }
    for (int q = 3; q >= 0; --q) stack.push_back(c.child(q));
  }
  return out;
}

/// Which set distance the neighbourhood and separation checks use.
enum class NeighborMetric {
  gap,        // inf of sup-norm point distances
  hausdorff,  // sup-norm Hausdorff distance
};

inline const char* to_string(NeighborMetric m) {
  return m == NeighborMetric::gap ? "gap" : "hausdorff";
}

namespace detail {

inline std::int64_t set_distance(const GridBox& a, const GridBox& b, NeighborMetric m) {
  return m == NeighborMetric::gap ? gap_linf(a, b) : hausdorff_linf(a, b);
}

/// Exact neighbour predicate on grid boxes: distance <= 2 l(a) and
/// l(a)/l(b) in [1/2, 2].
inline bool is_neighbor(const GridBox& a, const GridBox& b, NeighborMetric m) {
  const std::int64_t la = a.side(), lb = b.side();
  if (2 * la < lb || 2 * lb < la) return false;
  return set_distance(a, b, m) <= 2 * la;
}

}  // namespace detail

/// N(a): squares of tau within distance 2 l(a) whose size ratio to a is in
/// [1/2, 2].  a itself is included.
inline std::vector<DyadicSquare> neighborhood(const RegularizedFamily& fam, const DyadicSquare& a,
                                              NeighborMetric metric = NeighborMetric::hausdorff) {
  if (!fam.index_of(a)) throw std::invalid_argument("neighborhood: square is not in tau");
  const int scale = fam.max_depth() + 1;
  const GridBox ga = GridBox::of(a, 4, scale);
  std::vector<DyadicSquare> out;
  for (int d = a.depth - 1; d <= a.depth + 1; ++d) {
    // Any neighbour sits within 2 l(a) + l(b) of a along each axis.
    const int lift = d - a.depth;  // b cells per a cell, as a power of two
    auto to_d = [&](std::int64_t v) { return lift >= 0 ? v << lift : v >> -lift; };
    const std::int64_t reach = lift >= 0 ? (std::int64_t{3} << lift) : 3;
    const std::int64_t c0 = to_d(a.col) - reach, c1 = to_d(a.col + 1) + reach;
    const std::int64_t r0 = to_d(a.row) - reach, r1 = to_d(a.row + 1) + reach;
    for (std::int64_t m = c0; m <= c1; ++m)
      for (std::int64_t n = r0; n <= r1; ++n) {
        DyadicSquare b{d, m, n};
        if (!fam.index_of(b)) continue;
        if (detail::is_neighbor(ga, GridBox::of(b, 4, scale), metric)) out.push_back(b);
      }
  }
  return out;
}

/// Certificate for the separation lemma and the bounded-overlap property of
/// the doubled family {2b : b in tau}.  Ratios are measured / required; all
/// comparisons are exact integer comparisons on a common dyadic grid.
struct SeparationCertificate {
  NeighborMetric metric = NeighborMetric::hausdorff;
  // Non-neighbours with l(b) <= 2 l(a): d(2a, 2b) / (l(a)/2).
  double min_ratio_comparable = std::numeric_limits<double>::infinity();
  // Non-neighbours with l(b) = 2^k l(a), k >= 2: d(2a, 2b) / (2 mu_{k-2} l(a)).
  double min_ratio_larger = std::numeric_limits<double>::infinity();
  // Pairs with l(a) = 2^k l(b), k >= 2: d(a, b) / (l(a) mu_{k-1} / 2^{k-1}).
  double min_ratio_claim = std::numeric_limits<double>::infinity();
  std::size_t pairs_checked = 0;
  std::size_t separation_violations = 0;
  std::size_t claim_violations = 0;
  std::size_t overlap_violations = 0;  // 2a, 2b overlap but b not in N(a)
  std::size_t max_neighborhood = 0;
  std::size_t max_multiplicity = 0;  // sup over the plane of #{b : x in 2b}
  std::optional<std::pair<DyadicSquare, DyadicSquare>> witness;
  std::string witness_kind;

  bool pass() const {
    return separation_violations == 0 && claim_violations == 0 && overlap_violations == 0 &&
           max_multiplicity <= std::max<std::size_t>(max_neighborhood, 1);
  }
};

/// Largest number of open boxes sharing a point (sweep over x with a
/// max/add segment tree over the compressed y breakpoints).
inline std::size_t max_overlap(std::span<const GridBox> boxes) {
  if (boxes.empty()) return 0;
  std::vector<std::int64_t> ys;
  ys.reserve(2 * boxes.size());
  for (const auto& b : boxes) {
    ys.push_back(b.y0);
    ys.push_back(b.y1);
  }
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  const std::size_t n = ys.size() - 1;  // elementary open slabs
  if (n == 0) return 0;
  std::vector<std::int64_t> best(4 * n, 0), lazy(4 * n, 0);
  auto update = [&](auto&& self, std::size_t node, std::size_t lo, std::size_t hi, std::size_t l,
                    std::size_t r, std::int64_t v) -> void {
    if (r <= lo || hi <= l) return;
    if (l <= lo && hi <= r) {
      best[node] += v;
      lazy[node] += v;
      return;
    }
    std::size_t mid = (lo + hi) / 2;
    self(self, 2 * node, lo, mid, l, r, v);
    self(self, 2 * node + 1, mid, hi, l, r, v);
    best[node] = lazy[node] + std::max(best[2 * node], best[2 * node + 1]);
  };
  struct Event {
    std::int64_t x;
    int delta;  // -1 processed before +1 at equal x (open boxes)
    std::size_t l, r;
  };
  std::vector<Event> events;
  events.reserve(2 * boxes.size());
  for (const auto& b : boxes) {
    auto l = static_cast<std::size_t>(std::lower_bound(ys.begin(), ys.end(), b.y0) - ys.begin());
    auto r = static_cast<std::size_t>(std::lower_bound(ys.begin(), ys.end(), b.y1) - ys.begin());
    events.push_back({b.x0, +1, l, r});
    events.push_back({b.x1, -1, l, r});
  }
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    return a.x != b.x ? a.x < b.x : a.delta < b.delta;
  });
  std::int64_t result = 0;
  for (std::size_t i = 0; i < events.size();) {
    std::size_t j = i;
    while (j < events.size() && events[j].x == events[i].x) {
      update(update, 1, 0, n, events[j].l, events[j].r, events[j].delta);
      ++j;
    }
    result = std::max(result, best[1]);
    i = j;
  }
  return static_cast<std::size_t>(result);
}

/// Pairs are visited through per-depth sorted index windows: a cell b of
/// depth d is examined from a when their l_inf gap is below
/// kSeparationWindow * max(separation bound, claim bound) + 2 l(a) + l(b).
/// Outside that window b is not a neighbour, 2a and 2b are disjoint, and
/// both ratios are >= kSeparationWindow (any of the metrics is >= the gap),
/// so verdicts are exact and reported min ratios are exact below the window.
inline constexpr std::int64_t kSeparationWindow = 8;

inline SeparationCertificate separation_report(const RegularizedFamily& fam,
                                               NeighborMetric metric = NeighborMetric::hausdorff) {
  SeparationCertificate cert;
  cert.metric = metric;
  const auto& tau = fam.tau;
  const std::size_t n = tau.size();
  if (n == 0) return cert;
  const int scale = fam.max_depth() + 1;
  std::vector<GridBox> unit(n), doubled(n);
  for (std::size_t i = 0; i < n; ++i) {
    unit[i] = GridBox::of(tau[i], 4, scale);
    doubled[i] = GridBox::of(tau[i], 8, scale);
  }
  struct Entry {
    std::int64_t col, row;
    std::size_t index;
    auto operator<=>(const Entry&) const = default;
  };
  std::map<int, std::vector<Entry>> levels;
  for (std::size_t i = 0; i < n; ++i) levels[tau[i].depth].push_back({tau[i].col, tau[i].row, i});
  for (auto& [d, v] : levels) std::sort(v.begin(), v.end());

  std::vector<std::size_t> nbhd(n, 0);
  // Smallest (a, b) index pair among the violations, independent of visit order.
  std::pair<std::size_t, std::size_t> first{n, n};
  auto record = [&](const char* kind, std::size_t ia, std::size_t ib) {
    if (std::make_pair(ia, ib) >= first) return;
    first = {ia, ib};
    cert.witness = std::make_pair(tau[ia], tau[ib]);
    cert.witness_kind = kind;
  };
  std::size_t neighbours_total = 0;
  for (std::size_t ia = 0; ia < n; ++ia) {
    const std::int64_t la = unit[ia].side();
    for (const auto& [d, entries] : levels) {
      const std::int64_t lb = std::int64_t{8} << (scale - d);
      const int up = tau[ia].depth - d;  // l(b) = 2^up l(a)
      const std::int64_t sep = up <= 1 ? la / 2 : 2 * fam.params.mu(up - 2) * la;
      const int down = -up;  // l(a) = 2^down l(b)
      const std::int64_t claim = down >= 2 ? fam.params.mu(down - 1) * (la >> (down - 1)) : 0;
      const std::int64_t reach = kSeparationWindow * std::max(sep, claim) + 2 * la + lb;
      const GridBox& ga = unit[ia];
      auto floor_div = [](std::int64_t v, std::int64_t m) { return v >= 0 ? v / m : -((-v + m - 1) / m); };
      const std::int64_t c0 = floor_div(ga.x0 - reach, lb), c1 = floor_div(ga.x1 + reach, lb);
      const std::int64_t r0 = floor_div(ga.y0 - reach, lb), r1 = floor_div(ga.y1 + reach, lb);
      for (std::int64_t c = c0; c <= c1; ++c) {
        auto it = std::lower_bound(entries.begin(), entries.end(), Entry{c, r0, 0});
        for (; it != entries.end() && it->col == c && it->row <= r1; ++it) {
          const std::size_t ib = it->index;
          const bool nb = ia == ib || detail::is_neighbor(unit[ia], unit[ib], metric);
          if (nb) {
            ++nbhd[ia];
            ++neighbours_total;
            continue;
          }
          const std::int64_t d2 = detail::set_distance(doubled[ia], doubled[ib], metric);
          if (interiors_overlap(doubled[ia], doubled[ib])) {
            ++cert.overlap_violations;
            record("overlap", ia, ib);
          }
          const double ratio = static_cast<double>(d2) / static_cast<double>(sep);
          double& slot = up <= 1 ? cert.min_ratio_comparable : cert.min_ratio_larger;
          slot = std::min(slot, ratio);
          if (d2 < sep) {
            ++cert.separation_violations;
            record("separation", ia, ib);
          }
          if (down >= 2) {
            const std::int64_t dd = detail::set_distance(unit[ia], unit[ib], metric);
            cert.min_ratio_claim = std::min(cert.min_ratio_claim, static_cast<double>(dd) / static_cast<double>(claim));
            if (dd < claim) {
              ++cert.claim_violations;
              record("claim", ia, ib);
            }
          }
        }
      }
    }
  }
  cert.pairs_checked = n * n - neighbours_total;
  cert.max_neighborhood = *std::max_element(nbhd.begin(), nbhd.end());
  cert.max_multiplicity = max_overlap(doubled);
  return cert;
}

}  // namespace nazarov
