#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "nazarov/global_majorant.hpp"
#include "nazarov/report.hpp"
#include "nazarov/riesz_engine.hpp"

namespace nazarov {

/// Everything a run depends on.  Random choices derive from `seed` only.
struct Scenario {
  std::string command = "local";  // tails | local | global | verify | render
  nlohmann::json recipe;          // function recipe (local, global, verify)
  Rational lambda{5, 2};
  double epsilon = 0.1;
  double delta = 1.0;
  std::optional<double> kappa;  // declared constant, >= the recipe's own
  int depth_max = 8;
  std::optional<int> tail_depth;  // unset: depth_max
  int p_max = 2;
  int k_max = 8;
  std::uint64_t seed = 1;
  double tol = 1e-10;              // accurate-mode quadrature tolerance
  std::string riesz_mode = "fast";  // fast | accurate, for Lipschitz sweeps
  std::size_t probes = 128;
  std::size_t pairs = 32;
  std::size_t samples = 100'000;
  int grid = 512;
  Square square{{Rational(0), Rational(0)}, Rational(1)};
  DyadicSquare root{0, 0, 0};
  std::vector<DyadicSquare> seeds;  // tails: first entry; render: the family
  int random_seeds = 8;             // render without explicit seeds
  nlohmann::json bump_sum;          // verify: a stored sum

  nlohmann::json to_json() const {
    nlohmann::json s = nlohmann::json::array();
    for (const auto& d : seeds) s.push_back(nazarov::to_json(d));
    nlohmann::json j{{"schema", kScenarioSchema},
                     {"command", command},
                     {"lambda", lambda.str()},
                     {"epsilon", epsilon},
                     {"delta", delta},
                     {"depth_max", depth_max},
                     {"p_max", p_max},
                     {"k_max", k_max},
                     {"seed", seed},
                     {"tol", tol},
                     {"riesz_mode", riesz_mode},
                     {"probes", probes},
                     {"pairs", pairs},
                     {"samples", samples},
                     {"grid", grid},
                     {"square", nazarov::to_json(square)},
                     {"root", nazarov::to_json(root)},
                     {"seeds", s},
                     {"random_seeds", random_seeds}};
    if (!recipe.is_null()) j["recipe"] = recipe;
    if (kappa) j["kappa"] = *kappa;
    if (tail_depth) j["tail_depth"] = *tail_depth;
    if (!bump_sum.is_null()) j["bump_sum"] = bump_sum;
    return j;
  }

  static Scenario from_json(const nlohmann::json& j) {
    static const std::set<std::string> known{
        "schema", "command", "recipe", "lambda", "epsilon", "delta", "kappa", "depth_max", "tail_depth",
        "p_max",  "k_max",   "seed",   "tol", "riesz_mode",    "probes",  "pairs", "samples", "grid",     "square",
        "root",   "seeds",   "random_seeds", "bump_sum"};
    if (!j.is_object()) throw std::invalid_argument("scenario must be a JSON object");
    for (const auto& [k, v] : j.items())
      if (!known.count(k)) throw std::invalid_argument("scenario: unknown key \"" + k + "\"");
    if (j.contains("schema") && j["schema"] != kScenarioSchema)
      throw std::invalid_argument(std::string("scenario: schema must be ") + kScenarioSchema);
    Scenario s;
    s.command = j.value("command", s.command);
    if (j.contains("recipe")) s.recipe = j["recipe"];
    if (j.contains("lambda")) s.lambda = rational_from_json(j["lambda"]);
    s.epsilon = j.value("epsilon", s.epsilon);
    s.delta = j.value("delta", s.delta);
    if (j.contains("kappa")) s.kappa = j["kappa"].get<double>();
    s.depth_max = j.value("depth_max", s.depth_max);
    if (j.contains("tail_depth")) s.tail_depth = j["tail_depth"].get<int>();
    s.p_max = j.value("p_max", s.p_max);
    s.k_max = j.value("k_max", s.k_max);
    s.seed = j.value("seed", s.seed);
    s.tol = j.value("tol", s.tol);
    s.riesz_mode = j.value("riesz_mode", s.riesz_mode);
    s.probes = j.value("probes", s.probes);
    s.pairs = j.value("pairs", s.pairs);
    s.samples = j.value("samples", s.samples);
    s.grid = j.value("grid", s.grid);
    if (j.contains("square")) s.square = square_from_json(j["square"]);
    if (j.contains("root")) s.root = dyadic_from_json(j["root"]);
    if (j.contains("seeds"))
      for (const auto& d : j["seeds"]) s.seeds.push_back(dyadic_from_json(d));
    s.random_seeds = j.value("random_seeds", s.random_seeds);
    if (j.contains("bump_sum")) s.bump_sum = j["bump_sum"];
    s.validate();
    return s;
  }

  void validate() const {
    static const std::set<std::string> commands{"tails", "local", "global", "verify", "render"};
    if (!commands.count(command)) throw std::invalid_argument("scenario: unknown command \"" + command + "\"");
    TailParameters{lambda};  // range check
    if (!(epsilon > 0)) throw std::invalid_argument("scenario: epsilon must be positive");
    if (!(delta > 0)) throw std::invalid_argument("scenario: delta must be positive");
    if (kappa && !(*kappa > 0)) throw std::invalid_argument("scenario: kappa must be positive");
    if (depth_max < 0 || depth_max > 40) throw std::invalid_argument("scenario: depth_max must lie in [0, 40]");
    if (tail_depth && (*tail_depth < 0 || *tail_depth > 40))
      throw std::invalid_argument("scenario: tail_depth must lie in [0, 40]");
    if (p_max < 0 || p_max > TailParameters::kMaxLayer) throw std::invalid_argument("scenario: p_max out of range");
    if (k_max < 0 || k_max > 40) throw std::invalid_argument("scenario: k_max must lie in [0, 40]");
    if (!(tol > 0)) throw std::invalid_argument("scenario: tol must be positive");
    if (riesz_mode != "fast" && riesz_mode != "accurate")
      throw std::invalid_argument("scenario: riesz_mode must be fast or accurate");
    if (grid < 2) throw std::invalid_argument("scenario: grid must be >= 2");
    if (random_seeds < 0) throw std::invalid_argument("scenario: random_seeds must be >= 0");
    const bool needs_recipe = command == "local" || command == "global" || command == "verify";
    if (needs_recipe && recipe.is_null()) throw std::invalid_argument("scenario: command needs a recipe");
    if (command == "verify" && bump_sum.is_null()) throw std::invalid_argument("scenario: verify needs a bump_sum");
  }

  RieszOptions riesz() const {
    if (riesz_mode == "fast") return fast_riesz();
    RieszOptions o;
    o.tol = tol;
    return o;
  }

  FunctionOracle function() const {
    const FunctionOracle f = FunctionOracle::from_json(recipe);
    return kappa ? make_declared(f, *kappa) : f;
  }
};

/// Files produced by a run, by file name.
using Artifacts = std::map<std::string, std::string>;

namespace pipeline_detail {

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - t_).count();
    t_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point t_ = std::chrono::steady_clock::now();
};

inline nlohmann::json point(Point p) { return nlohmann::json::array({p.x, p.y}); }

/// Min l_inf distance from the closed square d to the point c, and max over its corners.
inline std::pair<Rational, Rational> linf_range(const DyadicSquare& d, const RationalPoint& c) {
  const Rational lx = d.lo_x(), ly = d.lo_y(), hx = lx + d.side(), hy = ly + d.side();
  auto gap = [](const Rational& lo, const Rational& hi, const Rational& v) {
    if (v < lo) return lo - v;
    if (v > hi) return v - hi;
    return Rational(0);
  };
  auto far = [](const Rational& lo, const Rational& hi, const Rational& v) {
    const Rational a = v > lo ? v - lo : lo - v, b = v > hi ? v - hi : hi - v;
    return a > b ? a : b;
  };
  const Rational gx = gap(lx, hx, c.x), gy = gap(ly, hy, c.y);
  const Rational fx = far(lx, hx, c.x), fy = far(ly, hy, c.y);
  return {gx > gy ? gx : gy, fx > fy ? fx : fy};
}

inline std::size_t max_overlap_of(const std::vector<DyadicSquare>& cells) {
  if (cells.empty()) return 0;
  int scale = 0;
  for (const auto& c : cells) scale = std::max(scale, c.depth);
  std::vector<GridBox> boxes;
  boxes.reserve(cells.size());
  for (const auto& c : cells) boxes.push_back(GridBox::of(c, 4, scale + 1));
  return max_overlap(boxes);
}

}  // namespace pipeline_detail

/// Random pairwise disjoint dyadic squares inside `root`, at most `depth`
/// levels below it.
inline std::vector<DyadicSquare> random_disjoint_family(std::uint64_t seed, int count, const DyadicSquare& root,
                                                        int depth) {
  std::mt19937_64 rng(seed);
  std::vector<DyadicSquare> out;
  for (int attempt = 0; attempt < 8 * count && static_cast<int>(out.size()) < count; ++attempt) {
    const int d = root.depth + 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(std::max(1, depth)));
    const std::int64_t n = std::int64_t{1} << (d - root.depth);
    const DyadicSquare c{d, root.col * n + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(n)),
                         root.row * n + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(n))};
    bool ok = true;
    for (const auto& o : out) ok = ok && relation(c, o) == Relation::disjoint;
    if (ok) out.push_back(c);
  }
  return out;
}

// ---------------------------------------------------------------------------
// tails

inline Report run_tails(const Scenario& sc, Artifacts& files) {
  using namespace pipeline_detail;
  Report r{"tails", sc.to_json(), {}, {}};
  const DyadicSquare seed = sc.seeds.empty() ? DyadicSquare{0, 0, 0} : sc.seeds.front();
  const TailParameters params(sc.lambda);
  Stopwatch sw;
  const TailFamily t = tail(seed, sc.p_max, params);
  nlohmann::json counts = nlohmann::json::array();
  std::vector<DyadicSquare> all;
  for (const auto& layer : t.layers) {
    counts.push_back(layer.size());
    all.insert(all.end(), layer.begin(), layer.end());
  }
  r.checks.push_back({"layer counts", "#t_p(a) for p = 0..P", Status::info, counts, nullptr, nullptr, sw.lap()});

  const std::size_t overlap = max_overlap_of(all);
  r.checks.push_back({"disjoint", "cells of all layers are pairwise disjoint", status_of(overlap <= 1),
                      {{"max_overlap", overlap}}, 1, overlap <= 1 ? nlohmann::json() : nlohmann::json("overlap"),
                      sw.lap()});

  // Layer p lies in the closed annulus inner_p <= |x - c_a|_inf <= outer_p.
  const RationalPoint ca = seed.center();
  std::size_t outside = 0;
  nlohmann::json witness;
  for (int p = 1; p <= sc.p_max; ++p) {
    const Annulus an = annulus(seed, p, params);
    for (const auto& c : t.layers[static_cast<std::size_t>(p)]) {
      const auto [lo, hi] = linf_range(c, ca);
      if (lo < an.inner || hi > an.outer) {
        if (outside++ == 0) witness = {{"layer", p}, {"cell", to_json(c)}};
      }
    }
  }
  r.checks.push_back({"annulus", "layer p cells lie in the l_inf annulus of layer p", status_of(outside == 0),
                      {{"outside", outside}}, 0, witness, sw.lap()});

  // Exact tiling: the areas add up to the outer square of layer P.
  Rational area(0);
  for (const auto& c : all) area = area + c.side() * c.side();
  const Rational outer = tail_outer_side(seed, sc.p_max, params);
  const bool tiles = area == outer * outer;
  r.checks.push_back({"tiling", "layers 0..P tile the outer square of layer P exactly", status_of(tiles),
                      {{"area", area.str()}, {"outer_area", (outer * outer).str()}}, "exact",
                      tiles ? nlohmann::json() : nlohmann::json(area.str()), sw.lap()});

  files["tails.svg"] = render_tail(t);
  r.artifacts["figure"] = "tails.svg";
  return r;
}

// ---------------------------------------------------------------------------
// render

inline Report run_render(const Scenario& sc, Artifacts& files) {
  using namespace pipeline_detail;
  Report r{"render", sc.to_json(), {}, {}};
  Stopwatch sw;
  const int limit = sc.tail_depth.value_or(sc.depth_max);
  const std::vector<DyadicSquare> seeds =
      sc.seeds.empty() ? random_disjoint_family(sc.seed, sc.random_seeds, sc.root, std::max(1, limit - sc.root.depth - 1))
                       : sc.seeds;
  RegularizeOptions ro;
  ro.depth_limit = limit;
  const RegularizedFamily fam = regularize(seeds, sc.root, TailParameters(sc.lambda), ro);
  nlohmann::json sj = nlohmann::json::array();
  for (const auto& s : seeds) sj.push_back(to_json(s));
  r.checks.push_back({"family", "seed family and tau size", Status::info,
                      {{"seeds", sj}, {"tau", fam.tau.size()}, {"uncovered_leaves", fam.uncovered_leaves}}, nullptr,
                      nullptr, sw.lap()});
  const std::size_t overlap = max_overlap_of(fam.tau);
  r.checks.push_back({"disjoint", "tau is pairwise disjoint", status_of(overlap <= 1), {{"max_overlap", overlap}}, 1,
                      overlap <= 1 ? nlohmann::json() : nlohmann::json("overlap"), sw.lap()});
  const std::string svg = render_family(fam);
  std::set<int> contributing;
  for (const auto& p : fam.provenance) contributing.insert(p.seed);
  const auto [rects, classes] = svg_counts(svg);
  const bool ok = rects == fam.tau.size() && classes == contributing.size();
  r.checks.push_back({"provenance classes", "one colour class per contributing seed", status_of(ok),
                      {{"rectangles", rects}, {"classes", classes}, {"contributing_seeds", contributing.size()},
                       {"seeds", seeds.size()}},
                      "classes == contributing seeds", ok ? nlohmann::json() : nlohmann::json(classes), sw.lap()});
  files["tau.svg"] = svg;
  r.artifacts["figure"] = "tau.svg";
  return r;
}

// ---------------------------------------------------------------------------
// local / verify

/// The conclusions of the local construction for a (built or restored) sum.
inline std::vector<Check> certify_local(const LocalBuild& b, const Scenario& sc) {
  using namespace pipeline_detail;
  std::vector<Check> out;
  Stopwatch sw;
  const SupportCertificate sup = support_certificate(b.F, b.frame.q);
  out.push_back({"support", "F vanishes outside (3/2)Q", status_of(sup.pass), {{"terms", sup.terms}}, "exact",
                 sup.witness ? nlohmann::json{{"term", *sup.witness}} : nlohmann::json(), sw.lap()});

  const MajorantCheck m = majorant_check(b, sc.grid);
  out.push_back({"majorant", "F >= f on Q", status_of(m.pass()),
                 {{"grid", m.grid},
                  {"min_gap", m.min_gap},
                  {"margin", m.margin},
                  {"kappa_F", m.kappa_F},
                  {"uncertified_cells", m.uncertified},
                  {"certified_everywhere", m.certified_everywhere}},
                 {{"violations", 0}}, m.pass() ? nlohmann::json() : nlohmann::json{{"point", point(m.witness)}},
                 sw.lap()});

  const CellBoundCheck cb = cell_bound_check(b);
  out.push_back({"cell bound", "||f||_inf(a) <= delta l(a) for a in tau", status_of(cb.violations == 0),
                 {{"checked", cb.checked}, {"violations", cb.violations}, {"max_ratio", cb.max_ratio}}, 1.0,
                 cb.witness ? nlohmann::json{{"cell", to_json(*cb.witness)}} : nlohmann::json(), sw.lap()});

  const std::size_t mult = cup_multiplicity(b.family);
  out.push_back({"cup multiplicity", "sup_x #{a in tau : x in (3/2)a}", Status::info, mult, nullptr, nullptr,
                 sw.lap()});

  // Lipschitz constants of R_j F over (3/2)Q, relative to delta * kappa_e.
  const Rect region = Rect::of(dilate(b.frame.q, Rational(3, 2)));
  const std::vector<Point> anchors = anchor_probes(b.F, 64);
  const RieszLip lip = riesz_lip_estimate(b.F, region, sc.probes, sc.pairs, sc.riesz(), anchors);
  const double unit = b.frame.delta * b.frame.kappa_effective;
  out.push_back({"riesz lipschitz", "|grad R_j F| <= C3 delta kappa_e", Status::info,
                 {{"lip_R1", lip.r1.grad_sup},
                  {"lip_R2", lip.r2.grad_sup},
                  {"quotient_R1", lip.r1.quotient_sup},
                  {"quotient_R2", lip.r2.quotient_sup},
                  {"C3_R1", lip.r1.grad_sup / unit},
                  {"C3_R2", lip.r2.grad_sup / unit},
                  {"probes", lip.r1.samples}},
                 nullptr, nullptr, sw.lap()});

  const IntegralCheck ic = bound_check_4(b);
  out.push_back({"integral bound", "(delta/kappa_e)^2 int F <= C4 int_Q f", ic.contradiction ? Status::fail : Status::info,
                 {{"integral_F", ic.integral_F},
                  {"integral_f", ic.integral_f},
                  {"integral_f_error", ic.integral_f_error},
                  {"C4", ic.ratio}},
                 nullptr, ic.contradiction ? nlohmann::json("F nonempty with int f = 0") : nlohmann::json(), sw.lap()});
  return out;
}

inline LocalOptions local_options(const Scenario& sc) {
  LocalOptions o;
  o.depth_max = sc.depth_max;
  o.params = TailParameters(sc.lambda);
  o.tail_depth = sc.tail_depth.value_or(sc.depth_max);
  return o;
}

inline nlohmann::json local_artifact(const BumpSum& F, const Scenario& sc) {
  nlohmann::json j = to_json(F);
  j["square"] = to_json(sc.square);
  j["delta"] = sc.delta;
  j["recipe"] = sc.recipe;
  if (sc.kappa) j["kappa"] = *sc.kappa;
  return j;
}

inline Report run_local(const Scenario& sc, Artifacts& files) {
  Report r{"local", sc.to_json(), {}, {}};
  pipeline_detail::Stopwatch sw;
  const LocalBuild b = build_local(sc.function(), sc.square, sc.delta, local_options(sc));
  r.checks.push_back({"build", "normalize, essential squares, regularize, cup sum", Status::info,
                      {{"essential_squares", b.essentials.squares.size()},
                       {"tau", b.family.tau.size()},
                       {"kappa_effective", b.frame.kappa_effective}},
                      nullptr, nullptr, sw.lap()});
  for (auto& c : certify_local(b, sc)) r.checks.push_back(std::move(c));
  files["bump_sum.json"] = local_artifact(b.F, sc).dump(1) + "\n";
  r.artifacts["bump_sum"] = "bump_sum.json";
  return r;
}

/// Re-certifies a stored sum; the checks equal those of the run that built it.
inline Report run_verify(const Scenario& sc, Artifacts&) {
  Report r{"verify", sc.to_json(), {}, {}};
  pipeline_detail::Stopwatch sw;
  const BumpSum F = bump_sum_from_json(sc.bump_sum);
  if (F.height() != sc.delta) throw std::invalid_argument("verify: stored height differs from delta");
  const LocalBuild b = restore_local(sc.function(), sc.square, sc.delta, F, TailParameters(sc.lambda));
  r.checks.push_back({"build", "restored from a stored sum", Status::info,
                      {{"tau", b.family.tau.size()}, {"kappa_effective", b.frame.kappa_effective}}, nullptr, nullptr,
                      sw.lap()});
  for (auto& c : certify_local(b, sc)) r.checks.push_back(std::move(c));
  return r;
}

// ---------------------------------------------------------------------------
// global

inline Report run_global(const Scenario& sc, Artifacts& files) {
  using namespace pipeline_detail;
  Report r{"global", sc.to_json(), {}, {}};
  Stopwatch sw;
  GlobalOptions go;
  go.k_max = sc.k_max;
  go.local = local_options(sc);
  const GlobalMajorant g = build_global(sc.function(), sc.epsilon, go);
  const PreprocessRecord& pr = g.pre.record;
  r.checks.push_back({"preprocess", "flattening radius R, level M and growth constants", Status::info,
                      {{"R", pr.R},
                       {"M", pr.M},
                       {"tail_at_R", pr.tail_at_R},
                       {"C_ky", pr.C_ky},
                       {"delta", pr.delta},
                       {"integral_P", pr.integral_P},
                       {"cells", g.cells.size()},
                       {"terms", g.term_count()}},
                      nullptr, nullptr, sw.lap()});
  const bool flat = pr.flat_violations == 0 && pr.growth_violations == 0;
  r.checks.push_back({"growth", "Omega~ = 0 on B(0,R) and Omega~ <= 2 mu |x|", status_of(flat),
                      {{"samples", pr.samples},
                       {"flat_violations", pr.flat_violations},
                       {"growth_violations", pr.growth_violations},
                       {"max_growth_ratio", pr.max_growth_ratio},
                       {"ky_violations", pr.ky_violations},
                       {"max_ky_ratio", pr.max_ky_ratio}},
                      {{"violations", 0}}, flat ? nlohmann::json() : nlohmann::json("sample violation"), sw.lap()});

  GlobalVerifyOptions vo;
  vo.samples_A = sc.samples;
  vo.probes_C = sc.probes;
  vo.pairs_C = sc.pairs;
  vo.riesz = sc.riesz();
  const CheckA a = verify_A(g, vo.samples_A);
  r.checks.push_back({"A", "Omega_1 >= Omega", status_of(a.pass()),
                      {{"samples", a.samples}, {"violations", a.violations}, {"min_gap", a.min_gap}},
                      {{"violations", 0}}, a.pass() ? nlohmann::json() : nlohmann::json{{"point", point(a.witness)}},
                      sw.lap()});
  const CheckB bb = verify_B(g);
  r.checks.push_back({"B", "int Omega_1 dP <= C_B eps^-2 int Omega dP", Status::info,
                      {{"integral_omega1", bb.integral_omega1},
                       {"integral_cells", bb.integral_cells},
                       {"integral_omega", bb.integral_omega},
                       {"C_B", bb.ratio}},
                      nullptr, nullptr, sw.lap()});
  const CheckC c = verify_C(g, vo);
  r.checks.push_back({"C", "|grad R_j Omega_1| <= C eps", Status::info,
                      {{"lip_R1", c.lip(1)},
                       {"lip_R2", c.lip(2)},
                       {"lip_R1_over_eps", c.lip(1) / sc.epsilon},
                       {"lip_R2_over_eps", c.lip(2) / sc.epsilon},
                       {"near_sup", {c.near_sup[0], c.near_sup[1]}},
                       {"far_sup", {c.far_sup[0], c.far_sup[1]}},
                       {"far_bound_sup", c.far_bound_sup},
                       {"containment_failures", c.containment_failures}},
                      nullptr, nullptr, sw.lap()});
  nlohmann::json art = to_json(g.all);
  art["M"] = g.M();
  files["bump_sum.json"] = art.dump(1) + "\n";
  r.artifacts["bump_sum"] = "bump_sum.json";
  return r;
}

inline Report run(const Scenario& sc, Artifacts& files) {
  sc.validate();
  if (sc.command == "tails") return run_tails(sc, files);
  if (sc.command == "render") return run_render(sc, files);
  if (sc.command == "local") return run_local(sc, files);
  if (sc.command == "verify") return run_verify(sc, files);
  return run_global(sc, files);
}

}  // namespace nazarov
