#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "nazarov/pipeline.hpp"

using namespace nazarov;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Inline JSON, or @path for a file.
nlohmann::json json_arg(const std::string& v) {
  return nlohmann::json::parse(!v.empty() && v.front() == '@' ? slurp(v.substr(1)) : v);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, sep);) out.push_back(item);
  return out;
}

DyadicSquare parse_dyadic(const std::string& s) {
  const auto p = split(s, ',');
  if (p.size() != 3) throw std::invalid_argument("dyadic square must be depth,col,row: " + s);
  return {std::stoi(p[0]), std::stoll(p[1]), std::stoll(p[2])};
}

Square parse_square(const std::string& s) {
  const auto p = split(s, ',');
  if (p.size() != 3) throw std::invalid_argument("square must be cx,cy,side: " + s);
  return square_from_json(nlohmann::json::array({p[0], p[1], p[2]}));
}

/// Flags shared by the pipeline subcommands; unset flags keep the scenario value.
struct Flags {
  std::string scenario, recipe, lambda, square, root, bump_sum, out, riesz_mode;
  std::vector<std::string> seed_squares;
  std::optional<double> epsilon, delta, kappa, tol;
  std::optional<int> depth_max, tail_depth, p_max, k_max, grid, random_seeds;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> probes, pairs, samples;
  bool no_stamp = false;

  void attach(CLI::App* app) {
    app->add_option("--scenario", scenario, "Scenario file (JSON)");
    app->add_option("--recipe", recipe, "Function recipe as JSON, or @file");
    app->add_option("--lambda", lambda, "Shell ratio, 2 < lambda < 2^(3/2), e.g. 5/2");
    app->add_option("--epsilon", epsilon, "Global target epsilon");
    app->add_option("--delta", delta, "Height of the local construction");
    app->add_option("--kappa", kappa, "Declared Lipschitz constant (>= the recipe's own)");
    app->add_option("--depth-max", depth_max, "Depth of the essential-square search");
    app->add_option("--tail-depth", tail_depth, "Deepest tail cell kept (default: depth-max)");
    app->add_option("--pmax", p_max, "Number of tail layers (tails)");
    app->add_option("--kmax", k_max, "Largest level of the plane cover (global)");
    app->add_option("--seed", seed, "Seed of every random choice");
    app->add_option("--tol", tol, "Quadrature tolerance of the accurate Riesz mode");
    app->add_option("--riesz-mode", riesz_mode, "fast or accurate")->check(CLI::IsMember({"fast", "accurate"}));
    app->add_option("--probes", probes, "Lipschitz probes");
    app->add_option("--pairs", pairs, "Difference-quotient pairs");
    app->add_option("--samples", samples, "Samples of the global majorant check");
    app->add_option("--grid", grid, "Grid of the local majorant check");
    app->add_option("--square", square, "Square Q as cx,cy,side (rationals)");
    app->add_option("--root", root, "Root dyadic square as depth,col,row");
    app->add_option("--seed-square", seed_squares, "Seed dyadic square depth,col,row (repeatable)");
    app->add_option("--random-seeds", random_seeds, "Random seeds to draw when none are given (render)");
    app->add_option("--out", out, "Output directory for report.json and artifacts");
    app->add_flag("--no-stamp", no_stamp, "Omit runtimes and the environment stamp");
  }

  Scenario scenario_for(const std::string& command) const {
    nlohmann::json j = scenario.empty() ? nlohmann::json::object() : nlohmann::json::parse(slurp(scenario));
    j["command"] = command;
    if (!bump_sum.empty()) {
      // A stored sum carries the frame it was built in.
      const nlohmann::json b = nlohmann::json::parse(slurp(bump_sum));
      j["bump_sum"] = b;
      for (const char* k : {"square", "delta", "recipe", "kappa"})
        if (b.contains(k) && !j.contains(k)) j[k] = b[k];
    }
    if (!recipe.empty()) j["recipe"] = json_arg(recipe);
    if (!lambda.empty()) j["lambda"] = lambda;
    if (epsilon) j["epsilon"] = *epsilon;
    if (delta) j["delta"] = *delta;
    if (kappa) j["kappa"] = *kappa;
    if (depth_max) j["depth_max"] = *depth_max;
    if (tail_depth) j["tail_depth"] = *tail_depth;
    if (p_max) j["p_max"] = *p_max;
    if (k_max) j["k_max"] = *k_max;
    if (seed) j["seed"] = *seed;
    if (tol) j["tol"] = *tol;
    if (!riesz_mode.empty()) j["riesz_mode"] = riesz_mode;
    if (probes) j["probes"] = *probes;
    if (pairs) j["pairs"] = *pairs;
    if (samples) j["samples"] = *samples;
    if (grid) j["grid"] = *grid;
    if (!square.empty()) j["square"] = to_json(parse_square(square));
    if (!root.empty()) j["root"] = to_json(parse_dyadic(root));
    if (!seed_squares.empty()) {
      j["seeds"] = nlohmann::json::array();
      for (const auto& s : seed_squares) j["seeds"].push_back(to_json(parse_dyadic(s)));
    }
    if (random_seeds) j["random_seeds"] = *random_seeds;
    return Scenario::from_json(j);
  }
};

int run_pipeline(const std::string& command, const Flags& flags) {
  const Scenario sc = flags.scenario_for(command);
  Artifacts files;
  const Report r = run(sc, files);
  const std::string doc = r.to_json(!flags.no_stamp).dump(2) + "\n";
  if (flags.out.empty()) {
    std::cout << doc;
  } else {
    const std::filesystem::path dir(flags.out);
    for (const auto& [name, bytes] : files) write_atomically(dir / name, bytes);
    write_atomically(dir / "report.json", doc);
  }
  std::size_t fails = 0;
  for (const auto& c : r.checks) fails += c.status == Status::fail ? 1 : 0;
  std::cerr << command << ": " << (r.pass() ? "PASS" : "FAIL") << " (" << r.checks.size() << " checks, " << fails
            << " failed)\n";
  return r.pass() ? 0 : 1;
}

int run_report(const std::string& path, bool schema) {
  if (schema) {
    std::cout << report_schema().dump(2) << "\n";
    return 0;
  }
  const nlohmann::json r = nlohmann::json::parse(slurp(path));
  const auto errs = validate_report(r);
  if (!errs.empty()) {
    for (const auto& e : errs) std::cerr << "invalid report: " << e << "\n";
    return 2;
  }
  std::cout << r["command"].get<std::string>() << "  " << r["status"].get<std::string>() << "\n";
  for (const auto& c : r["checks"]) {
    std::cout << "  " << c["status"].get<std::string>() << "  " << c["name"].get<std::string>() << "  "
              << c["measured"].dump();
    if (c.contains("witness")) std::cout << "  witness " << c["witness"].dump();
    std::cout << "\n";
  }
  return r["status"] == "PASS" ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constructive majorants with Lipschitz Riesz transforms"};
  app.require_subcommand(1);
  Flags flags;
  const std::pair<const char*, const char*> pipelines[] = {
      {"tails", "Tail of one dyadic square, with an SVG figure"},
      {"local", "Local majorant F >= f on a square Q and its certificates"},
      {"global", "Global majorant Omega_1 >= Omega and checks (A), (B), (C)"},
      {"verify", "Re-certify a stored bump sum (--bump-sum)"},
      {"render", "Regularized family of a seed set, coloured by seed"}};
  for (const auto& [name, help] : pipelines) {
    CLI::App* sub = app.add_subcommand(name, help);
    flags.attach(sub);
    if (std::string(name) == "verify") sub->add_option("--bump-sum", flags.bump_sum, "Stored bump sum")->required();
  }
  std::string report_path;
  bool schema = false;
  CLI::App* rep = app.add_subcommand("report", "Validate and summarize a report");
  rep->add_option("file", report_path, "report.json");
  rep->add_flag("--schema", schema, "Print the report schema");

  CLI11_PARSE(app, argc, argv);
  try {
    if (rep->parsed()) return run_report(report_path, schema);
    for (const auto& [name, help] : pipelines)
      if (app.got_subcommand(name)) return run_pipeline(name, flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
