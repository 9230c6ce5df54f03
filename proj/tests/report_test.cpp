#include <gtest/gtest.h>

#include "nazarov/pipeline.hpp"

using namespace nazarov;

namespace {

Scenario cone_scenario() {
  Scenario s;
  s.command = "local";
  s.recipe = {{"kind", "cone"}, {"center", {0.1, -0.05}}, {"height", 0.3}, {"slope", 1.5}};
  s.depth_max = 6;
  s.grid = 128;
  s.probes = 16;
  s.pairs = 4;
  return s;
}

nlohmann::json checks_without(const nlohmann::json& report, const std::string& name) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& c : report["checks"])
    if (c["name"] != name) out.push_back(c);
  return out;
}

}  // namespace

TEST(Svg, TailOfOneLayerHasThirtyThreeRectangles) {
  const std::string svg = render_tail(tail({0, 0, 0}, 1, TailParameters{}));
  const auto [rects, classes] = svg_counts(svg);
  EXPECT_EQ(rects, 33u);
  EXPECT_EQ(classes, 2u);
  EXPECT_EQ(svg, render_tail(tail({0, 0, 0}, 1, TailParameters{})));
  EXPECT_EQ(svg_counts(render_tail(tail({0, 0, 0}, 2, TailParameters{}))).first, 465u);
}

TEST(Svg, EmptyCanvas) {
  const std::string svg = render_svg({});
  EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_EQ(svg_counts(svg), (std::pair<std::size_t, std::size_t>{0, 0}));
}

TEST(Svg, GeometryOfARectangle) {
  SvgStyle st;
  st.width_px = 100;
  const std::string svg = render_svg({{0, 0, 1, 1, 0}, {0.5, 0.5, 1, 1, 3}}, st);
  EXPECT_NE(svg.find(R"(<rect class="layer-3" x="50" y="0" width="50" height="50"/>)"), std::string::npos);
  EXPECT_NE(svg.find(R"(<rect class="layer-0" x="0" y="0" width="100" height="100"/>)"), std::string::npos);
}

TEST(Json, RoundTrips) {
  const BumpSum F({BumpTerm({Rational(1, 3), Rational(-5, 8)}, Rational(1, 4)), BumpTerm({Rational(7), Rational(0)}, Rational(2))},
                  0.3);
  const BumpSum G = bump_sum_from_json(nlohmann::json::parse(to_json(F).dump()));
  ASSERT_EQ(G.size(), 2u);
  EXPECT_EQ(G.terms()[0], F.terms()[0]);
  EXPECT_EQ(G.terms()[1], F.terms()[1]);
  EXPECT_EQ(G.height(), 0.3);
  EXPECT_THROW(bump_sum_from_json({{"terms", nlohmann::json::array()}}), std::invalid_argument);

  const Scenario s = cone_scenario();
  const Scenario t = Scenario::from_json(s.to_json());
  EXPECT_EQ(t.to_json(), s.to_json());
  nlohmann::json bad = s.to_json();
  bad["depthmax"] = 3;
  EXPECT_THROW(Scenario::from_json(bad), std::invalid_argument);
  bad = s.to_json();
  bad["lambda"] = "3";
  EXPECT_THROW(Scenario::from_json(bad), std::invalid_argument);
  bad = s.to_json();
  bad.erase("recipe");
  EXPECT_THROW(Scenario::from_json(bad), std::invalid_argument);
}

TEST(Pipeline, TailsReport) {
  Scenario s;
  s.command = "tails";
  Artifacts files;
  const Report r = run(s, files);
  EXPECT_TRUE(r.pass());
  EXPECT_EQ(r.checks.front().measured, nlohmann::json({1, 32, 432}));
  ASSERT_TRUE(files.count("tails.svg"));
  EXPECT_EQ(svg_counts(files["tails.svg"]).first, 465u);
  EXPECT_TRUE(validate_report(r.to_json()).empty());
}

TEST(Pipeline, RenderColoursBySeed) {
  Scenario s;
  s.command = "render";
  s.seeds = {{3, 0, 0}, {3, 7, 7}, {4, 0, 15}};
  s.depth_max = 6;
  Artifacts files;
  const Report r = run(s, files);
  EXPECT_TRUE(r.pass()) << r.to_json().dump(1);
  const auto [rects, classes] = svg_counts(files["tau.svg"]);
  EXPECT_EQ(classes, 3u);
  EXPECT_GT(rects, 3u);
}

TEST(Pipeline, LocalReportIsDeterministicAndReplays) {
  const Scenario s = cone_scenario();
  Artifacts f1, f2;
  const nlohmann::json r1 = run(s, f1).to_json(false), r2 = run(s, f2).to_json(false);
  EXPECT_EQ(r1.dump(), r2.dump());
  EXPECT_EQ(f1, f2);
  EXPECT_EQ(r1["status"], "PASS");
  EXPECT_TRUE(validate_report(r1).empty());
  std::vector<std::string> names;
  for (const auto& c : r1["checks"]) names.push_back(c["name"]);
  EXPECT_EQ(names, (std::vector<std::string>{"build", "support", "majorant", "cell bound", "cup multiplicity",
                                             "riesz lipschitz", "integral bound"}));

  Scenario v = s;
  v.command = "verify";
  v.bump_sum = nlohmann::json::parse(f1.at("bump_sum.json"));
  Artifacts none;
  const nlohmann::json rv = run(v, none).to_json(false);
  EXPECT_EQ(checks_without(rv, "build").dump(), checks_without(r1, "build").dump());
}

TEST(Pipeline, VerifyRejectsForeignTerms) {
  Scenario v = cone_scenario();
  v.command = "verify";
  v.bump_sum = to_json(BumpSum({BumpTerm({Rational(1, 3), Rational(0)}, Rational(1, 4))}, 1.0));
  Artifacts none;
  EXPECT_THROW(run(v, none), std::invalid_argument);
}

TEST(Pipeline, ZeroFunctionGivesEmptySum) {
  Scenario s = cone_scenario();
  s.recipe = {{"kind", "constant"}, {"value", 0.0}};
  Artifacts files;
  const Report r = run(s, files);
  EXPECT_TRUE(r.pass());
  EXPECT_EQ(nlohmann::json::parse(files["bump_sum.json"])["terms"].size(), 0u);
}

TEST(Pipeline, DeclaredKappaMustDominate) {
  Scenario s = cone_scenario();
  s.kappa = 0.5;
  Artifacts files;
  EXPECT_THROW(run(s, files), std::invalid_argument);
  s.kappa = 3.0;
  EXPECT_TRUE(run(s, files).pass());
}

TEST(Report, ValidationCatchesMissingWitness) {
  Report r{"local", nlohmann::json::object(), {}, {}};
  r.checks.push_back({"x", "y", Status::fail, 1, 0, nullptr, 0.0});
  const auto errs = validate_report(r.to_json());
  ASSERT_EQ(errs.size(), 1u);
  EXPECT_NE(errs[0].find("witness"), std::string::npos);
  EXPECT_FALSE(validate_report({{"schema", "other"}}).empty());
}
