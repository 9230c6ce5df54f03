#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "nazarov/local_majorant.hpp"
#include "nazarov/parallel.hpp"
#include "nazarov/regularizer.hpp"
#include "nazarov/tail_builder.hpp"

namespace nazarov {

inline constexpr const char* kReportSchema = "nazarov-report/1";
inline constexpr const char* kScenarioSchema = "nazarov-scenario/1";
inline constexpr const char* kBumpSumSchema = "nazarov-bumpsum/1";

// ---------------------------------------------------------------------------
// Serialization of geometry

inline nlohmann::json to_json(const DyadicSquare& d) { return nlohmann::json::array({d.depth, d.col, d.row}); }

inline DyadicSquare dyadic_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("dyadic square must be [depth, col, row]");
  return {j.at(0).get<int>(), j.at(1).get<std::int64_t>(), j.at(2).get<std::int64_t>()};
}

inline Rational rational_from_json(const nlohmann::json& j) {
  if (j.is_string()) return Rational::parse(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  if (j.is_number()) return Rational::parse(nlohmann::json(j.get<double>()).dump());
  throw std::invalid_argument("expected a rational as \"p/q\" or a number");
}

/// Square as [center_x, center_y, side], each a rational string.
inline nlohmann::json to_json(const Square& s) {
  return nlohmann::json::array({s.center.x.str(), s.center.y.str(), s.side.str()});
}

inline Square square_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("square must be [center_x, center_y, side]");
  Square s{{rational_from_json(j.at(0)), rational_from_json(j.at(1))}, rational_from_json(j.at(2))};
  if (!(s.side > Rational(0))) throw std::invalid_argument("square side must be positive");
  return s;
}

inline nlohmann::json to_json(const BumpSum& F) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : F.terms())
    terms.push_back(nlohmann::json::array({t.center.x.str(), t.center.y.str(), t.scale.str()}));
  return {{"schema", kBumpSumSchema}, {"cup", "tensor-plateau"}, {"height", F.height()}, {"terms", terms}};
}

inline BumpSum bump_sum_from_json(const nlohmann::json& j) {
  if (j.value("schema", std::string()) != kBumpSumSchema)
    throw std::invalid_argument(std::string("bump sum schema must be ") + kBumpSumSchema);
  std::vector<BumpTerm> terms;
  for (const auto& t : j.at("terms")) {
    const Square s = square_from_json(t);
    terms.emplace_back(s.center, s.side);
  }
  return BumpSum(std::move(terms), j.at("height").get<double>());
}

// ---------------------------------------------------------------------------
// Reports

enum class Status { pass, fail, info };

inline const char* to_string(Status s) { return s == Status::pass ? "PASS" : s == Status::fail ? "FAIL" : "INFO"; }

/// One verified statement.  `statement` names the property in words;
/// `measured` and `tolerance` are free-form JSON; FAIL records carry a witness.
struct Check {
  std::string name;
  std::string statement;
  Status status = Status::info;
  nlohmann::json measured;
  nlohmann::json tolerance;
  nlohmann::json witness;
  double runtime = 0.0;
};

inline Status status_of(bool ok) { return ok ? Status::pass : Status::fail; }

struct Report {
  std::string command;
  nlohmann::json scenario;
  std::vector<Check> checks;
  nlohmann::json artifacts = nlohmann::json::object();

  bool pass() const {
    for (const auto& c : checks)
      if (c.status == Status::fail) return false;
    return true;
  }

  /// Runtimes and the environment stamp are the only parts that vary between
  /// runs of one scenario; `stamp = false` leaves both out.
  nlohmann::json to_json(bool stamp = true) const {
    nlohmann::json cs = nlohmann::json::array();
    for (const auto& c : checks) {
      nlohmann::json j{{"name", c.name},
                       {"statement", c.statement},
                       {"status", nazarov::to_string(c.status)},
                       {"measured", c.measured},
                       {"tolerance", c.tolerance}};
      if (!c.witness.is_null()) j["witness"] = c.witness;
      if (stamp) j["runtime_s"] = c.runtime;
      cs.push_back(std::move(j));
    }
    nlohmann::json out{{"schema", kReportSchema},
                       {"command", command},
                       {"status", pass() ? "PASS" : "FAIL"},
                       {"scenario", scenario},
                       {"checks", cs},
                       {"artifacts", artifacts.is_null() ? nlohmann::json::object() : artifacts}};
    if (stamp) out["environment"] = environment();
    return out;
  }

  static nlohmann::json environment() {
    return {{"compiler", __VERSION__}, {"cplusplus", __cplusplus}, {"threads", thread_count()}};
  }
};

/// JSON Schema of the report document.
inline nlohmann::json report_schema() {
  return nlohmann::json::parse(R"({
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "$id": "nazarov-report/1",
  "type": "object",
  "required": ["schema", "command", "status", "scenario", "checks", "artifacts"],
  "properties": {
    "schema": {"const": "nazarov-report/1"},
    "command": {"enum": ["tails", "local", "global", "verify", "render"]},
    "status": {"enum": ["PASS", "FAIL"]},
    "scenario": {"type": "object"},
    "artifacts": {"type": "object", "additionalProperties": {"type": "string"}},
    "environment": {"type": "object"},
    "checks": {
      "type": "array",
      "items": {
        "type": "object",
        "required": ["name", "statement", "status", "measured", "tolerance"],
        "properties": {
          "name": {"type": "string"},
          "statement": {"type": "string"},
          "status": {"enum": ["PASS", "FAIL", "INFO"]},
          "runtime_s": {"type": "number"}
        }
      }
    }
  }
})");
}

/// Minimal structural validation against report_schema().
inline std::vector<std::string> validate_report(const nlohmann::json& r) {
  std::vector<std::string> errs;
  auto need = [&](const char* key) {
    if (!r.contains(key)) errs.push_back(std::string("missing key: ") + key);
  };
  for (const char* k : {"schema", "command", "status", "scenario", "checks", "artifacts"}) need(k);
  if (!errs.empty()) return errs;
  if (r["schema"] != kReportSchema) errs.push_back("unknown schema " + r["schema"].dump());
  if (!r["checks"].is_array()) return errs.push_back("checks must be an array"), errs;
  if (!r["artifacts"].is_object()) errs.push_back("artifacts must be an object");
  bool any_fail = false;
  for (const auto& c : r["checks"]) {
    for (const char* k : {"name", "statement", "status", "measured", "tolerance"})
      if (!c.contains(k)) errs.push_back(std::string("check missing key: ") + k);
    const std::string s = c.value("status", std::string());
    if (s != "PASS" && s != "FAIL" && s != "INFO") errs.push_back("bad check status " + s);
    if (s == "FAIL") {
      any_fail = true;
      if (!c.contains("witness")) errs.push_back("FAIL without witness: " + c.value("name", std::string()));
    }
  }
  if ((r["status"] == "FAIL") != any_fail) errs.push_back("overall status disagrees with the checks");
  return errs;
}

/// Writes to a sibling temporary file and renames it into place.
inline void write_atomically(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
    os << bytes;
    if (!os.flush()) throw std::runtime_error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// SVG

struct SvgRect {
  double x0, y0, x1, y1;
  int cls = 0;
};

struct SvgStyle {
  int width_px = 800;
  std::string class_prefix = "layer";
  double stroke = 0.6;  // pixels
  std::vector<std::string> palette{"#1f4e79", "#c0504d", "#9bbb59", "#8064a2", "#4bacc6",
                                   "#f79646", "#2c7c5a", "#b7a31e", "#7f7f7f", "#d16ba5"};
};

namespace svg_detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  // Trim trailing zeros so that output stays compact; still byte-deterministic.
  std::string s(buf);
  while (s.size() > 1 && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  if (s == "-0") s = "0";
  return s;
}

}  // namespace svg_detail

/// One <rect> per input rectangle, y axis pointing up, one CSS class per
/// distinct `cls`.  An empty input gives a valid empty canvas.
inline std::string render_svg(const std::vector<SvgRect>& rects, const SvgStyle& style = {}) {
  using svg_detail::num;
  double x0 = 0, y0 = 0, x1 = 1, y1 = 1;
  if (!rects.empty()) {
    x0 = y0 = std::numeric_limits<double>::infinity();
    x1 = y1 = -std::numeric_limits<double>::infinity();
    for (const auto& r : rects) {
      x0 = std::min(x0, r.x0), y0 = std::min(y0, r.y0);
      x1 = std::max(x1, r.x1), y1 = std::max(y1, r.y1);
    }
  }
  const double w = x1 - x0, h = y1 - y0;
  const double px = style.width_px / w;
  const int height_px = static_cast<int>(std::ceil(h * px));
  std::map<int, std::size_t> classes;
  for (const auto& r : rects) classes.emplace(r.cls, 0);
  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(style.width_px) + "\" height=\"" +
         std::to_string(height_px) + "\" viewBox=\"0 0 " + std::to_string(style.width_px) + " " +
         std::to_string(height_px) + "\">\n";
  out += "<style>\n";
  for (const auto& [cls, unused] : classes) {
    const std::string& color = style.palette[static_cast<std::size_t>(cls) % style.palette.size()];
    out += "." + style.class_prefix + "-" + std::to_string(cls) + " { fill: " + color +
           "; fill-opacity: 0.25; stroke: " + color + "; stroke-width: " + num(style.stroke) + "; }\n";
  }
  out += "</style>\n";
  for (const auto& r : rects) {
    out += "<rect class=\"" + style.class_prefix + "-" + std::to_string(r.cls) + "\" x=\"" + num((r.x0 - x0) * px) +
           "\" y=\"" + num((y1 - r.y1) * px) + "\" width=\"" + num((r.x1 - r.x0) * px) + "\" height=\"" +
           num((r.y1 - r.y0) * px) + "\"/>\n";
  }
  out += "</svg>\n";
  return out;
}

inline SvgRect svg_rect(const DyadicSquare& d, int cls) {
  const double l = d.side_d();
  const double x = static_cast<double>(d.col) * l, y = static_cast<double>(d.row) * l;
  return {x, y, x + l, y + l, cls};
}

/// Tail cells styled by layer index.
inline std::string render_tail(const TailFamily& t, SvgStyle style = {}) {
  style.class_prefix = "layer";
  std::vector<SvgRect> rects;
  for (std::size_t p = 0; p < t.layers.size(); ++p)
    for (const auto& c : t.layers[p]) rects.push_back(svg_rect(c, static_cast<int>(p)));
  return render_svg(rects, style);
}

/// tau styled by the seed whose tail produced each cell.
inline std::string render_family(const RegularizedFamily& fam, SvgStyle style = {}) {
  style.class_prefix = "seed";
  std::vector<SvgRect> rects;
  for (std::size_t i = 0; i < fam.tau.size(); ++i)
    rects.push_back(svg_rect(fam.tau[i], i < fam.provenance.size() ? fam.provenance[i].seed : 0));
  return render_svg(rects, style);
}

/// Number of <rect elements and of distinct CSS classes in an SVG document.
inline std::pair<std::size_t, std::size_t> svg_counts(const std::string& svg) {
  std::size_t rects = 0, classes = 0;
  for (std::size_t p = svg.find("<rect"); p != std::string::npos; p = svg.find("<rect", p + 1)) ++rects;
  const auto a = svg.find("<style>"), b = svg.find("</style>");
  if (a != std::string::npos && b != std::string::npos)
    for (std::size_t p = svg.find('{', a); p != std::string::npos && p < b; p = svg.find('{', p + 1)) ++classes;
  return {rects, classes};
}

}  // namespace nazarov
