#pragma once

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "curv4/chart.hpp"
#include "curv4/errors.hpp"
#include "curv4/frames.hpp"
#include "curv4/registry.hpp"
#include "curv4/variety.hpp"

namespace curv4 {

using nlohmann::json;

inline constexpr const char* kSchemaVersion = "1";

enum class ExitCode : int { pass = 0, fail = 1, usage = 2 };

struct RunConfig {
  std::string example;
  std::string spec_file;
  int samples = 16;
  double step = 1e-3;
  int order = 4;
  Tolerances tol;
  std::optional<double> tol_third;  // overrides the per-example default
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "json";

  void validate() const {
    if (samples < 1) throw InputError("--samples must be >= 1");
    if (format != "json" && format != "csv") throw InputError("--format must be json or csv");
    if (example.empty() == spec_file.empty())
      throw InputError("exactly one of --example or --spec is required");
    PipelineConfig::from_step(step, order);
  }

  ExampleSpec resolve() const {
    return spec_file.empty() ? resolve_example(example) : example_from_file(spec_file);
  }

  json echo() const {
    json j{{"samples", samples},
           {"step", step},
           {"order", order},
           {"seed", seed},
           {"format", format},
           {"tolerances",
            {{"algebraic", tol.algebraic}, {"second", tol.second}, {"third", tol.third}}}};
    if (!example.empty()) j["example"] = example;
    if (!spec_file.empty()) j["spec"] = spec_file;
    if (tol_third) j["tolerances"]["third"] = *tol_third;
    return j;
  }
};

/// Report document plus the exit status it implies.
struct Report {
  json doc;
  bool pass = false;

  ExitCode exit_code() const { return pass ? ExitCode::pass : ExitCode::fail; }
};

namespace detail {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

inline json to_json(const Vec4& x) { return json::array({x[0], x[1], x[2], x[3]}); }

inline json to_json(const InvariantCounts& c) {
  return {{"r", c.r}, {"w", c.w}, {"w_minus", c.w_minus}, {"d", c.d}};
}

inline double max_abs_f(const RicciFrame& fr) {
  double m = 0.0;
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 4; ++i)
      if (i != j) m = std::max(m, std::abs(fr.Fji(j, i)));
  return m;
}

inline void bump(json& maxima, const std::string& key, double v) {
  if (!std::isfinite(v)) return;
  if (!maxima.contains(key) || maxima[key].get<double>() < v) maxima[key] = v;
}

struct PointRecord {
  json residuals = json::object();
  SpectralSample sample;
  std::optional<RicciFrame> frame;
  std::string frame_note;
};

inline PointRecord verify_point(const MetricChart& chart, const Vec4& x, const PipelineConfig& cfg,
                                const HarmonicityPoint& hp) {
  PointRecord rec;
  auto& r = rec.residuals;
  r["brt"] = hp.bianchi;
  r["d_ric"] = hp.d_ric;
  r["div_r"] = hp.div_r;
  r["div_w"] = hp.div_w;
  r["ds"] = hp.ds;

  const CurvaturePoint cp = curvature_at(chart, x, cfg.inner);
  const double rn = std::max(cp.R.norm(), 1e-300);
  r["curv_symmetry"] = symmetry_residuals(cp.R).max() / rn;
  r["weyl_ricci"] = ricci_contract(cp.W, cp.g).ric.b.norm() / rn;

  try {
    rec.frame = extract_frame(chart, x, cfg);
    rec.sample = spectral_sample(*rec.frame);
    const SkwResiduals sk = skw_residuals(*rec.frame);
    r["skw.a"] = sk.a;
    r["skw.b"] = sk.b;
    r["skw.c"] = sk.c;
    r["skw.d"] = sk.d;
    r["skw.e"] = sk.e;
    r["skw.f"] = sk.f;
    r["ric_offdiag"] = rec.frame->ric_offdiag;
    rec.frame_note = to_string(rec.frame->source);
  } catch (const DegenerateFrameError&) {
    rec.sample = spectral_sample(cp);
    rec.frame_note = "degenerate";
  } catch (const Error& e) {
    rec.sample = spectral_sample(cp);
    rec.frame_note = std::string("error: ") + e.what();
  }
  const double wscale = std::max(1.0, rec.sample.scale);
  double trw = 0.0, wme = 0.0;
  double tp = 0.0, tm = 0.0;
  for (int a = 0; a < 3; ++a) {
    tp += rec.sample.wp[a];
    tm += rec.sample.wm[a];
    wme = std::max(wme, std::abs(rec.sample.wp[a] - rec.sample.wm[a]));
  }
  trw = std::max(std::abs(tp), std::abs(tm)) / wscale;
  r["trw"] = trw;
  r["wme"] = wme;
  return rec;
}

struct VerifyCore {
  json points = json::array();
  json summary;
  bool pass = false;
};

inline VerifyCore verify_core(const ExampleSpec& spec, const RunConfig& cfg) {
  const MetricChart chart = build_chart(spec);
  const PipelineConfig pc = PipelineConfig::from_step(cfg.step, cfg.order);
  const double third = cfg.tol_third.value_or(std::max(cfg.tol.third, spec.third_tol));
  const auto xs = sample_points(chart.domain(), cfg.samples, cfg.seed);

  const HarmonicityReport hr = harmonicity_report(chart, xs, pc, third);
  std::vector<PointRecord> recs(xs.size());
  parallel_for(xs.size(), [&](std::size_t i) { recs[i] = verify_point(chart, xs[i], pc, hr.points[i]); });

  VerifyCore out;
  json maxima = json::object();
  std::vector<SpectralSample> samples;
  bool skw_ok = true, frames_ok = true;
  double max_skw = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto& rec = recs[i];
    samples.push_back(rec.sample);
    for (const auto& [k, v] : rec.residuals.items()) bump(maxima, k, v.get<double>());
    if (rec.frame) {
      const double m = skw_residuals(*rec.frame).max();
      max_skw = std::max(max_skw, m);
      skw_ok = skw_ok && m <= third;
    }
    if (rec.frame_note.rfind("error", 0) == 0) frames_ok = false;
    out.points.push_back({{"x", to_json(xs[i])},
                          {"residuals", rec.residuals},
                          {"counts", to_json(invariant_counts({rec.sample}))},
                          {"frame", rec.frame_note}});
  }
  const InvariantCounts counts = invariant_counts(samples);

  const Vec4 centre = chart.domain().center();
  json centre_j{{"x", to_json(centre)}};
  const CurvaturePoint ccp = curvature_at(chart, centre, pc.inner);
  {
    const Mat4 E = ccp.g.orthonormal_frame();
    const auto ev = sym_eigen(E.transpose() * ccp.ric.ric.b * E).values;
    json ric = json::array();
    for (int i = 0; i < ev.size(); ++i) ric.push_back(ev[i]);
    centre_j["ricci_eigenvalues"] = ric;
    centre_j["s"] = ccp.ric.s;
  }
  try {
    const RicciFrame fr = extract_frame(chart, centre, pc);
    centre_j["frame"] = to_string(fr.source);
    centre_j["max_abs_F"] = max_abs_f(fr);
    centre_j["sigma"] = fr.sigma;
    centre_j["lambda"] = fr.lambda;
    if (fr.distinct_gamma() <= 1e-4) {
      const auto sc = curvature_from_structure(structure_data(chart, centre, pc), fr);
      centre_j["nii"] = structure_curvature_error(sc, fr);
    }
  } catch (const DegenerateFrameError&) {
    centre_j["frame"] = "degenerate";
  } catch (const Error& e) {
    centre_j["frame"] = std::string("error: ") + e.what();
  }

  const double rn_tol = cfg.tol.algebraic;
  const bool identities = maxima.value("brt", 0.0) <= cfg.tol.second &&
                          maxima.value("curv_symmetry", 0.0) <= rn_tol &&
                          maxima.value("weyl_ricci", 0.0) <= rn_tol &&
                          maxima.value("trw", 0.0) <= rn_tol;

  json expected_j = json::object();
  bool expected_ok = true;
  const auto& ex = spec.expected;
  if (ex.r) {
    expected_j["r"] = *ex.r;
    expected_ok = expected_ok && counts.r == *ex.r;
  }
  if (ex.w) {
    expected_j["w"] = *ex.w;
    expected_ok = expected_ok && counts.w == *ex.w;
  }
  if (ex.case_label) {
    expected_j["case"] = *ex.case_label;
    expected_ok = expected_ok && counts.case_label == *ex.case_label;
  }
  if (ex.ricci_eigenvalues) {
    expected_j["eigenvalues"] = *ex.ricci_eigenvalues;
    const auto& got = centre_j["ricci_eigenvalues"];
    for (std::size_t i = 0; i < 4; ++i)
      expected_ok = expected_ok && std::abs(got[i].get<double>() - (*ex.ricci_eigenvalues)[i]) <= 1e-6;
  }
  if (ex.harmonic) expected_j["harmonic"] = *ex.harmonic;

  json verdicts{{"harmonic", hr.harmonic},
                {"identities", identities},
                {"skw", skw_ok},
                {"frames", frames_ok},
                {"expected", expected_ok}};
  out.pass = hr.harmonic && identities && skw_ok && frames_ok && expected_ok;
  verdicts["pass"] = out.pass;
  maxima["skw"] = max_skw;
  maxima["scalar_spread"] = hr.scalar_spread;

  out.summary = {{"example", spec.name},
                 {"kind", to_string(spec.kind)},
                 {"parameters", spec.params},
                 {"verdicts", verdicts},
                 {"maxima", maxima},
                 {"counts", to_json(counts)},
                 {"case", counts.case_label},
                 {"expected", expected_j},
                 {"centre", centre_j},
                 {"tolerance_third", third}};
  return out;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string o = "\"";
  for (char c : s) o += c == '"' ? std::string("\"\"") : std::string(1, c);
  return o + "\"";
}

}  // namespace detail

inline Report cmd_verify(const RunConfig& cfg) {
  cfg.validate();
  detail::Stopwatch clock;
  const ExampleSpec spec = cfg.resolve();
  detail::VerifyCore core = detail::verify_core(spec, cfg);
  Report rep;
  rep.pass = core.pass;
  rep.doc = {{"schema_version", kSchemaVersion},
             {"command", "verify"},
             {"config", cfg.echo()},
             {"points", std::move(core.points)},
             {"summary", std::move(core.summary)},
             {"timing", {{"wall_seconds", clock.seconds()}}}};
  return rep;
}

/// Per-point residual table: one row per sample, columns sorted by name.
inline void write_points_csv(std::ostream& os, const json& doc) {
  std::vector<std::string> keys;
  for (const auto& p : doc.at("points"))
    for (const auto& [k, v] : p.at("residuals").items())
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  os << "# curv4 " << doc.at("command").get<std::string>() << " report, schema "
     << doc.at("schema_version").get<std::string>() << "\n";
  os << "# columns: sample coordinates x0..x3, residuals by name, counts r w w_minus d\n";
  os << "x0,x1,x2,x3";
  for (const auto& k : keys) os << ',' << k;
  os << ",r,w,w_minus,d\n";
  const auto old = os.precision(17);
  for (const auto& p : doc.at("points")) {
    for (int a = 0; a < 4; ++a) os << (a ? "," : "") << p.at("x")[a].get<double>();
    for (const auto& k : keys) {
      os << ',';
      if (p.at("residuals").contains(k)) os << p.at("residuals").at(k).get<double>();
    }
    const auto& c = p.at("counts");
    os << ',' << c.at("r") << ',' << c.at("w") << ',' << c.at("w_minus") << ',' << c.at("d") << '\n';
  }
  os.precision(old);
}

// ---------------------------------------------------------------- variety

inline json to_json(const VarietyPoint& p) {
  json F = json::array();
  for (const auto& [j, i] : detail::kOrdered) F.push_back(p.Fji(j, i));
  return {{"F", F}, {"sigma", p.sigma}, {"lambda", p.lambda}, {"s", p.s}};
}

inline VarietyPoint variety_point_from_json(const json& j) {
  try {
    VarietyPoint p;
    const auto F = j.at("F").get<std::vector<double>>();
    const auto sg = j.at("sigma").get<std::vector<double>>();
    const auto lm = j.at("lambda").get<std::vector<double>>();
    if (F.size() != 12 || sg.size() != 6 || lm.size() != 4)
      throw InputError("variety point needs 12 F, 6 sigma and 4 lambda values");
    for (std::size_t c = 0; c < 12; ++c) p.Fji(detail::kOrdered[c].first, detail::kOrdered[c].second) = F[c];
    std::copy(sg.begin(), sg.end(), p.sigma.begin());
    std::copy(lm.begin(), lm.end(), p.lambda.begin());
    p.s = j.value("s", 0.0);
    return p;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed variety point: ") + e.what());
  }
}

inline json to_json(const MembershipReport& m) {
  json sv = json::array();
  for (int i = 0; i < m.fsp_rank.singular_values.size(); ++i) sv.push_back(m.fsp_rank.singular_values[i]);
  return {{"eq1", m.eq1_residual},
          {"fsi", m.fsi_residual},
          {"bracket", m.bracket_residual},
          {"fsp_rank", m.fsp_rank.rank},
          {"fsp_singular_values", sv},
          {"total", m.total},
          {"verdict", m.pass ? "pass" : "fail"}};
}

/// The F = 0 point carrying the S^2(1) x S^2(2) curvature data.
inline VarietyPoint zeros_with_product_sigma() {
  VarietyPoint p;
  p.sigma = {1.0, -0.5, -0.5, -0.5, -0.5, 1.0};
  p.lambda = {-0.5, -0.5, 0.5, 0.5};
  p.s = 6.0;
  return p;
}

struct VarietyConfig {
  RunConfig run;                      // example/spec, samples, seed, stencil, out, format
  std::string from_file;
  std::string point;                  // named preset
  int sample = 0;                     // sample_variety count; 0 disables
  SampleMode mode = SampleMode::full;
  std::optional<double> tol;          // defaults: 1e-3 harvested, 1e-6 exact
  std::optional<double> rank_rtol;
};

inline std::vector<VarietyPoint> load_variety_points(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InputError("malformed frame-data file " + path + ": " + e.what());
  }
  const json* arr = &j;
  if (j.is_object() && j.contains("points")) arr = &j.at("points");
  if (!arr->is_array()) throw InputError("frame-data file must hold an array of points");
  std::vector<VarietyPoint> pts;
  for (const auto& e : *arr)
    pts.push_back(variety_point_from_json(e.contains("variety_point") ? e.at("variety_point") : e));
  if (pts.empty()) throw InputError("frame-data file holds no points");
  return pts;
}

inline Report cmd_variety(const VarietyConfig& vc) {
  detail::Stopwatch clock;
  const RunConfig& cfg = vc.run;
  if (cfg.format != "json" && cfg.format != "csv") throw InputError("--format must be json or csv");
  const int sources = !cfg.example.empty() + !cfg.spec_file.empty() + !vc.from_file.empty() +
                      !vc.point.empty() + (vc.sample > 0);
  if (sources != 1)
    throw InputError("variety needs exactly one of --from-example, --spec, --from-file, --point, --sample");

  json cfg_j = cfg.echo();
  cfg_j.erase("example");
  std::string provenance;
  bool harvested = false;
  std::vector<SampledPoint> pts;
  std::vector<std::optional<Vec4>> where;
  json notes = json::array();

  auto opts = [&](bool fd) {
    MembershipOptions o;
    o.tol = vc.tol.value_or(fd ? 1e-3 : 1e-6);
    o.rank_rtol = vc.rank_rtol.value_or(fd ? 1e-3 : 1e-8);
    return o;
  };

  if (vc.sample > 0) {
    const MembershipOptions o = opts(false);
    pts = sample_variety(cfg.seed, vc.sample, vc.mode, o);
    where.assign(pts.size(), std::nullopt);
    const char* mode = vc.mode == SampleMode::linear ? "linear" : vc.mode == SampleMode::full ? "full" : "zero-f";
    provenance = "sample_variety seed=" + std::to_string(cfg.seed) + " count=" +
                 std::to_string(vc.sample) + " mode=" + mode;
    cfg_j["sample"] = vc.sample;
    cfg_j["mode"] = mode;
  } else if (!vc.point.empty()) {
    if (vc.point != "zeros-with-product-sigma") throw InputError("unknown preset point: " + vc.point);
    const VarietyPoint p = zeros_with_product_sigma();
    pts.push_back({0, p, system_residuals(p, opts(false))});
    where.emplace_back();
    provenance = "preset " + vc.point;
    cfg_j["point"] = vc.point;
  } else if (!vc.from_file.empty()) {
    const auto loaded = load_variety_points(vc.from_file);
    const MembershipOptions o = opts(true);
    for (std::size_t i = 0; i < loaded.size(); ++i) {
      pts.push_back({i, loaded[i], system_residuals(loaded[i], o)});
      where.emplace_back();
    }
    harvested = true;
    provenance = "file " + vc.from_file;
    cfg_j["from_file"] = vc.from_file;
  } else {
    cfg.validate();
    const ExampleSpec spec = cfg.resolve();
    const MetricChart chart = build_chart(spec);
    const PipelineConfig pc = PipelineConfig::from_step(cfg.step, cfg.order);
    std::vector<Vec4> xs{chart.domain().center()};
    for (const auto& x : sample_points(chart.domain(), cfg.samples, cfg.seed)) xs.push_back(x);
    std::vector<std::optional<SampledPoint>> got(xs.size());
    std::vector<std::string> errs(xs.size());
    const MembershipOptions o = opts(true);
    parallel_for(xs.size(), [&](std::size_t i) {
      try {
        const VarietyPoint p = VarietyPoint::from_frame(extract_frame(chart, xs[i], pc));
        got[i] = SampledPoint{i, p, system_residuals(p, o)};
      } catch (const Error& e) {
        errs[i] = e.what();
      }
    });
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (got[i]) {
        pts.push_back(*got[i]);
        where.emplace_back(xs[i]);
      } else {
        notes.push_back({{"x", detail::to_json(xs[i])}, {"error", errs[i]}});
      }
    }
    harvested = true;
    provenance = "frames of " + spec.name;
    cfg_j["from_example"] = spec.name;
  }

  Report rep;
  json points = json::array();
  json maxima{{"eq1", 0.0}, {"fsi", 0.0}, {"fsp_rank", 0}};
  bool all = !pts.empty() && notes.empty();
  for (std::size_t n = 0; n < pts.size(); ++n) {
    const auto& sp = pts[n];
    json row{{"index", sp.index},
             {"variety_point", to_json(sp.point)},
             {"residuals",
              {{"eq1", sp.report.eq1_residual},
               {"fsi", sp.report.fsi_residual},
               {"fsp", sp.report.fsp_rank.rank}}},
             {"membership", to_json(sp.report)}};
    if (where[n]) row["x"] = detail::to_json(*where[n]);
    points.push_back(std::move(row));
    detail::bump(maxima, "eq1", sp.report.eq1_residual);
    detail::bump(maxima, "fsi", sp.report.fsi_residual);
    maxima["fsp_rank"] = std::max(maxima["fsp_rank"].get<int>(), sp.report.fsp_rank.rank);
    if (vc.sample == 0 || vc.mode != SampleMode::linear) all = all && sp.report.pass;
  }
  rep.pass = vc.sample > 0 || all;
  rep.doc = {{"schema_version", kSchemaVersion},
             {"command", "variety"},
             {"config", cfg_j},
             {"provenance", provenance},
             {"points", std::move(points)},
             {"summary",
              {{"verdicts", {{"membership", all}, {"harvested", harvested}}},
               {"maxima", maxima},
               {"count", pts.size()},
               {"frame_errors", notes}}},
             {"timing", {{"wall_seconds", clock.seconds()}}}};
  std::ostringstream csv;
  write_variety_csv(csv, pts, provenance);
  rep.doc["csv"] = csv.str();
  return rep;
}

// ------------------------------------------------------------------- scan

struct ScanConfig {
  RunConfig run;  // samples, step, order, tolerances, seed, out, format
  std::string family;
  std::vector<std::vector<double>> axes;
};

inline std::vector<std::string> scan_axis_names(const std::string& family) {
  if (family == "product_surfaces") return {"k1", "k2"};
  if (family == "line_cross_space") return {"c"};
  if (family == "kpc_warped") return {"c", "r", "K0"};
  if (family == "bump_nonharmonic") return {"a"};
  if (family == "constant_curvature") return {"K0"};
  throw InputError("unknown scan family: " + family);
}

inline std::string scan_cell_name(const std::string& family, const std::vector<double>& v) {
  auto num = [](double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
  };
  std::string args;
  for (std::size_t i = 0; i < v.size(); ++i) args += (i ? "," : "") + num(v[i]);
  if (family == "product_surfaces") return "s2xs2:" + args;
  if (family == "line_cross_space") return "rxs3:" + args;
  if (family == "kpc_warped") return "kpc:" + args;
  if (family == "bump_nonharmonic") return "bump:" + args;
  return {};
}

inline ExampleSpec scan_cell_spec(const std::string& family, const std::vector<double>& v) {
  if (family == "constant_curvature") {
    ExampleSpec e;
    e.kind = ExampleKind::constant_curvature;
    e.params["K0"] = v[0];
    std::ostringstream os;
    os.precision(17);
    os << "constant_curvature:" << v[0];
    e.name = os.str();
    e.expected.r = 1;
    e.expected.case_label = "A";
    e.expected.harmonic = true;
    return e;
  }
  return resolve_example(scan_cell_name(family, v));
}

inline Report cmd_scan(const ScanConfig& sc) {
  detail::Stopwatch clock;
  const RunConfig& cfg = sc.run;
  if (cfg.samples < 1) throw InputError("--samples must be >= 1");
  if (cfg.format != "json" && cfg.format != "csv") throw InputError("--format must be json or csv");
  PipelineConfig::from_step(cfg.step, cfg.order);
  const auto names = scan_axis_names(sc.family);
  if (sc.axes.size() != names.size())
    throw InputError("family " + sc.family + " needs " + std::to_string(names.size()) + " axes");
  std::size_t cells = 1;
  for (const auto& a : sc.axes) {
    if (a.empty()) throw InputError("empty scan axis");
    cells *= a.size();
  }
  std::vector<std::vector<double>> grid(cells);
  for (std::size_t n = 0; n < cells; ++n) {
    std::size_t rem = n;
    grid[n].resize(sc.axes.size());
    for (std::size_t a = sc.axes.size(); a-- > 0;) {
      grid[n][a] = sc.axes[a][rem % sc.axes[a].size()];
      rem /= sc.axes[a].size();
    }
  }
  std::vector<ExampleSpec> specs;
  for (const auto& v : grid) specs.push_back(scan_cell_spec(sc.family, v));

  std::vector<json> rows(cells);
  std::vector<char> ok(cells, 0);
  parallel_for(cells, [&](std::size_t n) {
    json row{{"cell", n}, {"example", specs[n].name}, {"parameters", specs[n].params}};
    try {
      const detail::VerifyCore core = detail::verify_core(specs[n], cfg);
      row["summary"] = core.summary;
      ok[n] = core.pass;
    } catch (const Error& e) {
      row["error"] = e.what();
    }
    rows[n] = std::move(row);
  });

  json points = json::array();
  json maxima = json::object();
  std::size_t passed = 0;
  for (std::size_t n = 0; n < cells; ++n) {
    passed += ok[n];
    if (rows[n].contains("summary"))
      for (const auto& [k, v] : rows[n]["summary"]["maxima"].items()) detail::bump(maxima, k, v.get<double>());
    points.push_back(std::move(rows[n]));
  }
  json axes = json::object();
  for (std::size_t a = 0; a < names.size(); ++a) axes[names[a]] = sc.axes[a];
  json cfg_j = cfg.echo();
  cfg_j.erase("example");
  cfg_j["family"] = sc.family;
  cfg_j["axes"] = axes;

  Report rep;
  rep.pass = passed == cells;
  rep.doc = {{"schema_version", kSchemaVersion},
             {"command", "scan"},
             {"config", cfg_j},
             {"points", std::move(points)},
             {"summary",
              {{"verdicts", {{"pass", rep.pass}, {"cells", cells}, {"cells_passed", passed}}},
               {"maxima", maxima}}},
             {"timing", {{"wall_seconds", clock.seconds()}}}};
  return rep;
}

/// One row per cell with the headline maxima and counts.
inline void write_scan_csv(std::ostream& os, const json& doc) {
  os << "# curv4 scan report, schema " << doc.at("schema_version").get<std::string>() << "\n";
  os << "# columns: cell, example, pass, max d_ric, max div_w, max ds, max brt, max skw, r, w, d, case\n";
  os << "cell,example,pass,d_ric,div_w,ds,brt,skw,r,w,d,case\n";
  const auto old = os.precision(17);
  for (const auto& p : doc.at("points")) {
    os << p.at("cell") << ',' << detail::csv_escape(p.at("example").get<std::string>()) << ',';
    if (!p.contains("summary")) {
      os << "error,,,,,,,,,\n";
      continue;
    }
    const auto& s = p.at("summary");
    const auto& m = s.at("maxima");
    os << (s.at("verdicts").at("pass").get<bool>() ? "pass" : "fail");
    for (const char* k : {"d_ric", "div_w", "ds", "brt", "skw"}) os << ',' << m.value(k, 0.0);
    const auto& c = s.at("counts");
    os << ',' << c.at("r") << ',' << c.at("w") << ',' << c.at("d") << ','
       << s.at("case").get<std::string>() << '\n';
  }
  os.precision(old);
}

/// Writes the report in the configured format to path, or stdout when empty.
/// The variety CSV is the sampled point cloud.
inline void write_report(const Report& rep, const std::string& format, const std::string& path) {
  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!path.empty()) {
    file.open(path);
    if (!file) throw InputError("cannot write " + path);
    os = &file;
  }
  const std::string cmd = rep.doc.at("command").get<std::string>();
  if (format == "csv") {
    if (cmd == "variety")
      *os << rep.doc.at("csv").get<std::string>();
    else if (cmd == "scan")
      write_scan_csv(*os, rep.doc);
    else
      write_points_csv(*os, rep.doc);
  } else {
    json doc = rep.doc;
    doc.erase("csv");
    *os << doc.dump(2) << '\n';
  }
}

}  // namespace curv4
