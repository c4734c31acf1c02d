#pragma once

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "curv4/chart.hpp"
#include "curv4/errors.hpp"
#include "curv4/example_metrics.hpp"

namespace curv4 {

enum class ExampleKind {
  constant_curvature,
  product_surfaces,
  line_cross_space,
  kpc_warped,
  bump_nonharmonic,
  perturbed_flat,
};

inline const char* to_string(ExampleKind k) {
  switch (k) {
    case ExampleKind::constant_curvature: return "constant_curvature";
    case ExampleKind::product_surfaces: return "product_surfaces";
    case ExampleKind::line_cross_space: return "line_cross_space";
    case ExampleKind::kpc_warped: return "kpc_warped";
    case ExampleKind::bump_nonharmonic: return "bump_nonharmonic";
    case ExampleKind::perturbed_flat: return "perturbed_flat";
  }
  return "?";
}

inline ExampleKind parse_kind(const std::string& s) {
  for (auto k : {ExampleKind::constant_curvature, ExampleKind::product_surfaces,
                 ExampleKind::line_cross_space, ExampleKind::kpc_warped,
                 ExampleKind::bump_nonharmonic, ExampleKind::perturbed_flat})
    if (s == to_string(k)) return k;
  throw InputError("unknown example kind: " + s);
}

struct ExpectedInvariants {
  std::optional<int> r;
  std::optional<int> w;
  std::optional<std::string> case_label;
  std::optional<std::vector<double>> ricci_eigenvalues;
  std::optional<bool> harmonic;
};

struct ExampleSpec {
  std::string name;
  ExampleKind kind = ExampleKind::constant_curvature;
  std::map<std::string, double> params;
  ExpectedInvariants expected;
  double third_tol = 1e-4;

  double param(const std::string& key) const {
    const auto it = params.find(key);
    if (it == params.end()) throw InputError("example '" + name + "' lacks parameter " + key);
    return it->second;
  }
};

namespace detail {

inline std::vector<double> parse_reals(const std::string& text, std::size_t n,
                                       const std::string& name) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      throw InputError("bad number '" + tok + "' in example " + name);
    }
    if (used != tok.size() || !std::isfinite(v))
      throw InputError("bad number '" + tok + "' in example " + name);
    out.push_back(v);
  }
  if (out.size() != n)
    throw InputError("example " + name + " expects " + std::to_string(n) + " parameters");
  return out;
}

inline void fill_expected(ExampleSpec& e) {
  auto& x = e.expected;
  switch (e.kind) {
    case ExampleKind::constant_curvature:
      x.r = 1;
      x.case_label = "A";
      x.harmonic = true;
      break;
    case ExampleKind::product_surfaces: {
      const double k1 = e.param("k1"), k2 = e.param("k2");
      x.harmonic = true;
      if (k1 == k2) {
        x.r = 1;
        x.case_label = "A";
      } else {
        x.r = 2;
        x.w = k1 == -k2 ? 1 : 2;
        x.case_label = k1 == -k2 ? "B" : "C";
        x.ricci_eigenvalues = std::vector<double>{std::min(k1, k2), std::min(k1, k2),
                                                  std::max(k1, k2), std::max(k1, k2)};
      }
      break;
    }
    case ExampleKind::line_cross_space: {
      const double c = e.param("c");
      x.harmonic = true;
      x.r = 2;
      x.w = 1;
      x.case_label = "B";
      x.ricci_eigenvalues = std::vector<double>{0.0, 2.0 * c, 2.0 * c, 2.0 * c};
      break;
    }
    case ExampleKind::kpc_warped: {
      x.harmonic = true;
      const double c = e.param("c"), r = e.param("r"), K0 = e.param("K0");
      if (std::abs(K0 + c - r) > 1e-12) {
        x.w = 2;
        x.case_label = "C";
      }
      break;
    }
    case ExampleKind::bump_nonharmonic:
      x.harmonic = e.param("a") == 0.0;
      break;
    case ExampleKind::perturbed_flat:
      break;
  }
}

}  // namespace detail

/// Default profile integration for kpc examples.
inline constexpr double kKpcSpan = 1.5;
inline constexpr int kKpcSteps = 6000;

/// Canonical names: s4, h4, flat, s2xs2:k1,k2, rxs3:c, kpc:c,r,K0, kpc-default,
/// bump:a, pflat:seed.
inline ExampleSpec resolve_example(const std::string& name) {
  ExampleSpec e;
  e.name = name;
  const auto colon = name.find(':');
  const std::string head = name.substr(0, colon);
  const std::string tail = colon == std::string::npos ? "" : name.substr(colon + 1);
  auto need_args = [&](bool want) {
    if (want == tail.empty()) throw InputError("malformed example name: " + name);
  };
  if (head == "s4" || head == "h4" || head == "flat") {
    need_args(false);
    e.kind = ExampleKind::constant_curvature;
    e.params["K0"] = head == "s4" ? 1.0 : head == "h4" ? -1.0 : 0.0;
  } else if (head == "s2xs2") {
    need_args(true);
    const auto v = detail::parse_reals(tail, 2, name);
    e.kind = ExampleKind::product_surfaces;
    e.params = {{"k1", v[0]}, {"k2", v[1]}};
  } else if (head == "rxs3") {
    need_args(true);
    const auto v = detail::parse_reals(tail, 1, name);
    if (!(v[0] > 0.0)) throw InputError("rxs3 needs c > 0");
    e.kind = ExampleKind::line_cross_space;
    e.params = {{"c", v[0]}};
  } else if (head == "kpc" || head == "kpc-default") {
    std::vector<double> v{1.0, 1.2, 0.5};
    if (head == "kpc") {
      need_args(true);
      v = detail::parse_reals(tail, 3, name);
    } else {
      need_args(false);
    }
    e.kind = ExampleKind::kpc_warped;
    e.params = {{"c", v[0]}, {"r", v[1]}, {"K0", v[2]}};
    e.third_tol = 1e-3;
  } else if (head == "bump") {
    need_args(true);
    const auto v = detail::parse_reals(tail, 1, name);
    if (!(v[0] >= 0.0 && v[0] < 0.5)) throw InputError("bump amplitude must lie in [0, 0.5)");
    e.kind = ExampleKind::bump_nonharmonic;
    e.params = {{"a", v[0]}};
  } else if (head == "pflat") {
    need_args(true);
    const auto v = detail::parse_reals(tail, 1, name);
    e.kind = ExampleKind::perturbed_flat;
    e.params = {{"seed", v[0]}};
  } else {
    throw InputError("unknown example: " + name);
  }
  detail::fill_expected(e);
  return e;
}

/// JSON form: {"name"?, "kind", "parameters": {...}, "expected"?: {...},
/// "third_tol"?}.
inline ExampleSpec example_from_json(const nlohmann::json& j) {
  try {
    ExampleSpec e;
    e.kind = parse_kind(j.at("kind").get<std::string>());
    for (const auto& [k, v] : j.at("parameters").items()) e.params[k] = v.get<double>();
    e.name = j.value("name", std::string(to_string(e.kind)));
    if (e.kind == ExampleKind::kpc_warped) e.third_tol = 1e-3;
    e.third_tol = j.value("third_tol", e.third_tol);
    detail::fill_expected(e);
    if (j.contains("expected")) {
      const auto& x = j.at("expected");
      auto& ex = e.expected;
      if (x.contains("r")) ex.r = x.at("r").get<int>();
      if (x.contains("w")) ex.w = x.at("w").get<int>();
      if (x.contains("case")) ex.case_label = x.at("case").get<std::string>();
      if (x.contains("eigenvalues")) ex.ricci_eigenvalues = x.at("eigenvalues").get<std::vector<double>>();
      if (x.contains("harmonic")) ex.harmonic = x.at("harmonic").get<bool>();
    }
    return e;
  } catch (const nlohmann::json::exception& err) {
    throw InputError(std::string("malformed example spec: ") + err.what());
  }
}

inline ExampleSpec example_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open example spec " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& err) {
    throw InputError("malformed example spec " + path + ": " + err.what());
  }
  return example_from_json(j);
}

inline examples::SurfaceProfile example_profile(const ExampleSpec& e) {
  if (e.kind != ExampleKind::kpc_warped) throw InputError(e.name + " has no surface profile");
  return examples::solve_kpc_profile(e.param("c"), e.param("r"), e.param("K0"), kKpcSpan,
                                     kKpcSteps);
}

inline MetricChart build_chart(const ExampleSpec& e) {
  switch (e.kind) {
    case ExampleKind::constant_curvature:
      return examples::make_constant_curvature(e.param("K0"), e.name);
    case ExampleKind::product_surfaces:
      return examples::make_product_surfaces(e.param("k1"), e.param("k2"), e.name);
    case ExampleKind::line_cross_space:
      return examples::make_line_cross_space(e.param("c"), e.name);
    case ExampleKind::kpc_warped:
      return examples::make_kpc_warped(example_profile(e), e.param("c"), e.name);
    case ExampleKind::bump_nonharmonic:
      return examples::make_bump_nonharmonic(e.param("a"), e.name);
    case ExampleKind::perturbed_flat:
      return examples::make_perturbed_flat(static_cast<std::uint64_t>(e.param("seed")), 0.1, e.name);
  }
  throw InputError("unhandled example kind");
}

}  // namespace curv4
