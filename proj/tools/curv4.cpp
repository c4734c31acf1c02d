// curv4: verify harmonic-curvature examples, test variety membership and scan
// parameter grids. Exit codes: 0 pass, 1 verified failure, 2 usage error.

#include <CLI11.hpp>

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "curv4/curv4.hpp"

namespace {

void add_run_options(CLI::App& cmd, curv4::RunConfig& cfg) {
  cmd.add_option("--samples", cfg.samples, "sample points per example")->capture_default_str();
  cmd.add_option("--step", cfg.step, "inner finite-difference step (outer is 5x)")->capture_default_str();
  cmd.add_option("--order", cfg.order, "stencil order")->check(CLI::IsMember({2, 4, 6}))->capture_default_str();
  cmd.add_option("--tol-algebraic", cfg.tol.algebraic)->capture_default_str();
  cmd.add_option("--tol-second", cfg.tol.second)->capture_default_str();
  cmd.add_option_function<double>("--tol-third", [&cfg](double v) { cfg.tol_third = v; },
                                  "third-tier tolerance (default per example)");
  cmd.add_option("--seed", cfg.seed)->capture_default_str();
  cmd.add_option("--out", cfg.out, "output path (stdout if omitted)");
  cmd.add_option("--format", cfg.format)->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t used = 0;
    try {
      v.push_back(std::stod(tok, &used));
    } catch (const std::exception&) {
      throw curv4::InputError("bad grid value '" + tok + "'");
    }
    if (used != tok.size()) throw curv4::InputError("bad grid value '" + tok + "'");
  }
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"curv4: numerical checks for harmonic curvature in dimension four"};
  app.require_subcommand(1);

  curv4::RunConfig verify_cfg;
  auto* verify = app.add_subcommand("verify", "run harmonicity, frame and invariant checks");
  verify->add_option("--example", verify_cfg.example, "registry name, e.g. s2xs2:1,2");
  verify->add_option("--spec", verify_cfg.spec_file, "JSON example spec");
  add_run_options(*verify, verify_cfg);

  curv4::VarietyConfig vc;
  std::string mode = "full";
  auto* variety = app.add_subcommand("variety", "evaluate the polynomial system on (F, sigma)");
  variety->add_option("--from-example", vc.run.example, "harvest frame data from an example");
  variety->add_option("--spec", vc.run.spec_file, "JSON example spec to harvest from");
  variety->add_option("--from-file", vc.from_file, "JSON file of harvested points");
  variety->add_option("--point", vc.point, "named point (zeros-with-product-sigma)");
  variety->add_option("--sample", vc.sample, "draw N points with sample_variety");
  variety->add_option("--mode", mode, "sampler mode")
      ->check(CLI::IsMember({"linear", "full", "zero-f"}))
      ->capture_default_str();
  variety->add_option_function<double>("--tol", [&vc](double v) { vc.tol = v; },
                                       "membership tolerance");
  variety->add_option_function<double>("--rank-rtol", [&vc](double v) { vc.rank_rtol = v; },
                                       "relative SVD threshold for the rank test");
  add_run_options(*variety, vc.run);

  curv4::ScanConfig sc;
  std::vector<std::string> axes_text;
  auto* scan = app.add_subcommand("scan", "verify every cell of a parameter grid");
  scan->add_option("--family", sc.family, "product_surfaces | line_cross_space | kpc_warped | bump_nonharmonic | constant_curvature")
      ->required();
  scan->add_option("--axis", axes_text, "comma-separated values, one flag per parameter in order")->required();
  add_run_options(*scan, sc.run);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(curv4::ExitCode::usage);
  }

  try {
    curv4::Report rep;
    std::string format, out;
    if (*verify) {
      rep = curv4::cmd_verify(verify_cfg);
      format = verify_cfg.format;
      out = verify_cfg.out;
    } else if (*variety) {
      vc.mode = curv4::parse_sample_mode(mode);
      rep = curv4::cmd_variety(vc);
      format = vc.run.format;
      out = vc.run.out;
    } else {
      for (const auto& t : axes_text) sc.axes.push_back(parse_list(t));
      rep = curv4::cmd_scan(sc);
      format = sc.run.format;
      out = sc.run.out;
    }
    curv4::write_report(rep, format, out);
    return static_cast<int>(rep.exit_code());
  } catch (const curv4::InputError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return static_cast<int>(curv4::ExitCode::usage);
  } catch (const curv4::DomainError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return static_cast<int>(curv4::ExitCode::usage);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(curv4::ExitCode::fail);
  }
}
