// stransport: command-line driver.
//
//   stransport <command> CONFIG [--set section.key=value]... [--out DIR]
//
// Commands: solve, norm, flatness, residual, verify, sweep. The JSON report
// is printed to stdout and written to DIR/<command>_report.json; solve also
// writes sigma.csv, verify writes verify_samples.csv and sweep writes
// sweep.csv. Exit codes: 0 success, 2 parse/config error, 3 modelling
// assumption violated, 4 numeric failure.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>

#include "stransport/config.hpp"
#include "stransport/field.hpp"
#include "stransport/geometry.hpp"
#include "stransport/harness.hpp"
#include "stransport/norm.hpp"
#include "stransport/report.hpp"
#include "stransport/solver.hpp"

namespace fs = std::filesystem;
using namespace stransport;

namespace {

struct Context {
  RunConfig cfg;
  DomainSpec dom;
  fs::path dir;
};

std::ofstream open_output(const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw NumericError("cannot write '" + path.string() + "'");
  return os;
}

VelocityField velocity(const Context& c) {
  VelocityField u = certify_velocity(Expr::parse(c.cfg.u), c.dom);
  require_well_posed(classify_boundary(c.dom, u, c.cfg.boundary_samples, c.cfg.threshold));
  return u;
}

Json cmd_solve(const Context& c) {
  const VelocityField u = velocity(c);
  const Expr H = Expr::parse(c.cfg.H);
  const CurveField g = inflow_data(Expr::parse(c.cfg.sigma_in), c.dom);
  const SolveResult res = solve(H, g, u, c.dom, c.cfg.N, c.cfg.M);
  const WeakResidual wr = weak_residual(res, H, g, u, default_test_functions(c.dom));
  std::ofstream csv = open_output(c.dir / "sigma.csv");
  res.sigma.write_csv(csv);
  return Json{{"velocity", to_json(u)}, {"solve", to_json(res)}, {"weak_residual", to_json(wr)}};
}

Json cmd_norm(const Context& c) {
  const Expr f = Expr::parse(c.cfg.H);
  const FracParams fp = c.cfg.frac();
  const QuadratureConfig quad = c.cfg.quadrature();
  return Json{{"field", f.str()},
              {"norm", to_json(norm_report(f, c.dom, fp, quad, {c.cfg.full, c.cfg.refine}))},
              {"imbedding", to_json(imbedding_check(f, c.dom, fp, quad))},
              {"boundary_field", Expr::parse(c.cfg.sigma_in).str()},
              {"boundary_norm", to_json(boundary_norm(inflow_data(Expr::parse(c.cfg.sigma_in), c.dom),
                                                      fp, quad, c.cfg.boundary_metric()))}};
}

Json cmd_flatness(const Context& c) {
  const VelocityField u = certify_velocity(Expr::parse(c.cfg.u), c.dom);
  const BoundaryPartition part = classify_boundary(c.dom, u, c.cfg.boundary_samples, c.cfg.threshold);
  const auto pts = analyze_singularities(c.dom, c.cfg.window, c.cfg.flatness_samples);
  Json arr = Json::array();
  for (const SingularityPoint& pt : pts) arr.push_back(to_json(pt));
  return Json{{"ux_star", c.dom.ux_star()},
              {"ox_star", c.dom.ox_star()},
              {"partition", to_json(part)},
              {"singularities", arr},
              {"r", domain_flatness(pts)}};
}

Json cmd_residual(const Context& c) {
  const VelocityField u = velocity(c);
  const Expr H = Expr::parse(c.cfg.H);
  const CurveField g = inflow_data(Expr::parse(c.cfg.sigma_in), c.dom);
  const auto phis = default_test_functions(c.dom);
  Json phi_text = Json::array();
  for (const TestFunction& tf : phis) phi_text.push_back(tf.phi().str());
  Json levels = Json::array();
  for (int k : {1, 2}) {
    const SolveResult res = solve(H, g, u, c.dom, k * c.cfg.N, k * c.cfg.M);
    const WeakResidual wr = weak_residual(res, H, g, u, phis);
    Json j = to_json(wr);
    j["N"] = res.N();
    j["M"] = res.M();
    levels.push_back(j);
  }
  const bool decreasing = levels[1]["max_residual"].get<double>() < levels[0]["max_residual"].get<double>();
  return Json{{"test_functions", phi_text}, {"levels", levels}, {"decreasing", decreasing}};
}

Json cmd_verify(const Context& c) {
  const VelocityField u = velocity(c);
  const FracParams fp = c.cfg.frac();
  const QuadratureConfig quad = c.cfg.quadrature();
  const auto family = random_family(c.cfg.seed, c.cfg.samples);
  EstimateOptions opt;
  opt.allow_out_of_regime = c.cfg.allow_out_of_regime;
  opt.refine = c.cfg.refine;
  opt.window = c.cfg.window;
  opt.flatness_samples = c.cfg.flatness_samples;
  const EstimateReport est = estimate_constant(c.dom, u, fp, family, quad, opt);

  std::ofstream csv = open_output(c.dir / "verify_samples.csv");
  csv.precision(17);
  csv << "level,N,M,sample,H,sigma_in,ratio\n";
  auto rows = [&](const char* name, const EstimateLevel& l) {
    for (std::size_t k = 0; k < l.samples.size(); ++k)
      csv << name << ',' << l.N << ',' << l.M << ',' << k << ",\"" << family[k].H.str() << "\",\""
          << family[k].sigma_in.str() << "\"," << l.samples[k].ratio << '\n';
  };
  rows("coarse", est.coarse);
  if (est.fine) rows("fine", *est.fine);

  Json fam = Json::array();
  for (const Sample& s : family) fam.push_back(Json{{"H", s.H.str()}, {"sigma_in", s.sigma_in.str()}});
  const Expr H = Expr::parse(c.cfg.H);
  const CurveField g = inflow_data(Expr::parse(c.cfg.sigma_in), c.dom);
  return Json{{"family", fam},
              {"estimate", to_json(est)},
              {"terms", to_json(term_integrals(H, g, c.dom, est.fp, quad, c.cfg.refine))},
              {"x1_direction", to_json(x1_direction_check(H, g, u, c.dom, fp, quad, c.cfg.refine))}};
}

Json cmd_sweep(const Context& c) {
  const auto grid = c.cfg.h_min_grid.empty() ? default_h_min_grid(c.dom, c.cfg.levels) : c.cfg.h_min_grid;
  const SweepReport rep = sharpness_sweep(c.dom, c.cfg.p, c.cfg.s_grid, grid, c.cfg.quadrature(),
                                          c.cfg.window, c.cfg.flatness_samples);
  std::ofstream csv = open_output(c.dir / "sweep.csv");
  write_sweep_csv(csv, rep);
  return to_json(rep);
}

int run(const std::string& command, const std::function<Json(const Context&)>& body,
        const std::string& config, const std::vector<std::string>& overrides) {
  try {
    RunConfig cfg = load_config(config, overrides);
    Context c{cfg, cfg.domain(), fs::path(cfg.dir)};
    fs::create_directories(c.dir);
    const std::string text = dump(envelope(command, c.cfg, body(c)));
    std::ofstream out = open_output(c.dir / (command + "_report.json"));
    out << text;
    std::cout << text;
    return 0;
  } catch (const Error& e) {
    std::cerr << "stransport " << command << ": " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "stransport " << command << ": " << e.what() << '\n';
    return exit_code(ErrorKind::Numeric);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Steady transport solver and Sobolev-Slobodetskii estimate checks"};
  app.require_subcommand(1);

  const std::map<std::string, std::pair<std::string, std::function<Json(const Context&)>>> commands = {
      {"solve", {"solve the transport problem, write sigma.csv", cmd_solve}},
      {"norm", {"norms of data.H and boundary norm of data.sigma_in", cmd_norm}},
      {"flatness", {"boundary partition, singular points and flatness exponents", cmd_flatness}},
      {"residual", {"weak-formulation residual at two mesh levels", cmd_residual}},
      {"verify", {"empirical a priori constant, term integrals, x1 estimate", cmd_verify}},
      {"sweep", {"sharpness sweep of the boundary kernel across s = 1/r", cmd_sweep}},
  };

  std::string config;
  std::vector<std::string> overrides;
  std::string out_dir;
  std::string chosen;
  for (const auto& [name, entry] : commands) {
    CLI::App* sub = app.add_subcommand(name, entry.first);
    sub->add_option("config", config, "INI config file")->required();
    sub->add_option("--set", overrides, "override a config key: section.key=value");
    sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
    sub->callback([&chosen, name = name] { chosen = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : exit_code(ErrorKind::Parse);
  }
  if (!out_dir.empty()) overrides.push_back("output.dir=" + out_dir);
  return run(chosen, commands.at(chosen).second, config, overrides);
}
