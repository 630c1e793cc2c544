// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "stransport/fixtures.hpp"
#include "stransport/harness.hpp"
#include "stransport/norm.hpp"
#include "stransport/solver.hpp"

using namespace stransport;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

QuadratureConfig quad(int n) {
  QuadratureConfig q;
  q.N = n;
  q.M = n;
  return q;
}

struct Fixture {
  const char* name;
  DomainSpec dom;
  const char* u;
  const char* H;
  const char* g;
};

std::vector<Fixture> fixture_set() {
  return {{"square u=2 H=x1", fixtures::unit_square(), "2", "x1", "0"},
          {"square u=1 H=0", fixtures::unit_square(), "1", "0", "1"},
          {"lens", fixtures::lens(), "1 + x1^2/2", "exp(x2)*cos(x1)", "1 + x2"},
          {"quartic lens", fixtures::quartic_lens(), "2 + sin(x1 + x2)", "x1*x2 + 1", "x2^2"}};
}

// Ten smooth fields used by criteria 4 and 9.
std::vector<Expr> smooth_family() {
  std::vector<Expr> out;
  for (const char* t : {"1 + x1", "x2^2 - x1", "exp(x1)", "sin(2*x2) + 2", "x1*x2 + 0.5", "cos(x1 + x2)",
                        "exp(-x2)*(1 + x1^2)", "x1^3 - x2", "sqrt(2 + x1 + x2)", "1/(2 + x1*x2)"})
    out.push_back(Expr::parse(t));
  return out;
}

Outcome c1_manufactured() {
  const auto t0 = std::chrono::steady_clock::now();
  const DomainSpec sq = fixtures::unit_square();
  const SolveResult r = solve(Expr::parse("x1"), inflow_data(Expr(0.0), sq), certify_velocity(Expr(2.0), sq), sq, 256, 256);
  double err = 0.0;
  for (int j = 0; j < r.N(); ++j)
    for (int i = 0; i < r.M(); ++i)
      err = std::max(err, std::abs(r.sigma.node(j, i) - oracle::manufactured(r.grid->x1(j, i))));
  const double t = seconds_since(t0);
  return {err <= 1e-6 && t < 10.0, fmt("max nodal error %.3e (<= 1e-6), %.2f s (< 10 s)", err, t)};
}

Outcome c2_weak_residual() {
  bool ok = true;
  std::string detail;
  for (const Fixture& f : fixture_set()) {
    const VelocityField u = certify_velocity(Expr::parse(f.u), f.dom);
    const Expr H = Expr::parse(f.H);
    const CurveField g = inflow_data(Expr::parse(f.g), f.dom);
    const auto phis = default_test_functions(f.dom);
    const double a = weak_residual(solve(H, g, u, f.dom, 256, 256), H, g, u, phis).max_residual;
    const double b = weak_residual(solve(H, g, u, f.dom, 512, 512), H, g, u, phis).max_residual;
    ok = ok && a <= 1e-4 && b < a;
    detail += fmt("%s %.2e -> %.2e; ", f.name, a, b);
  }
  return {ok, detail + "(<= 1e-4 at 256, decreasing at 512)"};
}

Outcome c3_closed_form() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;
  for (auto [s, p] : {std::pair{0.5, 4.0}, {0.3, 5.0}}) {
    const double v = std::pow(seminorm_x1(Expr::parse("x1"), fixtures::unit_square(), FracParams(s, p), quad(128)), p);
    const double exact = oracle::linear_seminorm_p(s, p);
    const double rel = std::abs(v / exact - 1.0);
    ok = ok && rel < 0.01;
    detail += fmt("(s=%.1f,p=%.0f) %.6f vs %.6f rel %.1e; ", s, p, v, exact, rel);
  }
  const double t = seconds_since(t0);
  return {ok && t < 60.0, detail + fmt("%.2f s (< 60 s)", t)};
}

Outcome c4_equivalence() {
  const DomainSpec lens = fixtures::lens();
  const FracParams fp(0.45, 5);
  double lo = 1e300;
  double hi = 0.0;
  for (int n : {32, 64})
    for (const Expr& f : smooth_family()) {
      const double ratio = norm_full(f, lens, fp, quad(n)) / norm_star(f, lens, fp, quad(n));
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
  const bool ok = lo >= 0.2 && hi <= 5.0 && hi / lo <= 10.0;
  return {ok, fmt("norm_full/norm_star in [%.4f, %.4f] at N=M=32,64 (band [0.2, 5], width %.2fx <= 10x)", lo, hi, hi / lo)};
}

Outcome c5_flatness() {
  bool ok = true;
  std::string detail;
  for (auto [name, d, r, tol] : {std::tuple{"lens", fixtures::lens(), 2.0, 0.05},
                                 {"quartic lens", fixtures::quartic_lens(), 4.0, 0.1}}) {
    for (const SingularityPoint& pt : analyze_singularities(d, 1e-2)) {
      ok = ok && std::abs(pt.flatness->r - r) <= tol;
      detail += fmt("%s %s x2=%g r=%.4f; ", name, to_string(pt.side).c_str(), pt.x2, pt.flatness->r);
    }
  }
  return {ok, detail + "(2 +- 0.05, 4 +- 0.1)"};
}

Outcome c6_theorem_regime() {
  const auto t0 = std::chrono::steady_clock::now();
  const DomainSpec lens = fixtures::lens();
  const EstimateReport r = estimate_constant(lens, certify_velocity(Expr(1.0), lens), FracParams(0.45, 5),
                                             random_family(20240611, 20), quad(64));
  const double t = seconds_since(t0);
  const bool ok = r.theorem_valid && std::isfinite(r.coarse.C_emp) && *r.drift < 0.2 && t < 300.0;
  return {ok, fmt("C_emp %.5f (N=64) -> %.5f (N=128), drift %.2f%% (< 20%%), %.1f s (< 300 s)", r.coarse.C_emp,
                  r.fine->C_emp, 100 * *r.drift, t)};
}

Outcome c7_sharpness() {
  bool ok = true;
  std::string detail;
  struct Case {
    const char* name;
    DomainSpec dom;
    double p;
    double s_conv;
    double s_div;
  };
  for (const Case& c : {Case{"lens", fixtures::lens(), 5, 0.45, 0.6}, Case{"quartic lens", fixtures::quartic_lens(), 10, 0.22, 0.30}}) {
    const SweepReport r = sharpness_sweep(c.dom, c.p, {c.s_conv, c.s_div}, default_h_min_grid(c.dom), quad(64));
    const SweepRow& a = r.rows[0];
    const SweepRow& b = r.rows[1];
    ok = ok && a.verdict == Verdict::Convergent && b.verdict == Verdict::Divergent && b.relative_error < 0.15;
    detail += fmt("%s: s=%.2f %s (slope %.3f), s=%.2f %s slope %.3f vs %.3f (%.1f%%); ", c.name, a.s,
                  to_string(a.verdict).c_str(), a.fitted_slope, b.s, to_string(b.verdict).c_str(), b.fitted_slope,
                  b.predicted, 100 * b.relative_error);
  }
  return {ok, detail};
}

Outcome c8_x1_direction() {
  const DomainSpec lens = fixtures::lens();
  const X1Report r = x1_direction_check(Expr::parse("1 + x1*x2"), inflow_data(Expr::parse("1 + x2"), lens),
                                        certify_velocity(Expr(1.0), lens), lens, FracParams(0.8, 4), quad(64));
  const bool ok = r.finite && *r.drift < 0.1;
  return {ok, fmt("s=0.8 > 1/r=0.5: |sigma|_x1 %.5f -> %.5f, ratio drift %.2f%% (< 10%%)", r.coarse.sigma_seminorm_x1,
                  r.fine->sigma_seminorm_x1, 100 * *r.drift)};
}

Outcome c9_imbedding() {
  const DomainSpec lens = fixtures::lens();
  const FracParams fp(0.45, 5);
  double level[2] = {0.0, 0.0};
  int k = 0;
  for (int n : {32, 64}) {
    for (const Expr& f : smooth_family()) level[k] = std::max(level[k], imbedding_check(f, lens, fp, quad(n)).ratio);
    ++k;
  }
  const double drift = std::abs(level[1] - level[0]) / level[0];
  return {fp.sp_gt_2() && drift < 0.1,
          fmt("sp=%.2f: max sup/norm* %.5f -> %.5f, drift %.2f%% (< 10%%)", fp.s() * fp.p(), level[0], level[1], 100 * drift)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome c10_determinism() {
  const fs::path configs = fs::path(STRANSPORT_SOURCE_DIR) / "configs";
  const fs::path out = fs::path(STRANSPORT_BINARY_DIR) / "acceptance_determinism";
  struct Run {
    const char* command;
    const char* config;
    const char* extra;
    std::vector<const char*> files;
  };
  const std::vector<Run> runs = {
      {"solve", "unit_square.ini", "", {"solve_report.json", "sigma.csv"}},
      {"solve", "lens.ini", "", {"solve_report.json", "sigma.csv"}},
      {"flatness", "quartic_lens.ini", "", {"flatness_report.json"}},
      {"norm", "lens.ini", " --set params.N=16 --set params.M=16", {"norm_report.json"}},
      {"residual", "manufactured.ini", " --set params.N=64 --set params.M=64", {"residual_report.json"}},
      {"sweep", "quartic_lens.ini", "", {"sweep_report.json", "sweep.csv"}},
      {"verify", "lens.ini", " --set params.N=8 --set params.M=8 --set verify.samples=4", {"verify_report.json", "verify_samples.csv"}},
  };
  int identical = 0;
  int total = 0;
  for (const Run& r : runs) {
    const fs::path dir = out / (std::string(r.command) + "_" + r.config);
    std::vector<std::string> first;
    for (const char* threads : {"1", "4"}) {
      const std::string cmd = std::string("STRANSPORT_THREADS=") + threads + " " + STRANSPORT_CLI + " " + r.command +
                              " " + (configs / r.config).string() + r.extra + " --out " + dir.string() +
                              " > /dev/null 2>&1";
      const int status = std::system(cmd.c_str());
      if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) return {false, fmt("%s %s failed", r.command, r.config)};
      std::vector<std::string> now;
      for (const char* f : r.files) now.push_back(slurp(dir / f));
      if (first.empty()) {
        first = now;
        continue;
      }
      for (std::size_t k = 0; k < now.size(); ++k) {
        ++total;
        identical += now[k] == first[k] && !now[k].empty();
      }
    }
  }
  return {identical == total, fmt("%d/%d artifacts byte-identical across repeated runs (1 and 4 workers)", identical, total)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"1 manufactured-solution exactness", c1_manufactured},
      {"2 weak-formulation residual", c2_weak_residual},
      {"3 closed-form Slobodetskii fixture", c3_closed_form},
      {"4 norm-equivalence witness", c4_equivalence},
      {"5 flatness recovery", c5_flatness},
      {"6 theorem-regime stability", c6_theorem_regime},
      {"7 sharpness threshold", c7_sharpness},
      {"8 geometry-free x1 estimate", c8_x1_direction},
      {"9 imbedding diagnostic", c9_imbedding},
      {"10 determinism", c10_determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s criterion %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
