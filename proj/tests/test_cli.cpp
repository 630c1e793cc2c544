#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(STRANSPORT_SOURCE_DIR) / "configs";
const fs::path kScratch = fs::path(STRANSPORT_BINARY_DIR) / "cli_scratch";

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + STRANSPORT_CLI + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

nlohmann::json report(const fs::path& dir, const std::string& command) {
  return nlohmann::json::parse(slurp(dir / (command + "_report.json")));
}

std::string cfg(const char* name) { return (kConfigs / name).string(); }

}  // namespace

TEST_CASE("cmd_solve on the rectangle fixture") {
  const fs::path out = kScratch / "solve";
  REQUIRE(run("solve " + cfg("unit_square.ini") + " --out " + out.string()) == 0);
  std::ifstream csv(out / "sigma.csv");
  std::string line;
  std::getline(csv, line);
  CHECK(line == "x2,x1,value");
  double err = 0.0;
  int rows = 0;
  while (std::getline(csv, line)) {
    double x2 = 0, x1 = 0, v = 0;
    char c1 = 0, c2 = 0;
    std::istringstream(line) >> x2 >> c1 >> x1 >> c2 >> v;
    err = std::max(err, std::abs(v - std::exp(-x1)));
    ++rows;
  }
  CHECK(rows == 256 * 256);
  CHECK(err <= 1e-6);
  const auto r = report(out, "solve");
  CHECK(r["result"]["weak_residual"]["max_residual"].get<double>() <= 1e-4);
  CHECK(r["config"]["velocity"]["u"] == "1");
}

TEST_CASE("exit codes") {
  const std::string out = " --out " + (kScratch / "codes").string();
  CHECK(run("solve " + cfg("unit_square.ini") + " --set velocity.u=x2" + out) == 3);
  CHECK(run("solve " + cfg("unit_square.ini") + " --set 'data.H=exp(x1' " + out) == 2);
  CHECK(run("solve " + cfg("unit_square.ini") + " --set params.N=2" + out) == 2);
  CHECK(run("solve /nonexistent.ini" + out) == 2);
  CHECK(run("frobnicate " + cfg("unit_square.ini")) == 2);
  CHECK(run("") == 2);
  CHECK(run("sweep " + cfg("unit_square.ini") + out) == 3);
  CHECK(run("solve " + cfg("unit_square.ini") + " --set 'data.H=log(x1)'" + out) == 4);
  CHECK(run("--help") == 0);
}

TEST_CASE("cmd_flatness on the lens") {
  const fs::path out = kScratch / "flatness";
  REQUIRE(run("flatness " + cfg("lens.ini") + " --out " + out.string()) == 0);
  const auto r = report(out, "flatness");
  CHECK(std::abs(r["result"]["r"].get<double>() - 2.0) < 0.05);
  CHECK(r["result"]["singularities"].size() == 4);
  CHECK(r["result"]["partition"]["well_posed"] == true);
}

TEST_CASE("cmd_norm on a constant field") {
  const fs::path out = kScratch / "norm";
  REQUIRE(run("norm " + cfg("lens.ini") + " --set params.N=16 --set params.M=16 --out " + out.string()) == 0);
  const auto v = report(out, "norm")["result"]["norm"]["value"];
  CHECK(v["seminorm_x1"] == 0.0);
  CHECK(v["seminorm_x2"] == 0.0);
  CHECK(v["full_seminorm"] == 0.0);
}

TEST_CASE("cmd_residual and cmd_sweep") {
  const fs::path out = kScratch / "residual";
  REQUIRE(run("residual " + cfg("manufactured.ini") + " --set params.N=64 --set params.M=64 --out " +
              out.string()) == 0);
  CHECK(report(out, "residual")["result"]["decreasing"] == true);

  const fs::path sw = kScratch / "sweep";
  REQUIRE(run("sweep " + cfg("lens.ini") + " --out " + sw.string()) == 0);
  const auto rows = report(sw, "sweep")["result"]["rows"];
  REQUIRE(rows.size() == 2);
  CHECK(rows[0]["verdict"] == "convergent");
  CHECK(rows[1]["verdict"] == "divergent");
  CHECK(slurp(sw / "sweep.csv").rfind("s,x2,h_min,K,fitted_slope\n", 0) == 0);
}

TEST_CASE("identical configs give byte-identical reports") {
  const fs::path dir = kScratch / "determinism";
  const std::string args = "verify " + cfg("lens.ini") +
                           " --set params.N=8 --set params.M=8 --set verify.samples=3 --out " + dir.string();
  REQUIRE(run(args) == 0);
  const std::string report_a = slurp(dir / "verify_report.json");
  const std::string csv_a = slurp(dir / "verify_samples.csv");
  REQUIRE(run(args, "STRANSPORT_THREADS=3") == 0);
  CHECK(slurp(dir / "verify_report.json") == report_a);
  CHECK(slurp(dir / "verify_samples.csv") == csv_a);
}
