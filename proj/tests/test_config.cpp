#include <doctest.h>

#include <sstream>

#include "stransport/config.hpp"
#include "stransport/report.hpp"

using namespace stransport;

namespace {

const char* kLens = R"(
; comment
[domain]
a = 0
b = 1
ux = -sqrt(x2*(1-x2))
ox = sqrt(x2*(1-x2))

[velocity]
u = 1 + x1^2

[params]
s = 0.45
p = 5
N = 32
M = 16

[sweep]
s_grid = 0.45, 0.6
)";

RunConfig parse_text(const std::string& text, const std::vector<std::string>& overrides = {}) {
  std::istringstream in(text);
  return parse_config(in, overrides);
}

}  // namespace

TEST_CASE("config parsing and defaults") {
  const RunConfig c = parse_text(kLens);
  CHECK(c.ux == "-sqrt(x2*(1-x2))");
  CHECK(c.u == "1 + x1^2");
  CHECK(c.N == 32);
  CHECK(c.M == 16);
  CHECK(c.s_grid == std::vector<double>{0.45, 0.6});
  CHECK(c.H == "0");
  CHECK(c.h_min == 1e-6);
  CHECK(c.quadrature().N == 32);
  CHECK(c.frac().p() == 5.0);
  CHECK(c.domain().ux(0.5) == doctest::Approx(-0.5));
  CHECK(c.boundary_metric() == BoundaryMetric::ArcLength);
}

TEST_CASE("overrides patch keys in order") {
  const RunConfig c = parse_text(kLens, {"params.N=8", "data.H = exp(x1)", "params.N=12", "norm.full=false"});
  CHECK(c.N == 12);
  CHECK(c.H == "exp(x1)");
  CHECK(!c.full);
}

TEST_CASE("invalid configs") {
  CHECK_THROWS_AS(parse_text(kLens, {"params.N=3"}), ConfigError);
  CHECK_THROWS_AS(parse_text(kLens, {"params.s=1.5"}), ConfigError);
  CHECK_THROWS_AS(parse_text(kLens, {"params.p=0.5"}), ConfigError);
  CHECK_THROWS_AS(parse_text(kLens, {"params.N=ten"}), ConfigError);
  CHECK_THROWS_AS(parse_text(kLens, {"params.nn=3"}), ConfigError);
  CHECK_THROWS_AS(parse_text(kLens, {"nonsense"}), ConfigError);
  CHECK_THROWS_AS(parse_text(kLens, {"norm.metric=euclid"}), ConfigError);
  CHECK_THROWS_AS(parse_text(kLens, {"data.H=x1 +"}), ParseError);
  CHECK_THROWS_AS(parse_text(std::string(kLens) + "\n[extra]\nkey = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_text("[domain]\nux = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_text("[domain\nux = 0\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/file.ini"), ConfigError);
  try {
    parse_text(kLens, {"params.N=3"});
  } catch (const Error& e) {
    CHECK(exit_code(e.kind()) == 2);
  }
}

TEST_CASE("resolved config lists every key") {
  const RunConfig c = parse_text(kLens);
  const auto entries = resolved_entries(c);
  CHECK(entries.size() == 31);
  const Json j = to_json(c);
  CHECK(j["params"]["N"] == "32");
  CHECK(j["sweep"]["s_grid"] == "0.45, 0.6");
  CHECK(j["domain"]["ux"] == "-sqrt(x2*(1-x2))");
  // Re-parsing the resolved entries reproduces the config.
  std::vector<std::string> all;
  for (const auto& [k, v] : entries) all.push_back(k + "=" + v);
  CHECK(to_json(parse_text("", all)) == j);
}

TEST_CASE("reports are deterministic text") {
  const RunConfig c = parse_text(kLens);
  QuadratureConfig q;
  const std::string a = dump(envelope("norm", c, to_json(q)));
  const std::string b = dump(envelope("norm", c, to_json(q)));
  CHECK(a == b);
  CHECK(a.back() == '\n');
  CHECK(a.find("\"command\": \"norm\"") != std::string::npos);
  CHECK(a.find("\"config\"") < a.find("\"result\""));
}
