#include "stransport/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace stransport {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
  const auto lo = s.find_first_not_of(" \t\r\n");
  if (lo == std::string::npos) return "";
  const auto hi = s.find_last_not_of(" \t\r\n");
  return s.substr(lo, hi - lo + 1);
}

double to_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw ConfigError(key + ": expected a number, got '" + text + "'");
  return v;
}

template <class Int>
Int to_int(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  Int v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw ConfigError(key + ": expected an integer, got '" + text + "'");
  return v;
}

bool to_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(to_double(key, item));
  }
  return out;
}

std::string fmt(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string fmt(const std::vector<double>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) out += (k ? ", " : "") + fmt(v[k]);
  return out;
}

std::string fmt(bool v) { return v ? "true" : "false"; }

// Getter/setter pair for one config key.
struct Field {
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class T>
Field number(T RunConfig::*m) {
  return {[m](RunConfig& c, const std::string& k, const std::string& v) {
            if constexpr (std::is_floating_point_v<T>)
              c.*m = to_double(k, v);
            else
              c.*m = to_int<T>(k, v);
          },
          [m](const RunConfig& c) {
            if constexpr (std::is_floating_point_v<T>)
              return fmt(c.*m);
            else
              return std::to_string(c.*m);
          }};
}

Field text(std::string RunConfig::*m) {
  return {[m](RunConfig& c, const std::string&, const std::string& v) { c.*m = trim(v); },
          [m](const RunConfig& c) { return c.*m; }};
}

Field flag(bool RunConfig::*m) {
  return {[m](RunConfig& c, const std::string& k, const std::string& v) { c.*m = to_bool(k, v); },
          [m](const RunConfig& c) { return fmt(c.*m); }};
}

Field list(std::vector<double> RunConfig::*m) {
  return {[m](RunConfig& c, const std::string& k, const std::string& v) { c.*m = to_list(k, v); },
          [m](const RunConfig& c) { return fmt(c.*m); }};
}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = {
      {"domain.a", number(&RunConfig::a)},
      {"domain.b", number(&RunConfig::b)},
      {"domain.ux", text(&RunConfig::ux)},
      {"domain.ox", text(&RunConfig::ox)},
      {"domain.ux_tangencies", list(&RunConfig::ux_tangencies)},
      {"domain.ox_tangencies", list(&RunConfig::ox_tangencies)},
      {"velocity.u", text(&RunConfig::u)},
      {"data.H", text(&RunConfig::H)},
      {"data.sigma_in", text(&RunConfig::sigma_in)},
      {"params.s", number(&RunConfig::s)},
      {"params.p", number(&RunConfig::p)},
      {"params.N", number(&RunConfig::N)},
      {"params.M", number(&RunConfig::M)},
      {"params.h_min", number(&RunConfig::h_min)},
      {"params.h_max", number(&RunConfig::h_max)},
      {"params.q", number(&RunConfig::q)},
      {"params.subcells", number(&RunConfig::subcells)},
      {"params.seed", number(&RunConfig::seed)},
      {"geometry.window", number(&RunConfig::window)},
      {"geometry.flatness_samples", number(&RunConfig::flatness_samples)},
      {"geometry.threshold", number(&RunConfig::threshold)},
      {"geometry.boundary_samples", number(&RunConfig::boundary_samples)},
      {"norm.full", flag(&RunConfig::full)},
      {"norm.refine", flag(&RunConfig::refine)},
      {"norm.metric", text(&RunConfig::metric)},
      {"sweep.s_grid", list(&RunConfig::s_grid)},
      {"sweep.h_min_grid", list(&RunConfig::h_min_grid)},
      {"sweep.levels", number(&RunConfig::levels)},
      {"verify.samples", number(&RunConfig::samples)},
      {"verify.allow_out_of_regime", flag(&RunConfig::allow_out_of_regime)},
      {"output.dir", text(&RunConfig::dir)},
  };
  return table;
}

void set_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  const auto it = fields().find(key);
  if (it == fields().end()) throw ConfigError("unknown config key '" + key + "'");
  it->second.set(cfg, key, value);
}

void validate(const RunConfig& cfg) {
  if (cfg.ux.empty() || cfg.ox.empty()) throw ConfigError("domain.ux and domain.ox are required");
  for (const std::string* e : {&cfg.ux, &cfg.ox, &cfg.u, &cfg.H, &cfg.sigma_in}) Expr::parse(*e);
  if (!(cfg.a < cfg.b)) throw ConfigError("domain needs a < b");
  if (cfg.N < 4 || cfg.M < 4) throw ConfigError("params.N and params.M must be >= 4");
  (void)cfg.frac();
  cfg.quadrature().validate();
  (void)cfg.boundary_metric();
  if (!(cfg.window > 0.0)) throw ConfigError("geometry.window must be positive");
  if (cfg.flatness_samples < 3) throw ConfigError("geometry.flatness_samples must be >= 3");
  if (cfg.boundary_samples < 2) throw ConfigError("geometry.boundary_samples must be >= 2");
  if (cfg.levels < 3) throw ConfigError("sweep.levels must be >= 3");
  if (cfg.samples < 1) throw ConfigError("verify.samples must be >= 1");
  for (double s : cfg.s_grid)
    if (!(s > 0.0 && s < 1.0)) throw ConfigError("sweep.s_grid entries must lie in (0, 1)");
}

}  // namespace

QuadratureConfig RunConfig::quadrature() const {
  QuadratureConfig q;
  q.N = N;
  q.M = M;
  q.h_min = h_min;
  q.h_max = h_max;
  q.q = this->q;
  q.subcells = subcells;
  return q;
}

FracParams RunConfig::frac() const { return FracParams(s, p); }

BoundaryMetric RunConfig::boundary_metric() const {
  if (metric == "arc_length") return BoundaryMetric::ArcLength;
  if (metric == "parameter") return BoundaryMetric::Parameter;
  throw ConfigError("norm.metric must be arc_length or parameter, got '" + metric + "'");
}

DomainSpec RunConfig::domain() const {
  return DomainSpec(a, b, BoundaryCurve(Side::Inflow, Expr::parse(ux), ux_tangencies),
                    BoundaryCurve(Side::Outflow, Expr::parse(ox), ox_tangencies));
}

RunConfig parse_config(std::istream& in, const std::vector<std::string>& overrides) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.message() + " at line " + std::to_string(e.line()));
  }
  RunConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ConfigError("config key '" + section + "' must belong to a section");
    for (const auto& [key, value] : body) set_key(cfg, section + "." + key, value.data());
  }
  for (const std::string& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + o + "' is not section.key=value");
    set_key(cfg, trim(o.substr(0, eq)), o.substr(eq + 1));
  }
  validate(cfg);
  return cfg;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in, overrides);
}

std::vector<std::pair<std::string, std::string>> resolved_entries(const RunConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [key, field] : fields()) out.emplace_back(key, field.get(cfg));
  return out;
}

}  // namespace stransport
