#pragma once

// Run configuration: one INI file per experiment, optionally patched by
// "section.key=value" overrides. Unknown sections or keys are rejected so a
// typo never silently falls back to a default.

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "stransport/expr.hpp"
#include "stransport/geometry.hpp"
#include "stransport/norm.hpp"

namespace stransport {

struct RunConfig {
  // [domain]
  double a = 0.0;
  double b = 1.0;
  std::string ux;
  std::string ox;
  std::vector<double> ux_tangencies;
  std::vector<double> ox_tangencies;
  // [velocity]
  std::string u = "1";
  // [data]
  std::string H = "0";
  std::string sigma_in = "0";
  // [params]
  double s = 0.45;
  double p = 5.0;
  int N = 64;
  int M = 64;
  double h_min = 1e-6;
  double h_max = 0.1;
  double q = 0.5;
  int subcells = 8;
  std::uint64_t seed = 20240611;
  // [geometry]
  double window = 1e-2;
  int flatness_samples = 12;
  double threshold = kDefaultTangencyThreshold;
  int boundary_samples = 1000;
  // [norm]
  bool full = true;
  bool refine = true;
  std::string metric = "arc_length";
  // [sweep]
  std::vector<double> s_grid{0.45, 0.6};
  std::vector<double> h_min_grid;  ///< empty: 1e-2 (b - a) 2^-k, k < levels
  int levels = 15;
  // [verify]
  int samples = 20;
  bool allow_out_of_regime = false;
  // [output]
  std::string dir = ".";

  QuadratureConfig quadrature() const;
  FracParams frac() const;
  BoundaryMetric boundary_metric() const;
  DomainSpec domain() const;
};

/// Reads INI text and applies overrides in order. Throws ConfigError for
/// unknown keys, unreadable values or invariant violations (N, M >= 4,
/// 0 < s < 1, p >= 1, ...), ParseError for malformed expressions.
RunConfig parse_config(std::istream& in, const std::vector<std::string>& overrides = {});
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// Every key with its resolved value, as "section.key" -> text, sorted.
std::vector<std::pair<std::string, std::string>> resolved_entries(const RunConfig& cfg);

}  // namespace stransport
