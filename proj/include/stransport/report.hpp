#pragma once

// JSON reports. Keys keep insertion order and doubles print in shortest
// round-trip form, so identical runs give byte-identical files.

#include <json.hpp>
#include <ostream>
#include <string>

#include "stransport/config.hpp"
#include "stransport/field.hpp"
#include "stransport/geometry.hpp"
#include "stransport/harness.hpp"
#include "stransport/norm.hpp"
#include "stransport/solver.hpp"

namespace stransport {

using Json = nlohmann::ordered_json;

/// Resolved config grouped by section.
Json to_json(const RunConfig& cfg);
Json to_json(const QuadratureConfig& quad);
Json to_json(const NormParts& parts);
Json to_json(const NormReport& report);
Json to_json(const BoundaryNorm& norm);
Json to_json(const ImbeddingReport& report);
Json to_json(const VelocityField& u);
Json to_json(const SingularityPoint& pt);
Json to_json(const BoundaryPartition& partition);
/// Mesh, M1, M2 and slice error estimates; node values go to CSV.
Json to_json(const SolveResult& res);
Json to_json(const WeakResidual& res);
Json to_json(const TermReport& report);
Json to_json(const EstimateReport& report);
Json to_json(const SweepReport& report);
Json to_json(const X1Report& report);

/// {"command", "config", "result"} envelope.
Json envelope(const std::string& command, const RunConfig& cfg, Json result);

/// Two-space indented text with a trailing newline.
std::string dump(const Json& j);

/// Rows "s,x2,h_min,K,fitted_slope".
void write_sweep_csv(std::ostream& os, const SweepReport& report);

}  // namespace stransport
