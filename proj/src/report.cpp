#include "stransport/report.hpp"

#include <limits>

namespace stransport {

Json to_json(const RunConfig& cfg) {
  Json out = Json::object();
  for (const auto& [key, value] : resolved_entries(cfg)) {
    const auto dot = key.find('.');
    out[key.substr(0, dot)][key.substr(dot + 1)] = value;
  }
  return out;
}

Json to_json(const QuadratureConfig& q) {
  return Json{{"N", q.N},         {"M", q.M},   {"h_min", q.h_min},       {"h_max", q.h_max},
              {"q", q.q}, {"subcells", q.subcells}, {"node_budget", q.node_budget}};
}

Json to_json(const NormParts& p) {
  Json out{{"lp", p.lp},
           {"seminorm_x1", p.seminorm_x1},
           {"seminorm_x2", p.seminorm_x2},
           {"norm_star", p.norm_star}};
  if (p.full_seminorm) {
    out["full_seminorm"] = *p.full_seminorm;
    out["norm_full"] = *p.norm_full;
  }
  return out;
}

Json to_json(const NormReport& r) {
  Json out{{"value", to_json(r.value)}, {"quadrature", to_json(r.quad)}};
  if (r.refined) {
    out["refined"] = to_json(*r.refined);
    out["refined_quadrature"] = to_json(r.quad.refined());
  }
  out["warnings"] = r.warnings;
  return out;
}

Json to_json(const BoundaryNorm& n) {
  return Json{{"metric", to_string(n.metric)}, {"length", n.length}, {"lp", n.lp},
              {"seminorm", n.seminorm},       {"norm", n.norm}};
}

Json to_json(const ImbeddingReport& r) {
  return Json{{"sup", r.sup},         {"norm_star", r.norm_star}, {"ratio", r.ratio},
              {"sp_gt_2", r.sp_gt_2}, {"warnings", r.warnings}};
}

Json to_json(const VelocityField& u) {
  return Json{{"u", u.u().str()},
              {"lower_bound", u.lower_bound()},
              {"sampled_min", u.sampled_min()},
              {"sampled_max", u.sampled_max()},
              {"lipschitz", u.lipschitz()},
              {"margin", u.margin()}};
}

Json to_json(const SingularityPoint& pt) {
  Json out{{"x1", pt.x1}, {"x2", pt.x2}, {"side", to_string(pt.side)}};
  if (pt.flatness) {
    out["r"] = pt.flatness->r;
    out["C"] = pt.flatness->C;
    out["fit_quality"] = pt.flatness->fit_quality;
    out["samples"] = pt.flatness->samples;
    out["certified"] = pt.flatness->certified();
  }
  return out;
}

namespace {

Json segments(const std::vector<Segment>& segs) {
  Json out = Json::array();
  for (const Segment& s : segs) out.push_back(Json{{"x1_lo", s.x1_lo}, {"x1_hi", s.x1_hi}, {"x2", s.x2}});
  return out;
}

}  // namespace

Json to_json(const BoundaryPartition& p) {
  Json violations = Json::array();
  for (const SignViolation& v : p.violations)
    violations.push_back(Json{{"side", to_string(v.side)}, {"x2", v.x2}, {"d", v.d}});
  Json gs = Json::array();
  for (const SingularityPoint& pt : p.gamma_s) gs.push_back(to_json(pt));
  return Json{{"inflow_samples", p.inflow_samples},
              {"inflow_verified", p.inflow_verified},
              {"outflow_samples", p.outflow_samples},
              {"outflow_verified", p.outflow_verified},
              {"tangent_samples", p.tangent_samples},
              {"well_posed", p.well_posed()},
              {"violations", violations},
              {"gamma0", segments(p.gamma0)},
              {"gamma_s", gs}};
}

Json to_json(const SolveResult& r) {
  return Json{{"N", r.N()},
              {"M", r.M()},
              {"M1", r.m1},
              {"M2", r.m2},
              {"max_slice_error", r.max_slice_error()},
              {"slice_error", r.slice_error}};
}

Json to_json(const WeakResidual& r) {
  return Json{{"max_residual", r.max_residual}, {"lhs", r.lhs}, {"rhs", r.rhs}, {"residual", r.residual}};
}

namespace {

Json terms(const TermLevel& t) {
  return Json{{"J0", t.J0}, {"J1", t.J1}, {"J2", t.J2}, {"quadrature", to_json(t.quad)}};
}

Json optional(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json level(const EstimateLevel& l) {
  Json samples = Json::array();
  for (const SampleRatio& s : l.samples)
    samples.push_back(Json{{"sigma_norm", s.sigma_norm},
                           {"H_norm", s.H_norm},
                           {"sigma_in_norm", s.sigma_in_norm},
                           {"ratio", s.ratio}});
  return Json{{"N", l.N}, {"M", l.M}, {"C_emp", l.C_emp}, {"samples", samples}};
}

Json x1level(const X1Level& l) {
  return Json{{"N", l.N},
              {"M", l.M},
              {"sigma_seminorm_x1", l.sigma_seminorm_x1},
              {"H_norm_star", l.H_norm_star},
              {"sigma_in_norm", l.sigma_in_norm},
              {"ratio", l.ratio}};
}

}  // namespace

Json to_json(const TermReport& r) {
  Json out{{"delta", r.delta}, {"value", terms(r.value)}};
  if (r.refined) out["refined"] = terms(*r.refined);
  out["bounds"] = Json{{"sigma_in_norm", r.sigma_in_norm},
                       {"H_seminorm_x2", r.H_seminorm_x2},
                       {"H_norm_star", r.H_norm_star}};
  out["implied_constants"] = Json{{"C0", optional(r.C0)}, {"C1", optional(r.C1)}, {"C2", optional(r.C2)}};
  return out;
}

Json to_json(const EstimateReport& r) {
  Json out{{"s", r.fp.s()},
           {"p", r.fp.p()},
           {"r", r.r},
           {"theorem_valid", r.theorem_valid},
           {"override_used", r.override_used},
           {"coarse", level(r.coarse)}};
  if (r.fine) out["fine"] = level(*r.fine);
  out["drift"] = optional(r.drift);
  out["warnings"] = r.warnings;
  return out;
}

Json to_json(const SweepReport& r) {
  Json rows = Json::array();
  for (const SweepRow& row : r.rows) {
    Json pts = Json::array();
    for (const SweepPoint& sp : row.points) {
      Json offs = Json::array();
      for (const auto& [o, k] : sp.offsets) offs.push_back(Json{{"offset", o}, {"K", k}});
      pts.push_back(Json{{"x2", sp.x2},
                         {"direction", sp.direction},
                         {"fitted_slope", sp.fitted_slope},
                         {"K", sp.K},
                         {"offsets", offs}});
    }
    rows.push_back(Json{{"s", row.s},
                        {"predicted_exponent", row.predicted},
                        {"fitted_slope", row.fitted_slope},
                        {"relative_error", row.relative_error},
                        {"verdict", to_string(row.verdict)},
                        {"points", pts}});
  }
  return Json{{"r", r.r},         {"epsilon", r.epsilon}, {"p", r.p},
              {"delta", r.delta}, {"h_min_grid", r.h_min_grid}, {"rows", rows}};
}

Json to_json(const X1Report& r) {
  Json out{{"coarse", x1level(r.coarse)}};
  if (r.fine) out["fine"] = x1level(*r.fine);
  out["drift"] = optional(r.drift);
  out["finite"] = r.finite;
  out["homogeneous"] = r.homogeneous;
  out["notes"] = r.notes;
  return out;
}

Json envelope(const std::string& command, const RunConfig& cfg, Json result) {
  return Json{{"command", command}, {"config", to_json(cfg)}, {"result", std::move(result)}};
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void write_sweep_csv(std::ostream& os, const SweepReport& r) {
  const auto old = os.precision(std::numeric_limits<double>::max_digits10);
  os << "s,x2,h_min,K,fitted_slope\n";
  for (const SweepRow& row : r.rows)
    for (const SweepPoint& sp : row.points)
      for (std::size_t k = 0; k < sp.K.size(); ++k)
        os << row.s << ',' << sp.x2 << ',' << r.h_min_grid[k] << ',' << sp.K[k] << ','
           << sp.fitted_slope << '\n';
  os.precision(old);
}

}  // namespace stransport
