#pragma once

// Built-in test domains.

#include "stransport/geometry.hpp"

namespace stransport::fixtures {

/// Disk of radius 1/2 centred at (0, 1/2): ux = -sqrt(x2(1-x2)), ox = -ux.
/// Vertical tangents at (0, 0) and (0, 1) with flatness r = 2.
inline DomainSpec lens() {
  return DomainSpec(0.0, 1.0, BoundaryCurve(Side::Inflow, Expr::parse("-sqrt(x2*(1-x2))")),
                    BoundaryCurve(Side::Outflow, Expr::parse("sqrt(x2*(1-x2))")));
}

/// ux = -(x2(1-x2))^(1/4), ox = -ux; flatness r = 4.
inline DomainSpec quartic_lens() {
  return DomainSpec(0.0, 1.0, BoundaryCurve(Side::Inflow, Expr::parse("-(x2*(1-x2))^(1/4)")),
                    BoundaryCurve(Side::Outflow, Expr::parse("(x2*(1-x2))^(1/4)")));
}

inline DomainSpec unit_square() {
  return DomainSpec(0.0, 1.0, BoundaryCurve(Side::Inflow, Expr(0.0)),
                    BoundaryCurve(Side::Outflow, Expr(1.0)));
}

}  // namespace stransport::fixtures
