#pragma once

#include <vector>

namespace plus {

// One linear piece of the unit-scale penalty derivative:
//   rho_dot_m(t) = intercept + slope * t   on [knots[k], knots[k+1])
// (the last piece extends to +infinity).
struct DerivSegment {
  double intercept = 0.0;
  double slope = 0.0;
};

// Quadratic spline penalty in unit scale (lambda = 1), with the scaling law
//   rho(t; lambda) = lambda^2 * rho_m(t / lambda).
//
// Knots are 0 = t_0 < t_1 < ... < t_{m-1}. rho_dot_m is continuous on
// (0, inf), equals 1 at 0+, and for MCP/SCAD vanishes beyond gamma.
// Segment membership uses half-open intervals [t_k, t_{k+1}), i.e. the
// derivative takes the right-limit at knots.
class QuadSplinePenalty {
 public:
  QuadSplinePenalty(std::vector<double> knots, std::vector<DerivSegment> segments, double gamma);

  int num_knots() const { return static_cast<int>(knots_.size()); }  // m
  const std::vector<double>& knots() const { return knots_; }
  const std::vector<DerivSegment>& deriv_segments() const { return segs_; }
  double gamma() const { return gamma_; }  // +inf for l1

  // Index k of the half-open segment [knots[k], knots[k+1]) containing t >= 0.
  int segment_index(double t) const;

  // Unit scale (lambda = 1).
  double value_unit(double t) const;
  double deriv_unit(double t) const;      // right-limit at knots; deriv_unit(0) = 1
  double curvature_unit(double t) const;  // rho_ddot_m, right-limit at knots
  // Like curvature_unit but at a knot returns the more concave (smaller)
  // of the two adjacent slopes.
  double curvature_concave_side(double t) const;

  // Lambda scale.
  double value(double t, double lambda) const;  // t >= 0
  double deriv(double t, double lambda) const;  // t > 0 strictly
  double deriv_zero_plus(double lambda) const;  // limit at 0+, equals lambda
  double max_concavity() const;                 // kappa(rho_m; 1), scale free

 private:
  std::vector<double> knots_;
  std::vector<DerivSegment> segs_;
  std::vector<double> knot_values_;  // value_unit at each knot
  double gamma_;
};

QuadSplinePenalty make_l1();
QuadSplinePenalty make_mcp(double gamma);   // gamma > 0
QuadSplinePenalty make_scad(double gamma);  // gamma > 2

}  // namespace plus
