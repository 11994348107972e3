#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "plus/design.hpp"
#include "plus/kkt.hpp"
#include "plus/penalty.hpp"
#include "plus/selection.hpp"

namespace plus {

// Facet of the rescaled solution surface: eta_j = 0 means b_j = 0; eta_j =
// +/-k means sgn(b_j) = +/-1 with |b_j| in the k-th spline interval
// [knots[k-1], knots[k]) (k = m extends past the last knot). The surface
// splits into (2m+1)^p such parallelepipeds.
using FacetState = std::vector<std::int8_t>;

struct PathEvent {
  enum Kind { Origin, Activate, Deactivate, KnotCross, TerminateFit, TerminateCap };
  Kind kind = Origin;
  int j = -1;     // coordinate (0-based) for Activate/Deactivate/KnotCross
  int knot = -1;  // index into knots() for KnotCross
  std::string label() const;  // e.g. "activate(3)", "knot_cross(3;1)" with 1-based j
};

struct PathBreakpoint {
  int step = 0;
  double tau = 0.0;    // rescaled inverse penalty level, tau = 1/lambda
  Eigen::VectorXd b;   // rescaled coefficients, b = tau * beta
  FacetState facet;    // facet of the segment ending at this breakpoint
  PathEvent event;
};

enum class PathTermination { Fit, Cap };

struct PathOptions {
  int max_steps = 10000;
  double fit_tol = 1e-6;     // zero-penalty optimality residual at termination
  double event_tol = 1e-10;  // window for simultaneous-event tie-breaking
};

// Main branch of the rescaled KKT solution set: a continuous piecewise
// linear path in (tau, b) from the origin to an optimal fit. tau need not
// be monotone. Inputs are retained so solutions can be extracted and
// verified without the original data.
struct SolutionPath {
  std::vector<PathBreakpoint> breakpoints;
  PathTermination termination = PathTermination::Fit;
  int steps_used = 0;
  Eigen::MatrixXd gram;
  Eigen::VectorXd z_star;  // the vector actually tracked (jittered if flagged)
  QuadSplinePenalty penalty = make_l1();
  bool jitter_applied = false;

  double max_tau() const;
};

SolutionPath compute_path(const Eigen::MatrixXd& gram, const Eigen::VectorXd& z_star,
                          const QuadSplinePenalty& pen, const PathOptions& opts = {});
SolutionPath compute_path(const StandardizedDesign& d, const Eigen::VectorXd& y,
                          const QuadSplinePenalty& pen, const PathOptions& opts = {});

// Requested penalty level lies below the path's tau range (only possible
// for step-capped paths; a fit-terminated path covers every lambda > 0 by
// extrapolating its final ray).
struct PathRangeError : std::domain_error {
  using std::domain_error::domain_error;
};

// Extracts the solution at tau = 1/lambda. When the path crosses that tau
// several times the sparsest solution is returned; ties break by smallest
// l1 norm.
FitResult solve_at_lambda(const SolutionPath& path, double lambda);

struct GridFit {
  double lambda = 0.0;
  std::optional<FitResult> fit;
  std::string error;  // nonempty when fit is absent
};

// solve_at_lambda over a grid; per-point failures are recorded, not thrown.
std::vector<GridFit> path_to_coefficients(const SolutionPath& path,
                                          const std::vector<double>& lambda_grid);

// Long-format CSV: header "step,tau,event,j,b_j"; per breakpoint one row
// with j = 0 carrying the event label, then one row per nonzero
// coefficient (1-based j).
void write_path_csv(std::ostream& os, const SolutionPath& path);
std::vector<PathBreakpoint> read_path_csv(std::istream& is, int p);

}  // namespace plus
