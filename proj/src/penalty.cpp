#include "plus/penalty.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace plus {

namespace {
constexpr double kKnotTol = 1e-12;
}

QuadSplinePenalty::QuadSplinePenalty(std::vector<double> knots,
                                     std::vector<DerivSegment> segments, double gamma)
    : knots_(std::move(knots)), segs_(std::move(segments)), gamma_(gamma) {
  if (knots_.empty() || knots_.front() != 0.0)
    throw std::invalid_argument("penalty: knots must start at 0");
  if (segs_.size() != knots_.size())
    throw std::invalid_argument("penalty: need one derivative segment per knot");
  for (std::size_t k = 1; k < knots_.size(); ++k)
    if (!(knots_[k] > knots_[k - 1]))
      throw std::invalid_argument("penalty: knots must be strictly ascending");
  if (!(gamma_ > 0.0)) throw std::invalid_argument("penalty: gamma must be positive");

  if (std::abs(segs_[0].intercept - 1.0) > kKnotTol)
    throw std::invalid_argument("penalty: rho_dot(0+) must equal 1");
  // Continuity of rho_dot at interior knots.
  for (std::size_t k = 1; k < knots_.size(); ++k) {
    const double left = segs_[k - 1].intercept + segs_[k - 1].slope * knots_[k];
    const double right = segs_[k].intercept + segs_[k].slope * knots_[k];
    if (std::abs(left - right) > kKnotTol)
      throw std::invalid_argument("penalty: rho_dot discontinuous at knot " + std::to_string(k));
  }
  if (std::isfinite(gamma_)) {
    const DerivSegment& last = segs_.back();
    if (last.intercept != 0.0 || last.slope != 0.0)
      throw std::invalid_argument("penalty: finite gamma requires a flat last segment");
    if (std::abs(knots_.back() - gamma_) > kKnotTol)
      throw std::invalid_argument("penalty: last knot must equal gamma");
  }

  // Cumulative integral of rho_dot at the knots.
  knot_values_.resize(knots_.size());
  knot_values_[0] = 0.0;
  for (std::size_t k = 0; k + 1 < knots_.size(); ++k) {
    const double a = knots_[k], b = knots_[k + 1];
    knot_values_[k + 1] = knot_values_[k] + segs_[k].intercept * (b - a) +
                          0.5 * segs_[k].slope * (b * b - a * a);
  }
}

int QuadSplinePenalty::segment_index(double t) const {
  int k = static_cast<int>(knots_.size()) - 1;
  while (k > 0 && t < knots_[k]) --k;
  return k;
}

double QuadSplinePenalty::value_unit(double t) const {
  if (t < 0.0) throw std::invalid_argument("penalty: value requires t >= 0");
  const int k = segment_index(t);
  const double a = knots_[k];
  return knot_values_[k] + segs_[k].intercept * (t - a) + 0.5 * segs_[k].slope * (t * t - a * a);
}

double QuadSplinePenalty::deriv_unit(double t) const {
  if (t < 0.0) throw std::invalid_argument("penalty: deriv requires t >= 0");
  const int k = segment_index(t);
  return segs_[k].intercept + segs_[k].slope * t;
}

double QuadSplinePenalty::curvature_unit(double t) const {
  return segs_[segment_index(t)].slope;
}

double QuadSplinePenalty::curvature_concave_side(double t) const {
  const int k = segment_index(t);
  // Sitting on an interior knot: take the more concave adjacent segment.
  if (k > 0 && std::abs(t - knots_[k]) <= kKnotTol * std::max(1.0, t))
    return std::min(segs_[k - 1].slope, segs_[k].slope);
  return segs_[k].slope;
}

double QuadSplinePenalty::value(double t, double lambda) const {
  if (t < 0.0) throw std::invalid_argument("penalty: value requires t >= 0");
  if (lambda < 0.0) throw std::invalid_argument("penalty: lambda must be nonnegative");
  if (lambda == 0.0) return 0.0;
  return lambda * lambda * value_unit(t / lambda);
}

double QuadSplinePenalty::deriv(double t, double lambda) const {
  if (!(t > 0.0))
    throw std::invalid_argument("penalty: deriv requires t > 0 (use deriv_zero_plus)");
  if (lambda < 0.0) throw std::invalid_argument("penalty: lambda must be nonnegative");
  if (lambda == 0.0) return 0.0;
  return lambda * deriv_unit(t / lambda);
}

double QuadSplinePenalty::deriv_zero_plus(double lambda) const {
  if (lambda < 0.0) throw std::invalid_argument("penalty: lambda must be nonnegative");
  return lambda * segs_[0].intercept;
}

double QuadSplinePenalty::max_concavity() const {
  double kappa = 0.0;
  for (const DerivSegment& s : segs_) kappa = std::max(kappa, -s.slope);
  return kappa;
}

QuadSplinePenalty make_l1() {
  return QuadSplinePenalty({0.0}, {{1.0, 0.0}}, std::numeric_limits<double>::infinity());
}

QuadSplinePenalty make_mcp(double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("mcp: gamma must be > 0");
  return QuadSplinePenalty({0.0, gamma}, {{1.0, -1.0 / gamma}, {0.0, 0.0}}, gamma);
}

QuadSplinePenalty make_scad(double gamma) {
  if (!(gamma > 2.0)) throw std::invalid_argument("scad: gamma must be > 2");
  return QuadSplinePenalty({0.0, 1.0, gamma},
                           {{1.0, 0.0}, {gamma / (gamma - 1.0), -1.0 / (gamma - 1.0)}, {0.0, 0.0}},
                           gamma);
}

}  // namespace plus
