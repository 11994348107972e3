#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "plus/penalty.hpp"

namespace plus {

// Design matrix with columns rescaled so that ||x_j||^2 / n = 1, together
// with the cached Gram matrix X'X/n.
struct StandardizedDesign {
  int n = 0;
  int p = 0;
  Eigen::MatrixXd X;           // n x p, standardized
  Eigen::VectorXd col_scales;  // original ||x_j|| / sqrt(n), for back-transformation
  Eigen::MatrixXd gram;        // X'X / n, symmetric with unit diagonal

  Eigen::VectorXd zstar(const Eigen::VectorXd& y) const;  // X'y / n
};

// Rescales every column of `raw` to ||x_j||^2 / n = 1. Rejects zero or
// near-zero columns (norm < 1e-12 * sqrt(n)).
StandardizedDesign standardize(const Eigen::MatrixXd& raw);

// Smallest eigenvalue of the principal submatrix gram[A, A]. Eigenvalues
// within 1e-10 of zero are clamped to exactly 0.
double restricted_min_eigen(const StandardizedDesign& d, const std::vector<int>& A);

struct ScanMode {
  enum Kind { Exhaustive, Sampled } kind = Exhaustive;
  int samples = 0;             // number of subsets drawn in sampled mode
  std::uint64_t seed = 0;      // RNG seed for sampled mode
  std::uint64_t budget = 1000000;  // max subset count allowed in exhaustive mode

  static ScanMode exhaustive(std::uint64_t budget = 1000000);
  static ScanMode sampled(int samples, std::uint64_t seed = 0);
};

// Two-sided eigenvalue bounds over small supports: for every |A| <= d_star,
// the eigenvalues of X_A' X_A / n lie in [c_lower, c_upper]. `certified` is
// true only for an exhaustive scan; a sampled scan reports sampled extremes.
struct SparseRieszBounds {
  int d_star = 0;
  double c_lower = 0.0;
  double c_upper = 0.0;
  bool certified = false;
  std::uint64_t subsets_scanned = 0;
};

SparseRieszBounds sparse_riesz_scan(const StandardizedDesign& d, int d_star, const ScanMode& mode);

struct ConvexityReport {
  bool convex = false;
  double margin = 0.0;  // c_min - kappa
  double c_min = 0.0;
  double kappa = 0.0;
  bool certified = true;  // false when based on a sampled scan
};

// Global convexity: kappa(rho) < c_min(X'X/n).
ConvexityReport global_convexity_check(const StandardizedDesign& d, const QuadSplinePenalty& pen);

// Sparse convexity: kappa(rho) < min_{|A| <= d_star} c_min(X_A'X_A/n).
// With a sampled scan the verdict is one-sided (possibly optimistic) and
// certified = false.
ConvexityReport sparse_convexity_check(const StandardizedDesign& d, const QuadSplinePenalty& pen,
                                       int d_star, const ScanMode& mode);

}  // namespace plus
