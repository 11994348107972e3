#include "plus/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace plus {

namespace {

constexpr double kEigenZeroTol = 1e-10;

double clamp_eigenvalue(double v) { return std::abs(v) <= kEigenZeroTol ? 0.0 : v; }

Eigen::MatrixXd principal_submatrix(const Eigen::MatrixXd& G, const std::vector<int>& A) {
  Eigen::MatrixXd S(A.size(), A.size());
  for (std::size_t r = 0; r < A.size(); ++r)
    for (std::size_t c = 0; c < A.size(); ++c) S(r, c) = G(A[r], A[c]);
  return S;
}

void validate_subset(const std::vector<int>& A, int p) {
  if (A.empty()) throw std::invalid_argument("design: subset must be nonempty");
  std::vector<int> sorted = A;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i] < 0 || sorted[i] >= p)
      throw std::invalid_argument("design: subset index out of range");
    if (i > 0 && sorted[i] == sorted[i - 1])
      throw std::invalid_argument("design: subset has duplicate indices");
  }
}

// Number of subsets of sizes 1..d of {1..p}, saturating at cap + 1.
std::uint64_t subset_count_capped(int p, int d, std::uint64_t cap) {
  std::uint64_t total = 0;
  for (int k = 1; k <= d; ++k) {
    std::uint64_t c = 1;
    for (int i = 0; i < k; ++i) {
      if (c > (cap + 1) / (p - i) + 1) return cap + 1;
      c = c * (p - i) / (i + 1);
    }
    total += c;
    if (total > cap) return cap + 1;
  }
  return total;
}

}  // namespace

Eigen::VectorXd StandardizedDesign::zstar(const Eigen::VectorXd& y) const {
  if (y.size() != n) throw std::invalid_argument("design: y has wrong length");
  return X.transpose() * y / static_cast<double>(n);
}

StandardizedDesign standardize(const Eigen::MatrixXd& raw) {
  StandardizedDesign d;
  d.n = static_cast<int>(raw.rows());
  d.p = static_cast<int>(raw.cols());
  if (d.n < 1 || d.p < 1) throw std::invalid_argument("design: empty matrix");

  const double sqrt_n = std::sqrt(static_cast<double>(d.n));
  d.X = raw;
  d.col_scales.resize(d.p);
  for (int j = 0; j < d.p; ++j) {
    const double norm = raw.col(j).norm();
    if (norm < 1e-12 * sqrt_n)
      throw std::invalid_argument("design: column " + std::to_string(j + 1) +
                                  " is zero or near-zero");
    d.col_scales[j] = norm / sqrt_n;
    d.X.col(j) /= d.col_scales[j];
  }
  d.gram = d.X.transpose() * d.X / static_cast<double>(d.n);
  d.gram = ((d.gram + d.gram.transpose()) * 0.5).eval();
  return d;
}

double restricted_min_eigen(const StandardizedDesign& d, const std::vector<int>& A) {
  validate_subset(A, d.p);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(principal_submatrix(d.gram, A),
                                                    Eigen::EigenvaluesOnly);
  return clamp_eigenvalue(es.eigenvalues().minCoeff());
}

ScanMode ScanMode::exhaustive(std::uint64_t budget) {
  ScanMode m;
  m.kind = Exhaustive;
  m.budget = budget;
  return m;
}

ScanMode ScanMode::sampled(int samples, std::uint64_t seed) {
  ScanMode m;
  m.kind = Sampled;
  m.samples = samples;
  m.seed = seed;
  return m;
}

SparseRieszBounds sparse_riesz_scan(const StandardizedDesign& d, int d_star,
                                    const ScanMode& mode) {
  if (d_star < 1 || d_star > d.p)
    throw std::invalid_argument("design: d_star must be in [1, p]");

  SparseRieszBounds out;
  out.d_star = d_star;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  auto scan = [&](const std::vector<int>& A) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(principal_submatrix(d.gram, A),
                                                      Eigen::EigenvaluesOnly);
    lo = std::min(lo, es.eigenvalues().minCoeff());
    hi = std::max(hi, es.eigenvalues().maxCoeff());
    ++out.subsets_scanned;
  };

  if (mode.kind == ScanMode::Exhaustive) {
    if (subset_count_capped(d.p, d_star, mode.budget) > mode.budget)
      throw std::invalid_argument("design: exhaustive scan exceeds subset budget; use sampled mode");
    // Enumerate all subsets of each size k <= d_star in lexicographic order.
    for (int k = 1; k <= d_star; ++k) {
      std::vector<int> A(k);
      std::iota(A.begin(), A.end(), 0);
      while (true) {
        scan(A);
        int i = k - 1;
        while (i >= 0 && A[i] == d.p - k + i) --i;
        if (i < 0) break;
        ++A[i];
        for (int t = i + 1; t < k; ++t) A[t] = A[t - 1] + 1;
      }
    }
    out.certified = true;
  } else {
    if (mode.samples < 1) throw std::invalid_argument("design: sampled mode needs samples >= 1");
    std::mt19937_64 rng(mode.seed);
    std::vector<int> idx(d.p);
    for (int s = 0; s < mode.samples; ++s) {
      std::iota(idx.begin(), idx.end(), 0);
      // Partial Fisher-Yates: first d_star entries form a uniform subset.
      for (int i = 0; i < d_star; ++i) {
        std::uniform_int_distribution<int> pick(i, d.p - 1);
        std::swap(idx[i], idx[pick(rng)]);
      }
      std::vector<int> A(idx.begin(), idx.begin() + d_star);
      scan(A);
    }
    out.certified = false;
  }

  out.c_lower = clamp_eigenvalue(lo);
  out.c_upper = clamp_eigenvalue(hi);
  return out;
}

ConvexityReport global_convexity_check(const StandardizedDesign& d, const QuadSplinePenalty& pen) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d.gram, Eigen::EigenvaluesOnly);
  ConvexityReport r;
  r.c_min = clamp_eigenvalue(es.eigenvalues().minCoeff());
  r.kappa = pen.max_concavity();
  r.margin = r.c_min - r.kappa;
  r.convex = r.kappa < r.c_min;
  r.certified = true;
  return r;
}

ConvexityReport sparse_convexity_check(const StandardizedDesign& d, const QuadSplinePenalty& pen,
                                       int d_star, const ScanMode& mode) {
  const SparseRieszBounds bounds = sparse_riesz_scan(d, d_star, mode);
  ConvexityReport r;
  r.c_min = bounds.c_lower;
  r.kappa = pen.max_concavity();
  r.margin = r.c_min - r.kappa;
  r.convex = r.kappa < r.c_min;
  r.certified = bounds.certified;
  return r;
}

}  // namespace plus
