#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "plus/design.hpp"

using plus::ScanMode;
using plus::standardize;

namespace {

// Design whose gram equals G exactly: X = sqrt(n) Q L' with G = L L'.
plus::StandardizedDesign design_with_gram(const Eigen::MatrixXd& G, int n, std::uint64_t seed) {
  const int p = static_cast<int>(G.rows());
  const Eigen::MatrixXd L = Eigen::LLT<Eigen::MatrixXd>(G).matrixL();
  const Eigen::MatrixXd Q = oracles::orthonormal_design(n, p, seed) / std::sqrt(double(n));
  return standardize(std::sqrt(double(n)) * Q * L.transpose());
}

}  // namespace

TEST_CASE("standardize scales columns and records scales") {
  Eigen::MatrixXd raw = oracles::gaussian_matrix(10, 3, 21);
  // Make column 0 already standardized.
  raw.col(0) *= std::sqrt(10.0) / raw.col(0).norm();
  const auto d = standardize(raw);
  CHECK(d.n == 10);
  CHECK(d.p == 3);
  CHECK(d.col_scales[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((d.X.col(0) - raw.col(0)).norm() == doctest::Approx(0.0).epsilon(1e-12));
  for (int j = 0; j < 3; ++j)
    CHECK(d.X.col(j).squaredNorm() / d.n == doctest::Approx(1.0).epsilon(1e-12));
  // Gram symmetric with unit diagonal.
  CHECK((d.gram - d.gram.transpose()).cwiseAbs().maxCoeff() == 0.0);
  for (int j = 0; j < 3; ++j) CHECK(d.gram(j, j) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("standardize rejects a zero column by index") {
  Eigen::MatrixXd raw = oracles::gaussian_matrix(8, 3, 5);
  raw.col(1).setZero();
  CHECK_THROWS_WITH_AS(standardize(raw), doctest::Contains("column 2"), std::invalid_argument);
}

TEST_CASE("restricted_min_eigen basics") {
  const auto ortho = standardize(oracles::orthonormal_design(12, 4, 3));
  CHECK(plus::restricted_min_eigen(ortho, {0, 2}) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(plus::restricted_min_eigen(ortho, {0, 1, 2, 3}) == doctest::Approx(1.0).epsilon(1e-10));

  Eigen::MatrixXd dup = oracles::gaussian_matrix(10, 3, 9);
  dup.col(2) = dup.col(0);
  const auto d = standardize(dup);
  CHECK(plus::restricted_min_eigen(d, {0, 2}) == 0.0);

  CHECK_THROWS_AS(plus::restricted_min_eigen(d, {}), std::invalid_argument);
}

TEST_CASE("restricted_min_eigen closed form for 2x2 equicorrelation") {
  Eigen::MatrixXd G(3, 3);
  G << 1.0, 0.5, 0.0, 0.5, 1.0, 0.0, 0.0, 0.0, 1.0;
  const auto d = design_with_gram(G, 6, 17);
  CHECK((d.gram - G).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(plus::restricted_min_eigen(d, {0, 1}) == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("interlacing: c_min is nonincreasing under set inclusion") {
  const auto d = standardize(oracles::gaussian_matrix(40, 7, 33));
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<int> B;
    for (int j = 0; j < 7; ++j)
      if (rng() % 2) B.push_back(j);
    if (B.size() < 2) continue;
    std::vector<int> A(B.begin(), B.begin() + B.size() / 2 + (B.size() == 2 ? 1 : 0));
    if (A.empty()) A.push_back(B[0]);
    CHECK(plus::restricted_min_eigen(d, B) <= plus::restricted_min_eigen(d, A) + 1e-12);
  }
}

TEST_CASE("sparse_riesz_scan identity and duplicate columns") {
  const auto ortho = standardize(oracles::orthonormal_design(16, 5, 8));
  const auto b = plus::sparse_riesz_scan(ortho, 3, ScanMode::exhaustive());
  CHECK(b.c_lower == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(b.c_upper == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(b.certified);

  Eigen::MatrixXd dup = oracles::gaussian_matrix(10, 4, 2);
  dup.col(3) = 2.0 * dup.col(1);
  const auto d = standardize(dup);
  const auto b2 = plus::sparse_riesz_scan(d, 2, ScanMode::exhaustive());
  CHECK(b2.c_lower == 0.0);
}

TEST_CASE("sparse_riesz_scan matches the brute-force oracle") {
  const auto d = standardize(oracles::gaussian_matrix(20, 6, 101));
  const auto b = plus::sparse_riesz_scan(d, 2, ScanMode::exhaustive());
  CHECK(b.subsets_scanned == 21);  // C(6,1) + C(6,2)
  double lo, hi;
  oracles::subset_eigen_scan(d.gram, 2, lo, hi);
  CHECK(b.c_lower == doctest::Approx(lo).epsilon(1e-12));
  CHECK(b.c_upper == doctest::Approx(hi).epsilon(1e-12));
}

TEST_CASE("sparse_riesz_scan with d_star = p reproduces the global spectrum") {
  const auto d = standardize(oracles::gaussian_matrix(25, 5, 55));
  const auto b = plus::sparse_riesz_scan(d, 5, ScanMode::exhaustive());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d.gram, Eigen::EigenvaluesOnly);
  CHECK(b.c_lower == doctest::Approx(es.eigenvalues().minCoeff()).epsilon(1e-10));
  CHECK(b.c_upper == doctest::Approx(es.eigenvalues().maxCoeff()).epsilon(1e-10));
}

TEST_CASE("exhaustive scan rejects over-budget requests") {
  const auto d = standardize(oracles::gaussian_matrix(10, 30, 77));
  CHECK_THROWS_AS(plus::sparse_riesz_scan(d, 15, ScanMode::exhaustive()),
                  std::invalid_argument);
  // Sampled mode still works and is flagged.
  const auto b = plus::sparse_riesz_scan(d, 15, ScanMode::sampled(50, 1));
  CHECK_FALSE(b.certified);
  CHECK(b.subsets_scanned == 50);
}

TEST_CASE("sampled scan is deterministic in the seed") {
  const auto d = standardize(oracles::gaussian_matrix(15, 12, 3));
  const auto a = plus::sparse_riesz_scan(d, 4, ScanMode::sampled(40, 9));
  const auto b = plus::sparse_riesz_scan(d, 4, ScanMode::sampled(40, 9));
  CHECK(a.c_lower == b.c_lower);
  CHECK(a.c_upper == b.c_upper);
}

TEST_CASE("global convexity check") {
  const auto ortho = standardize(oracles::orthonormal_design(12, 4, 1));
  const auto r = plus::global_convexity_check(ortho, plus::make_mcp(2.0));
  CHECK(r.convex);
  CHECK(r.margin == doctest::Approx(0.5).epsilon(1e-9));

  // p > n: singular gram, any kappa > 0 fails.
  const auto wide = standardize(oracles::gaussian_matrix(5, 9, 13));
  CHECK_FALSE(plus::global_convexity_check(wide, plus::make_mcp(10.0)).convex);

  // l1 on a full-rank design always passes.
  const auto tall = standardize(oracles::gaussian_matrix(40, 6, 19));
  CHECK(plus::global_convexity_check(tall, plus::make_l1()).convex);
}

TEST_CASE("sparse convexity check") {
  const auto ortho = standardize(oracles::orthonormal_design(14, 6, 23));
  const auto r = plus::sparse_convexity_check(ortho, plus::make_mcp(2.0), 4,
                                              ScanMode::exhaustive());
  CHECK(r.convex);
  CHECK(r.margin == doctest::Approx(0.5).epsilon(1e-9));

  Eigen::MatrixXd dup = oracles::gaussian_matrix(12, 4, 31);
  dup.col(2) = dup.col(0);
  CHECK_FALSE(plus::sparse_convexity_check(standardize(dup), plus::make_mcp(5.0), 2,
                                           ScanMode::exhaustive())
                  .convex);

  // Verdict matches a brute-force subset eigen-scan.
  const auto d = standardize(oracles::gaussian_matrix(50, 8, 47));
  double lo, hi;
  oracles::subset_eigen_scan(d.gram, 3, lo, hi);
  const auto s = plus::sparse_convexity_check(d, plus::make_scad(3.7), 3,
                                              ScanMode::exhaustive());
  CHECK(s.convex == (plus::make_scad(3.7).max_concavity() < lo));
  CHECK(s.margin == doctest::Approx(lo - 1.0 / 2.7).epsilon(1e-10));
}

TEST_CASE("global check equals sparse check at d_star = p on full-rank designs") {
  const auto d = standardize(oracles::gaussian_matrix(30, 5, 71));
  const auto pen = plus::make_mcp(4.0);
  const auto g = plus::global_convexity_check(d, pen);
  const auto s = plus::sparse_convexity_check(d, pen, 5, ScanMode::exhaustive());
  CHECK(g.convex == s.convex);
  CHECK(g.margin == doctest::Approx(s.margin).epsilon(1e-10));
}
