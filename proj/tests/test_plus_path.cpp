#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "plus/plus_path.hpp"

using plus::compute_path;
using plus::make_l1;
using plus::make_mcp;
using plus::make_scad;
using plus::PathEvent;
using plus::PathTermination;
using plus::rescaled_kkt_report;
using plus::solve_at_lambda;
using plus::SolutionPath;
using plus::standardize;

namespace {

// Every breakpoint and segment midpoint must satisfy the rescaled system;
// facets must never repeat.
void check_path_invariants(const SolutionPath& path) {
  std::set<std::string> facets;
  for (std::size_t i = 1; i < path.breakpoints.size(); ++i) {
    const auto& bp = path.breakpoints[i];
    const std::string key(bp.facet.begin(), bp.facet.end());
    CHECK(facets.insert(key).second);
    if (bp.tau > 0.0)
      CHECK(rescaled_kkt_report(path.gram, path.z_star, bp.b, bp.tau, path.penalty).satisfied);
    const auto& prev = path.breakpoints[i - 1];
    const double tau_mid = 0.5 * (prev.tau + bp.tau);
    if (tau_mid > 0.0) {
      const Eigen::VectorXd b_mid = 0.5 * (prev.b + bp.b);
      CHECK(rescaled_kkt_report(path.gram, path.z_star, b_mid, tau_mid, path.penalty).satisfied);
    }
  }
  CHECK(path.steps_used <= 10000);
}

plus::StandardizedDesign random_design(int n, int p, std::uint64_t seed) {
  return standardize(oracles::gaussian_matrix(n, p, seed));
}

Eigen::VectorXd random_response(const plus::StandardizedDesign& d, int s, std::uint64_t seed,
                                double noise = 0.5) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(d.p);
  for (int j = 0; j < s && j < d.p; ++j) beta[j] = (j % 2 ? -1.5 : 2.0);
  Eigen::VectorXd y = d.X * beta;
  for (int i = 0; i < d.n; ++i) y[i] += noise * gauss(rng);
  return y;
}

}  // namespace

TEST_CASE("scalar MCP path matches the hand-solved breakpoints") {
  Eigen::MatrixXd gram(1, 1);
  gram << 1.0;
  Eigen::VectorXd z(1);
  z << 3.0;
  const auto path = compute_path(gram, z, make_mcp(2.0));

  REQUIRE(path.breakpoints.size() == 4);
  CHECK(path.termination == PathTermination::Fit);
  CHECK(path.steps_used == 3);

  const auto& origin = path.breakpoints[0];
  CHECK(origin.tau == 0.0);
  CHECK(origin.b[0] == 0.0);
  CHECK(origin.event.kind == PathEvent::Origin);

  const auto& act = path.breakpoints[1];
  CHECK(act.tau == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(act.b[0] == 0.0);
  CHECK(act.event.kind == PathEvent::Activate);
  CHECK(act.event.j == 0);

  const auto& knot = path.breakpoints[2];
  CHECK(knot.tau == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(knot.b[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(knot.event.kind == PathEvent::KnotCross);
  CHECK(knot.event.j == 0);
  CHECK(knot.event.knot == 1);

  const auto& fin = path.breakpoints[3];
  CHECK(fin.event.kind == PathEvent::TerminateFit);
  CHECK(fin.b[0] == doctest::Approx(3.0 * fin.tau).epsilon(1e-12));

  // The sloped segment follows b = 6 tau - 2: at lambda = 2, beta = b/tau = 2.
  const auto mid = solve_at_lambda(path, 2.0);
  CHECK(mid.beta_hat[0] == doctest::Approx(2.0).epsilon(1e-12));
  check_path_invariants(path);
}

TEST_CASE("zero z* terminates immediately with the zero fit") {
  Eigen::MatrixXd gram = Eigen::MatrixXd::Identity(3, 3);
  const auto path = compute_path(gram, Eigen::VectorXd::Zero(3), make_l1());
  CHECK(path.termination == PathTermination::Fit);
  CHECK(path.steps_used == 1);
  for (const auto& bp : path.breakpoints) CHECK(bp.b.lpNorm<Eigen::Infinity>() == 0.0);
  // The zero vector is the solution at any lambda.
  const auto fit = solve_at_lambda(path, 0.37);
  CHECK(fit.beta_hat.lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(fit.kkt.satisfied);
}

TEST_CASE("solve_at_lambda on the scalar example") {
  Eigen::MatrixXd gram(1, 1);
  gram << 1.0;
  Eigen::VectorXd z(1);
  z << 3.0;
  const auto path = compute_path(gram, z, make_mcp(2.0));

  // lambda = 2 (tau = 0.5): b = 1, beta = 2; residual equals rho_dot(2; 2).
  const auto fit = solve_at_lambda(path, 2.0);
  CHECK(fit.beta_hat[0] == doctest::Approx(2.0).epsilon(1e-12));
  const double resid = z[0] - fit.beta_hat[0];
  CHECK(resid == doctest::Approx(make_mcp(2.0).deriv(2.0, 2.0)).epsilon(1e-12));

  // lambda above the activation level: zero fit.
  CHECK(solve_at_lambda(path, 4.0).beta_hat[0] == 0.0);
  CHECK(solve_at_lambda(path, 3.0 + 1e-9).beta_hat[0] == 0.0);

  // Non-monotone tau region (gamma < 1): the path folds back in tau. For
  // lambda > |z*| three branches cross and the sparsest (zero) wins; for
  // lambda < |z*| only the full fit crosses.
  const auto hard = compute_path(gram, z, make_mcp(0.5));
  CHECK(solve_at_lambda(hard, 3.1).beta_hat[0] == 0.0);
  CHECK(solve_at_lambda(hard, 2.9).beta_hat[0] == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(solve_at_lambda(hard, 2.0).beta_hat[0] == doctest::Approx(3.0).epsilon(1e-10));
  check_path_invariants(hard);
}

TEST_CASE("orthonormal designs reproduce the componentwise threshold rules") {
  const auto d = standardize(oracles::orthonormal_design(20, 4, 91));
  Eigen::VectorXd beta_true(4);
  beta_true << 2.6, -1.1, 0.6, 0.0;
  const Eigen::VectorXd y = d.X * beta_true;  // z* = beta_true exactly
  const Eigen::VectorXd z = d.zstar(y);

  for (double lambda : {0.4, 0.8, 1.3}) {
    const auto soft = solve_at_lambda(compute_path(d, y, make_l1()), lambda);
    const auto firm = solve_at_lambda(compute_path(d, y, make_mcp(3.0)), lambda);
    const auto scad = solve_at_lambda(compute_path(d, y, make_scad(3.7)), lambda);
    for (int j = 0; j < 4; ++j) {
      CHECK(soft.beta_hat[j] ==
            doctest::Approx(oracles::soft_threshold(z[j], lambda)).epsilon(1e-8));
      CHECK(firm.beta_hat[j] ==
            doctest::Approx(oracles::firm_threshold(z[j], lambda, 3.0)).epsilon(1e-8));
      CHECK(scad.beta_hat[j] ==
            doctest::Approx(oracles::scad_threshold(z[j], lambda, 3.7)).epsilon(1e-8));
    }
  }
}

TEST_CASE("m = 1 path agrees with coordinate-descent LASSO") {
  const auto d = random_design(30, 10, 7);
  const Eigen::VectorXd y = random_response(d, 4, 8);
  const auto path = compute_path(d, y, make_l1());
  check_path_invariants(path);

  const double lambda_max = d.zstar(y).cwiseAbs().maxCoeff();
  for (int k = 1; k <= 12; ++k) {
    const double lambda = lambda_max * k / 13.0;
    const auto fit = solve_at_lambda(path, lambda);
    const Eigen::VectorXd cd = oracles::lasso_cd(d, y, lambda);
    CHECK((fit.beta_hat - cd).lpNorm<Eigen::Infinity>() <= 1e-6);
  }
}

TEST_CASE("MCP with gamma -> infinity approaches the LASSO path") {
  for (std::uint64_t seed : {101, 202, 303}) {
    const auto d = random_design(25, 8, seed);
    const Eigen::VectorXd y = random_response(d, 3, seed + 1);
    const auto l1_path = compute_path(d, y, make_l1());
    const auto mcp_path = compute_path(d, y, make_mcp(1e6));
    const double lambda_max = d.zstar(y).cwiseAbs().maxCoeff();
    for (double frac : {0.15, 0.4, 0.8}) {
      const double lambda = frac * lambda_max;
      const auto a = solve_at_lambda(l1_path, lambda);
      const auto b = solve_at_lambda(mcp_path, lambda);
      CHECK((a.beta_hat - b.beta_hat).lpNorm<Eigen::Infinity>() <= 1e-3);
    }
  }
}

TEST_CASE("path invariants hold across penalties on random instances") {
  for (std::uint64_t seed : {11, 22, 33, 44}) {
    const auto d = random_design(40, 12, seed);
    const Eigen::VectorXd y = random_response(d, 5, seed * 3 + 1);
    for (const auto& pen : {make_l1(), make_mcp(2.4), make_scad(3.7), make_mcp(0.9)}) {
      const auto path = compute_path(d, y, pen);
      check_path_invariants(path);
      CHECK(path.termination == PathTermination::Fit);
    }
  }
}

TEST_CASE("global convexity makes tau strictly increasing with unique crossings") {
  for (std::uint64_t seed : {5, 6, 7, 8, 9}) {
    const auto d = random_design(50, 8, seed);
    const double c_min = plus::global_convexity_check(d, make_l1()).c_min;
    const double gamma = 2.0 / c_min;
    const auto pen = make_mcp(gamma);
    REQUIRE(plus::global_convexity_check(d, pen).convex);
    const Eigen::VectorXd y = random_response(d, 3, seed + 100);
    const auto path = compute_path(d, y, pen);
    CHECK(path.termination == PathTermination::Fit);
    for (std::size_t i = 1; i < path.breakpoints.size(); ++i)
      CHECK(path.breakpoints[i].tau > path.breakpoints[i - 1].tau);
    check_path_invariants(path);
  }
}

TEST_CASE("higher concavity needs at least as many steps") {
  double steps_sharp = 0.0, steps_mild = 0.0;
  for (std::uint64_t seed : {1, 2, 3, 4, 5, 6}) {
    const auto d = random_design(50, 12, seed * 13);
    const Eigen::VectorXd y = random_response(d, 3, seed * 13 + 5, 1.0);
    steps_sharp += compute_path(d, y, make_scad(2.5)).steps_used;
    steps_mild += compute_path(d, y, make_scad(3.7)).steps_used;
  }
  CHECK(steps_sharp >= steps_mild);
}

TEST_CASE("max_steps cap is reported") {
  const auto d = random_design(30, 10, 17);
  const Eigen::VectorXd y = random_response(d, 4, 18);
  plus::PathOptions opts;
  opts.max_steps = 2;
  const auto path = compute_path(d, y, make_l1(), opts);
  CHECK(path.termination == PathTermination::Cap);
  CHECK(path.steps_used == 2);
  CHECK(path.breakpoints.back().event.kind == PathEvent::TerminateCap);
}

TEST_CASE("path_to_coefficients maps the grid and isolates failures") {
  Eigen::MatrixXd gram(1, 1);
  gram << 1.0;
  Eigen::VectorXd z(1);
  z << 2.0;
  const auto path = compute_path(gram, z, make_l1());

  const auto single = plus::path_to_coefficients(path, {1.0});
  REQUIRE(single.size() == 1);
  CHECK(single[0].fit.has_value());
  CHECK_THROWS_AS(plus::path_to_coefficients(path, {}), std::invalid_argument);

  // On a capped path, a lambda below the reached range fails alone while
  // the others still succeed.
  plus::PathOptions opts;
  opts.max_steps = 1;
  const auto capped = compute_path(gram, z, make_l1(), opts);
  REQUIRE(capped.termination == PathTermination::Cap);
  const auto batch = plus::path_to_coefficients(capped, {1.0, 2.5, 4.0});
  REQUIRE(batch.size() == 3);
  CHECK_FALSE(batch[0].fit.has_value());
  CHECK(batch[0].error.find("below path range") != std::string::npos);
  CHECK(batch[1].fit.has_value());
  CHECK(batch[2].fit.has_value());
  for (const auto& g : batch)
    if (g.fit) CHECK(g.fit->kkt.satisfied);
}

TEST_CASE("every grid fit passes the lambda-scale KKT report") {
  const auto d = random_design(35, 9, 61);
  const Eigen::VectorXd y = random_response(d, 3, 62);
  const auto path = compute_path(d, y, make_scad(3.7));
  const double lambda_max = d.zstar(y).cwiseAbs().maxCoeff();
  std::vector<double> grid;
  for (int k = 1; k <= 10; ++k) grid.push_back(lambda_max * k / 8.0);  // extends past max
  for (const auto& g : plus::path_to_coefficients(path, grid))
    if (g.fit) CHECK(g.fit->kkt.satisfied);
}

TEST_CASE("path CSV round trip") {
  const auto d = random_design(20, 5, 77);
  const Eigen::VectorXd y = random_response(d, 2, 78);
  const auto path = compute_path(d, y, make_mcp(2.5));

  std::stringstream ss;
  plus::write_path_csv(ss, path);
  const auto rows = plus::read_path_csv(ss, d.p);
  REQUIRE(rows.size() == path.breakpoints.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].step == path.breakpoints[i].step);
    CHECK(rows[i].tau == path.breakpoints[i].tau);
    CHECK((rows[i].b - path.breakpoints[i].b).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(rows[i].event.kind == path.breakpoints[i].event.kind);
    CHECK(rows[i].event.j == path.breakpoints[i].event.j);
  }
  // Re-read breakpoints still satisfy the rescaled system.
  for (const auto& bp : rows)
    if (bp.tau > 0.0)
      CHECK(rescaled_kkt_report(path.gram, path.z_star, bp.b, bp.tau, path.penalty).satisfied);
}

TEST_CASE("a duplicated column rides its twin's boundary without breaking") {
  // Twin columns share the activation level; the tie-break activates the
  // lower index and the other sits on |g| = 1 for the rest of the path.
  Eigen::MatrixXd raw = oracles::gaussian_matrix(25, 6, 555);
  raw.col(5) = raw.col(1);
  const auto d = standardize(raw);
  const Eigen::VectorXd y = random_response(d, 3, 556);
  const auto path = compute_path(d, y, make_l1());
  CHECK(path.termination == PathTermination::Fit);
  check_path_invariants(path);
  const auto fit = solve_at_lambda(path, 0.2 * d.zstar(y).cwiseAbs().maxCoeff());
  CHECK(fit.kkt.satisfied);
  // The twin pair never enters together.
  CHECK(!(fit.beta_hat[1] != 0.0 && fit.beta_hat[5] != 0.0));
}

TEST_CASE("lambda must be positive and in range") {
  Eigen::MatrixXd gram(1, 1);
  gram << 1.0;
  Eigen::VectorXd z(1);
  z << 1.0;
  const auto path = compute_path(gram, z, make_l1());
  CHECK_THROWS_AS(solve_at_lambda(path, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(solve_at_lambda(path, -1.0), std::invalid_argument);

  // A fit-terminated path extends to lambda -> 0 along its final ray; the
  // soft-threshold form holds even past the recorded terminal breakpoint.
  const auto tiny = solve_at_lambda(path, 1e-9);
  CHECK(tiny.beta_hat[0] == doctest::Approx(1.0 - 1e-9).epsilon(1e-12));
  CHECK(tiny.kkt.satisfied);

  // A capped path has a genuine range end.
  const auto d = standardize(oracles::gaussian_matrix(20, 6, 123));
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd y(20);
  for (int i = 0; i < 20; ++i) y[i] = gauss(rng);
  plus::PathOptions opts;
  opts.max_steps = 1;
  const auto capped = compute_path(d, y, make_l1(), opts);
  REQUIRE(capped.termination == PathTermination::Cap);
  CHECK_THROWS_AS(solve_at_lambda(capped, 1e-6), plus::PathRangeError);
}
