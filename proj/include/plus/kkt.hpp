#pragma once

#include <Eigen/Dense>

#include "plus/design.hpp"
#include "plus/penalty.hpp"

namespace plus {

inline constexpr double kDefaultKktTol = 1e-8;

// Verdict on the stationarity system
//   x_j'(y - X beta)/n = sgn(beta_j) rho_dot(|beta_j|; lambda)   (beta_j != 0)
//   |x_j'(y - X beta)/n| <= lambda                               (beta_j = 0)
// with sgn(0) = 0 and the right-limit convention for rho_dot at knots.
struct KktReport {
  double max_active_residual = 0.0;
  // max over inactive j of |x_j' r / n| - lambda; negative when strict.
  double max_inactive_excess = 0.0;
  bool satisfied = false;
  // Some inactive constraint holds with (near-)equality; certification at
  // such points is not decided, only flagged.
  bool boundary = false;
};

KktReport kkt_report(const StandardizedDesign& d, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& beta, const QuadSplinePenalty& pen, double lambda,
                     double tol = kDefaultKktTol);

// Same report computed from the Gram quantities z* = X'y/n and X'X/n.
KktReport kkt_report_gram(const Eigen::MatrixXd& gram, const Eigen::VectorXd& z_star,
                          const Eigen::VectorXd& beta, const QuadSplinePenalty& pen, double lambda,
                          double tol = kDefaultKktTol);

// Rescaled system with z = tau z*, b = tau beta, tau = 1/lambda:
//   z_j - chi_j' b = sgn(b_j) rho_dot_m(|b_j|)   (b_j != 0)
//   |z_j - chi_j' b| <= 1                        (b_j = 0)
// Residuals here equal tau times the lambda-scale residuals.
KktReport rescaled_kkt_report(const Eigen::MatrixXd& gram, const Eigen::VectorXd& z_star,
                              const Eigen::VectorXd& b, double tau, const QuadSplinePenalty& pen,
                              double tol = kDefaultKktTol);

struct LocalMinCertificate {
  bool certified = false;
  // Smallest eigenvalue of X_A'X_A/n + diag(rho_ddot(|beta_j|; lambda));
  // +inf sentinel for an empty active set.
  double min_eigenvalue = 0.0;
  bool boundary = false;  // an inactive constraint is tight; left undecided
};

// Certifies beta as a local minimizer through the orientation matrix on the
// active set. beta must satisfy the KKT system at kkt_tol. Active
// coordinates sitting exactly on a knot use the more concave adjacent
// segment's curvature.
LocalMinCertificate local_min_certificate(const StandardizedDesign& d, const Eigen::VectorXd& y,
                                          const Eigen::VectorXd& beta,
                                          const QuadSplinePenalty& pen, double lambda,
                                          double kkt_tol = kDefaultKktTol,
                                          double eigen_tol = 1e-10);

}  // namespace plus
