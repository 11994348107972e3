#include "plus/kkt.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace plus {

namespace {

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

KktReport report_from_residuals(const Eigen::VectorXd& resid, const Eigen::VectorXd& coef,
                                const QuadSplinePenalty& pen, double lambda, double tol) {
  KktReport r;
  r.max_inactive_excess = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < coef.size(); ++j) {
    if (coef[j] != 0.0) {
      const double target = sgn(coef[j]) * pen.deriv(std::abs(coef[j]), lambda);
      r.max_active_residual = std::max(r.max_active_residual, std::abs(resid[j] - target));
    } else {
      const double excess = std::abs(resid[j]) - lambda;
      r.max_inactive_excess = std::max(r.max_inactive_excess, excess);
      if (std::abs(excess) <= tol) r.boundary = true;
    }
  }
  r.satisfied = r.max_active_residual <= tol && r.max_inactive_excess <= tol;
  return r;
}

}  // namespace

KktReport kkt_report(const StandardizedDesign& d, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& beta, const QuadSplinePenalty& pen, double lambda,
                     double tol) {
  if (!(lambda > 0.0)) throw std::invalid_argument("kkt: lambda must be positive");
  if (y.size() != d.n || beta.size() != d.p)
    throw std::invalid_argument("kkt: dimension mismatch");
  const Eigen::VectorXd resid = d.X.transpose() * (y - d.X * beta) / static_cast<double>(d.n);
  return report_from_residuals(resid, beta, pen, lambda, tol);
}

KktReport kkt_report_gram(const Eigen::MatrixXd& gram, const Eigen::VectorXd& z_star,
                          const Eigen::VectorXd& beta, const QuadSplinePenalty& pen, double lambda,
                          double tol) {
  if (!(lambda > 0.0)) throw std::invalid_argument("kkt: lambda must be positive");
  if (gram.rows() != gram.cols() || z_star.size() != gram.rows() || beta.size() != gram.rows())
    throw std::invalid_argument("kkt: dimension mismatch");
  const Eigen::VectorXd resid = z_star - gram * beta;
  return report_from_residuals(resid, beta, pen, lambda, tol);
}

KktReport rescaled_kkt_report(const Eigen::MatrixXd& gram, const Eigen::VectorXd& z_star,
                              const Eigen::VectorXd& b, double tau, const QuadSplinePenalty& pen,
                              double tol) {
  if (!(tau > 0.0)) throw std::invalid_argument("kkt: tau must be positive");
  if (gram.rows() != gram.cols() || z_star.size() != gram.rows() || b.size() != gram.rows())
    throw std::invalid_argument("kkt: dimension mismatch");
  // The rescaled system is the lambda = 1 system applied to (tau z*, b).
  const Eigen::VectorXd resid = tau * z_star - gram * b;
  return report_from_residuals(resid, b, pen, 1.0, tol);
}

LocalMinCertificate local_min_certificate(const StandardizedDesign& d, const Eigen::VectorXd& y,
                                          const Eigen::VectorXd& beta,
                                          const QuadSplinePenalty& pen, double lambda,
                                          double kkt_tol, double eigen_tol) {
  const KktReport kkt = kkt_report(d, y, beta, pen, lambda, kkt_tol);
  if (!kkt.satisfied)
    throw std::invalid_argument("kkt: beta does not satisfy the KKT system at tolerance");

  LocalMinCertificate cert;
  cert.boundary = kkt.boundary;

  std::vector<int> A;
  for (int j = 0; j < d.p; ++j)
    if (beta[j] != 0.0) A.push_back(j);
  if (A.empty()) {
    cert.certified = true;
    cert.min_eigenvalue = std::numeric_limits<double>::infinity();
    return cert;
  }

  Eigen::MatrixXd M(A.size(), A.size());
  for (std::size_t r = 0; r < A.size(); ++r)
    for (std::size_t c = 0; c < A.size(); ++c) M(r, c) = d.gram(A[r], A[c]);
  // rho_ddot(t; lambda) = rho_ddot_m(t / lambda); conservative at knots.
  for (std::size_t r = 0; r < A.size(); ++r)
    M(r, r) += pen.curvature_concave_side(std::abs(beta[A[r]]) / lambda);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  cert.min_eigenvalue = es.eigenvalues().minCoeff();
  cert.certified = cert.min_eigenvalue > eigen_tol;
  return cert;
}

}  // namespace plus
