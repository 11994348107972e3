#include "plus/selection.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace plus {

namespace {
int sign_of(double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); }
}

ModelTruth make_model_truth(const Eigen::VectorXd& beta, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("selection: sigma must be positive");
  ModelTruth t;
  t.beta = beta;
  t.sigma = sigma;
  for (int j = 0; j < beta.size(); ++j)
    if (beta[j] != 0.0) t.A_oracle.push_back(j);
  t.d_o = static_cast<int>(t.A_oracle.size());
  t.beta_star = 0.0;
  for (int j : t.A_oracle) {
    const double mag = std::abs(beta[j]);
    t.beta_star = t.beta_star == 0.0 ? mag : std::min(t.beta_star, mag);
  }
  return t;
}

Eigen::VectorXd oracle_lse(const StandardizedDesign& d, const Eigen::VectorXd& y,
                           const std::vector<int>& A_oracle) {
  if (y.size() != d.n) throw std::invalid_argument("selection: y has wrong length");
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(d.p);
  if (A_oracle.empty()) return beta;

  Eigen::MatrixXd XA(d.n, A_oracle.size());
  for (std::size_t k = 0; k < A_oracle.size(); ++k) {
    const int j = A_oracle[k];
    if (j < 0 || j >= d.p) throw std::invalid_argument("selection: oracle index out of range");
    XA.col(k) = d.X.col(j);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(XA);
  if (qr.rank() < static_cast<Eigen::Index>(A_oracle.size()))
    throw std::runtime_error("selection: X restricted to the oracle set is rank deficient");
  const Eigen::VectorXd w = qr.solve(y);
  for (std::size_t k = 0; k < A_oracle.size(); ++k) beta[A_oracle[k]] = w[k];
  return beta;
}

double universal_lambda(double sigma, int p, int n) {
  if (p < 2) throw std::invalid_argument("selection: universal lambda requires p >= 2");
  if (n < 1) throw std::invalid_argument("selection: n must be >= 1");
  if (!(sigma > 0.0)) throw std::invalid_argument("selection: sigma must be positive");
  return sigma * std::sqrt(2.0 * std::log(static_cast<double>(p)) / n);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double false_selection_bound(int p, int d_o, int n, double lambda) {
  if (!(p > d_o) || d_o < 0)
    throw std::invalid_argument("selection: need p > d_o >= 0");
  return 2.0 * (p - d_o) * normal_cdf(-lambda * std::sqrt(static_cast<double>(n)));
}

double unbiasedness_lambda_ceiling(double beta_star, double gamma, int p, int n) {
  if (!(beta_star > 0.0)) throw std::invalid_argument("selection: beta_star must be positive");
  if (!(gamma > 0.0)) throw std::invalid_argument("selection: gamma must be positive");
  if (p < 2) throw std::invalid_argument("selection: requires p >= 2");
  return beta_star / (gamma * std::sqrt(std::log(static_cast<double>(p)) / n));
}

double model_error(const Eigen::VectorXd& beta_hat, const ModelTruth& truth,
                   const Eigen::MatrixXd& Sigma) {
  if (beta_hat.size() != truth.beta.size() || Sigma.rows() != beta_hat.size() ||
      Sigma.cols() != beta_hat.size())
    throw std::invalid_argument("selection: dimension mismatch");
  const double asym = (Sigma - Sigma.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * (1.0 + Sigma.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("selection: Sigma must be symmetric");
  const Eigen::VectorXd diff = beta_hat - truth.beta;
  return diff.dot(Sigma * diff);
}

SelectionMetrics selection_metrics(const FitResult& fit, const ModelTruth& truth) {
  SelectionMetrics m;
  std::vector<int> sym_diff;
  std::set_symmetric_difference(fit.A_hat.begin(), fit.A_hat.end(), truth.A_oracle.begin(),
                                truth.A_oracle.end(), std::back_inserter(sym_diff));
  m.tm = static_cast<int>(sym_diff.size());
  m.cs = sym_diff.empty();
  m.sign_consistent = fit.beta_hat.size() == truth.beta.size();
  for (int j = 0; m.sign_consistent && j < truth.beta.size(); ++j)
    m.sign_consistent = sign_of(fit.beta_hat[j]) == sign_of(truth.beta[j]);
  return m;
}

double estimate_sigma(const StandardizedDesign& d, const Eigen::VectorXd& y,
                      const FitResult& fit) {
  if (y.size() != d.n || fit.beta_hat.size() != d.p)
    throw std::invalid_argument("selection: dimension mismatch");
  const int df = static_cast<int>(fit.A_hat.size());
  if (df >= d.n)
    throw std::invalid_argument("selection: degrees of freedom must be below n");
  const double rss = (y - d.X * fit.beta_hat).squaredNorm();
  return std::sqrt(rss / (d.n - df));
}

}  // namespace plus
