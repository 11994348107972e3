#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "plus/design.hpp"
#include "plus/kkt.hpp"

namespace plus {

// True coefficient vector with its derived support quantities.
struct ModelTruth {
  Eigen::VectorXd beta;
  std::vector<int> A_oracle;  // {j : beta_j != 0}, ascending
  int d_o = 0;                // |A_oracle|
  double beta_star = 0.0;     // min_{j in A_oracle} |beta_j|, 0 if empty support
  double sigma = 1.0;         // noise level
};

ModelTruth make_model_truth(const Eigen::VectorXd& beta, double sigma);

// A fitted coefficient vector at one penalty level.
struct FitResult {
  double lambda = 0.0;
  Eigen::VectorXd beta_hat;
  std::vector<int> A_hat;  // {j : beta_hat_j != 0}, ascending
  KktReport kkt;
  std::optional<double> sigma_hat;
};

// Least squares restricted to the oracle support, zeros elsewhere.
Eigen::VectorXd oracle_lse(const StandardizedDesign& d, const Eigen::VectorXd& y,
                           const std::vector<int>& A_oracle);

// sigma * sqrt(2 log(p) / n), natural logarithm. Requires p >= 2.
double universal_lambda(double sigma, int p, int n);

// Standard normal CDF, |abs error| <= 1e-12.
double normal_cdf(double x);

// 2 (p - d_o) Phi(-lambda sqrt(n)): upper bound on the probability of
// selecting some variable with beta_j = 0.
double false_selection_bound(int p, int d_o, int n, double lambda);

// beta_star / (gamma sqrt(log(p)/n)): the largest lambda, in units of
// sqrt(log(p)/n), with beta_star > gamma lambda.
double unbiasedness_lambda_ceiling(double beta_star, double gamma, int p, int n);

// (beta_hat - beta)' Sigma (beta_hat - beta).
double model_error(const Eigen::VectorXd& beta_hat, const ModelTruth& truth,
                   const Eigen::MatrixXd& Sigma);

struct SelectionMetrics {
  int tm = 0;                   // |A_hat symmetric-difference A_oracle|
  bool cs = false;              // A_hat == A_oracle
  bool sign_consistent = false; // sgn(beta_hat) == sgn(beta) componentwise
};

SelectionMetrics selection_metrics(const FitResult& fit, const ModelTruth& truth);

// sqrt(||y - X beta_hat||^2 / (n - df)) with df = |A_hat|. Requires df < n.
double estimate_sigma(const StandardizedDesign& d, const Eigen::VectorXd& y,
                      const FitResult& fit);

}  // namespace plus
