// Command-line front end: fit / path / simulate / diagnose / plot.
//
// Exit codes: 0 success, 1 usage error (bad flags, missing file), 2 data or
// numeric error.

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "plus/csv.hpp"
#include "plus/design.hpp"
#include "plus/kkt.hpp"
#include "plus/plus_path.hpp"
#include "plus/selection.hpp"
#include "plus/simlab.hpp"
#include "plus/svg_plot.hpp"

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Dataset {
  plus::StandardizedDesign design;
  Eigen::VectorXd y;
  bool has_response = false;
  std::vector<std::string> variables;  // predictor column names, in order
};

std::ifstream open_input(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot open input file '" + path + "'");
  return f;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw UsageError("cannot open output file '" + path + "'");
  return f;
}

Dataset load_dataset(const std::string& path, const std::string& response) {
  std::ifstream f = open_input(path);
  const plus::CsvTable t = plus::read_csv(f);

  int ycol = -1;
  if (!response.empty()) {
    ycol = t.column(response);
    if (ycol < 0) throw std::invalid_argument("response column '" + response + "' not found");
  }
  if (t.rows.empty()) throw std::invalid_argument("data file has no rows");
  const int p = static_cast<int>(t.header.size()) - (ycol >= 0 ? 1 : 0);
  if (p < 1) throw std::invalid_argument("data file has no predictor columns");
  const int n = static_cast<int>(t.rows.size());

  Dataset d;
  d.has_response = ycol >= 0;
  Eigen::MatrixXd raw(n, p);
  if (d.has_response) d.y.resize(n);
  for (int i = 0; i < n; ++i) {
    int jj = 0;
    for (std::size_t c = 0; c < t.header.size(); ++c) {
      const double v = plus::parse_double(t.rows[i][c], "column " + t.header[c]);
      if (static_cast<int>(c) == ycol)
        d.y[i] = v;
      else
        raw(i, jj++) = v;
    }
  }
  for (std::size_t c = 0; c < t.header.size(); ++c)
    if (static_cast<int>(c) != ycol) d.variables.push_back(t.header[c]);
  d.design = plus::standardize(raw);
  return d;
}

plus::QuadSplinePenalty penalty_from_flags(const std::string& name, double gamma) {
  return plus::method_penalty(plus::method_from_name(name), gamma);
}

int cmd_fit(const std::string& data, const std::string& response, const std::string& penalty,
            double gamma, double lambda, bool universal, double sigma0, int max_steps,
            const std::string& out) {
  Dataset ds = load_dataset(data, response);
  const plus::QuadSplinePenalty pen = penalty_from_flags(penalty, gamma);
  plus::PathOptions opts;
  opts.max_steps = max_steps;
  const plus::SolutionPath path = plus::compute_path(ds.design, ds.y, pen, opts);

  double sigma_hat = 0.0;
  plus::FitResult fit;
  if (universal) {
    // One refinement pass: fit at the universal level for the sigma guess,
    // re-estimate sigma, then refit.
    const double lam0 = plus::universal_lambda(sigma0, ds.design.p, ds.design.n);
    const plus::FitResult fit0 = plus::solve_at_lambda(path, lam0);
    sigma_hat = plus::estimate_sigma(ds.design, ds.y, fit0);
    const double lam1 =
        std::max(plus::universal_lambda(std::max(sigma_hat, 1e-10), ds.design.p, ds.design.n),
                 1e-10);
    fit = plus::solve_at_lambda(path, lam1);
  } else {
    fit = plus::solve_at_lambda(path, lambda);
  }
  sigma_hat = plus::estimate_sigma(ds.design, ds.y, fit);
  fit.sigma_hat = sigma_hat;

  std::ofstream os = open_output(out);
  os << "# penalty " << penalty << "\n";
  os << "# gamma " << plus::format_double(gamma) << "\n";
  os << "# lambda " << plus::format_double(fit.lambda) << "\n";
  os << "# sigma_hat " << plus::format_double(sigma_hat) << "\n";
  os << "# kkt_max_active_residual " << plus::format_double(fit.kkt.max_active_residual) << "\n";
  os << "# kkt_max_inactive_excess " << plus::format_double(fit.kkt.max_inactive_excess) << "\n";
  os << "variable,coefficient,active\n";
  for (int j = 0; j < ds.design.p; ++j) {
    const double raw_coef = fit.beta_hat[j] / ds.design.col_scales[j];
    os << ds.variables[j] << ',' << plus::format_double(raw_coef) << ','
       << (fit.beta_hat[j] != 0.0 ? 1 : 0) << '\n';
  }
  return 0;
}

int cmd_path(const std::string& data, const std::string& response, const std::string& penalty,
             double gamma, int max_steps, const std::string& out) {
  Dataset ds = load_dataset(data, response);
  plus::PathOptions opts;
  opts.max_steps = max_steps;
  const plus::SolutionPath path =
      plus::compute_path(ds.design, ds.y, penalty_from_flags(penalty, gamma), opts);
  std::ofstream os = open_output(out);
  plus::write_path_csv(os, path);
  std::cerr << "path: " << path.steps_used << " steps, "
            << (path.termination == plus::PathTermination::Fit ? "terminate_fit"
                                                               : "terminate_cap")
            << (path.jitter_applied ? " (jitter applied)" : "") << "\n";
  return 0;
}

int cmd_simulate(const std::string& config, int threads, const std::string& out) {
  std::ifstream f = open_input(config);
  plus::SimConfig cfg = plus::parse_config(f);
  if (const char* env = std::getenv("PLUS_SEED")) cfg.seed = std::stoull(env);
  if (threads > 0) cfg.threads = threads;
  const std::vector<plus::MetricsRecord> records = plus::run_experiment(cfg);
  std::ofstream os = open_output(out);
  plus::write_metrics_csv(os, records);
  int failures = 0;
  for (const auto& r : records) failures = std::max(failures, r.path_failures);
  if (failures > 0)
    std::cerr << "simulate: " << failures << " replication(s) had path failures\n";
  return 0;
}

int cmd_diagnose(const std::string& data, const std::string& response,
                 const std::string& penalty, double gamma, int dstar, const std::string& mode,
                 int samples, std::uint64_t seed) {
  Dataset ds = load_dataset(data, response);
  const plus::QuadSplinePenalty pen = penalty_from_flags(penalty, gamma);

  std::cout << "n " << ds.design.n << ", p " << ds.design.p << "\n";
  const plus::ConvexityReport global = plus::global_convexity_check(ds.design, pen);
  std::cout << "global convexity: " << (global.convex ? "true" : "false")
            << " (kappa " << global.kappa << ", c_min " << global.c_min << ", margin "
            << global.margin << ")\n";

  if (dstar > 0) {
    const plus::ScanMode scan = mode == "sampled" ? plus::ScanMode::sampled(samples, seed)
                                                  : plus::ScanMode::exhaustive();
    const plus::SparseRieszBounds bounds = plus::sparse_riesz_scan(ds.design, dstar, scan);
    std::cout << "sparse Riesz (d* " << dstar << ", " << mode << "): c_lower " << bounds.c_lower
              << ", c_upper " << bounds.c_upper << ", subsets " << bounds.subsets_scanned
              << (bounds.certified ? "" : " [sampled; not a certificate]") << "\n";
    const plus::ConvexityReport sparse = plus::sparse_convexity_check(ds.design, pen, dstar, scan);
    std::cout << "sparse convexity: " << (sparse.convex ? "true" : "false") << " (margin "
              << sparse.margin << ")"
              << (sparse.certified ? "" : " [sampled; not a certificate]") << "\n";
  }
  return 0;
}

int cmd_plot(const std::string& metrics, const std::string& metric, const std::string& title,
             const std::string& out) {
  std::ifstream f = open_input(metrics);
  const std::vector<plus::MetricsRecord> records = plus::read_metrics_csv(f);
  std::ofstream os = open_output(out);
  plus::write_metrics_svg(os, records, metric, title);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Penalized linear regression via PLUS path tracking"};
  app.require_subcommand(1);

  std::string data, response, penalty = "l1", out, config, metrics, metric = "mean_me", title;
  std::string mode = "exhaustive";
  double gamma = 3.7, lambda = 0.0, sigma0 = 1.0;
  bool universal = false;
  int max_steps = 10000, threads = 0, dstar = 0, samples = 1000;
  std::uint64_t seed = 0;

  CLI::App* fit = app.add_subcommand("fit", "fit coefficients at one penalty level");
  fit->add_option("--data", data)->required();
  fit->add_option("--response", response)->required();
  fit->add_option("--penalty", penalty)->check(CLI::IsMember({"l1", "lasso", "mcp", "scad"}));
  fit->add_option("--gamma", gamma);
  auto* lam_opt = fit->add_option("--lambda", lambda);
  auto* uni_opt = fit->add_flag("--lambda-universal", universal);
  lam_opt->excludes(uni_opt);
  fit->add_option("--sigma0", sigma0);
  fit->add_option("--max-steps", max_steps);
  fit->add_option("--out", out)->required();

  CLI::App* path = app.add_subcommand("path", "export the full solution path");
  path->add_option("--data", data)->required();
  path->add_option("--response", response)->required();
  path->add_option("--penalty", penalty)->check(CLI::IsMember({"l1", "lasso", "mcp", "scad"}));
  path->add_option("--gamma", gamma);
  path->add_option("--max-steps", max_steps);
  path->add_option("--out", out)->required();

  CLI::App* simulate = app.add_subcommand("simulate", "run a replicated experiment");
  simulate->add_option("--config", config)->required();
  simulate->add_option("--threads", threads);
  simulate->add_option("--out", out)->required();

  CLI::App* diagnose = app.add_subcommand("diagnose", "convexity and sparse-Riesz checks");
  diagnose->add_option("--data", data)->required();
  diagnose->add_option("--response", response);
  diagnose->add_option("--penalty", penalty)->check(CLI::IsMember({"l1", "lasso", "mcp", "scad"}));
  diagnose->add_option("--gamma", gamma);
  diagnose->add_option("--dstar", dstar);
  diagnose->add_option("--mode", mode)->check(CLI::IsMember({"exhaustive", "sampled"}));
  diagnose->add_option("--samples", samples);
  diagnose->add_option("--seed", seed);

  CLI::App* plot = app.add_subcommand("plot", "render a metrics CSV as SVG");
  plot->add_option("--metrics", metrics)->required();
  plot->add_option("--metric", metric);
  plot->add_option("--title", title);
  plot->add_option("--out", out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (fit->parsed()) {
      if (!universal && lam_opt->count() == 0)
        throw UsageError("fit requires --lambda or --lambda-universal");
      if (!universal && !(lambda > 0.0)) throw UsageError("--lambda must be positive");
      return cmd_fit(data, response, penalty, gamma, lambda, universal, sigma0, max_steps, out);
    }
    if (path->parsed()) return cmd_path(data, response, penalty, gamma, max_steps, out);
    if (simulate->parsed()) return cmd_simulate(config, threads, out);
    if (diagnose->parsed())
      return cmd_diagnose(data, response, penalty, gamma, dstar, mode, samples, seed);
    if (plot->parsed()) return cmd_plot(metrics, metric, title, out);
    return 1;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
