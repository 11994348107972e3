#include "plus/simlab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "plus/csv.hpp"

namespace plus {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, int rep_index) {
  return splitmix64(seed + 0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(rep_index + 1));
}

void validate_config(const SimConfig& cfg) {
  if (cfg.n < 2) throw std::invalid_argument("simlab: n must be >= 2");
  if (cfg.p < 2) throw std::invalid_argument("simlab: p must be >= 2");
  if (cfg.d_o < 0 || cfg.d_o > cfg.p) throw std::invalid_argument("simlab: need 0 <= d_o <= p");
  if (!(cfg.beta_star > 0.0)) throw std::invalid_argument("simlab: beta_star must be positive");
  if (!(cfg.sigma > 0.0)) throw std::invalid_argument("simlab: sigma must be positive");
  if (cfg.design_correlation < 0.0 || cfg.design_correlation >= 1.0)
    throw std::invalid_argument("simlab: design_correlation must be in [0, 1)");
  if (cfg.replications < 1) throw std::invalid_argument("simlab: replications must be >= 1");
  if (cfg.methods.empty()) throw std::invalid_argument("simlab: no methods selected");
}

std::vector<double> effective_grid(const SimConfig& cfg) {
  std::vector<double> grid = cfg.lambda_grid.empty() ? default_lambda_grid() : cfg.lambda_grid;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0)) throw std::invalid_argument("simlab: lambda grid must be positive");
    if (i > 0 && grid[i] <= grid[i - 1])
      throw std::invalid_argument("simlab: lambda grid must be ascending");
  }
  return grid;
}

struct PerLambda {
  bool ok = false;
  double me = 0.0;
  double me_gram = 0.0;
  int tm = 0;
  bool cs = false;
  bool sign = false;
  bool false_inc = false;
};

struct PerMethod {
  bool path_ok = false;
  bool capped = false;
  int steps = 0;
  std::vector<PerLambda> at;
};

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::Lasso: return "lasso";
    case Method::Mcp: return "mcp";
    case Method::Scad: return "scad";
  }
  return "?";
}

Method method_from_name(const std::string& name) {
  if (name == "lasso" || name == "l1") return Method::Lasso;
  if (name == "mcp") return Method::Mcp;
  if (name == "scad") return Method::Scad;
  throw std::invalid_argument("simlab: unknown method '" + name + "'");
}

QuadSplinePenalty method_penalty(Method m, double gamma) {
  switch (m) {
    case Method::Lasso: return make_l1();
    case Method::Mcp: return make_mcp(gamma);
    case Method::Scad: return make_scad(gamma);
  }
  throw std::logic_error("simlab: bad method");
}

std::vector<double> default_lambda_grid() {
  std::vector<double> g(30);
  for (int i = 0; i < 30; ++i) g[i] = 0.25 + (3.0 - 0.25) * i / 29.0;
  return g;
}

Eigen::MatrixXd ar1_covariance(int p, double r) {
  Eigen::MatrixXd S(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) S(i, j) = i == j ? 1.0 : std::pow(r, std::abs(i - j));
  return S;
}

SimData generate_data(const SimConfig& cfg, int rep_index) {
  validate_config(cfg);
  std::mt19937_64 rng(derive_seed(cfg.seed, rep_index));
  std::normal_distribution<double> gauss(0.0, 1.0);

  // AR(1) rows: x_0 = e_0, x_j = r x_{j-1} + sqrt(1-r^2) e_j.
  const double r = cfg.design_correlation;
  const double innov = std::sqrt(1.0 - r * r);
  Eigen::MatrixXd raw(cfg.n, cfg.p);
  for (int i = 0; i < cfg.n; ++i) {
    double prev = gauss(rng);
    raw(i, 0) = prev;
    for (int j = 1; j < cfg.p; ++j) {
      prev = r * prev + innov * gauss(rng);
      raw(i, j) = prev;
    }
  }

  SimData data;
  data.design = standardize(raw);

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(cfg.p);
  for (int k = 0; k < cfg.d_o; ++k) {
    const int j = cfg.support_layout == SupportLayout::FirstDo
                      ? k
                      : static_cast<int>(static_cast<long>(k) * cfg.p / cfg.d_o);
    beta[j] = cfg.beta_star;
  }
  data.truth = make_model_truth(beta, cfg.sigma);

  data.y = data.design.X * beta;
  for (int i = 0; i < cfg.n; ++i) data.y[i] += cfg.sigma * gauss(rng);
  return data;
}

namespace {

PerMethod run_method(const SimConfig& cfg, const SimData& data, Method method,
                     const std::vector<double>& lambdas, const Eigen::MatrixXd& Sigma_pop) {
  PerMethod out;
  out.at.resize(lambdas.size());

  SolutionPath path;
  try {
    path = compute_path(data.design, data.y, method_penalty(method, cfg.gamma),
                        cfg.path_options);
  } catch (const std::exception&) {
    return out;  // path_ok stays false; counted, not dropped
  }
  out.path_ok = true;
  out.capped = path.termination == PathTermination::Cap;
  out.steps = path.steps_used;

  for (std::size_t g = 0; g < lambdas.size(); ++g) {
    PerLambda& cell = out.at[g];
    try {
      const FitResult fit = solve_at_lambda(path, lambdas[g]);
      cell.ok = true;
      cell.me = model_error(fit.beta_hat, data.truth, Sigma_pop);
      cell.me_gram = model_error(fit.beta_hat, data.truth, data.design.gram);
      const SelectionMetrics sm = selection_metrics(fit, data.truth);
      cell.tm = sm.tm;
      cell.cs = sm.cs;
      cell.sign = sm.sign_consistent;
      for (int j : fit.A_hat)
        if (!std::binary_search(data.truth.A_oracle.begin(), data.truth.A_oracle.end(), j))
          cell.false_inc = true;
    } catch (const std::exception&) {
      cell.ok = false;
    }
  }
  return out;
}

}  // namespace

std::vector<MetricsRecord> run_experiment(const SimConfig& cfg) {
  validate_config(cfg);
  const std::vector<double> grid = effective_grid(cfg);
  const double unit = std::sqrt(std::log(static_cast<double>(cfg.p)) / cfg.n);
  std::vector<double> lambdas(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) lambdas[g] = grid[g] * unit;
  const Eigen::MatrixXd Sigma_pop = ar1_covariance(cfg.p, cfg.design_correlation);

  std::vector<std::vector<PerMethod>> outcomes(cfg.replications);

  auto run_rep = [&](int rep) {
    std::vector<PerMethod> per(cfg.methods.size());
    try {
      const SimData data = generate_data(cfg, rep);
      for (std::size_t m = 0; m < cfg.methods.size(); ++m)
        per[m] = run_method(cfg, data, cfg.methods[m], lambdas, Sigma_pop);
    } catch (const std::exception&) {
      for (auto& pm : per) pm.at.resize(grid.size());
    }
    outcomes[rep] = std::move(per);
  };

  int n_threads = cfg.threads > 0 ? cfg.threads
                                  : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::max(1, std::min(n_threads, cfg.replications));
  if (n_threads == 1) {
    for (int rep = 0; rep < cfg.replications; ++rep) run_rep(rep);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t)
      pool.emplace_back([&] {
        for (int rep = next.fetch_add(1); rep < cfg.replications; rep = next.fetch_add(1))
          run_rep(rep);
      });
    for (auto& t : pool) t.join();
  }

  // Aggregate in replication-index order so results do not depend on
  // scheduling.
  std::vector<MetricsRecord> records;
  records.reserve(cfg.methods.size() * grid.size());
  for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
    int path_failures = 0;
    long steps_sum = 0;
    int steps_n = 0;
    for (int rep = 0; rep < cfg.replications; ++rep) {
      const PerMethod& pm = outcomes[rep][m];
      if (!pm.path_ok || pm.capped) ++path_failures;
      if (pm.path_ok) {
        steps_sum += pm.steps;
        ++steps_n;
      }
    }
    for (std::size_t g = 0; g < grid.size(); ++g) {
      MetricsRecord rec;
      rec.method = cfg.methods[m];
      rec.lambda_ratio = grid[g];
      rec.path_failures = path_failures;
      rec.steps_mean = steps_n > 0 ? static_cast<double>(steps_sum) / steps_n : 0.0;

      double me_sum = 0.0, me_sq = 0.0, me_gram_sum = 0.0, tm_sum = 0.0;
      int cs = 0, sign = 0, finc = 0, n_ok = 0;
      for (int rep = 0; rep < cfg.replications; ++rep) {
        const PerLambda& cell = outcomes[rep][m].at[g];
        if (!cell.ok) continue;
        ++n_ok;
        me_sum += cell.me;
        me_sq += cell.me * cell.me;
        me_gram_sum += cell.me_gram;
        tm_sum += cell.tm;
        cs += cell.cs;
        sign += cell.sign;
        finc += cell.false_inc;
      }
      rec.replications_ok = n_ok;
      if (n_ok > 0) {
        rec.mean_me = me_sum / n_ok;
        rec.mean_me_gram = me_gram_sum / n_ok;
        rec.mean_tm = tm_sum / n_ok;
        rec.cs_rate = static_cast<double>(cs) / n_ok;
        rec.sign_rate = static_cast<double>(sign) / n_ok;
        rec.false_inclusion_rate = static_cast<double>(finc) / n_ok;
        if (n_ok > 1) {
          const double var = (me_sq - me_sum * me_sum / n_ok) / (n_ok - 1);
          rec.mc_stderr_me = std::sqrt(std::max(var, 0.0) / n_ok);
        }
      }
      records.push_back(rec);
    }
  }
  return records;
}

CvResult cross_validate(const StandardizedDesign& d, const Eigen::VectorXd& y, Method method,
                        double gamma, int k, const std::vector<double>& lambda_grid) {
  if (k < 2 || k > d.n) throw std::invalid_argument("simlab: folds must satisfy 2 <= k <= n");
  if (y.size() != d.n) throw std::invalid_argument("simlab: y has wrong length");
  if (lambda_grid.empty()) throw std::invalid_argument("simlab: empty lambda grid");
  for (double l : lambda_grid)
    if (!(l > 0.0)) throw std::invalid_argument("simlab: lambda grid must be positive");

  const int base = d.n / k;
  const int rem = d.n % k;
  if (base == 0 && rem == 0) throw std::invalid_argument("simlab: fold with zero training rows");

  CvResult res;
  res.lambda_grid = lambda_grid;
  std::vector<double> sse(lambda_grid.size(), 0.0);
  std::vector<bool> valid(lambda_grid.size(), true);

  int offset = 0;
  for (int f = 0; f < k; ++f) {
    const int fold_size = base + (f < rem ? 1 : 0);
    const int val_begin = offset, val_end = offset + fold_size;
    offset = val_end;
    const int n_train = d.n - fold_size;
    if (n_train < 1) throw std::invalid_argument("simlab: fold with zero training rows");

    Eigen::MatrixXd Xtr(n_train, d.p);
    Eigen::VectorXd ytr(n_train);
    int row = 0;
    for (int i = 0; i < d.n; ++i) {
      if (i >= val_begin && i < val_end) continue;
      Xtr.row(row) = d.X.row(i);
      ytr[row] = y[i];
      ++row;
    }

    // Re-standardize the training block so the penalty sees unit-norm
    // columns; back-transform to the caller's coordinates for prediction.
    const StandardizedDesign fold = standardize(Xtr);
    const SolutionPath path = compute_path(fold, ytr, method_penalty(method, gamma));

    for (std::size_t g = 0; g < lambda_grid.size(); ++g) {
      if (!valid[g]) continue;
      try {
        const FitResult fit = solve_at_lambda(path, lambda_grid[g]);
        const Eigen::VectorXd beta =
            fit.beta_hat.array() / fold.col_scales.array();
        for (int i = val_begin; i < val_end; ++i) {
          const double err = y[i] - d.X.row(i).dot(beta);
          sse[g] += err * err;
        }
      } catch (const std::exception&) {
        valid[g] = false;
      }
    }
  }

  res.mean_mse.resize(lambda_grid.size());
  int best = -1;
  for (std::size_t g = 0; g < lambda_grid.size(); ++g) {
    res.mean_mse[g] = valid[g] ? sse[g] / d.n : std::numeric_limits<double>::infinity();
    if (valid[g] && (best < 0 || res.mean_mse[g] < res.mean_mse[best]))
      best = static_cast<int>(g);
  }
  if (best < 0) throw std::runtime_error("simlab: no lambda in the grid could be evaluated");
  res.lambda = lambda_grid[best];
  return res;
}

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  std::size_t b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> parts;
  std::istringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(trim(item));
  return parts;
}

}  // namespace

SimConfig parse_config(std::istream& is) {
  SimConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));

    if (key == "n") cfg.n = std::stoi(value);
    else if (key == "p") cfg.p = std::stoi(value);
    else if (key == "d_o") cfg.d_o = std::stoi(value);
    else if (key == "beta_star") cfg.beta_star = std::stod(value);
    else if (key == "gamma") cfg.gamma = std::stod(value);
    else if (key == "sigma") cfg.sigma = std::stod(value);
    else if (key == "design_correlation") cfg.design_correlation = std::stod(value);
    else if (key == "support_layout") {
      if (value == "first_d_o") cfg.support_layout = SupportLayout::FirstDo;
      else if (value == "evenly_spaced") cfg.support_layout = SupportLayout::EvenlySpaced;
      else throw std::invalid_argument("config: unknown support_layout '" + value + "'");
    } else if (key == "replications") cfg.replications = std::stoi(value);
    else if (key == "seed") cfg.seed = std::stoull(value);
    else if (key == "lambda_grid") {
      cfg.lambda_grid.clear();
      for (const std::string& v : split_list(value)) cfg.lambda_grid.push_back(std::stod(v));
    } else if (key == "methods") {
      cfg.methods.clear();
      for (const std::string& v : split_list(value)) cfg.methods.push_back(method_from_name(v));
    } else if (key == "threads") cfg.threads = std::stoi(value);
    else if (key == "max_steps") cfg.path_options.max_steps = std::stoi(value);
    else throw std::invalid_argument("config: unknown key '" + key + "'");
  }
  validate_config(cfg);
  return cfg;
}

SimConfig parse_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("config: cannot open '" + path + "'");
  return parse_config(f);
}

void write_metrics_csv(std::ostream& os, const std::vector<MetricsRecord>& records) {
  os << "method,lambda_ratio,mean_me,mc_stderr_me,mean_tm,cs_rate,sign_rate,"
        "false_inclusion_rate,steps_mean\n";
  for (const auto& r : records) {
    os << method_name(r.method) << ',' << format_double(r.lambda_ratio) << ','
       << format_double(r.mean_me) << ',' << format_double(r.mc_stderr_me) << ','
       << format_double(r.mean_tm) << ',' << format_double(r.cs_rate) << ','
       << format_double(r.sign_rate) << ',' << format_double(r.false_inclusion_rate) << ','
       << format_double(r.steps_mean) << '\n';
  }
}

std::vector<MetricsRecord> read_metrics_csv(std::istream& is) {
  const CsvTable t = read_csv(is);
  const std::vector<std::string> expected = {
      "method",  "lambda_ratio", "mean_me",              "mc_stderr_me", "mean_tm",
      "cs_rate", "sign_rate",    "false_inclusion_rate", "steps_mean"};
  if (t.header != expected) throw std::invalid_argument("simlab: unexpected metrics CSV header");
  std::vector<MetricsRecord> out;
  for (const auto& row : t.rows) {
    MetricsRecord r;
    r.method = method_from_name(row[0]);
    r.lambda_ratio = parse_double(row[1], "lambda_ratio");
    r.mean_me = parse_double(row[2], "mean_me");
    r.mc_stderr_me = parse_double(row[3], "mc_stderr_me");
    r.mean_tm = parse_double(row[4], "mean_tm");
    r.cs_rate = parse_double(row[5], "cs_rate");
    r.sign_rate = parse_double(row[6], "sign_rate");
    r.false_inclusion_rate = parse_double(row[7], "false_inclusion_rate");
    r.steps_mean = parse_double(row[8], "steps_mean");
    out.push_back(r);
  }
  return out;
}

}  // namespace plus
