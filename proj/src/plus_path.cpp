#include "plus/plus_path.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <unordered_set>

namespace plus {

namespace {

// tau values past this are treated as "penalty level zero". The ceiling is
// kept moderate on purpose: residuals of the rescaled system are evaluated
// as differences of O(tau)-sized terms, so a breakpoint at tau keeps
// roundoff near eps * tau and stays verifiable at 1e-8 only for
// tau <~ 1e6. Queries beyond the terminal breakpoint extrapolate along the
// final ray, which is exact because the ray is affine.
constexpr double kTauTerminal = 1e6;
constexpr double kOvershoot = 1e-12;  // tolerated numerical boundary overshoot

struct Degeneracy : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Deterministic unit-magnitude perturbation pattern (splitmix64 mix).
double jitter_unit(int j) {
  std::uint64_t x = static_cast<std::uint64_t>(j + 1) * 0x9E3779B97F4A7C15ull;
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBull;
  x ^= x >> 31;
  return 2.0 * (static_cast<double>(x >> 11) * 0x1.0p-53) - 1.0;
}

int sign_of(double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); }

struct EventCandidate {
  double s = 0.0;    // tau-parameter distance along the segment
  int priority = 0;  // 0 deactivate, 1 knot_cross, 2 activate, 3 tau-zero
  int j = -1;
  int new_eta = 0;
  PathEvent event;
};

std::string facet_key(const FacetState& eta) {
  return std::string(reinterpret_cast<const char*>(eta.data()), eta.size());
}

// Tracks the main branch of the rescaled KKT system
//   z_j tau - chi_j' b = sgn(b_j) rho_dot_m(|b_j|)   (b_j != 0)
//   |z_j tau - chi_j' b| <= 1                        (b_j = 0).
// Within a facet the equality rows are affine in (tau, b): with
// M = G_AA + diag(slope_k) and c_j = sgn(b_j) intercept_k,
//   M b_A = tau z_A - c,
// so the in-facet solution line has direction (1, u) with M u = z_A.
// At a junction the continuation direction is the one that moves the
// entry-face quantity strictly into the new facet's interior; the path
// therefore exits each facet through a face different from its entry face.
class Tracker {
 public:
  Tracker(const Eigen::MatrixXd& G, const Eigen::VectorXd& z, const QuadSplinePenalty& pen,
          const PathOptions& opts)
      : G_(G), z_(z), pen_(pen), opts_(opts), p_(static_cast<int>(z.size())),
        m_(pen.num_knots()) {}

  SolutionPath run() {
    SolutionPath path;
    path.gram = G_;
    path.z_star = z_;
    path.penalty = pen_;

    eta_.assign(p_, 0);
    b_ = Eigen::VectorXd::Zero(p_);
    tau_ = 0.0;
    entry_.kind = PathEvent::Origin;
    entry_sign_ = 0;
    visited_.clear();
    visited_.insert(facet_key(eta_));

    path.breakpoints.push_back(PathBreakpoint{0, 0.0, b_, eta_, PathEvent{}});

    for (int step = 1; step <= opts_.max_steps; ++step) {
      rebuild_active_set();
      factorize();
      const int eps = choose_direction();

      std::vector<EventCandidate> cands = scan_events(eps);
      if (cands.empty()) {
        append_terminal_ray(path, step);
        path.termination = PathTermination::Fit;
        path.steps_used = step;
        return path;
      }
      const EventCandidate ev = pick_event(cands);

      // Next event beyond the tau ceiling: the penalty level there is below
      // 1/kTauTerminal and the zero-penalty optimality residual is already
      // of that order, so stop on the current segment instead of tracking
      // events that can no longer be verified.
      if (eps > 0 && tau_ + ev.s > kTauTerminal) {
        const double tau_end = std::max(kTauTerminal, tau_ * (1.0 + 1e-9));
        advance(tau_end - tau_, +1);
        tau_ = tau_end;
        path.breakpoints.push_back(PathBreakpoint{step, tau_, b_, eta_,
                                                  PathEvent{PathEvent::TerminateFit, -1, -1}});
        path.termination = PathTermination::Fit;
        path.steps_used = step;
        return path;
      }

      advance(ev.s, eps);
      if (ev.priority == 3) {
        // tau ran into 0; not a main-branch outcome, stop with the cap flag.
        tau_ = 0.0;
        path.breakpoints.push_back(
            PathBreakpoint{step, tau_, b_, eta_, PathEvent{PathEvent::TerminateCap, -1, -1}});
        path.termination = PathTermination::Cap;
        path.steps_used = step;
        return path;
      }

      snap(ev);
      path.breakpoints.push_back(PathBreakpoint{step, tau_, b_, eta_, ev.event});

      // Entry context for the next facet's direction choice, taken before
      // the facet switch.
      if (ev.event.kind == PathEvent::Deactivate)
        entry_sign_ = eta_[ev.j] > 0 ? 1 : -1;  // sign of g_j at the junction
      else if (ev.event.kind == PathEvent::KnotCross)
        entry_sign_ = std::abs(ev.new_eta) > segk_of(ev.j) ? 1 : -1;  // up / down
      else
        entry_sign_ = 0;

      eta_[ev.j] = static_cast<std::int8_t>(ev.new_eta);
      if (!visited_.insert(facet_key(eta_)).second) throw Degeneracy("facet revisited");
      entry_ = ev.event;
    }

    path.breakpoints.push_back(PathBreakpoint{opts_.max_steps + 1, tau_, b_, eta_,
                                              PathEvent{PathEvent::TerminateCap, -1, -1}});
    path.termination = PathTermination::Cap;
    path.steps_used = opts_.max_steps;
    return path;
  }

 private:
  void rebuild_active_set() {
    A_.clear();
    for (int j = 0; j < p_; ++j)
      if (eta_[j] != 0) A_.push_back(j);
  }

  int segk_of(int j) const { return std::abs(static_cast<int>(eta_[j])); }

  int index_in_active(int j) const {
    const auto it = std::lower_bound(A_.begin(), A_.end(), j);
    return static_cast<int>(it - A_.begin());
  }

  void factorize() {
    const int a = static_cast<int>(A_.size());
    u_.resize(a);
    v_.resize(a);
    if (a == 0) return;

    const auto& segs = pen_.deriv_segments();
    Eigen::MatrixXd M(a, a);
    Eigen::VectorXd c(a), zA(a);
    for (int r = 0; r < a; ++r) {
      const int j = A_[r];
      const int k = segk_of(j);
      for (int s = 0; s < a; ++s) M(r, s) = G_(j, A_[s]);
      M(r, r) += segs[k - 1].slope;
      c[r] = sign_of(static_cast<double>(eta_[j])) * segs[k - 1].intercept;
      zA[r] = z_[j];
    }

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
    const Eigen::VectorXd pivots = lu.matrixLU().diagonal().cwiseAbs();
    if (!(pivots.minCoeff() > 1e-13 * std::max(1.0, pivots.maxCoeff())))
      throw Degeneracy("singular facet system");
    u_ = lu.solve(zA);
    u_ += lu.solve(zA - M * u_);  // one refinement pass
    v_ = lu.solve(c);
    v_ += lu.solve(c - M * v_);
    if (!u_.allFinite() || !v_.allFinite()) throw Degeneracy("singular facet system");
    if ((zA - M * u_).lpNorm<Eigen::Infinity>() > 1e-8 * (1.0 + zA.lpNorm<Eigen::Infinity>()))
      throw Degeneracy("ill-conditioned facet system");
  }

  // d g_j / d tau along direction (1, u) for a coordinate j.
  double gdot_unit(int j) const {
    double acc = z_[j];
    for (std::size_t r = 0; r < A_.size(); ++r) acc -= G_(j, A_[r]) * u_[r];
    return acc;
  }

  int choose_direction() const {
    switch (entry_.kind) {
      case PathEvent::Origin:
        return +1;
      case PathEvent::Activate: {
        const int r = index_in_active(entry_.j);
        const double phi = sign_of(static_cast<double>(eta_[entry_.j])) * u_[r];
        if (phi == 0.0) throw Degeneracy("tangent direction at activation");
        return phi > 0.0 ? +1 : -1;
      }
      case PathEvent::Deactivate: {
        // g_j sits at entry_sign_ * 1; |g_j| must strictly decrease.
        const double phi = entry_sign_ * gdot_unit(entry_.j);
        if (phi == 0.0) throw Degeneracy("tangent direction at deactivation");
        return phi > 0.0 ? -1 : +1;
      }
      case PathEvent::KnotCross: {
        const int r = index_in_active(entry_.j);
        const double phi = sign_of(static_cast<double>(eta_[entry_.j])) * u_[r];
        if (phi == 0.0) throw Degeneracy("tangent direction at knot");
        const bool up = entry_sign_ > 0;
        return (phi > 0.0) == up ? +1 : -1;
      }
      default:
        throw Degeneracy("unexpected entry event");
    }
  }

  std::vector<EventCandidate> scan_events(int eps) const {
    std::vector<EventCandidate> out;
    const auto& knots = pen_.knots();

    auto add = [&](double s, int priority, int j, int new_eta, PathEvent ev) {
      if (s < -kOvershoot) return;
      s = std::max(s, 0.0);
      out.push_back(EventCandidate{s, priority, j, new_eta, ev});
    };

    for (std::size_t r = 0; r < A_.size(); ++r) {
      const int j = A_[r];
      const int sg = eta_[j] > 0 ? 1 : -1;
      const int k = segk_of(j);
      const double bdot = eps * u_[r];
      if (sg * bdot < 0.0) {
        // |b_j| shrinking toward knots[k-1].
        const double target = sg * knots[k - 1];
        const double s = (target - b_[j]) / bdot;
        if (k == 1)
          add(s, 0, j, 0, PathEvent{PathEvent::Deactivate, j, -1});
        else
          add(s, 1, j, sg * (k - 1), PathEvent{PathEvent::KnotCross, j, k - 1});
      } else if (sg * bdot > 0.0 && k < m_) {
        // |b_j| growing toward knots[k].
        const double target = sg * knots[k];
        const double s = (target - b_[j]) / bdot;
        add(s, 1, j, sg * (k + 1), PathEvent{PathEvent::KnotCross, j, k});
      }
    }

    // Inactive constraints |tau z_j - chi_j' b| <= 1.
    Eigen::VectorXd Gb = Eigen::VectorXd::Zero(p_);
    Eigen::VectorXd Gu = Eigen::VectorXd::Zero(p_);
    for (std::size_t r = 0; r < A_.size(); ++r) {
      Gb += G_.col(A_[r]) * b_[A_[r]];
      Gu += G_.col(A_[r]) * u_[r];
    }
    for (int j = 0; j < p_; ++j) {
      if (eta_[j] != 0) continue;
      const double g0 = tau_ * z_[j] - Gb[j];
      const double gdot = eps * (z_[j] - Gu[j]);
      if (gdot > 0.0)
        add((1.0 - g0) / gdot, 2, j, +1, PathEvent{PathEvent::Activate, j, -1});
      else if (gdot < 0.0)
        add((-1.0 - g0) / gdot, 2, j, -1, PathEvent{PathEvent::Activate, j, -1});
    }

    if (eps < 0) out.push_back(EventCandidate{tau_, 3, -1, 0, PathEvent{}});
    return out;
  }

  EventCandidate pick_event(const std::vector<EventCandidate>& cands) const {
    double s_min = std::numeric_limits<double>::infinity();
    for (const auto& c : cands) s_min = std::min(s_min, c.s);
    const EventCandidate* best = nullptr;
    for (const auto& c : cands) {
      if (c.s > s_min + opts_.event_tol) continue;
      if (!best || c.priority < best->priority ||
          (c.priority == best->priority && c.j < best->j))
        best = &c;
    }
    return *best;
  }

  void advance(double s, int eps) {
    tau_ += eps * s;
    for (std::size_t r = 0; r < A_.size(); ++r) b_[A_[r]] += eps * s * u_[r];
  }

  void snap(const EventCandidate& ev) {
    switch (ev.event.kind) {
      case PathEvent::Deactivate:
      case PathEvent::Activate:
        b_[ev.j] = 0.0;
        break;
      case PathEvent::KnotCross:
        b_[ev.j] = (eta_[ev.j] > 0 ? 1.0 : -1.0) * pen_.knots()[ev.event.knot];
        break;
      default:
        break;
    }
  }

  void append_terminal_ray(SolutionPath& path, int step) const {
    // No boundary is reachable: b_A = tau u - v is valid for all larger tau
    // and beta = b/tau converges to a zero-penalty stationary point with
    // optimality residual (G_A v)/tau. Record the endpoint far enough out
    // that the residual has dropped below fit_tol.
    Eigen::VectorXd w = Eigen::VectorXd::Zero(p_);
    for (std::size_t r = 0; r < A_.size(); ++r) w += G_.col(A_[r]) * v_[r];
    const double w_inf = A_.empty() ? 0.0 : w.lpNorm<Eigen::Infinity>();
    const double tau_end = std::max({2.0 * tau_ + 1.0, kTauTerminal, w_inf / opts_.fit_tol});
    Eigen::VectorXd b_end = b_;
    for (std::size_t r = 0; r < A_.size(); ++r) b_end[A_[r]] += (tau_end - tau_) * u_[r];
    path.breakpoints.push_back(PathBreakpoint{step, tau_end, b_end, eta_,
                                              PathEvent{PathEvent::TerminateFit, -1, -1}});
  }

  const Eigen::MatrixXd& G_;
  Eigen::VectorXd z_;
  const QuadSplinePenalty& pen_;
  PathOptions opts_;
  int p_;
  int m_;

  FacetState eta_;
  std::vector<int> A_;
  Eigen::VectorXd b_;
  Eigen::VectorXd u_, v_;
  double tau_ = 0.0;
  PathEvent entry_;
  int entry_sign_ = 0;
  std::unordered_set<std::string> visited_;
};

}  // namespace

std::string PathEvent::label() const {
  char buf[64];
  switch (kind) {
    case Origin:
      return "origin";
    case Activate:
      std::snprintf(buf, sizeof buf, "activate(%d)", j + 1);
      return buf;
    case Deactivate:
      std::snprintf(buf, sizeof buf, "deactivate(%d)", j + 1);
      return buf;
    case KnotCross:
      std::snprintf(buf, sizeof buf, "knot_cross(%d;%d)", j + 1, knot);
      return buf;
    case TerminateFit:
      return "terminate_fit";
    case TerminateCap:
      return "terminate_cap";
  }
  return "?";
}

double SolutionPath::max_tau() const {
  double t = 0.0;
  for (const auto& bp : breakpoints) t = std::max(t, bp.tau);
  return t;
}

SolutionPath compute_path(const Eigen::MatrixXd& gram, const Eigen::VectorXd& z_star,
                          const QuadSplinePenalty& pen, const PathOptions& opts) {
  if (gram.rows() != gram.cols() || gram.rows() != z_star.size())
    throw std::invalid_argument("plus_path: gram/z* dimension mismatch");
  if (z_star.size() < 1) throw std::invalid_argument("plus_path: empty problem");
  if (opts.max_steps < 1) throw std::invalid_argument("plus_path: max_steps must be >= 1");

  try {
    return Tracker(gram, z_star, pen, opts).run();
  } catch (const Degeneracy&) {
    // Deterministic jitter restores the almost-everywhere genericity the
    // tracker relies on; recompute once from scratch.
    Eigen::VectorXd zj = z_star;
    for (int j = 0; j < zj.size(); ++j) zj[j] += 1e-9 * jitter_unit(j);
    try {
      SolutionPath path = Tracker(gram, zj, pen, opts).run();
      path.jitter_applied = true;
      return path;
    } catch (const Degeneracy& second) {
      throw std::runtime_error(std::string("plus_path: degenerate design (") + second.what() +
                               ")");
    }
  }
}

SolutionPath compute_path(const StandardizedDesign& d, const Eigen::VectorXd& y,
                          const QuadSplinePenalty& pen, const PathOptions& opts) {
  return compute_path(d.gram, d.zstar(y), pen, opts);
}

FitResult solve_at_lambda(const SolutionPath& path, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("plus_path: lambda must be positive");
  if (path.breakpoints.size() < 2) throw PathRangeError("penalty level below path range");

  const double tau_max = path.max_tau();
  double tau_q = 1.0 / lambda;
  const bool beyond = tau_q > tau_max * (1.0 + 1e-12);
  if (beyond && path.termination != PathTermination::Fit)
    throw PathRangeError("penalty level below path range");
  if (!beyond) tau_q = std::min(tau_q, tau_max);

  std::vector<Eigen::VectorXd> crossings;
  auto push_unique = [&](const Eigen::VectorXd& b) {
    for (const auto& seen : crossings) {
      const double scale = 1.0 + b.lpNorm<Eigen::Infinity>();
      if ((seen - b).lpNorm<Eigen::Infinity>() <= 1e-10 * scale) return;
    }
    crossings.push_back(b);
  };

  if (beyond) {
    // Past the terminal breakpoint of a fit-terminated path: the final
    // segment is a ray, extrapolate along it (exact, the ray is affine).
    const auto& a = path.breakpoints[path.breakpoints.size() - 2];
    const auto& b = path.breakpoints.back();
    const double t = (tau_q - a.tau) / (b.tau - a.tau);
    push_unique(a.b + t * (b.b - a.b));
  }

  for (std::size_t i = 0; i + 1 < path.breakpoints.size(); ++i) {
    const auto& a = path.breakpoints[i];
    const auto& b = path.breakpoints[i + 1];
    if (a.tau == b.tau) {
      if (tau_q == a.tau) push_unique(a.b);
      continue;
    }
    if ((tau_q - a.tau) * (tau_q - b.tau) > 0.0) continue;
    const double t = (tau_q - a.tau) / (b.tau - a.tau);
    push_unique(a.b + t * (b.b - a.b));
  }
  if (crossings.empty()) throw PathRangeError("penalty level below path range");

  // Sparsest crossing; ties by smallest l1 norm.
  const Eigen::VectorXd* best = nullptr;
  int best_nnz = 0;
  double best_l1 = 0.0;
  for (const auto& cand : crossings) {
    int nnz = 0;
    for (int j = 0; j < cand.size(); ++j) nnz += cand[j] != 0.0;
    const double l1 = cand.lpNorm<1>();
    if (!best || nnz < best_nnz || (nnz == best_nnz && l1 < best_l1)) {
      best = &cand;
      best_nnz = nnz;
      best_l1 = l1;
    }
  }

  FitResult fit;
  fit.lambda = lambda;
  fit.beta_hat = *best / tau_q;
  for (int j = 0; j < fit.beta_hat.size(); ++j)
    if (fit.beta_hat[j] != 0.0) fit.A_hat.push_back(j);
  fit.kkt = kkt_report_gram(path.gram, path.z_star, fit.beta_hat, path.penalty, lambda);
  return fit;
}

std::vector<GridFit> path_to_coefficients(const SolutionPath& path,
                                          const std::vector<double>& lambda_grid) {
  if (lambda_grid.empty()) throw std::invalid_argument("plus_path: empty lambda grid");
  std::vector<GridFit> out;
  out.reserve(lambda_grid.size());
  for (double lambda : lambda_grid) {
    GridFit g;
    g.lambda = lambda;
    try {
      g.fit = solve_at_lambda(path, lambda);
    } catch (const std::exception& e) {
      g.error = e.what();
    }
    out.push_back(std::move(g));
  }
  return out;
}

void write_path_csv(std::ostream& os, const SolutionPath& path) {
  char buf[64];
  auto fmt = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  os << "step,tau,event,j,b_j\n";
  for (const auto& bp : path.breakpoints) {
    os << bp.step << ',' << fmt(bp.tau) << ',' << bp.event.label() << ",0,0\n";
    for (int j = 0; j < bp.b.size(); ++j)
      if (bp.b[j] != 0.0)
        os << bp.step << ',' << fmt(bp.tau) << ",," << (j + 1) << ',' << fmt(bp.b[j]) << '\n';
  }
}

namespace {

PathEvent parse_event_label(const std::string& s) {
  PathEvent e;
  int j = 0, k = 0;
  if (s == "origin") {
    e.kind = PathEvent::Origin;
  } else if (std::sscanf(s.c_str(), "activate(%d)", &j) == 1) {
    e.kind = PathEvent::Activate;
    e.j = j - 1;
  } else if (std::sscanf(s.c_str(), "deactivate(%d)", &j) == 1) {
    e.kind = PathEvent::Deactivate;
    e.j = j - 1;
  } else if (std::sscanf(s.c_str(), "knot_cross(%d;%d)", &j, &k) == 2) {
    e.kind = PathEvent::KnotCross;
    e.j = j - 1;
    e.knot = k;
  } else if (s == "terminate_fit") {
    e.kind = PathEvent::TerminateFit;
  } else if (s == "terminate_cap") {
    e.kind = PathEvent::TerminateCap;
  } else {
    throw std::invalid_argument("plus_path: unknown event label '" + s + "'");
  }
  return e;
}

}  // namespace

std::vector<PathBreakpoint> read_path_csv(std::istream& is, int p) {
  std::string line;
  if (!std::getline(is, line) || line != "step,tau,event,j,b_j")
    throw std::invalid_argument("plus_path: bad path CSV header");

  std::vector<PathBreakpoint> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string f_step, f_tau, f_event, f_j, f_b;
    if (!std::getline(ls, f_step, ',') || !std::getline(ls, f_tau, ',') ||
        !std::getline(ls, f_event, ',') || !std::getline(ls, f_j, ',') ||
        !std::getline(ls, f_b))
      throw std::invalid_argument("plus_path: malformed path CSV row");
    const int step = std::stoi(f_step);
    const double tau = std::stod(f_tau);
    const int j = std::stoi(f_j);
    if (j == 0) {
      PathBreakpoint bp;
      bp.step = step;
      bp.tau = tau;
      bp.b = Eigen::VectorXd::Zero(p);
      bp.event = parse_event_label(f_event);
      out.push_back(std::move(bp));
    } else {
      if (out.empty() || out.back().step != step)
        throw std::invalid_argument("plus_path: coefficient row before event row");
      if (j < 1 || j > p) throw std::invalid_argument("plus_path: coefficient index out of range");
      out.back().b[j - 1] = std::stod(f_b);
    }
  }
  return out;
}

}  // namespace plus
