#include "netmech/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "netmech/errors.hpp"

namespace netmech {

namespace {

constexpr double kRootTol = 1e-10;       // |F - k*w| certification at thresholds
constexpr int kMaxHalvings = 200;
constexpr double kMonotoneSlack = 1e-10; // rounding allowance on the descent

// F_i evaluated with node i's multiplier replaced by `own`.
double supply_at(const Network& net, const std::vector<double>& lambda, int i, double own) {
  double s = net.demand[i];
  for (const auto& [j, r] : net.adj[i]) {
    const double sum = own + lambda[j];
    const double diff = lambda[j] - own;
    s += diff / (r * sum) + diff * diff / (2.0 * r * sum * sum);
  }
  return s;
}

void require_positive_around(const Network& net, const std::vector<double>& lambda, int i,
                             double own) {
  if (!(own > 0.0))
    throw Error(ErrorCode::NonPositiveMultiplier,
                "multiplier at node " + std::to_string(i) + " is " + std::to_string(own), i, own);
  for (const auto& [j, r] : net.adj[i]) {
    (void)r;
    if (!(lambda[j] > 0.0))
      throw Error(ErrorCode::NonPositiveMultiplier,
                  "multiplier at node " + std::to_string(j) + " is " + std::to_string(lambda[j]),
                  j, lambda[j]);
  }
}

// Bisection for supply_at(x) == target on [lo, hi] with
// supply(lo) >= target >= supply(hi); F is strictly decreasing in x.
double bisect_threshold(const Network& net, const std::vector<double>& lambda, int i,
                        double target, double lo, double hi) {
  for (int it = 0; it < kMaxHalvings && (hi - lo) > 1e-13 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (supply_at(net, lambda, i, mid) >= target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Best response with caller-owned scratch (hot path: no allocation).
double best_response_impl(const Network& net, const CostProfile& costs,
                          const std::vector<double>& lambda, int i,
                          std::vector<double>& supply_at_slope) {
  const auto& s = costs.slopes[i];
  const int nseg = costs.segments;
  const double w = costs.seg_width;

  supply_at_slope.resize(nseg);
  for (int j = 0; j < nseg; ++j) supply_at_slope[j] = supply_at(net, lambda, i, s[j]);

  // Top slope is always a candidate; a lower slope c^j competes only when
  // production at that price undershoots its block index.
  double best = s[nseg - 1];
  for (int j = 1; j <= nseg; ++j)
    if (supply_at_slope[j - 1] < static_cast<double>(j) * w) best = std::min(best, s[j - 1]);

  // Threshold candidates g^k must land inside [c^k, c^{k+1}] (c^0 is the
  // box floor). Since F decreases in the own multiplier, the guard is a
  // pair of inequalities on F at the bracket ends, and at most one k can
  // pass both; the bracket ends then certify the bisection.
  for (int k = 0; k < nseg; ++k) {
    const double target = static_cast<double>(k) * w;
    if (supply_at_slope[k] > target) continue;  // g^k above the block's top slope
    double left;
    if (k == 0) {
      left = costs.c_lo;
      // g^0 >= c_lo iff F(c_lo) >= 0; usually implied by F(c^1) >= 0.
      if (supply_at_slope[0] < 0.0 && supply_at(net, lambda, i, left) < 0.0) continue;
    } else {
      left = s[k - 1];
      if (supply_at_slope[k - 1] < target) continue;  // g^k below the block's bottom slope
    }
    best = std::min(best, bisect_threshold(net, lambda, i, target, left, s[k]));
  }
  return best;
}

}  // namespace

double nodal_supply(const Network& net, const std::vector<double>& lambda, int i) {
  require_positive_around(net, lambda, i, lambda[i]);
  return supply_at(net, lambda, i, lambda[i]);
}

SupplyDerivatives supply_jacobian(const Network& net, const std::vector<double>& lambda, int i) {
  require_positive_around(net, lambda, i, lambda[i]);
  SupplyDerivatives d;
  for (const auto& [j, r] : net.adj[i]) {
    const double sum = lambda[i] + lambda[j];
    const double cube = sum * sum * sum;
    d.own -= 4.0 * lambda[j] * lambda[j] / (r * cube);
    d.cross.emplace_back(j, 4.0 * lambda[i] * lambda[j] / (r * cube));
  }
  return d;
}

double segment_threshold(const Network& net, const std::vector<double>& lambda, int i,
                         int k, double seg_width) {
  if (k < 0) throw Error(ErrorCode::ParamError, "block index must be >= 0");
  if (seg_width <= 0.0) throw Error(ErrorCode::ParamError, "segment width must be > 0");
  require_positive_around(net, lambda, i, 1.0);

  const double target = static_cast<double>(k) * seg_width;
  double lo = 1e-12;
  if (supply_at(net, lambda, i, lo) < target)
    throw Error(ErrorCode::BracketFailure,
                "node " + std::to_string(i) + " cannot reach " + std::to_string(k) +
                    " blocks: target exceeds the max implied production",
                i, target);

  // F tends to demand - import_limit < 0 <= target, so a sign change always
  // appears under geometric growth.
  double hi = 1.0;
  int doublings = 0;
  while (supply_at(net, lambda, i, hi) >= target) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > kMaxHalvings)
      throw Error(ErrorCode::BracketFailure,
                  "no sign change while growing the bracket at node " + std::to_string(i), i,
                  target);
  }
  const double root = bisect_threshold(net, lambda, i, target, lo, hi);
  if (std::fabs(supply_at(net, lambda, i, root) - target) > kRootTol)
    throw Error(ErrorCode::BracketFailure,
                "bisection failed to certify the threshold at node " + std::to_string(i), i,
                target);
  return root;
}

double best_response(const Network& net, const CostProfile& costs,
                     const std::vector<double>& lambda, int i) {
  require_positive_around(net, lambda, i, 1.0);
  std::vector<double> scratch;
  return best_response_impl(net, costs, lambda, i, scratch);
}

DualSolution solve_fixed_point(const Network& net, const CostProfile& costs, SolveOptions opts) {
  const int n = net.n;
  if (static_cast<int>(costs.slopes.size()) != n)
    throw Error(ErrorCode::ParamError, "profile/agent count mismatch");
  if (opts.tol <= 0.0) throw Error(ErrorCode::ParamError, "tolerance must be > 0");

  std::vector<double> lam(n);
  if (opts.warm_start.empty()) {
    for (int i = 0; i < n; ++i) lam[i] = costs.slopes[i].back();
  } else {
    if (static_cast<int>(opts.warm_start.size()) != n)
      throw Error(ErrorCode::ParamError, "warm start size mismatch");
    lam = opts.warm_start;
  }

  DualSolution out;
  out.tol = opts.tol;
  out.lambda = lam;
  if (opts.record_iterates) out.iterates.push_back(lam);

  std::vector<double> next(n);
  std::vector<double> scratch;
  for (int sweep = 1; sweep <= opts.max_iter; ++sweep) {
    for (int i = 0; i < n; ++i) next[i] = best_response_impl(net, costs, lam, i, scratch);

    double dec = 0.0;
    for (int i = 0; i < n; ++i) {
      const double rise = next[i] - lam[i];
      if (rise > 0.0) {
        if (rise > kMonotoneSlack * std::max(1.0, std::fabs(lam[i])))
          throw Error(ErrorCode::MonotonicityBreach,
                      "node " + std::to_string(i) + " rose by " + std::to_string(rise) +
                          " at sweep " + std::to_string(sweep),
                      i, rise);
        next[i] = lam[i];  // bisection rounding noise, not a real rise
      }
      dec = std::max(dec, lam[i] - next[i]);
    }
    out.iterations = sweep;
    out.trace.push_back(dec);

    if (dec <= opts.tol) {
      // lam itself carries the certificate: no best response moves any
      // coordinate by more than tol. Return it rather than the (lower,
      // uncertified) next iterate.
      out.converged = true;
      out.lambda = lam;
      return out;
    }
    lam = next;
    if (opts.record_iterates) out.iterates.push_back(lam);
  }
  out.converged = false;
  out.lambda = lam;
  return out;
}

Allocation recover_primal(const Network& net, const CostProfile& costs,
                          const DualSolution& sol) {
  if (!sol.converged)
    throw Error(ErrorCode::NotConverged, "primal recovery needs a certified dual solution");
  const auto& lam = sol.lambda;
  const int n = net.n;

  Allocation out;
  out.q.resize(n);
  out.q_seg.resize(n);
  out.nu.resize(n);
  const double cap = costs.total_cap();
  for (int i = 0; i < n; ++i) {
    const double implied = nodal_supply(net, lam, i);
    const double q = std::clamp(implied, 0.0, cap);
    out.max_clamp = std::max(out.max_clamp, std::fabs(q - implied));
    out.q[i] = q;
    out.q_seg[i] = segment_split(q, costs.seg_width, costs.segments);
    auto& nu = out.nu[i];
    nu.resize(costs.segments);
    for (int j = 0; j < costs.segments; ++j)
      nu[j] = std::max(lam[i] - costs.slopes[i][j], 0.0);
  }

  out.h.reserve(2 * net.edges.size());
  for (const auto& e : net.edges) {
    const double sum = lam[e.a] + lam[e.b];
    FlowEntry ab{e.a, e.b, std::max(lam[e.b] - lam[e.a], 0.0) / (e.r * sum),
                 std::max(lam[e.a] - lam[e.b], 0.0)};
    FlowEntry ba{e.b, e.a, std::max(lam[e.a] - lam[e.b], 0.0) / (e.r * sum),
                 std::max(lam[e.b] - lam[e.a], 0.0)};
    out.h.push_back(ab);
    out.h.push_back(ba);
  }

  out.primal_cost = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < costs.segments; ++j)
      out.primal_cost += costs.slopes[i][j] * out.q_seg[i][j];
  out.dual_value = dual_objective(net, costs, lam);
  return out;
}

double dual_objective(const Network& net, const CostProfile& costs,
                      const std::vector<double>& lambda) {
  if (static_cast<int>(lambda.size()) != net.n)
    throw Error(ErrorCode::ParamError, "multiplier size mismatch");
  const double slack = 1e-12 * std::max(1.0, costs.c_hi);
  for (int i = 0; i < net.n; ++i) {
    if (lambda[i] < costs.c_lo - slack || lambda[i] > costs.c_hi + slack)
      throw Error(ErrorCode::OutOfBox,
                  "multiplier " + std::to_string(lambda[i]) + " at node " + std::to_string(i) +
                      " escapes [" + std::to_string(costs.c_lo) + ", " +
                      std::to_string(costs.c_hi) + "]",
                  i, lambda[i]);
  }

  double obj = 0.0;
  for (int i = 0; i < net.n; ++i) {
    obj += lambda[i] * net.demand[i];
    for (int j = 0; j < costs.segments; ++j)
      obj -= costs.seg_width * std::max(lambda[i] - costs.slopes[i][j], 0.0);
    for (const auto& [nb, r] : net.adj[i]) {
      const double diff = lambda[i] - lambda[nb];
      obj -= diff * diff / (4.0 * r * (lambda[i] + lambda[nb]));
    }
  }
  return obj;
}

DualSolution reference_solve(const Network& net, const CostProfile& costs,
                             ReferenceOptions opts) {
  const int n = net.n;
  if (static_cast<int>(costs.slopes.size()) != n)
    throw Error(ErrorCode::ParamError, "profile/agent count mismatch");
  if (opts.tol <= 0.0 || opts.stall_window < 1)
    throw Error(ErrorCode::ParamError, "bad reference options");

  const double lo = costs.c_lo, hi = costs.c_hi;
  std::vector<double> lam(n, 0.5 * (lo + hi));
  std::vector<double> grad(n);

  // Pulls coordinates sitting within eps of a cost breakpoint onto it, so
  // the supergradient below can use the minimal-norm selection there.
  // Without this the iterate hops across kinks forever and the stall rule
  // fires at an accuracy proportional to the step size.
  auto snap = [&](std::vector<double>& v, double eps) {
    for (int i = 0; i < n; ++i) {
      double best_d = eps;
      double snapped = v[i];
      for (double c : costs.slopes[i]) {
        const double d = std::fabs(v[i] - c);
        if (d <= best_d && c >= lo && c <= hi) {
          best_d = d;
          snapped = c;
        }
      }
      v[i] = snapped;
    }
  };

  // Supergradient assembled from the objective's own terms (kept separate
  // from the supply-function machinery on purpose; this is the check
  // solver). Exactly at a breakpoint the superdifferential is an interval;
  // the minimal-norm element avoids phantom ascent directions there.
  auto supergrad = [&](const std::vector<double>& v) {
    double norm_sq = 0.0;
    for (int i = 0; i < n; ++i) {
      double g = net.demand[i];
      int ties = 0;
      for (int j = 0; j < costs.segments; ++j) {
        if (v[i] >= costs.slopes[i][j]) {
          g -= costs.seg_width;
          if (v[i] == costs.slopes[i][j]) ++ties;
        }
      }
      for (const auto& [nb, r] : net.adj[i]) {
        const double sum = v[i] + v[nb];
        g -= (v[i] - v[nb]) * (v[i] + 3.0 * v[nb]) / (2.0 * r * sum * sum);
      }
      if (ties > 0) {
        const double g_hi = g + costs.seg_width * ties;
        g = (g <= 0.0 && 0.0 <= g_hi) ? 0.0 : (g > 0.0 ? g : g_hi);
      }
      grad[i] = g;
      norm_sq += g * g;
    }
    return norm_sq;
  };

  double f = dual_objective(net, costs, lam);
  double best = f;
  std::vector<double> best_lam = lam;

  // Polyak steps against a diminishing level: aim at best + delta. When the
  // iterate travels a full budget, or the best value stalls for a whole
  // window, the level gap is deemed unreachable: halve delta and restart
  // from the incumbent. The run ends at a stall whose remaining level gap
  // is already below tolerance, so further improvement cannot exceed it.
  double delta = 0.1 * std::max(1.0, std::fabs(best));
  double level_base = best;
  double path = 0.0;
  const double path_budget = 2.0 * (hi - lo) * std::sqrt(static_cast<double>(n)) + 1e-9;

  std::vector<double> best_window(opts.stall_window, 0.0);
  int window_valid_from = opts.stall_window + 1;
  DualSolution out;
  out.tol = opts.tol;

  for (int it = 1; it <= opts.max_iter; ++it) {
    out.iterations = it;
    const double norm_sq = supergrad(lam);
    if (norm_sq <= 1e-30 && f >= best - 1e-9 * std::max(1.0, std::fabs(best))) {
      out.converged = true;  // stationary at the incumbent
      break;
    }
    const double step = (best + delta - f) / std::max(norm_sq, 1e-30);
    for (int i = 0; i < n; ++i) lam[i] = std::clamp(lam[i] + step * grad[i], lo, hi);
    path += step * std::sqrt(norm_sq);
    // Snap radius tracks the level gap (same scale as the oscillation
    // amplitude) but never approaches the breakpoint spacing.
    snap(lam, std::min(2.0 * delta / std::max(4.0, costs.seg_width),
                       1e-4 * (hi - lo)));

    f = dual_objective(net, costs, lam);
    if (f > best) {
      best = f;
      best_lam = lam;
    }

    const double scale = std::max(1.0, std::fabs(best));
    bool unreachable = false;
    if (best - level_base >= 0.5 * delta) {
      level_base = best;
      path = 0.0;
    } else if (path > path_budget) {
      unreachable = true;
    }
    const int slot = it % opts.stall_window;
    if (it >= window_valid_from && best - best_window[slot] <= opts.tol * scale) {
      if (delta <= 4.0 * opts.tol * scale) {
        out.converged = true;
        break;
      }
      unreachable = true;
    }
    best_window[slot] = best;

    if (unreachable) {
      delta *= 0.5;
      level_base = best;
      path = 0.0;
      lam = best_lam;
      f = best;
      window_valid_from = it + opts.stall_window + 1;
    }
  }

  if (!out.converged)
    throw Error(ErrorCode::MaxIterExceeded,
                "supergradient ascent did not settle within " +
                    std::to_string(opts.max_iter) + " steps");
  out.lambda = std::move(best_lam);
  return out;
}

double rate_bound(const Network& net, const CostProfile& costs) {
  double r_min = std::numeric_limits<double>::infinity();
  double r_max = 0.0;
  for (const auto& e : net.edges) {
    r_min = std::min(r_min, e.r);
    r_max = std::max(r_max, e.r);
  }
  const double alpha = r_max / r_min;
  const double ratio = costs.c_lo / costs.c_hi;
  return std::pow(ratio, 5) / (static_cast<double>(costs.segments) * alpha);
}

}  // namespace netmech
