#include "netmech/mechanism.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>

#include "netmech/errors.hpp"
#include "netmech/parallel.hpp"
#include "netmech/rng.hpp"

namespace netmech {

namespace {

// Largest junction gap over all marginals; the virtual box widens by this.
double max_delta(const std::vector<AgentPrior>& priors) {
  double d = 0.0;
  for (const auto& p : priors)
    for (const auto& m : p.segments) d = std::max(d, delta_gap(m));
  return d;
}

void require_in_supports(const AgentPrior& prior, const std::vector<double>& slopes,
                         int agent) {
  if (prior.segments.size() != slopes.size())
    throw Error(ErrorCode::ParamError,
                "agent " + std::to_string(agent) + ": slope/segment count mismatch");
  for (std::size_t j = 0; j < slopes.size(); ++j) {
    const auto& m = prior.segments[j];
    if (slopes[j] < m.lo || slopes[j] > m.hi)
      throw Error(ErrorCode::OutOfSupport,
                  "agent " + std::to_string(agent) + " segment " + std::to_string(j) +
                      ": slope " + std::to_string(slopes[j]) + " outside [" +
                      std::to_string(m.lo) + ", " + std::to_string(m.hi) + "]",
                  agent, slopes[j]);
  }
}

void require_priors_fit(const CostProfile& costs, const std::vector<AgentPrior>& priors) {
  if (costs.slopes.size() != priors.size())
    throw Error(ErrorCode::ParamError, "profile/prior agent count mismatch");
  for (std::size_t i = 0; i < priors.size(); ++i) {
    if (static_cast<int>(priors[i].segments.size()) != costs.segments)
      throw Error(ErrorCode::ParamError,
                  "agent " + std::to_string(i) + ": prior segment count mismatch");
    const auto report = check_discernability(priors[i]);
    if (!report.pass)
      throw Error(ErrorCode::DiscernabilityViolation,
                  "agent " + std::to_string(i) + " priors fail the junction gap check",
                  static_cast<int>(i), 0.0);
  }
}

// Opponent draw for one Monte-Carlo sample: every agent except `skip`
// redraws all slopes by inverse CDF, in fixed (agent, segment) order.
void draw_opponents(CostProfile& bids, const std::vector<AgentPrior>& priors, int skip,
                    Rng& rng) {
  for (std::size_t i = 0; i < priors.size(); ++i) {
    if (static_cast<int>(i) == skip) continue;
    for (std::size_t j = 0; j < priors[i].segments.size(); ++j)
      bids.slopes[i][j] = inverse_cdf(priors[i].segments[j], rng.uniform01());
  }
}

std::vector<double> ascending_grid(double lo, double hi, int points) {
  if (!(hi > lo)) return {lo};
  points = std::max(points, 2);
  std::vector<double> t(points);
  for (int k = 0; k < points; ++k)
    t[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
  t.back() = hi;
  return t;
}

// One agent-segment solve panel: the allocation of block `seg` as a
// function of the original-coordinate bid t, on an ascending grid, plus
// suffix trapezoid integrals. Solves run from the top of the grid down so
// each warm start is a componentwise upper bound of the next fixed point.
struct Panel {
  std::vector<double> t;
  std::vector<double> q;
  std::vector<double> suffix;  // suffix[l] = integral of q from t[l] to t.back()

  double value_at(double bid) const {
    const auto it = std::lower_bound(t.begin(), t.end(), bid);
    if (it == t.end() || *it != bid)
      throw Error(ErrorCode::ParamError, "bid is not a panel grid node");
    return q[static_cast<std::size_t>(it - t.begin())];
  }
  double integral_from(double bid) const {
    const auto it = std::lower_bound(t.begin(), t.end(), bid);
    if (it == t.end() || *it != bid)
      throw Error(ErrorCode::ParamError, "bid is not a panel grid node");
    return suffix[static_cast<std::size_t>(it - t.begin())];
  }
};

Panel build_panel(const Network& net, CostProfile& env, const Marginal& m, int agent, int seg,
                  std::vector<double> grid, const SolveOptions& base_opts,
                  std::atomic<long>& solves, long budget) {
  Panel p;
  p.t = std::move(grid);
  p.q.assign(p.t.size(), 0.0);

  const double restore = env.slopes[agent][seg];
  SolveOptions opts = base_opts;
  opts.record_iterates = false;
  opts.warm_start.clear();
  try {
    for (int l = static_cast<int>(p.t.size()) - 1; l >= 0; --l) {
      env.slopes[agent][seg] = virtual_cost(m, p.t[l]);
      if (budget > 0 && solves.fetch_add(1, std::memory_order_relaxed) + 1 > budget)
        throw Error(ErrorCode::QuadratureBudgetExceeded,
                    "allocation re-solve budget of " + std::to_string(budget) + " exhausted");
      if (budget <= 0) solves.fetch_add(1, std::memory_order_relaxed);
      auto sol = solve_fixed_point(net, env, opts);
      if (!sol.converged)
        throw Error(ErrorCode::NotConverged, "panel solve hit the sweep limit");
      opts.warm_start = std::move(sol.lambda);
      const double implied = nodal_supply(net, opts.warm_start, agent);
      const double q = std::clamp(implied, 0.0, env.total_cap());
      p.q[l] = segment_split(q, env.seg_width, env.segments)[seg];
    }
  } catch (...) {
    env.slopes[agent][seg] = restore;
    throw;
  }
  env.slopes[agent][seg] = restore;

  // The integrand is nonincreasing in the bid; anything beyond solver noise
  // signals a broken solve chain.
  for (std::size_t l = 0; l + 1 < p.q.size(); ++l) {
    if (p.q[l + 1] > p.q[l] + 1e-6)
      throw Error(ErrorCode::MonotonicityBreach,
                  "allocation rose with the bid along a payment grid at agent " +
                      std::to_string(agent) + " segment " + std::to_string(seg),
                  agent, p.q[l + 1] - p.q[l]);
  }
  p.suffix.assign(p.t.size(), 0.0);
  for (int l = static_cast<int>(p.t.size()) - 2; l >= 0; --l)
    p.suffix[l] = p.suffix[l + 1] + 0.5 * (p.q[l] + p.q[l + 1]) * (p.t[l + 1] - p.t[l]);
  return p;
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

// Welford update: exact zero spread for identical samples (a constant
// stream must audit as noiseless, e.g. point-mass opponents).
MeanSe mean_se(const std::vector<double>& xs) {
  MeanSe r;
  const std::size_t n = xs.size();
  if (n == 0) return r;
  double mean = 0.0, m2 = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double d = xs[k] - mean;
    mean += d / static_cast<double>(k + 1);
    m2 += d * (xs[k] - mean);
  }
  r.mean = mean;
  if (n >= 2)
    r.se = std::sqrt(m2 / (static_cast<double>(n) * static_cast<double>(n - 1)));
  return r;
}

}  // namespace

CostProfile virtualize(const CostProfile& costs, const std::vector<AgentPrior>& priors) {
  require_priors_fit(costs, priors);
  for (std::size_t i = 0; i < priors.size(); ++i)
    require_in_supports(priors[i], costs.slopes[i], static_cast<int>(i));

  CostProfile out = costs;
  out.c_hi = costs.c_hi + max_delta(priors);
  for (std::size_t i = 0; i < priors.size(); ++i)
    for (std::size_t j = 0; j < costs.slopes[i].size(); ++j)
      out.slopes[i][j] = virtual_cost(priors[i].segments[j], costs.slopes[i][j]);
  validate_cost_profile(out);
  return out;
}

Allocation optimal_allocation(const Instance& inst, const std::vector<AgentPrior>& priors,
                              SolveOptions opts) {
  validate_instance(inst);
  const CostProfile env = virtualize(inst.costs, priors);
  const auto sol = solve_fixed_point(inst.net, env, opts);
  return recover_primal(inst.net, env, sol);
}

std::vector<double> payment(const Instance& inst, const std::vector<AgentPrior>& priors,
                            QuadConfig quad, SolveOptions opts) {
  validate_instance(inst);
  if (quad.points < 2) throw Error(ErrorCode::ParamError, "need at least 2 quadrature nodes");
  CostProfile env = virtualize(inst.costs, priors);

  std::atomic<long> solves{0};
  const int n = inst.net.n;
  std::vector<double> x(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < inst.costs.segments; ++j) {
      const auto& m = priors[i].segments[j];
      const double bid = inst.costs.slopes[i][j];
      auto panel = build_panel(inst.net, env, m, i, j, ascending_grid(bid, m.hi, quad.points),
                               opts, solves, quad.max_solves);
      x[i] += panel.q.front() * bid + panel.suffix.front();
    }
  }
  return x;
}

MechanismOutcome run_mechanism(const Instance& inst, const std::vector<AgentPrior>& priors,
                               QuadConfig quad, SolveOptions opts) {
  MechanismOutcome out;
  out.alloc = optimal_allocation(inst, priors, opts);
  out.x = payment(inst, priors, quad, opts);
  out.virtual_profile = virtualize(inst.costs, priors);
  return out;
}

std::vector<SegmentEstimate> estimate_Q(const Instance& inst,
                                        const std::vector<AgentPrior>& priors, int agent,
                                        const std::vector<double>& agent_slopes, int n_samples,
                                        std::uint64_t seed, SolveOptions opts) {
  validate_instance(inst);
  require_priors_fit(inst.costs, priors);
  if (agent < 0 || agent >= inst.net.n)
    throw Error(ErrorCode::ParamError, "agent index out of range");
  if (n_samples < 1) throw Error(ErrorCode::ParamError, "need at least one sample");
  require_in_supports(priors[agent], agent_slopes, agent);

  const int nseg = inst.costs.segments;
  std::vector<std::vector<double>> draws(nseg, std::vector<double>(n_samples, 0.0));

  run_samples(n_samples, 1, [&](int s) {
    Rng rng(stream_seed(seed, static_cast<std::uint64_t>(s)));
    CostProfile bids = inst.costs;
    bids.slopes[agent] = agent_slopes;
    draw_opponents(bids, priors, agent, rng);
    const CostProfile env = virtualize(bids, priors);
    const auto sol = solve_fixed_point(inst.net, env, opts);
    if (!sol.converged)
      throw Error(ErrorCode::NotConverged, "sample solve hit the sweep limit");
    const double implied = nodal_supply(inst.net, sol.lambda, agent);
    const double q = std::clamp(implied, 0.0, env.total_cap());
    const auto split = segment_split(q, env.seg_width, env.segments);
    for (int j = 0; j < nseg; ++j) draws[j][s] = split[j];
  });

  std::vector<SegmentEstimate> out(nseg);
  for (int j = 0; j < nseg; ++j) {
    const auto ms = mean_se(draws[j]);
    out[j] = {ms.mean, ms.se};
  }
  return out;
}

AuditReport audit(const Instance& inst, const std::vector<AgentPrior>& priors, int agent,
                  const std::vector<double>& true_type,
                  const std::vector<std::vector<double>>& misreports, int n_samples,
                  std::uint64_t seed, QuadConfig quad, SolveOptions opts) {
  validate_instance(inst);
  require_priors_fit(inst.costs, priors);
  if (agent < 0 || agent >= inst.net.n)
    throw Error(ErrorCode::ParamError, "agent index out of range");
  if (n_samples < 1) throw Error(ErrorCode::ParamError, "need at least one sample");
  if (quad.points < 2) throw Error(ErrorCode::ParamError, "need at least 2 quadrature nodes");
  require_in_supports(priors[agent], true_type, agent);
  for (const auto& mis : misreports) require_in_supports(priors[agent], mis, agent);

  const int nseg = inst.costs.segments;
  const int n_mis = static_cast<int>(misreports.size());

  // All bids of segment j are read off one per-sample panel; the panel grid
  // carries the quadrature nodes plus every bid coordinate exactly.
  std::vector<std::vector<double>> grids(nseg);
  for (int j = 0; j < nseg; ++j) {
    const auto& m = priors[agent].segments[j];
    auto g = ascending_grid(m.lo, m.hi, quad.points);
    g.push_back(true_type[j]);
    for (const auto& mis : misreports) g.push_back(mis[j]);
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    grids[j] = std::move(g);
  }

  std::atomic<long> solves{0};
  std::vector<double> pc(n_samples, 0.0);
  std::vector<std::vector<double>> gaps(n_mis, std::vector<double>(n_samples, 0.0));

  run_samples(n_samples, quad.threads, [&](int s) {
    Rng rng(stream_seed(seed, static_cast<std::uint64_t>(s)));
    CostProfile bids = inst.costs;
    bids.slopes[agent] = true_type;
    draw_opponents(bids, priors, agent, rng);
    CostProfile env = virtualize(bids, priors);

    std::vector<Panel> panels;
    panels.reserve(nseg);
    for (int j = 0; j < nseg; ++j)
      panels.push_back(build_panel(inst.net, env, priors[agent].segments[j], agent, j,
                                   grids[j], opts, solves, quad.max_solves));

    // Profit of bidding b while producing at the true marginal costs:
    // sum_j [ q_j(b_j) * (b_j - c_j) + integral of q_j above b_j ].
    auto profit = [&](const std::vector<double>& b) {
      double u = 0.0;
      for (int j = 0; j < nseg; ++j)
        u += panels[j].value_at(b[j]) * (b[j] - true_type[j]) + panels[j].integral_from(b[j]);
      return u;
    };

    const double u_true = profit(true_type);
    pc[s] = u_true;
    for (int m = 0; m < n_mis; ++m) gaps[m][s] = u_true - profit(misreports[m]);
  });

  AuditReport report;
  report.agent = agent;
  report.true_type = true_type;
  report.misreports = misreports;
  report.samples = n_samples;
  report.utility_gap.resize(n_mis);
  // The rounding floor keeps a zero-variance gap (identical panels across
  // samples) from failing on 1-ulp quadrature residue; any real violation
  // sits orders of magnitude above it.
  constexpr double kNoiseFloor = 1e-11;
  for (int m = 0; m < n_mis; ++m) {
    const auto ms = mean_se(gaps[m]);
    report.utility_gap[m] = {ms.mean, ms.se, ms.mean < -3.0 * ms.se - kNoiseFloor};
  }
  const auto pcms = mean_se(pc);
  report.pc_value = {pcms.mean, pcms.se, pcms.mean < -3.0 * pcms.se - kNoiseFloor};
  return report;
}

RentReport rent_report(const Instance& inst, const std::vector<AgentPrior>& priors,
                       int n_profiles, std::uint64_t seed, QuadConfig quad,
                       SolveOptions opts) {
  validate_instance(inst);
  require_priors_fit(inst.costs, priors);
  if (n_profiles < 1) throw Error(ErrorCode::ParamError, "need at least one profile");
  if (quad.points < 2) throw Error(ErrorCode::ParamError, "need at least 2 quadrature nodes");

  const int n = inst.net.n;
  const int nseg = inst.costs.segments;
  std::atomic<long> solves{0};

  std::vector<double> pay(n_profiles), mech_cost(n_profiles), full_info(n_profiles),
      direct(n_profiles), kratio(n_profiles), diff(n_profiles);

  run_samples(n_profiles, quad.threads, [&](int s) {
    Rng rng(stream_seed(seed, static_cast<std::uint64_t>(s)));
    CostProfile bids = inst.costs;
    draw_opponents(bids, priors, -1, rng);  // every agent redraws
    CostProfile env = virtualize(bids, priors);

    const auto sol = solve_fixed_point(inst.net, env, opts);
    const auto alloc = recover_primal(inst.net, env, sol);

    double pay_s = 0.0, cost_s = 0.0, rent_k = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < nseg; ++j) {
        const auto& m = priors[i].segments[j];
        const double bid = bids.slopes[i][j];
        const auto panel = build_panel(inst.net, env, m, i, j,
                                       ascending_grid(bid, m.hi, quad.points), opts, solves,
                                       quad.max_solves);
        pay_s += alloc.q_seg[i][j] * bid + panel.suffix.front();
        cost_s += alloc.q_seg[i][j] * bid;
        rent_k += alloc.q_seg[i][j] * k_ratio(m, bid);
      }
    }

    const auto plain = recover_primal(inst.net, bids, solve_fixed_point(inst.net, bids, opts));

    pay[s] = pay_s;
    mech_cost[s] = cost_s;
    full_info[s] = plain.primal_cost;
    direct[s] = pay_s - cost_s;
    kratio[s] = rent_k;
    diff[s] = direct[s] - kratio[s];
  });

  RentReport r;
  r.profiles = n_profiles;
  const auto p = mean_se(pay);
  r.payment_mean = p.mean;
  r.payment_se = p.se;
  const auto mc = mean_se(mech_cost);
  r.mech_cost_mean = mc.mean;
  r.mech_cost_se = mc.se;
  const auto fi = mean_se(full_info);
  r.full_info_cost_mean = fi.mean;
  r.full_info_cost_se = fi.se;
  const auto rd = mean_se(direct);
  r.rent_direct_mean = rd.mean;
  r.rent_direct_se = rd.se;
  const auto rk = mean_se(kratio);
  r.rent_kratio_mean = rk.mean;
  r.rent_kratio_se = rk.se;
  const auto dd = mean_se(diff);
  r.rent_diff_mean = dd.mean;
  r.rent_diff_se = dd.se;
  r.rent_min = *std::min_element(direct.begin(), direct.end());
  return r;
}

}  // namespace netmech
