#pragma once

#include <cstdint>
#include <vector>

#include "netmech/costs.hpp"
#include "netmech/distributions.hpp"
#include "netmech/solver.hpp"

namespace netmech {

// ---------------------------------------------------------------------------
// Optimal procurement mechanism: allocate on virtual costs (bid plus
// information rent K), pay each agent its bid-weighted allocation plus the
// integral of the allocation over higher bids, and audit incentives by
// Monte Carlo with common random numbers.
// ---------------------------------------------------------------------------

// Replaces every slope by bid + K(bid) under that (agent, segment)'s
// marginal. Slopes must lie inside their prior supports; discernability
// keeps the virtual slopes nondecreasing per agent. The price box widens at
// the top by the largest junction gap so virtual slopes still fit.
CostProfile virtualize(const CostProfile& costs, const std::vector<AgentPrior>& priors);

// Fixed point + primal recovery on the virtualized profile. The cost fields
// of the result are denominated in virtual prices (the solver's own
// certificate); true production cost is cost_eval against the bids.
Allocation optimal_allocation(const Instance& inst, const std::vector<AgentPrior>& priors,
                              SolveOptions opts = {});

struct QuadConfig {
  int points = 65;      // trapezoid nodes per segment integral
  long max_solves = 0;  // positive = hard budget on allocation re-solves
  int threads = 1;      // Monte-Carlo worker threads; 0 = hardware choice
};

// Per-agent payments: x_i = sum_j [ q_i^j * bid_ij + integral of
// t -> q_i^j(t, c_-i) from bid_ij to the segment's support top ]. Each
// integrand evaluation re-solves the allocation with that one virtual slope
// swapped; grids are walked from the top bid downward so every solve warm
// starts from a componentwise upper bound.
std::vector<double> payment(const Instance& inst, const std::vector<AgentPrior>& priors,
                            QuadConfig quad = {}, SolveOptions opts = {});

struct MechanismOutcome {
  Allocation alloc;
  std::vector<double> x;
  CostProfile virtual_profile;
};

MechanismOutcome run_mechanism(const Instance& inst, const std::vector<AgentPrior>& priors,
                               QuadConfig quad = {}, SolveOptions opts = {});

struct SegmentEstimate {
  double mean = 0.0;
  double se = 0.0;
};

// Monte-Carlo expectation of agent `agent`'s per-segment allocation when it
// bids `agent_slopes` and everyone else draws from the priors. Sample s
// uses the derived seed stream_seed(seed, s), so two calls with one seed
// share their opponent draws (common random numbers).
std::vector<SegmentEstimate> estimate_Q(const Instance& inst,
                                        const std::vector<AgentPrior>& priors, int agent,
                                        const std::vector<double>& agent_slopes, int n_samples,
                                        std::uint64_t seed, SolveOptions opts = {});

struct GapEstimate {
  double estimate = 0.0;
  double std_err = 0.0;
  // Set when the estimate drops below -3 standard errors minus a 1e-11
  // rounding floor (zero-variance gaps carry 1-ulp quadrature residue).
  bool fail = false;
};

struct AuditReport {
  int agent = 0;
  std::vector<double> true_type;
  std::vector<std::vector<double>> misreports;
  std::vector<GapEstimate> utility_gap;  // E[u(truth) - u(misreport)], per misreport
  GapEstimate pc_value;                  // E[u(truth)]
  int samples = 0;
};

// Incentive and participation audit for one agent. Every sample shares its
// opponent draw across all bids, and all bids of a segment are read off one
// warm-started solve panel per sample, so gap estimates carry only the
// variance of the opponent draw. Estimates are judged against 3 standard
// errors.
AuditReport audit(const Instance& inst, const std::vector<AgentPrior>& priors, int agent,
                  const std::vector<double>& true_type,
                  const std::vector<std::vector<double>>& misreports, int n_samples,
                  std::uint64_t seed, QuadConfig quad = {}, SolveOptions opts = {});

struct RentReport {
  int profiles = 0;
  // All entries are means over sampled type profiles with standard errors.
  double payment_mean = 0.0, payment_se = 0.0;          // principal outlay
  double mech_cost_mean = 0.0, mech_cost_se = 0.0;      // production cost, mechanism
  double full_info_cost_mean = 0.0, full_info_cost_se = 0.0;  // plain allocation on truth
  double rent_direct_mean = 0.0, rent_direct_se = 0.0;  // payments minus production cost
  double rent_kratio_mean = 0.0, rent_kratio_se = 0.0;  // sum of q_seg * K at the bids
  double rent_diff_mean = 0.0, rent_diff_se = 0.0;      // paired direct - kratio
  double rent_min = 0.0;                                // smallest per-profile direct rent
};

// Draws full type profiles, prices each with the mechanism, and estimates
// the information rent two independent ways: payments minus realized
// production cost, and the allocation-weighted K values. The paired
// difference's standard error is the agreement diagnostic.
RentReport rent_report(const Instance& inst, const std::vector<AgentPrior>& priors,
                       int n_profiles, std::uint64_t seed, QuadConfig quad = {},
                       SolveOptions opts = {});

}  // namespace netmech
