#pragma once

#include <utility>
#include <vector>

#include "netmech/costs.hpp"
#include "netmech/network.hpp"

namespace netmech {

// ---------------------------------------------------------------------------
// Dual side. The market-clearing problem is solved through its concave dual
// over per-node multipliers lambda in the price box [c_lo, c_hi]^n. Each
// node has a closed-form best response; iterating all best responses from
// the top cost vector descends monotonically to the unique fixed point.
// ---------------------------------------------------------------------------

struct SolveOptions {
  double tol = 1e-9;     // sup-norm decrement at which a sweep certifies
  int max_iter = 100000; // Jacobi sweeps
  // Optional starting multipliers. Must be a componentwise upper bound of
  // the fixed point (any previous solution of a profile with higher slopes
  // qualifies); the monotone descent is preserved from any such start.
  std::vector<double> warm_start;
  bool record_iterates = false;
};

struct DualSolution {
  std::vector<double> lambda;
  int iterations = 0;
  std::vector<double> trace;  // sup-norm decrement per sweep
  bool converged = false;
  double tol = 0.0;
  // Full sweep history when SolveOptions.record_iterates is set; the last
  // recorded iterate is the returned lambda.
  std::vector<std::vector<double>> iterates;
};

// Directed flow entry; every undirected edge contributes both orientations.
// gamma is the congestion dual (lambda_from - lambda_to)^+; at most one of
// flow/gamma per orientation is nonzero.
struct FlowEntry {
  int from = 0;
  int to = 0;
  double flow = 0.0;
  double gamma = 0.0;
};

struct Allocation {
  std::vector<double> q;                    // per-node production
  std::vector<std::vector<double>> q_seg;   // per-node per-block split
  std::vector<FlowEntry> h;                 // 2 entries per edge
  std::vector<std::vector<double>> nu;      // (lambda_i - slope_ij)^+
  double primal_cost = 0.0;
  double dual_value = 0.0;
  // Largest clamp applied when rounding implied production into [0, N*w];
  // stays below 1e-8 on converged solves.
  double max_clamp = 0.0;
};

// Production implied at node i by the multipliers: demand plus loss-adjusted
// exchanges with every neighbor. Strictly decreasing in lambda[i],
// nondecreasing in each neighbor. Requires positive multipliers at i and
// its neighbors.
double nodal_supply(const Network& net, const std::vector<double>& lambda, int i);

// Partials of nodal_supply at node i: own derivative (< 0) and one entry
// per neighbor (> 0). Non-neighbors are identically zero and not listed.
struct SupplyDerivatives {
  double own = 0.0;
  std::vector<std::pair<int, double>> cross;  // (neighbor, d supply / d lambda_nb)
};
SupplyDerivatives supply_jacobian(const Network& net, const std::vector<double>& lambda, int i);

// The multiplier x at which node i's implied production equals k blocks:
// nodal_supply(x, lambda_-i) = k * seg_width. Unique by monotonicity;
// bisection bracket grows geometrically. Throws BracketFailure when the
// target exceeds the node's max implied production (no root).
double segment_threshold(const Network& net, const std::vector<double>& lambda, int i,
                         int k, double seg_width);

// Closed-form maximizer of node i's concave dual term given the neighbors'
// multipliers: the minimum over the top slope, slope candidates whose
// implied production undershoots their block index, and in-bracket segment
// thresholds. Candidates failing their guard are dropped.
double best_response(const Network& net, const CostProfile& costs,
                     const std::vector<double>& lambda, int i);

// Jacobi iteration of all best responses, starting from the per-agent top
// slopes (or the given warm start). Iterates are componentwise
// non-increasing, enforced every sweep; a breach throws MonotonicityBreach
// within a 1e-10 rounding slack. Stops once a sweep moves no coordinate by
// more than tol; the returned lambda is the iterate that carried that
// certificate. Hitting max_iter returns converged=false with the best
// iterate rather than throwing.
DualSolution solve_fixed_point(const Network& net, const CostProfile& costs,
                               SolveOptions opts = {});

// Primal read-out at the dual solution: flows from multiplier differences,
// production from nodal_supply clamped into [0, N*w], block split, duals
// gamma/nu, and both objective values. Throws NotConverged on an
// uncertified solution.
Allocation recover_primal(const Network& net, const CostProfile& costs,
                          const DualSolution& sol);

// Concave dual objective over the price box; the neighbor penalty ranges
// over ordered pairs so each edge counts twice. Throws OutOfBox when a
// multiplier leaves [c_lo, c_hi].
double dual_objective(const Network& net, const CostProfile& costs,
                      const std::vector<double>& lambda);

// Independent check solver: projected supergradient ascent on the dual with
// Polyak-type steps against a diminishing level target; stalled or
// over-budget phases halve the level gap and restart from the incumbent.
// Terminates at a stall (best objective up by less than tol, scaled, over
// stall_window consecutive steps) once the level gap itself is below
// tolerance. Throws MaxIterExceeded past max_iter. Shares no code with the
// fixed-point path beyond the objective itself.
struct ReferenceOptions {
  double tol = 1e-9;
  int max_iter = 500000;
  int stall_window = 200;
};
DualSolution reference_solve(const Network& net, const CostProfile& costs,
                             ReferenceOptions opts = {});

// Contraction floor for threshold sensitivities: (1/(N*alpha)) * (c_lo/c_hi)^5
// with alpha the max ratio of edge loss coefficients. Valid when the max
// node degree does not exceed N.
double rate_bound(const Network& net, const CostProfile& costs);

}  // namespace netmech
