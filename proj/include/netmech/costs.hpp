#pragma once

#include <vector>

#include "netmech/network.hpp"

namespace netmech {

// Piecewise-linear convex production costs: every agent owns `segments`
// blocks of width seg_width; slope j is the marginal price of block j and
// slopes are nondecreasing within an agent. c_lo/c_hi box all slopes (and
// the dual multipliers live in the same box).
struct CostProfile {
  int segments = 1;       // N
  double seg_width = 0.0; // block size, shared by all agents
  double c_lo = 0.0;
  double c_hi = 0.0;
  std::vector<std::vector<double>> slopes;  // [agent][segment]

  double total_cap() const { return segments * seg_width; }
};

// Throws ParamError / OutOfBox on shape or ordering violations.
void validate_cost_profile(const CostProfile& costs);

// Network + costs must agree: one agent per node, and the total block
// capacity N*seg_width has to exceed the largest production the network can
// ever imply, so the last block never binds artificially.
struct Instance {
  Network net;
  CostProfile costs;
};

void validate_instance(const Instance& inst);

// Production cost of quantity q under one agent's slope vector:
// sum_j slope_j * min((q-(j-1)*w)^+, w). Convex, nondecreasing, piecewise
// linear; saturates at sum_j slope_j * w.
double cost_eval(const std::vector<double>& slopes, double seg_width, double q);

// Splits q into per-block quantities: full blocks first, at most one
// fractional entry. Requires 0 <= q <= segments*seg_width.
std::vector<double> segment_split(double q, double seg_width, int segments);

}  // namespace netmech
