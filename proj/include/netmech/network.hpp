#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace netmech {

// Undirected line between nodes a and b with quadratic loss coefficient r.
// A flow of h burns r*h^2 along the way, charged half to each endpoint: the
// sender injects h + r*h^2/2 beyond its demand, the receiver gets h - r*h^2/2.
struct Edge {
  int a = 0;
  int b = 0;
  double r = 1.0;
};

// Validated market graph. Immutable after build_network; safe to share
// across threads. adj mirrors edges in both directions for O(deg) walks.
struct Network {
  int n = 0;
  std::vector<double> demand;
  std::vector<Edge> edges;
  std::vector<std::vector<std::pair<int, double>>> adj;  // node -> (neighbor, r)

  // Per-node transfer capacities implied by the loss model:
  //   import_limit[i] = sum over neighbors of 1/(2r)   (max net import)
  //   export_limit[i] = sum over neighbors of 3/(2r)   (max extra output)
  // Feasibility requires demand[i] < import_limit[i] at every node, so a
  // node can be served even if it produces nothing.
  std::vector<double> import_limit;
  std::vector<double> export_limit;

  // Largest production the dual multipliers can ever imply at node i.
  double max_supply(int i) const { return demand[i] + export_limit[i]; }
};

Network build_network(int n, std::vector<double> demand, std::vector<Edge> edges);

// Preferential-attachment generator: complete seed graph on m+1 nodes, each
// arrival attaches to m distinct nodes sampled proportionally to degree
// without replacement. Loss coefficients and demands are drawn uniformly
// from the configured ranges; demands violating the feasibility window are
// re-drawn per node (up to 100 attempts). Deterministic for a fixed seed.
struct BaParams {
  double r_lo = 0.5;
  double r_hi = 2.0;
  double d_lo = 0.0;
  // Upper demand bound; negative means "auto": 0.4 * min over nodes of
  // import_limit, which keeps every node inside the feasibility window.
  double d_hi = -1.0;
};

Network generate_ba_network(int n, int m, std::uint64_t seed, BaParams params = {});

}  // namespace netmech
