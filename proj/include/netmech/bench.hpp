#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "netmech/costs.hpp"
#include "netmech/distributions.hpp"
#include "netmech/network.hpp"
#include "netmech/solver.hpp"

namespace netmech {

enum class CostMode { Linear, Piecewise };
const char* cost_mode_name(CostMode mode);
CostMode parse_cost_mode(const std::string& s);

// Random benchmark instance: scale-free graph, per-agent sorted uniform
// slopes in [0.5, 2.5], one block in linear mode and four in piecewise mode.
// The block size gives the largest agent 5% slack over the most any single
// node can be asked to produce. attach = edges per arriving node (0 picks
// 2, or 1 when only 2 nodes exist).
Instance make_bench_instance(int n_nodes, CostMode mode, std::uint64_t seed, int attach = 0);

// Instance plus a matching prior battery for Monte-Carlo audits: per-segment
// supports are laid out left to right, each starting 5% beyond the previous
// segment's junction gap, with the family and shape cycling per segment.
// The cost profile is freshly sampled from the priors.
struct Battery {
  Instance inst;
  std::vector<AgentPrior> priors;
};
Battery make_audit_battery(int n_nodes, int segments, std::uint64_t seed, int attach = 0);

struct BenchRecord {
  std::string instance_id;
  std::string solver;  // "fixed_point" or "reference"
  double cost = 0.0;   // primal cost for fixed_point, best dual value for reference
  double wall_time = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct BenchTable {
  std::vector<BenchRecord> records;
  double max_rel_discrepancy = 0.0;  // worst |fp - ref| / max(1, |fp|, |ref|)
  double median_speedup = 0.0;       // median of reference time / fixed-point time
};

struct BenchOptions {
  SolveOptions solve;
  ReferenceOptions reference;
  int threads = 1;  // instances solved in parallel; 0 = hardware pick
};

// Solves n_instances fresh instances with both solvers and tabulates costs,
// wall times, and the two cross-solver summary statistics.
BenchTable run_benchmark(int n_instances, int n_nodes, CostMode mode, std::uint64_t seed,
                         const BenchOptions& opts = {});

}  // namespace netmech
