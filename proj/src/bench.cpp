#include "netmech/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "netmech/errors.hpp"
#include "netmech/parallel.hpp"
#include "netmech/rng.hpp"

namespace netmech {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  if (n == 0) return 0.0;
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

Family battery_family(int slot) {
  static const Family order[] = {Family::Uniform, Family::PowerFunction, Family::Weibull,
                                 Family::Laplace, Family::ReversedExponential};
  return order[slot % 5];
}

}  // namespace

const char* cost_mode_name(CostMode mode) {
  return mode == CostMode::Linear ? "linear" : "piecewise";
}

CostMode parse_cost_mode(const std::string& s) {
  if (s == "linear") return CostMode::Linear;
  if (s == "piecewise") return CostMode::Piecewise;
  throw Error(ErrorCode::ConfigError, "unknown cost mode '" + s + "'");
}

Instance make_bench_instance(int n_nodes, CostMode mode, std::uint64_t seed, int attach) {
  if (attach <= 0) attach = n_nodes >= 3 ? 2 : 1;
  Instance inst;
  inst.net = generate_ba_network(n_nodes, attach, stream_seed(seed, 0));

  const int segments = mode == CostMode::Linear ? 1 : 4;
  Rng rng(stream_seed(seed, 1));
  inst.costs.segments = segments;
  inst.costs.c_lo = 0.5;
  inst.costs.c_hi = 2.5;
  inst.costs.slopes.resize(n_nodes);
  for (auto& row : inst.costs.slopes) {
    row.resize(segments);
    for (auto& s : row) s = rng.uniform(0.5, 2.5);
    std::sort(row.begin(), row.end());
  }

  double need = 0.0;
  for (int i = 0; i < n_nodes; ++i) need = std::max(need, inst.net.max_supply(i));
  inst.costs.seg_width = 1.05 * need / segments;

  validate_cost_profile(inst.costs);
  validate_instance(inst);
  return inst;
}

Battery make_audit_battery(int n_nodes, int segments, std::uint64_t seed, int attach) {
  if (segments < 1) throw Error(ErrorCode::ParamError, "need at least one segment");
  if (attach <= 0) attach = n_nodes >= 3 ? 2 : 1;
  Battery bat;
  bat.inst.net = generate_ba_network(n_nodes, attach, stream_seed(seed, 0));

  Rng rng(stream_seed(seed, 1));
  bat.priors.resize(n_nodes);
  for (int i = 0; i < n_nodes; ++i) {
    std::vector<Marginal> segs;
    double lo = 0.5;
    for (int j = 0; j < segments; ++j) {
      const double width = rng.uniform(0.2, 0.5);
      const double lambda = rng.uniform(1.0, 3.0);
      segs.push_back(make_marginal(battery_family(i + j), lo, lo + width, lambda));
      lo = lo + width + 1.05 * delta_gap(segs.back());
    }
    bat.priors[i] = make_agent_prior(segs);
  }

  double need = 0.0;
  for (int i = 0; i < n_nodes; ++i) need = std::max(need, bat.inst.net.max_supply(i));
  const double q_bar = 1.05 * need / segments;
  bat.inst.costs = sample_profile(bat.priors, q_bar, stream_seed(seed, 2));
  validate_instance(bat.inst);
  return bat;
}

BenchTable run_benchmark(int n_instances, int n_nodes, CostMode mode, std::uint64_t seed,
                         const BenchOptions& opts) {
  if (n_instances < 1) throw Error(ErrorCode::ParamError, "need at least one instance");

  struct Row {
    BenchRecord fp, ref;
    double rel = 0.0;
    double speedup = 0.0;
  };
  std::vector<Row> rows(n_instances);

  run_samples(n_instances, opts.threads, [&](int k) {
    const Instance inst = make_bench_instance(n_nodes, mode, stream_seed(seed, k));
    char id[32];
    std::snprintf(id, sizeof(id), "inst_%03d", k);

    auto t0 = std::chrono::steady_clock::now();
    const auto sol = solve_fixed_point(inst.net, inst.costs, opts.solve);
    const auto alloc = recover_primal(inst.net, inst.costs, sol);
    const double fp_time = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    const auto ref = reference_solve(inst.net, inst.costs, opts.reference);
    const double ref_time = seconds_since(t0);
    const double ref_cost = dual_objective(inst.net, inst.costs, ref.lambda);

    Row& row = rows[k];
    row.fp = {id, "fixed_point", alloc.primal_cost, fp_time, sol.iterations, sol.converged};
    row.ref = {id, "reference", ref_cost, ref_time, ref.iterations, ref.converged};
    row.rel = std::fabs(alloc.primal_cost - ref_cost) /
              std::max({1.0, std::fabs(alloc.primal_cost), std::fabs(ref_cost)});
    row.speedup = ref_time / std::max(fp_time, 1e-12);
  });

  BenchTable table;
  std::vector<double> speedups;
  for (const auto& row : rows) {
    table.records.push_back(row.fp);
    table.records.push_back(row.ref);
    table.max_rel_discrepancy = std::max(table.max_rel_discrepancy, row.rel);
    speedups.push_back(row.speedup);
  }
  table.median_speedup = median(std::move(speedups));
  return table;
}

}  // namespace netmech
