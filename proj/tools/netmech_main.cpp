#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "netmech/bench.hpp"
#include "netmech/errors.hpp"
#include "netmech/io.hpp"
#include "netmech/mechanism.hpp"
#include "netmech/rng.hpp"
#include "netmech/solver.hpp"

namespace {

using namespace netmech;

bool log_enabled() {
  const char* v = std::getenv("NETMECH_LOG");
  return v != nullptr && *v != '\0' && std::string(v) != "0";
}

void logln(const std::string& msg) {
  if (log_enabled()) std::cerr << "[netmech] " << msg << std::endl;
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty())
    std::cout << content;
  else
    write_text_file(out_path, content);
}

std::string instance_id_from(const std::string& path) {
  const auto slash = path.find_last_of("/\\");
  std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
  const auto dot = base.rfind('.');
  if (dot != std::string::npos && dot > 0) base = base.substr(0, dot);
  return base.empty() ? "instance" : base;
}

struct Args {
  std::string command;
  std::string instance_path;
  std::string priors_path;
  std::string out_path;
  std::string format = "json";
  std::string cost_mode = "linear";
  std::uint64_t seed = 1;
  double tol = 1e-9;
  int quad_points = 65;
  int mc_samples = 2000;
  int parallel = 1;
  int n = 10;
  int m = 0;
  int instances = 20;
  int misreports = 8;
  int rent_profiles = 0;
  int agent = -1;
};

SolveOptions solve_options(const Args& a) {
  SolveOptions opts;
  opts.tol = a.tol;
  return opts;
}

QuadConfig quad_config(const Args& a) {
  QuadConfig quad;
  quad.points = a.quad_points;
  quad.threads = a.parallel;
  return quad;
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw Error(ErrorCode::ConfigError, msg);
}

int run_generate(const Args& a) {
  require(!a.out_path.empty(), "generate needs --out");
  const CostMode mode = parse_cost_mode(a.cost_mode);
  if (a.priors_path.empty()) {
    const Instance inst = make_bench_instance(a.n, mode, a.seed, a.m);
    save_instance(inst, a.out_path);
    logln("wrote instance with " + std::to_string(inst.net.edges.size()) + " edges to " +
          a.out_path);
  } else {
    const int segments = mode == CostMode::Linear ? 1 : 4;
    const Battery bat = make_audit_battery(a.n, segments, a.seed, a.m);
    save_instance(bat.inst, a.out_path);
    save_priors(bat.priors, a.priors_path);
    logln("wrote instance to " + a.out_path + " and priors to " + a.priors_path);
  }
  return 0;
}

int run_solve(const Args& a) {
  require(!a.instance_path.empty(), "solve needs --instance");
  const Instance inst = load_instance(a.instance_path);
  const auto sol = solve_fixed_point(inst.net, inst.costs, solve_options(a));
  const auto alloc = recover_primal(inst.net, inst.costs, sol);
  logln("solved in " + std::to_string(sol.iterations) + " sweeps, primal cost " +
        std::to_string(alloc.primal_cost));
  if (a.format == "csv")
    emit(a.out_path, trace_csv(sol));
  else
    emit(a.out_path, solution_to_json(sol, alloc).dump(2) + "\n");
  return 0;
}

int run_mechanism_cmd(const Args& a) {
  require(!a.instance_path.empty(), "mechanism needs --instance");
  require(!a.priors_path.empty(), "mechanism needs --priors");
  require(a.format == "json", "mechanism output is json only");
  const Instance inst = load_instance(a.instance_path);
  const auto priors = load_priors(a.priors_path);

  const CostProfile env = virtualize(inst.costs, priors);
  const auto sol = solve_fixed_point(inst.net, env, solve_options(a));
  const auto alloc = recover_primal(inst.net, env, sol);
  const auto x = payment(inst, priors, quad_config(a), solve_options(a));
  logln("mechanism run complete, total payout " +
        std::to_string([&] {
          double s = 0.0;
          for (double v : x) s += v;
          return s;
        }()));
  emit(a.out_path, mechanism_to_json(sol, alloc, x, env).dump(2) + "\n");
  return 0;
}

int run_audit(const Args& a) {
  require(!a.instance_path.empty(), "audit needs --instance");
  require(!a.priors_path.empty(), "audit needs --priors");
  require(a.format == "csv", "audit output is csv only");
  const Instance inst = load_instance(a.instance_path);
  const auto priors = load_priors(a.priors_path);
  require(a.agent < inst.net.n, "--agent out of range");

  std::vector<int> agents;
  if (a.agent >= 0)
    agents.push_back(a.agent);
  else
    for (int i = 0; i < inst.net.n; ++i) agents.push_back(i);

  std::vector<AuditReport> reports;
  for (int i : agents) {
    // Deterministic misreport grid: evenly spaced interior points of each
    // segment's support, one bid vector per grid position.
    std::vector<std::vector<double>> misreports;
    for (int k = 0; k < a.misreports; ++k) {
      const double frac = static_cast<double>(k + 1) / static_cast<double>(a.misreports + 1);
      std::vector<double> bid(inst.costs.segments);
      for (int j = 0; j < inst.costs.segments; ++j) {
        const auto& m = priors[i].segments[j];
        bid[j] = m.lo + frac * (m.hi - m.lo);
      }
      misreports.push_back(std::move(bid));
    }
    reports.push_back(audit(inst, priors, i, inst.costs.slopes[i], misreports, a.mc_samples,
                            stream_seed(a.seed, 7000 + static_cast<std::uint64_t>(i)),
                            quad_config(a), solve_options(a)));
    logln("audited agent " + std::to_string(i));
  }

  RentReport rent;
  const bool with_rent = a.rent_profiles > 0;
  if (with_rent) {
    rent = rent_report(inst, priors, a.rent_profiles, stream_seed(a.seed, 999),
                       quad_config(a), solve_options(a));
    logln("rent report over " + std::to_string(a.rent_profiles) + " profiles done");
  }
  emit(a.out_path, audit_csv(instance_id_from(a.instance_path), reports,
                             with_rent ? &rent : nullptr));
  return 0;
}

int run_bench(const Args& a) {
  require(a.format == "csv", "bench output is csv only");
  BenchOptions opts;
  opts.solve = solve_options(a);
  opts.threads = a.parallel;
  const BenchTable table =
      run_benchmark(a.instances, a.n, parse_cost_mode(a.cost_mode), a.seed, opts);
  logln("benchmarked " + std::to_string(a.instances) + " instances, median speedup " +
        std::to_string(table.median_speedup));
  emit(a.out_path, bench_csv(table));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Args a;
  CLI::App app{"Networked procurement allocation and mechanism toolkit"};
  app.add_option("--command", a.command, "generate | solve | mechanism | audit | bench")
      ->required()
      ->check(CLI::IsMember({"generate", "solve", "mechanism", "audit", "bench"}));
  app.add_option("--instance", a.instance_path, "instance JSON path");
  app.add_option("--priors", a.priors_path, "priors JSON path");
  app.add_option("--out", a.out_path, "output path (stdout when omitted)");
  app.add_option("--format", a.format, "json | csv")
      ->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--seed", a.seed, "root seed");
  app.add_option("--tol", a.tol, "solver tolerance")->check(CLI::PositiveNumber);
  app.add_option("--quad-points", a.quad_points, "payment quadrature nodes (odd, >= 3)");
  app.add_option("--mc-samples", a.mc_samples, "Monte-Carlo samples per audit");
  app.add_option("--parallel", a.parallel, "worker threads (0 = hardware pick)");
  app.add_option("--n", a.n, "node count for generate/bench");
  app.add_option("--m", a.m, "edges per arriving node (0 = default)");
  app.add_option("--cost-mode", a.cost_mode, "linear | piecewise")
      ->check(CLI::IsMember({"linear", "piecewise"}));
  app.add_option("--instances", a.instances, "benchmark instance count");
  app.add_option("--misreports", a.misreports, "misreport grid size per agent");
  app.add_option("--rent-profiles", a.rent_profiles, "rent report profiles (0 = skip)");
  app.add_option("--agent", a.agent, "audit a single agent (-1 = all)");
  CLI11_PARSE(app, argc, argv);

  try {
    if (a.quad_points < 3 || a.quad_points % 2 == 0)
      throw Error(ErrorCode::ConfigError, "--quad-points must be odd and >= 3");
    if (a.mc_samples < 1) throw Error(ErrorCode::ConfigError, "--mc-samples must be >= 1");
    if (a.command == "generate") return run_generate(a);
    if (a.command == "solve") return run_solve(a);
    if (a.command == "mechanism") return run_mechanism_cmd(a);
    if (a.command == "audit") return run_audit(a);
    return run_bench(a);
  } catch (const Error& e) {
    nlohmann::json rec{{"error", error_code_name(e.code())},
                       {"message", e.what()},
                       {"index", e.index()},
                       {"value", e.value()}};
    std::cerr << rec.dump() << std::endl;
    return 1;
  } catch (const std::exception& e) {
    nlohmann::json rec{{"error", "Unhandled"}, {"message", e.what()}};
    std::cerr << rec.dump() << std::endl;
    return 1;
  }
}
