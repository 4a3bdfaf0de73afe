#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "netmech/bench.hpp"
#include "netmech/costs.hpp"
#include "netmech/distributions.hpp"
#include "netmech/mechanism.hpp"
#include "netmech/solver.hpp"

namespace netmech {

// Whole-file text IO; writes go to a sibling temp file then rename, so a
// crash never leaves a half-written output. Failures throw IoError.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// Instance file schema:
//   { "n": 3, "demand": [..], "edges": [{"a":0,"b":1,"r":1.0}, ..],
//     "q_bar": 10.0, "N": 1, "c_lo": 0.5, "c_hi": 2.5, "slopes": [[..], ..] }
// Loading validates the network, the profile box, and capacity coverage.
// Malformed or missing fields throw ConfigError naming the field.
Instance parse_instance(const nlohmann::json& j);
Instance load_instance(const std::string& path);
nlohmann::json instance_to_json(const Instance& inst);
void save_instance(const Instance& inst, const std::string& path);

// Priors file schema:
//   { "agents": [ [ {"family":"uniform","lo":0.5,"hi":1.0}, ... ], ... ] }
// "lambda" is required by the families that have a shape parameter and
// ignored otherwise.
std::vector<AgentPrior> parse_priors(const nlohmann::json& j);
std::vector<AgentPrior> load_priors(const std::string& path);
nlohmann::json priors_to_json(const std::vector<AgentPrior>& priors);
void save_priors(const std::vector<AgentPrior>& priors, const std::string& path);

// Solve dump: multipliers, allocation, flows, both objective values, and the
// convergence record.
nlohmann::json solution_to_json(const DualSolution& sol, const Allocation& alloc);

// Mechanism dump: the solve dump fields for the virtual-price problem plus
// payments and the virtual slopes.
nlohmann::json mechanism_to_json(const DualSolution& sol, const Allocation& alloc,
                                 const std::vector<double>& x,
                                 const CostProfile& virtual_profile);

// Long-format CSV, one row per (iteration, decrement) pair.
std::string trace_csv(const DualSolution& sol);

// Long-format audit CSV: instance_id,agent,segment,metric,estimate,std_err,verdict.
// IC rows are named ic_gap_00, ic_gap_01, .. per misreport; the PC row is
// pc_value. Rent rows (optional) carry blank agent/segment.
std::string audit_csv(const std::string& instance_id, const std::vector<AuditReport>& reports,
                      const RentReport* rent);

// Benchmark CSV: one row per (instance, solver) run plus summary rows whose
// instance_id is "summary" and whose solver column names the statistic.
std::string bench_csv(const BenchTable& table);

}  // namespace netmech
