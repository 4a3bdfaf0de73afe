#include "netmech/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "netmech/errors.hpp"

namespace netmech {

namespace {

using nlohmann::json;

json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, what + ": " + e.what());
  }
}

template <typename T>
T field(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::ConfigError,
                std::string("field '") + key + "' is missing or has the wrong type");
  }
}

bool needs_lambda(Family f) {
  return f == Family::PowerFunction || f == Family::Weibull || f == Family::Laplace ||
         f == Family::ReversedExponential;
}

std::string csv_num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path + " for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::IoError, "read failed on " + path);
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + tmp + " for writing");
    out << content;
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "write failed on " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw Error(ErrorCode::IoError, "cannot move " + tmp + " into place");
  }
}

Instance parse_instance(const json& j) {
  const int n = field<int>(j, "n");
  const auto demand = field<std::vector<double>>(j, "demand");
  if (!j.contains("edges") || !j.at("edges").is_array())
    throw Error(ErrorCode::ConfigError, "field 'edges' is missing or has the wrong type");
  std::vector<Edge> edges;
  for (const auto& e : j.at("edges"))
    edges.push_back({field<int>(e, "a"), field<int>(e, "b"), field<double>(e, "r")});

  Instance inst;
  inst.net = build_network(n, demand, edges);
  inst.costs.seg_width = field<double>(j, "q_bar");
  inst.costs.segments = field<int>(j, "N");
  inst.costs.c_lo = field<double>(j, "c_lo");
  inst.costs.c_hi = field<double>(j, "c_hi");
  inst.costs.slopes = field<std::vector<std::vector<double>>>(j, "slopes");
  validate_cost_profile(inst.costs);
  validate_instance(inst);
  return inst;
}

Instance load_instance(const std::string& path) {
  return parse_instance(parse_json_text(read_text_file(path), path));
}

json instance_to_json(const Instance& inst) {
  json edges = json::array();
  for (const auto& e : inst.net.edges) edges.push_back({{"a", e.a}, {"b", e.b}, {"r", e.r}});
  return json{{"n", inst.net.n},
              {"demand", inst.net.demand},
              {"edges", edges},
              {"q_bar", inst.costs.seg_width},
              {"N", inst.costs.segments},
              {"c_lo", inst.costs.c_lo},
              {"c_hi", inst.costs.c_hi},
              {"slopes", inst.costs.slopes}};
}

void save_instance(const Instance& inst, const std::string& path) {
  write_text_file(path, instance_to_json(inst).dump(2) + "\n");
}

std::vector<AgentPrior> parse_priors(const json& j) {
  if (!j.contains("agents") || !j.at("agents").is_array())
    throw Error(ErrorCode::ConfigError, "field 'agents' is missing or has the wrong type");
  std::vector<AgentPrior> out;
  for (const auto& row : j.at("agents")) {
    if (!row.is_array())
      throw Error(ErrorCode::ConfigError, "each agent entry must be an array of segments");
    std::vector<Marginal> segments;
    for (const auto& seg : row) {
      const Family fam = parse_family(field<std::string>(seg, "family"));
      double lambda = 1.0;
      if (seg.contains("lambda"))
        lambda = field<double>(seg, "lambda");
      else if (needs_lambda(fam))
        throw Error(ErrorCode::ConfigError, std::string("field 'lambda' is required for ") +
                                                family_name(fam) + " segments");
      segments.push_back(
          make_marginal(fam, field<double>(seg, "lo"), field<double>(seg, "hi"), lambda));
    }
    out.push_back(make_agent_prior(segments));
  }
  if (out.empty()) throw Error(ErrorCode::ConfigError, "'agents' must not be empty");
  return out;
}

std::vector<AgentPrior> load_priors(const std::string& path) {
  return parse_priors(parse_json_text(read_text_file(path), path));
}

json priors_to_json(const std::vector<AgentPrior>& priors) {
  json agents = json::array();
  for (const auto& p : priors) {
    json row = json::array();
    for (const auto& m : p.segments) {
      json seg{{"family", family_name(m.family)}, {"lo", m.lo}, {"hi", m.hi}};
      if (needs_lambda(m.family)) seg["lambda"] = m.lambda;
      row.push_back(seg);
    }
    agents.push_back(row);
  }
  return json{{"agents", agents}};
}

void save_priors(const std::vector<AgentPrior>& priors, const std::string& path) {
  write_text_file(path, priors_to_json(priors).dump(2) + "\n");
}

json solution_to_json(const DualSolution& sol, const Allocation& alloc) {
  json flows = json::array();
  for (const auto& f : alloc.h)
    flows.push_back({{"from", f.from}, {"to", f.to}, {"flow", f.flow}});
  return json{{"lambda", sol.lambda},
              {"q", alloc.q},
              {"q_seg", alloc.q_seg},
              {"h", flows},
              {"primal_cost", alloc.primal_cost},
              {"dual_value", alloc.dual_value},
              {"iterations", sol.iterations},
              {"trace", sol.trace},
              {"converged", sol.converged},
              {"tol", sol.tol}};
}

json mechanism_to_json(const DualSolution& sol, const Allocation& alloc,
                       const std::vector<double>& x, const CostProfile& virtual_profile) {
  json j = solution_to_json(sol, alloc);
  j["x"] = x;
  j["virtual_slopes"] = virtual_profile.slopes;
  j["virtual_c_hi"] = virtual_profile.c_hi;
  return j;
}

std::string trace_csv(const DualSolution& sol) {
  std::string out = "iteration,decrement\n";
  for (std::size_t k = 0; k < sol.trace.size(); ++k)
    out += std::to_string(k + 1) + "," + csv_num(sol.trace[k]) + "\n";
  return out;
}

std::string audit_csv(const std::string& instance_id, const std::vector<AuditReport>& reports,
                      const RentReport* rent) {
  std::string out = "instance_id,agent,segment,metric,estimate,std_err,verdict\n";
  auto row = [&](const std::string& agent, const std::string& segment,
                 const std::string& metric, double est, double se, const std::string& verdict) {
    out += instance_id + "," + agent + "," + segment + "," + metric + "," + csv_num(est) +
           "," + csv_num(se) + "," + verdict + "\n";
  };
  for (const auto& r : reports) {
    const std::string agent = std::to_string(r.agent);
    for (std::size_t m = 0; m < r.utility_gap.size(); ++m) {
      char name[32];
      std::snprintf(name, sizeof(name), "ic_gap_%02zu", m);
      const auto& g = r.utility_gap[m];
      row(agent, "", name, g.estimate, g.std_err, g.fail ? "fail" : "pass");
    }
    row(agent, "", "pc_value", r.pc_value.estimate, r.pc_value.std_err,
        r.pc_value.fail ? "fail" : "pass");
  }
  if (rent != nullptr) {
    row("", "", "rent_direct", rent->rent_direct_mean, rent->rent_direct_se,
        rent->rent_min >= 0.0 ? "pass" : "fail");
    row("", "", "rent_kratio", rent->rent_kratio_mean, rent->rent_kratio_se, "");
    row("", "", "rent_diff", rent->rent_diff_mean, rent->rent_diff_se,
        std::fabs(rent->rent_diff_mean) <= 3.0 * rent->rent_diff_se ? "pass" : "fail");
    row("", "", "full_info_cost", rent->full_info_cost_mean, rent->full_info_cost_se, "");
    row("", "", "optimal_cost", rent->payment_mean, rent->payment_se, "");
  }
  return out;
}

std::string bench_csv(const BenchTable& table) {
  std::string out = "instance_id,solver,cost,wall_time,iterations,converged\n";
  for (const auto& r : table.records)
    out += r.instance_id + "," + r.solver + "," + csv_num(r.cost) + "," +
           csv_num(r.wall_time) + "," + std::to_string(r.iterations) + "," +
           (r.converged ? "true" : "false") + "\n";
  out += "summary,max_rel_discrepancy," + csv_num(table.max_rel_discrepancy) + ",,,\n";
  out += "summary,median_speedup," + csv_num(table.median_speedup) + ",,,\n";
  return out;
}

}  // namespace netmech
