#include "netmech/network.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "netmech/errors.hpp"
#include "netmech/rng.hpp"

namespace netmech {

Network build_network(int n, std::vector<double> demand, std::vector<Edge> edges) {
  if (n < 2)
    throw Error(ErrorCode::ParamError, "need at least 2 nodes, got " + std::to_string(n));
  if (static_cast<int>(demand.size()) != n)
    throw Error(ErrorCode::ParamError,
                "demand vector has " + std::to_string(demand.size()) +
                    " entries for " + std::to_string(n) + " nodes");

  for (int i = 0; i < n; ++i) {
    if (demand[i] < 0.0)
      throw Error(ErrorCode::NegativeDemand,
                  "node " + std::to_string(i) + " has demand " + std::to_string(demand[i]),
                  i, demand[i]);
  }

  std::set<std::pair<int, int>> seen;
  for (auto& e : edges) {
    if (e.a < 0 || e.a >= n || e.b < 0 || e.b >= n)
      throw Error(ErrorCode::ParamError,
                  "edge (" + std::to_string(e.a) + "," + std::to_string(e.b) +
                      ") references a missing node");
    if (e.a == e.b)
      throw Error(ErrorCode::SelfLoop, "edge (" + std::to_string(e.a) + "," +
                                           std::to_string(e.b) + ")", e.a, e.r);
    if (e.r <= 0.0)
      throw Error(ErrorCode::NonPositiveLoss,
                  "edge (" + std::to_string(e.a) + "," + std::to_string(e.b) +
                      ") has loss coefficient " + std::to_string(e.r),
                  e.a, e.r);
    auto key = std::minmax(e.a, e.b);
    if (!seen.insert(key).second)
      throw Error(ErrorCode::DuplicateEdge, "edge (" + std::to_string(e.a) + "," +
                                                std::to_string(e.b) + ") repeats");
  }

  Network net;
  net.n = n;
  net.demand = std::move(demand);
  net.edges = std::move(edges);
  net.adj.assign(n, {});
  for (const auto& e : net.edges) {
    net.adj[e.a].emplace_back(e.b, e.r);
    net.adj[e.b].emplace_back(e.a, e.r);
  }

  net.import_limit.assign(n, 0.0);
  net.export_limit.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    if (net.adj[i].empty())
      throw Error(ErrorCode::IsolatedNode, "node " + std::to_string(i) + " has no edges", i, 0.0);
    for (const auto& [j, r] : net.adj[i]) {
      (void)j;
      net.import_limit[i] += 1.0 / (2.0 * r);
      net.export_limit[i] += 3.0 / (2.0 * r);
    }
    // The dual iteration needs every node to be servable without local
    // production: demand must sit strictly below the import capacity.
    const double slack = net.demand[i] - net.import_limit[i];
    if (slack >= 0.0)
      throw Error(ErrorCode::FeasibilityViolation,
                  "node " + std::to_string(i) + ": demand " + std::to_string(net.demand[i]) +
                      " minus import capacity leaves " + std::to_string(slack),
                  i, slack);
  }
  return net;
}

namespace {

// One preferential pick among nodes [0, limit) excluding already-picked,
// weighted by current degree.
int pick_by_degree(Rng& rng, const std::vector<int>& degree, int limit,
                   const std::vector<int>& taken) {
  double total = 0.0;
  for (int v = 0; v < limit; ++v) {
    if (std::find(taken.begin(), taken.end(), v) == taken.end())
      total += static_cast<double>(degree[v]);
  }
  double ticket = rng.uniform01() * total;
  for (int v = 0; v < limit; ++v) {
    if (std::find(taken.begin(), taken.end(), v) != taken.end()) continue;
    ticket -= static_cast<double>(degree[v]);
    if (ticket <= 0.0) return v;
  }
  // Rounding pushed the ticket past the last weight; take the last eligible.
  for (int v = limit - 1; v >= 0; --v) {
    if (std::find(taken.begin(), taken.end(), v) == taken.end()) return v;
  }
  return 0;
}

}  // namespace

Network generate_ba_network(int n, int m, std::uint64_t seed, BaParams params) {
  if (m < 1)
    throw Error(ErrorCode::ParamError, "attachment count m must be >= 1, got " + std::to_string(m));
  if (n < m + 1)
    throw Error(ErrorCode::ParamError, "need n >= m+1, got n=" + std::to_string(n) +
                                           " m=" + std::to_string(m));
  if (params.r_lo <= 0.0 || params.r_hi < params.r_lo)
    throw Error(ErrorCode::ParamError, "loss range must satisfy 0 < r_lo <= r_hi");
  if (params.d_lo < 0.0)
    throw Error(ErrorCode::ParamError, "demand lower bound must be >= 0");

  Rng rng(seed);

  // Graph structure first: complete seed graph, then degree-weighted
  // attachments. Edge order is canonical so runs are bit-reproducible.
  std::vector<std::pair<int, int>> links;
  std::vector<int> degree(n, 0);
  for (int i = 0; i <= m; ++i) {
    for (int j = i + 1; j <= m; ++j) {
      links.emplace_back(i, j);
      ++degree[i];
      ++degree[j];
    }
  }
  for (int v = m + 1; v < n; ++v) {
    std::vector<int> taken;
    for (int k = 0; k < m; ++k) {
      int t = pick_by_degree(rng, degree, v, taken);
      taken.push_back(t);
    }
    std::sort(taken.begin(), taken.end());
    for (int t : taken) {
      links.emplace_back(t, v);
      ++degree[t];
      ++degree[v];
    }
  }

  // Loss coefficients in edge order, then demands in node order.
  std::vector<Edge> edges;
  edges.reserve(links.size());
  for (auto [a, b] : links)
    edges.push_back({a, b, rng.uniform(params.r_lo, params.r_hi)});

  std::vector<double> import_limit(n, 0.0);
  for (const auto& e : edges) {
    import_limit[e.a] += 1.0 / (2.0 * e.r);
    import_limit[e.b] += 1.0 / (2.0 * e.r);
  }
  double d_hi = params.d_hi;
  if (d_hi < 0.0)
    d_hi = 0.4 * *std::min_element(import_limit.begin(), import_limit.end());
  if (params.d_lo > d_hi)
    throw Error(ErrorCode::ParamError, "demand range is empty after capacity cap");

  std::vector<double> demand(n);
  for (int i = 0; i < n; ++i) demand[i] = rng.uniform(params.d_lo, d_hi);

  // Feasibility repair: any node whose demand reaches its import capacity
  // gets re-drawn inside the open window (0, import_limit).
  for (int i = 0; i < n; ++i) {
    int attempts = 0;
    while (demand[i] >= import_limit[i]) {
      if (++attempts > 100)
        throw Error(ErrorCode::ParamError,
                    "could not draw a feasible demand at node " + std::to_string(i), i,
                    import_limit[i]);
      demand[i] = rng.uniform(0.0, import_limit[i]);
    }
  }

  return build_network(n, std::move(demand), std::move(edges));
}

}  // namespace netmech
