#pragma once

#include <algorithm>
#include <vector>

#include "netmech/costs.hpp"
#include "netmech/network.hpp"
#include "netmech/rng.hpp"

namespace netmech::test {

// Random instance in the benchmark mold but with a free segment count:
// scale-free graph, sorted uniform slopes in [0.5, 2.5], block size 5%
// above the largest implied production.
inline Instance make_random_instance(int n, int segments, std::uint64_t seed) {
  Instance inst;
  inst.net = generate_ba_network(n, n >= 3 ? 2 : 1, stream_seed(seed, 0));
  Rng rng(stream_seed(seed, 1));
  inst.costs.segments = segments;
  inst.costs.c_lo = 0.5;
  inst.costs.c_hi = 2.5;
  inst.costs.slopes.resize(n);
  for (auto& row : inst.costs.slopes) {
    row.resize(segments);
    for (auto& s : row) s = rng.uniform(0.5, 2.5);
    std::sort(row.begin(), row.end());
  }
  double need = 0.0;
  for (int i = 0; i < n; ++i) need = std::max(need, inst.net.max_supply(i));
  inst.costs.seg_width = 1.05 * need / segments;
  return inst;
}

// The worked 2-node example: symmetric demand 0.3, unit loss line, linear
// costs 1 and 2, block size 10.
inline Instance golden_instance() {
  Instance inst;
  inst.net = build_network(2, {0.3, 0.3}, {{0, 1, 1.0}});
  inst.costs.segments = 1;
  inst.costs.seg_width = 10.0;
  inst.costs.c_lo = 0.5;
  inst.costs.c_hi = 2.5;
  inst.costs.slopes = {{1.0}, {2.0}};
  return inst;
}

}  // namespace netmech::test
