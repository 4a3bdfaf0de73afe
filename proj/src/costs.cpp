#include "netmech/costs.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "netmech/errors.hpp"

namespace netmech {

void validate_cost_profile(const CostProfile& costs) {
  if (costs.segments < 1)
    throw Error(ErrorCode::ParamError, "segment count must be >= 1");
  if (costs.seg_width <= 0.0)
    throw Error(ErrorCode::ParamError, "segment width must be > 0");
  if (!(costs.c_lo > 0.0) || !(costs.c_hi >= costs.c_lo))
    throw Error(ErrorCode::ParamError, "price box needs 0 < c_lo <= c_hi");
  for (std::size_t i = 0; i < costs.slopes.size(); ++i) {
    const auto& s = costs.slopes[i];
    if (static_cast<int>(s.size()) != costs.segments)
      throw Error(ErrorCode::ParamError,
                  "agent " + std::to_string(i) + " has " + std::to_string(s.size()) +
                      " slopes, expected " + std::to_string(costs.segments));
    for (int j = 0; j < costs.segments; ++j) {
      if (s[j] < costs.c_lo || s[j] > costs.c_hi)
        throw Error(ErrorCode::OutOfBox,
                    "agent " + std::to_string(i) + " slope " + std::to_string(j) +
                        " = " + std::to_string(s[j]) + " escapes the price box",
                    static_cast<int>(i), s[j]);
      if (j > 0 && s[j] < s[j - 1])
        throw Error(ErrorCode::ParamError,
                    "agent " + std::to_string(i) + " slopes decrease at segment " +
                        std::to_string(j));
    }
  }
}

void validate_instance(const Instance& inst) {
  validate_cost_profile(inst.costs);
  if (static_cast<int>(inst.costs.slopes.size()) != inst.net.n)
    throw Error(ErrorCode::ParamError,
                "instance has " + std::to_string(inst.costs.slopes.size()) +
                    " agents for " + std::to_string(inst.net.n) + " nodes");
  for (int i = 0; i < inst.net.n; ++i) {
    const double cap = inst.net.max_supply(i);
    if (inst.costs.total_cap() <= cap)
      throw Error(ErrorCode::ParamError,
                  "total block capacity " + std::to_string(inst.costs.total_cap()) +
                      " does not cover the max implied production " + std::to_string(cap) +
                      " at node " + std::to_string(i),
                  i, cap);
  }
}

double cost_eval(const std::vector<double>& slopes, double seg_width, double q) {
  if (q < 0.0)
    throw Error(ErrorCode::NegativeQuantity, "quantity " + std::to_string(q), -1, q);
  double total = 0.0;
  for (std::size_t j = 0; j < slopes.size(); ++j) {
    const double into = q - static_cast<double>(j) * seg_width;
    if (into <= 0.0) break;
    total += slopes[j] * std::min(into, seg_width);
  }
  return total;
}

std::vector<double> segment_split(double q, double seg_width, int segments) {
  if (q < 0.0 || q > seg_width * segments)
    throw Error(ErrorCode::OutOfRange,
                "quantity " + std::to_string(q) + " outside [0, " +
                    std::to_string(seg_width * segments) + "]",
                -1, q);
  std::vector<double> parts(segments, 0.0);
  for (int j = 0; j < segments; ++j) {
    const double into = q - static_cast<double>(j) * seg_width;
    if (into <= 0.0) break;
    parts[j] = std::min(into, seg_width);
  }
  return parts;
}

}  // namespace netmech
