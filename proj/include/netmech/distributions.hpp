#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "netmech/costs.hpp"

namespace netmech {

// Truncated log-concave marginals for cost slopes. Every family lives on a
// support [lo, hi]; formulas run in the shifted coordinate y = x - lo so
// the left endpoint plays the role of zero. Degenerate is the point mass
// lo == hi used to express full-information priors.
enum class Family {
  Uniform,
  PowerFunction,
  Weibull,
  Laplace,
  ReversedExponential,
  Degenerate,
};

const char* family_name(Family f);
Family parse_family(const std::string& name);

struct Marginal {
  Family family = Family::Uniform;
  double lambda = 1.0;  // shape/rate; ignored by Uniform and Degenerate
  double lo = 0.0;
  double hi = 1.0;
  double mass = 1.0;  // raw CDF at hi, cached so the density integrates to 1
};

// Validates parameters (Power/Weibull need lambda >= 1, rate families
// lambda > 0, lo < hi except Degenerate) and caches the normalization.
Marginal make_marginal(Family family, double lo, double hi, double lambda = 1.0);

double density(const Marginal& m, double x);      // normalized pdf
double cdf(const Marginal& m, double x);          // in [0, 1]
double inverse_cdf(const Marginal& m, double u);  // u in [0, 1]

// K(x) = CDF/density of the truncated family; the marginal information
// rent. K(lo) = 0; x + K(x) is increasing (monotone likelihood ratio).
double k_ratio(const Marginal& m, double x);
double virtual_cost(const Marginal& m, double x);

// Required junction gap: Delta = K(hi).
double delta_gap(const Marginal& m);

// One agent's independent per-segment marginals. Supports must be disjoint
// and increasing (hi_j <= lo_{j+1}, strict between distinct points).
struct AgentPrior {
  std::vector<Marginal> segments;
};

AgentPrior make_agent_prior(std::vector<Marginal> segments);

struct JunctionGap {
  int junction = 0;       // between segment `junction` and `junction`+1
  double required = 0.0;  // Delta_j = K_j(hi_j)
  double actual = 0.0;    // lo_{j+1} - hi_j
  double margin = 0.0;    // actual - required
  bool ok = false;
};

// Virtual costs are increasing across segments iff every junction clears
// its Delta gap. The report never throws; callers that need enforcement
// raise DiscernabilityViolation on report.pass == false.
struct DiscernabilityReport {
  std::vector<JunctionGap> junctions;
  bool pass = true;
};

DiscernabilityReport check_discernability(const AgentPrior& prior);

// Inverse-CDF sampling of a full cost profile, one slope per (agent,
// segment). Deterministic for a fixed seed. Priors must all have the same
// segment count and pass discernability.
CostProfile sample_profile(const std::vector<AgentPrior>& priors, double seg_width,
                           std::uint64_t seed);

}  // namespace netmech
