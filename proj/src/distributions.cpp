#include "netmech/distributions.hpp"

#include <algorithm>
#include <cmath>

#include "netmech/errors.hpp"
#include "netmech/quadrature.hpp"
#include "netmech/rng.hpp"

namespace netmech {

const char* family_name(Family f) {
  switch (f) {
    case Family::Uniform: return "uniform";
    case Family::PowerFunction: return "power";
    case Family::Weibull: return "weibull";
    case Family::Laplace: return "laplace";
    case Family::ReversedExponential: return "reversed_exponential";
    case Family::Degenerate: return "degenerate";
  }
  return "unknown";
}

Family parse_family(const std::string& name) {
  if (name == "uniform") return Family::Uniform;
  if (name == "power") return Family::PowerFunction;
  if (name == "weibull") return Family::Weibull;
  if (name == "laplace") return Family::Laplace;
  if (name == "reversed_exponential") return Family::ReversedExponential;
  if (name == "degenerate") return Family::Degenerate;
  throw Error(ErrorCode::ParamError, "unknown marginal family '" + name + "'");
}

namespace {

// Raw (unnormalized) density/CDF in the shifted coordinate y in [0, w].
// Normalization divides by the cached mass = raw_cdf(w).

double raw_density(const Marginal& m, double y) {
  const double w = m.hi - m.lo;
  switch (m.family) {
    case Family::Uniform:
      return 1.0;
    case Family::PowerFunction:
      return m.lambda * std::pow(y / w, m.lambda - 1.0);
    case Family::Weibull: {
      const double z = std::pow(y / w, m.lambda);
      return (m.lambda / w) * std::pow(y / w, m.lambda - 1.0) * std::exp(-z);
    }
    case Family::Laplace:
      return 0.5 * std::exp(-m.lambda * std::fabs(y - 0.5 * w));
    case Family::ReversedExponential:
      return m.lambda * std::exp(-m.lambda * (w - y));
    case Family::Degenerate:
      throw Error(ErrorCode::ParamError, "point mass has no density");
  }
  return 0.0;
}

double raw_cdf(const Marginal& m, double y) {
  const double w = m.hi - m.lo;
  switch (m.family) {
    case Family::Uniform:
      return y;
    case Family::PowerFunction:
      return w * std::pow(y / w, m.lambda);
    case Family::Weibull:
      return -std::expm1(-std::pow(y / w, m.lambda));
    case Family::Laplace: {
      // No closed form is committed to here; integrate the two smooth
      // pieces around the kink at w/2.
      auto f = [&](double t) { return raw_density(m, t); };
      const double half = 0.5 * w;
      if (y <= half) return adaptive_simpson(f, 0.0, y);
      return adaptive_simpson(f, 0.0, half) + adaptive_simpson(f, half, y);
    }
    case Family::ReversedExponential:
      return std::exp(-m.lambda * (w - y)) - std::exp(-m.lambda * w);
    case Family::Degenerate:
      return 1.0;
  }
  return 0.0;
}

void require_in_support(const Marginal& m, double x) {
  if (x < m.lo || x > m.hi)
    throw Error(ErrorCode::OutOfSupport,
                std::string(family_name(m.family)) + " support [" + std::to_string(m.lo) +
                    ", " + std::to_string(m.hi) + "] does not contain " + std::to_string(x),
                -1, x);
}

}  // namespace

Marginal make_marginal(Family family, double lo, double hi, double lambda) {
  Marginal m;
  m.family = family;
  m.lo = lo;
  m.hi = hi;
  m.lambda = lambda;
  if (family == Family::Degenerate) {
    if (lo != hi)
      throw Error(ErrorCode::ParamError, "point mass needs lo == hi");
    m.lambda = 1.0;  // no shape parameter; keep the representation canonical
    m.mass = 1.0;
    return m;
  }
  if (family == Family::Uniform) m.lambda = 1.0;
  if (!(lo < hi))
    throw Error(ErrorCode::ParamError, "support needs lo < hi");
  if ((family == Family::PowerFunction || family == Family::Weibull) && lambda < 1.0)
    throw Error(ErrorCode::ParamError,
                std::string(family_name(family)) + " shape must be >= 1, got " +
                    std::to_string(lambda));
  if ((family == Family::Laplace || family == Family::ReversedExponential) && lambda <= 0.0)
    throw Error(ErrorCode::ParamError,
                std::string(family_name(family)) + " rate must be > 0, got " +
                    std::to_string(lambda));
  m.mass = raw_cdf(m, hi - lo);
  return m;
}

double density(const Marginal& m, double x) {
  require_in_support(m, x);
  return raw_density(m, x - m.lo) / m.mass;
}

double cdf(const Marginal& m, double x) {
  if (m.family == Family::Degenerate) return x < m.lo ? 0.0 : 1.0;
  require_in_support(m, x);
  return std::clamp(raw_cdf(m, x - m.lo) / m.mass, 0.0, 1.0);
}

double inverse_cdf(const Marginal& m, double u) {
  if (u < 0.0 || u > 1.0)
    throw Error(ErrorCode::OutOfRange, "quantile argument " + std::to_string(u), -1, u);
  const double w = m.hi - m.lo;
  double x = m.lo;
  switch (m.family) {
    case Family::Degenerate:
      break;
    case Family::Uniform:
      x = m.lo + u * w;
      break;
    case Family::PowerFunction:
      x = m.lo + w * std::pow(u, 1.0 / m.lambda);
      break;
    case Family::Weibull: {
      // raw_cdf(y)/mass = u  =>  (y/w)^lambda = -log(1 - u*mass)
      const double z = -std::log1p(-u * m.mass);
      x = m.lo + w * std::pow(z, 1.0 / m.lambda);
      break;
    }
    case Family::ReversedExponential: {
      // e^{-lambda (w-y)} = u + (1-u) e^{-lambda w}
      const double arg = u + (1.0 - u) * std::exp(-m.lambda * w);
      x = m.lo + w + std::log(arg) / m.lambda;
      break;
    }
    case Family::Laplace: {
      // Monotone bisection on the numeric CDF down to 1e-12 interval width.
      double a = 0.0, b = w;
      const double target = u * m.mass;
      for (int it = 0; it < 200 && (b - a) > 1e-12; ++it) {
        const double mid = 0.5 * (a + b);
        if (raw_cdf(m, mid) < target)
          a = mid;
        else
          b = mid;
      }
      x = m.lo + 0.5 * (a + b);
      break;
    }
  }
  // Roundoff in the closed forms can land one ulp outside; the quantile
  // function maps into the support by definition.
  return std::clamp(x, m.lo, m.hi);
}

double k_ratio(const Marginal& m, double x) {
  if (m.family == Family::Degenerate) {
    require_in_support(m, x);
    return 0.0;
  }
  require_in_support(m, x);
  const double y = x - m.lo;
  if (y == 0.0) return 0.0;
  const double w = m.hi - m.lo;
  switch (m.family) {
    case Family::Uniform:
      return y;
    case Family::PowerFunction:
      return y / m.lambda;
    case Family::ReversedExponential:
      return -std::expm1(-m.lambda * y) / m.lambda;
    case Family::Weibull: {
      // (w/lambda) (w/y)^{lambda-1} (e^{(y/w)^lambda} - 1), stable near 0.
      const double z = std::pow(y / w, m.lambda);
      return (w / m.lambda) * std::pow(w / y, m.lambda - 1.0) * std::expm1(z);
    }
    case Family::Laplace:
      return raw_cdf(m, y) / raw_density(m, y);
    case Family::Degenerate:
      return 0.0;
  }
  return 0.0;
}

double virtual_cost(const Marginal& m, double x) { return x + k_ratio(m, x); }

double delta_gap(const Marginal& m) { return k_ratio(m, m.hi); }

AgentPrior make_agent_prior(std::vector<Marginal> segments) {
  if (segments.empty())
    throw Error(ErrorCode::ParamError, "agent prior needs at least one segment");
  for (std::size_t j = 1; j < segments.size(); ++j) {
    const bool points = segments[j - 1].hi == segments[j - 1].lo &&
                        segments[j].hi == segments[j].lo;
    const bool increasing = points ? segments[j - 1].hi < segments[j].lo
                                   : segments[j - 1].hi <= segments[j].lo;
    if (!increasing)
      throw Error(ErrorCode::ParamError,
                  "segment supports must be disjoint and increasing (junction " +
                      std::to_string(j - 1) + ")",
                  static_cast<int>(j - 1), segments[j].lo);
  }
  return AgentPrior{std::move(segments)};
}

DiscernabilityReport check_discernability(const AgentPrior& prior) {
  DiscernabilityReport report;
  for (std::size_t j = 0; j + 1 < prior.segments.size(); ++j) {
    JunctionGap g;
    g.junction = static_cast<int>(j);
    g.required = delta_gap(prior.segments[j]);
    g.actual = prior.segments[j + 1].lo - prior.segments[j].hi;
    g.margin = g.actual - g.required;
    g.ok = g.margin >= 0.0;
    report.pass = report.pass && g.ok;
    report.junctions.push_back(g);
  }
  return report;
}

CostProfile sample_profile(const std::vector<AgentPrior>& priors, double seg_width,
                           std::uint64_t seed) {
  if (priors.empty())
    throw Error(ErrorCode::ParamError, "no priors given");
  const int n_seg = static_cast<int>(priors.front().segments.size());
  for (std::size_t i = 0; i < priors.size(); ++i) {
    if (static_cast<int>(priors[i].segments.size()) != n_seg)
      throw Error(ErrorCode::ParamError,
                  "agent " + std::to_string(i) + " has a different segment count");
    auto report = check_discernability(priors[i]);
    if (!report.pass)
      throw Error(ErrorCode::DiscernabilityViolation,
                  "agent " + std::to_string(i) + " priors fail the junction gap check",
                  static_cast<int>(i), 0.0);
  }

  CostProfile costs;
  costs.segments = n_seg;
  costs.seg_width = seg_width;
  costs.c_lo = priors.front().segments.front().lo;
  costs.c_hi = priors.front().segments.back().hi;
  for (const auto& p : priors) {
    costs.c_lo = std::min(costs.c_lo, p.segments.front().lo);
    costs.c_hi = std::max(costs.c_hi, p.segments.back().hi);
  }

  Rng rng(seed);
  costs.slopes.reserve(priors.size());
  for (const auto& p : priors) {
    std::vector<double> s;
    s.reserve(n_seg);
    for (const auto& m : p.segments) s.push_back(inverse_cdf(m, rng.uniform01()));
    costs.slopes.push_back(std::move(s));
  }
  validate_cost_profile(costs);
  return costs;
}

}  // namespace netmech
