#include "doctest.h"

#include <cmath>
#include <vector>

#include "netmech/distributions.hpp"
#include "netmech/errors.hpp"
#include "netmech/quadrature.hpp"
#include "netmech/rng.hpp"

using namespace netmech;

namespace {

// Independent route to K: integrate the normalized density and divide.
double k_by_quadrature(const Marginal& m, double x) {
  const double F = adaptive_simpson([&](double t) { return density(m, t); }, m.lo, x, 1e-13);
  return F / density(m, x);
}

struct FamilyCase {
  Family family;
  double lambda;
};

const std::vector<FamilyCase> kCases{
    {Family::Uniform, 1.0},      {Family::PowerFunction, 1.0}, {Family::PowerFunction, 2.5},
    {Family::PowerFunction, 4.0}, {Family::Weibull, 1.0},      {Family::Weibull, 1.7},
    {Family::Weibull, 3.0},       {Family::Laplace, 0.5},      {Family::Laplace, 2.0},
    {Family::ReversedExponential, 0.7}, {Family::ReversedExponential, 3.0}};

}  // namespace

TEST_CASE("densities integrate to one") {
  for (const auto& fc : kCases) {
    const auto m = make_marginal(fc.family, 0.7, 2.1, fc.lambda);
    const double total =
        adaptive_simpson([&](double t) { return density(m, t); }, m.lo, m.hi, 1e-13);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("closed-form K matches the quadrature route") {
  for (const auto& fc : kCases) {
    const auto m = make_marginal(fc.family, 0.5, 1.8, fc.lambda);
    const bool easy = fc.family == Family::Uniform || fc.family == Family::PowerFunction ||
                      fc.family == Family::ReversedExponential;
    const double tol = easy ? 1e-8 : 1e-6;
    for (int k = 1; k <= 50; ++k) {
      const double x = m.lo + (m.hi - m.lo) * k / 51.0;
      CHECK(std::fabs(k_ratio(m, x) - k_by_quadrature(m, x)) <= tol);
    }
  }
}

TEST_CASE("two-piece closed form pins the Laplace CDF") {
  // Test-only closed form, split at the mid-support kink.
  auto raw_cdf_closed = [](double lambda, double w, double y) {
    if (y <= 0.5 * w)
      return (std::exp(-lambda * (0.5 * w - y)) - std::exp(-lambda * 0.5 * w)) / (2.0 * lambda);
    return (2.0 - std::exp(-lambda * 0.5 * w) - std::exp(-lambda * (y - 0.5 * w))) /
           (2.0 * lambda);
  };
  for (double lambda : {0.5, 1.0, 2.0, 3.5}) {
    const double lo = 0.8, hi = 2.3, w = hi - lo;
    const auto m = make_marginal(Family::Laplace, lo, hi, lambda);
    const double mass = raw_cdf_closed(lambda, w, w);
    for (int k = 0; k <= 40; ++k) {
      const double y = w * k / 40.0;
      CHECK(cdf(m, lo + y) ==
            doctest::Approx(raw_cdf_closed(lambda, w, y) / mass).epsilon(1e-9));
    }
  }
}

TEST_CASE("CDF differentiates to the density") {
  for (const auto& fc : kCases) {
    const auto m = make_marginal(fc.family, 1.1, 2.6, fc.lambda);
    const double h = 1e-5;
    for (int k = 1; k <= 50; ++k) {
      const double x = m.lo + (m.hi - m.lo) * k / 51.0;
      if (x - h <= m.lo || x + h >= m.hi) continue;
      const double fd = (cdf(m, x + h) - cdf(m, x - h)) / (2.0 * h);
      CHECK(std::fabs(fd - density(m, x)) <= 1e-6 * std::max(1.0, density(m, x)));
    }
  }
}

TEST_CASE("inverse CDF round-trips") {
  for (const auto& fc : kCases) {
    const auto m = make_marginal(fc.family, 0.6, 1.9, fc.lambda);
    for (int k = 0; k <= 20; ++k) {
      const double u = k / 20.0;
      const double x = inverse_cdf(m, u);
      CHECK(x >= m.lo);
      CHECK(x <= m.hi);
      CHECK(cdf(m, x) == doctest::Approx(u).epsilon(1e-9));
    }
  }
}

TEST_CASE("virtual cost is strictly increasing") {
  for (const auto& fc : kCases) {
    const auto m = make_marginal(fc.family, 0.5, 2.0, fc.lambda);
    double prev = virtual_cost(m, m.lo);
    CHECK(prev == doctest::Approx(m.lo));  // K vanishes at the left end
    for (int k = 1; k <= 1000; ++k) {
      const double x = m.lo + (m.hi - m.lo) * k / 1000.0;
      const double v = virtual_cost(m, x);
      CHECK(v > prev);
      prev = v;
    }
  }
}

TEST_CASE("junction gap closed forms") {
  const double lo = 1.0, hi = 2.5, w = hi - lo;
  CHECK(delta_gap(make_marginal(Family::Uniform, lo, hi)) == doctest::Approx(w).epsilon(1e-12));
  CHECK(delta_gap(make_marginal(Family::PowerFunction, lo, hi, 2.5)) ==
        doctest::Approx(w / 2.5).epsilon(1e-12));
  CHECK(delta_gap(make_marginal(Family::Weibull, lo, hi, 3.0)) ==
        doctest::Approx(w * (std::exp(1.0) - 1.0) / 3.0).epsilon(1e-9));
  CHECK(delta_gap(make_marginal(Family::ReversedExponential, lo, hi, 2.0)) ==
        doctest::Approx(-std::expm1(-2.0 * w) / 2.0).epsilon(1e-12));
  CHECK(delta_gap(make_marginal(Family::Laplace, lo, hi, 2.0)) ==
        doctest::Approx((2.0 / 2.0) * (std::exp(2.0 * w / 2.0) - 1.0)).epsilon(1e-9));
  CHECK(delta_gap(make_marginal(Family::Degenerate, lo, lo)) == 0.0);
}

TEST_CASE("discernability worked examples") {
  // Uniform [1,2],[3,4],[5,6]: every junction needs a gap of 1 and has
  // exactly 1.
  const auto ok = make_agent_prior({make_marginal(Family::Uniform, 1, 2),
                                    make_marginal(Family::Uniform, 3, 4),
                                    make_marginal(Family::Uniform, 5, 6)});
  const auto rep = check_discernability(ok);
  CHECK(rep.pass);
  REQUIRE(rep.junctions.size() == 2);
  CHECK(rep.junctions[0].required == doctest::Approx(1.0));
  CHECK(rep.junctions[0].actual == doctest::Approx(1.0));
  CHECK(rep.junctions[0].margin == doctest::Approx(0.0));

  const auto tight = make_agent_prior(
      {make_marginal(Family::Uniform, 0, 1), make_marginal(Family::Uniform, 1.5, 2)});
  const auto rep2 = check_discernability(tight);
  CHECK_FALSE(rep2.pass);
  CHECK(rep2.junctions[0].junction == 0);
  CHECK_FALSE(rep2.junctions[0].ok);

  // A peaked power prior needs only w/lambda of clearance.
  const auto peaked = make_agent_prior({make_marginal(Family::PowerFunction, 0, 1, 4.0),
                                        make_marginal(Family::Uniform, 1.3, 2)});
  CHECK(check_discernability(peaked).pass);
}

TEST_CASE("agent priors demand ordered disjoint supports") {
  CHECK_THROWS_AS(make_agent_prior({make_marginal(Family::Uniform, 0, 1),
                                    make_marginal(Family::Uniform, 0.5, 2)}),
                  Error);
  // Coincident point masses are not discernible segments.
  CHECK_THROWS_AS(make_agent_prior({make_marginal(Family::Degenerate, 1, 1),
                                    make_marginal(Family::Degenerate, 1, 1)}),
                  Error);
  CHECK_NOTHROW(make_agent_prior({make_marginal(Family::Degenerate, 1, 1),
                                  make_marginal(Family::Degenerate, 2, 2)}));
}

TEST_CASE("profile sampling is deterministic and support-bound") {
  std::vector<AgentPrior> priors;
  priors.push_back(make_agent_prior({make_marginal(Family::Uniform, 1, 2),
                                     make_marginal(Family::Uniform, 3.2, 4)}));
  priors.push_back(make_agent_prior({make_marginal(Family::ReversedExponential, 1, 2, 2.0),
                                     make_marginal(Family::PowerFunction, 2.6, 3.4, 2.0)}));

  const auto a = sample_profile(priors, 5.0, 11);
  const auto b = sample_profile(priors, 5.0, 11);
  CHECK(a.slopes == b.slopes);
  const auto c = sample_profile(priors, 5.0, 12);
  CHECK(a.slopes != c.slopes);

  for (std::size_t i = 0; i < priors.size(); ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      CHECK(a.slopes[i][j] >= priors[i].segments[j].lo);
      CHECK(a.slopes[i][j] <= priors[i].segments[j].hi);
    }
  CHECK(a.c_lo == doctest::Approx(1.0));
  CHECK(a.c_hi == doctest::Approx(4.0));

  // Undersized junction: sampling refuses the prior battery outright.
  std::vector<AgentPrior> bad;
  bad.push_back(make_agent_prior({make_marginal(Family::Uniform, 0.5, 1.5),
                                  make_marginal(Family::Uniform, 1.6, 2.5)}));
  CHECK_THROWS_AS(sample_profile(bad, 5.0, 1), Error);
  try {
    sample_profile(bad, 5.0, 1);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DiscernabilityViolation);
  }
}

TEST_CASE("degenerate marginals behave as point masses") {
  const auto m = make_marginal(Family::Degenerate, 1.5, 1.5);
  CHECK(cdf(m, 1.4) == 0.0);
  CHECK(cdf(m, 1.5) == 1.0);
  CHECK(inverse_cdf(m, 0.3) == 1.5);
  CHECK(k_ratio(m, 1.5) == 0.0);
  CHECK(virtual_cost(m, 1.5) == 1.5);
}

TEST_CASE("support violations are reported") {
  const auto m = make_marginal(Family::Uniform, 1.0, 2.0);
  CHECK_THROWS_AS(k_ratio(m, 0.9), Error);
  CHECK_THROWS_AS(virtual_cost(m, 2.1), Error);
  try {
    k_ratio(m, 0.9);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OutOfSupport);
  }
  CHECK_THROWS_AS(make_marginal(Family::PowerFunction, 0, 1, 0.5), Error);
  CHECK_THROWS_AS(make_marginal(Family::Laplace, 0, 1, 0.0), Error);
  CHECK_THROWS_AS(make_marginal(Family::Uniform, 2.0, 1.0), Error);
}

TEST_CASE("inverse-CDF sampling hits the uniform mean") {
  const auto m = make_marginal(Family::Uniform, 1.0, 2.0);
  Rng rng(314159);
  const int n = 20000;
  double sum = 0.0;
  for (int s = 0; s < n; ++s) sum += inverse_cdf(m, rng.uniform01());
  const double mean = sum / n;
  const double sd = std::sqrt(1.0 / 12.0);
  CHECK(std::fabs(mean - 1.5) <= 3.0 * sd / std::sqrt(static_cast<double>(n)));
}
