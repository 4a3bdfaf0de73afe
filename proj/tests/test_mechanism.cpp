#include "doctest.h"

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "netmech/bench.hpp"
#include "netmech/errors.hpp"
#include "netmech/mechanism.hpp"
#include "netmech/rng.hpp"

using namespace netmech;
using netmech::test::golden_instance;
using netmech::test::make_random_instance;

namespace {

std::vector<AgentPrior> degenerate_priors(const CostProfile& costs) {
  std::vector<AgentPrior> priors;
  for (const auto& row : costs.slopes) {
    std::vector<Marginal> segs;
    for (double c : row) segs.push_back(make_marginal(Family::Degenerate, c, c));
    priors.push_back(make_agent_prior(std::move(segs)));
  }
  return priors;
}

}  // namespace

TEST_CASE("virtualization adds the information rent to each slope") {
  CostProfile costs;
  costs.segments = 1;
  costs.seg_width = 10.0;
  costs.c_lo = 0.5;
  costs.c_hi = 2.5;
  costs.slopes = {{1.0}, {2.0}};
  std::vector<AgentPrior> priors;
  priors.push_back(make_agent_prior({make_marginal(Family::Uniform, 0.5, 1.5)}));
  priors.push_back(make_agent_prior({make_marginal(Family::Uniform, 1.5, 2.5)}));

  const auto v = virtualize(costs, priors);
  CHECK(v.slopes[0][0] == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(v.slopes[1][0] == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(v.c_lo == costs.c_lo);
  // The box top grows by the largest junction gap so virtual slopes fit.
  CHECK(v.c_hi == doctest::Approx(3.5).epsilon(1e-12));

  // A bid at the bottom of its support carries no rent.
  costs.slopes = {{0.5}, {1.5}};
  const auto v2 = virtualize(costs, priors);
  CHECK(v2.slopes[0][0] == 0.5);
  CHECK(v2.slopes[1][0] == 1.5);
}

TEST_CASE("optimal allocation equals the plain allocation at virtual slopes") {
  auto inst = golden_instance();
  inst.costs.slopes = {{1.0}, {2.0}};
  std::vector<AgentPrior> priors;
  priors.push_back(make_agent_prior({make_marginal(Family::Uniform, 0.5, 1.5)}));
  priors.push_back(make_agent_prior({make_marginal(Family::Uniform, 1.5, 2.5)}));

  const auto opt = optimal_allocation(inst, priors);

  auto shifted = inst;
  shifted.costs.slopes = {{1.5}, {2.5}};
  const auto sol = solve_fixed_point(shifted.net, shifted.costs);
  REQUIRE(sol.converged);
  const auto plain = recover_primal(shifted.net, shifted.costs, sol);

  for (int i = 0; i < 2; ++i) CHECK(opt.q[i] == doctest::Approx(plain.q[i]).epsilon(1e-9));
}

TEST_CASE("degenerate priors reduce the mechanism to the plain allocation") {
  for (std::uint64_t seed : {7u, 8u}) {
    const auto inst = make_random_instance(5, 2, seed);
    const auto priors = degenerate_priors(inst.costs);

    const auto opt = optimal_allocation(inst, priors);
    const auto sol = solve_fixed_point(inst.net, inst.costs);
    REQUIRE(sol.converged);
    const auto plain = recover_primal(inst.net, inst.costs, sol);
    for (int i = 0; i < inst.net.n; ++i) {
      CHECK(std::fabs(opt.q[i] - plain.q[i]) <= 1e-9);
      for (int j = 0; j < inst.costs.segments; ++j)
        CHECK(std::fabs(opt.q_seg[i][j] - plain.q_seg[i][j]) <= 1e-9);
    }

    // No rent under full information: payment is exactly the bid cost.
    const auto x = payment(inst, priors);
    for (int i = 0; i < inst.net.n; ++i) {
      double bid_cost = 0.0;
      for (int j = 0; j < inst.costs.segments; ++j)
        bid_cost += inst.costs.slopes[i][j] * opt.q_seg[i][j];
      CHECK(x[i] == bid_cost);
    }
  }
}

TEST_CASE("top-type bids are paid exactly their bid cost") {
  const auto bat = make_audit_battery(3, 2, 19);
  auto inst = bat.inst;
  for (int i = 0; i < inst.net.n; ++i)
    for (int j = 0; j < inst.costs.segments; ++j)
      inst.costs.slopes[i][j] = bat.priors[i].segments[j].hi;

  const auto out = run_mechanism(inst, bat.priors);
  for (int i = 0; i < inst.net.n; ++i) {
    double bid_cost = 0.0;
    for (int j = 0; j < inst.costs.segments; ++j)
      bid_cost += inst.costs.slopes[i][j] * out.alloc.q_seg[i][j];
    // The integral above the top of the support is empty, so equality is
    // bitwise, not approximate.
    CHECK(out.x[i] == bid_cost);
  }
}

TEST_CASE("payment quadrature is stable under grid refinement") {
  const auto bat = make_audit_battery(3, 2, 23);
  QuadConfig coarse;
  coarse.points = 65;
  QuadConfig fine;
  fine.points = 129;
  const auto x65 = payment(bat.inst, bat.priors, coarse);
  const auto x129 = payment(bat.inst, bat.priors, fine);
  for (std::size_t i = 0; i < x65.size(); ++i)
    CHECK(std::fabs(x65[i] - x129[i]) <= 1e-4 * std::max(1.0, std::fabs(x129[i])));
}

TEST_CASE("allocation estimates with point-mass opponents are exact") {
  const auto inst = make_random_instance(4, 2, 31);
  auto priors = degenerate_priors(inst.costs);
  // Free only agent 0; everyone else is common knowledge.
  priors[0] = make_agent_prior({make_marginal(Family::Uniform, inst.costs.slopes[0][0] - 0.1,
                                              inst.costs.slopes[0][0] + 0.1),
                                make_marginal(Family::Uniform, inst.costs.slopes[0][1] + 0.3,
                                              inst.costs.slopes[0][1] + 0.6)});
  auto bids = inst.costs.slopes[0];
  bids[1] += 0.4;  // keep the second bid inside its shifted support

  const auto est = estimate_Q(inst, priors, 0, bids, 16, 5);
  const auto est2 = estimate_Q(inst, priors, 0, bids, 16, 5);

  auto env = inst;
  env.costs.slopes[0] = bids;
  const auto one = optimal_allocation(env, priors);
  for (int j = 0; j < inst.costs.segments; ++j) {
    CHECK(est[j].se == 0.0);
    CHECK(est[j].mean == doctest::Approx(one.q_seg[0][j]).epsilon(1e-12));
    CHECK(est[j].mean == est2[j].mean);  // common random numbers
  }
}

TEST_CASE("allocation estimates fall as the own bid rises") {
  const auto bat = make_audit_battery(4, 2, 37);
  const int agent = 1;
  std::vector<double> low(2), high(2);
  for (int j = 0; j < 2; ++j) {
    const auto& m = bat.priors[agent].segments[j];
    low[j] = m.lo + 0.25 * (m.hi - m.lo);
    high[j] = m.lo + 0.75 * (m.hi - m.lo);
  }
  const auto e_low = estimate_Q(bat.inst, bat.priors, agent, low, 24, 77);
  const auto e_high = estimate_Q(bat.inst, bat.priors, agent, high, 24, 77);
  for (int j = 0; j < 2; ++j) CHECK(e_high[j].mean <= e_low[j].mean + 1e-12);
}

TEST_CASE("incentive audit: truth-telling dominates within noise") {
  const auto bat = make_audit_battery(3, 2, 41);
  const int agent = 0;
  const auto truth = bat.inst.costs.slopes[agent];

  std::vector<std::vector<double>> misreports;
  misreports.push_back(truth);  // self-report control
  for (double frac : {0.25, 0.75}) {
    std::vector<double> mis(truth.size());
    for (std::size_t j = 0; j < truth.size(); ++j) {
      const auto& m = bat.priors[agent].segments[j];
      mis[j] = m.lo + frac * (m.hi - m.lo);
    }
    misreports.push_back(mis);
  }

  const auto rep = audit(bat.inst, bat.priors, agent, truth, misreports, 40, 4242);
  CHECK(rep.samples == 40);
  REQUIRE(rep.utility_gap.size() == misreports.size());

  // Misreporting the truth is a no-op: the gap is identically zero.
  CHECK(rep.utility_gap[0].estimate == 0.0);
  CHECK(rep.utility_gap[0].std_err == 0.0);
  CHECK_FALSE(rep.utility_gap[0].fail);

  for (const auto& gap : rep.utility_gap) CHECK_FALSE(gap.fail);
  CHECK_FALSE(rep.pc_value.fail);

  // A top-of-support type earns exactly zero in every sample.
  std::vector<double> top(truth.size());
  for (std::size_t j = 0; j < truth.size(); ++j) top[j] = bat.priors[agent].segments[j].hi;
  const auto rep_top = audit(bat.inst, bat.priors, agent, top, {top}, 12, 4242);
  CHECK(rep_top.pc_value.estimate == 0.0);
  CHECK(rep_top.pc_value.std_err == 0.0);
}

TEST_CASE("the two rent estimates agree") {
  const auto bat = make_audit_battery(3, 2, 53);
  const auto rep = rent_report(bat.inst, bat.priors, 25, 99);
  CHECK(rep.profiles == 25);
  CHECK(rep.rent_min >= -1e-12);
  CHECK(rep.rent_direct_mean >= -1e-12);
  CHECK(std::fabs(rep.rent_diff_mean) <= 3.0 * rep.rent_diff_se + 1e-12);
  // Identity: outlay = production cost + direct rent.
  CHECK(rep.payment_mean ==
        doctest::Approx(rep.mech_cost_mean + rep.rent_direct_mean).epsilon(1e-12));
  // Virtual-cost allocation can only cost more to produce than the
  // full-information optimum.
  CHECK(rep.full_info_cost_mean >= 0.0);
  CHECK(rep.mech_cost_mean >= rep.full_info_cost_mean - 1e-9);
}

TEST_CASE("mechanism error paths") {
  const auto bat = make_audit_battery(3, 2, 67);

  QuadConfig strangled;
  strangled.max_solves = 1;
  CHECK_THROWS_AS(payment(bat.inst, bat.priors, strangled), Error);
  try {
    payment(bat.inst, bat.priors, strangled);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::QuadratureBudgetExceeded);
  }

  // Bids outside the prior supports are rejected up front. Segment 1 keeps
  // the probe inside the overall price box, isolating the support check.
  auto outside = bat.inst;
  outside.costs.slopes[0][1] = bat.priors[0].segments[1].lo - 1e-3;
  CHECK_THROWS_AS(optimal_allocation(outside, bat.priors), Error);
  try {
    optimal_allocation(outside, bat.priors);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OutOfSupport);
  }

  // One prior per agent, no more, no fewer.
  auto short_priors = bat.priors;
  short_priors.pop_back();
  CHECK_THROWS_AS(optimal_allocation(bat.inst, short_priors), Error);

  // Junction gaps below the rent threshold break slope ordering.
  auto inst = golden_instance();
  inst.costs.segments = 2;
  inst.costs.seg_width = 5.0;
  inst.costs.slopes = {{1.0, 1.7}, {1.0, 1.7}};
  std::vector<AgentPrior> cramped;
  for (int i = 0; i < 2; ++i)
    cramped.push_back(make_agent_prior({make_marginal(Family::Uniform, 0.5, 1.5),
                                        make_marginal(Family::Uniform, 1.6, 2.5)}));
  CHECK_THROWS_AS(optimal_allocation(inst, cramped), Error);
  try {
    optimal_allocation(inst, cramped);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DiscernabilityViolation);
  }
}
