#include "fixtures.hpp"

#include "flexgauge/benders.hpp"
#include "flexgauge/compact_form.hpp"
#include "flexgauge/errors.hpp"
#include "flexgauge/oracle.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace flexgauge;

namespace {

std::vector<double> nominal_d(const UncertaintyModel& u) { return u.d_bar; }

double dual_value(const CompactForm& cf, const std::vector<double>& d, const std::vector<double>& dd) {
  const auto r = solve_lp(build_min_slack_dual(cf, d, dd));
  EXPECT_TRUE(r.optimal());
  return r.objective;
}

// Balance is the only constraint that can bind: symmetric +/- deviation.
SystemCase tight_single_bus() {
  auto c = fixtures::single_bus(1);
  c.generators[0].p_min = 45.0;
  c.generators[0].p_max = 55.0;
  c.generators[0].reg_up_cap = 0.0;
  c.generators[0].reg_dn_cap = 0.0;
  c.generators[0].sr_cap = 0.0;
  c.delta_d_hat = {0.0};
  return c;
}

}  // namespace

TEST(MinSlack, NominalComfortableCaseIsZero) {
  const auto c = fixtures::single_bus(2);
  const auto cf = assemble(c);
  const auto u = c.uncertainty();
  EXPECT_NEAR(min_slack_lp(cf, u.d_bar, u.delta_d_bar), 0.0, 1e-9);
}

TEST(MinSlack, ExcessDemandNeedsBalanceSlack) {
  const auto c = fixtures::single_bus(1);
  const auto cf = assemble(c);
  const std::vector<double> d = {c.generators[0].p_max + 5.0};
  const std::vector<double> dd = {0.0};
  EXPECT_GE(min_slack_lp(cf, d, dd), 5.0 - 1e-9);
}

TEST(MinSlack, StrongDualityOnRandomRealizations) {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> s(-1.5, 1.5);
  for (const auto& name : fixtures::desk_cases()) {
    const auto c = fixtures::load(name);
    const auto cf = assemble(c);
    const auto u = c.uncertainty();
    for (int k = 0; k < 4; ++k) {
      std::vector<double> d = u.d_bar, dd = u.delta_d_bar;
      for (std::size_t b = 0; b < d.size(); ++b) d[b] += s(rng) * u.d_hat[b];
      for (std::size_t t = 0; t < dd.size(); ++t) dd[t] += s(rng) * (u.delta_d_hat[t] + 1.0);
      const double primal = min_slack_lp(cf, d, dd);
      EXPECT_NEAR(primal, dual_value(cf, d, dd), 1e-6) << name;
    }
  }
}

TEST(MinSlack, WarmSolverMatchesColdSolve) {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> s(-1.0, 1.0);
  const auto c = fixtures::load("desk_3bus.json");
  const auto cf = assemble(c);
  const auto u = c.uncertainty();
  MinSlackSolver warm(cf);
  for (int k = 0; k < 15; ++k) {
    std::vector<double> d = u.d_bar, dd = u.delta_d_bar;
    for (std::size_t b = 0; b < d.size(); ++b) d[b] += 2 * s(rng) * u.d_hat[b];
    for (std::size_t t = 0; t < dd.size(); ++t) dd[t] += 2 * s(rng) * u.delta_d_hat[t];
    EXPECT_NEAR(warm.solve(d, dd), min_slack_lp(cf, d, dd), 1e-7);
  }
}

TEST(MinSlack, ConvexAlongSegments) {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> s(-2.0, 2.0);
  const auto c = fixtures::load("desk_2bus.json");
  const auto cf = assemble(c);
  const auto u = c.uncertainty();
  MinSlackSolver solver(cf);
  for (int k = 0; k < 30; ++k) {
    std::vector<double> d1 = u.d_bar, d2 = u.d_bar, dd1 = u.delta_d_bar, dd2 = u.delta_d_bar;
    for (std::size_t b = 0; b < d1.size(); ++b) {
      d1[b] += s(rng) * u.d_hat[b];
      d2[b] += s(rng) * u.d_hat[b];
    }
    for (std::size_t t = 0; t < dd1.size(); ++t) {
      dd1[t] += s(rng) * u.delta_d_hat[t];
      dd2[t] += s(rng) * u.delta_d_hat[t];
    }
    std::vector<double> dm(d1.size()), ddm(dd1.size());
    for (std::size_t b = 0; b < dm.size(); ++b) dm[b] = 0.5 * (d1[b] + d2[b]);
    for (std::size_t t = 0; t < ddm.size(); ++t) ddm[t] = 0.5 * (dd1[t] + dd2[t]);
    const double v1 = solver.solve(d1, dd1), v2 = solver.solve(d2, dd2), vm = solver.solve(dm, ddm);
    EXPECT_LE(vm, 0.5 * (v1 + v2) + 1e-7);
  }
}

TEST(WorstCase, ZeroLambdaIsNominal) {
  const auto c = fixtures::load("desk_2bus.json");
  const auto cf = assemble(c);
  const auto u = c.uncertainty();
  const auto wc = worst_case_eta(cf, u, ScaleVector::zeros(u.n_buses(), u.n_sub_intervals()));
  EXPECT_EQ(wc.evaluations, 1);
  EXPECT_NEAR(wc.eta, min_slack_lp(cf, nominal_d(u), u.delta_d_bar), 1e-9);
}

TEST(WorstCase, SymmetricDeviationGivesEqualVertices) {
  const auto c = tight_single_bus();
  const auto cf = assemble(c);
  const auto u = c.uncertainty();
  const auto lam = ScaleVector::constant(1, 1, 1.0);
  std::vector<double> d, dd;
  VertexAssignment up{{true}, {true}}, dn{{false}, {true}};
  vertex_realization(u, lam, up, d, dd);
  EXPECT_EQ(d[0], 60.0);
  const double eu = min_slack_lp(cf, d, dd);
  vertex_realization(u, lam, dn, d, dd);
  EXPECT_EQ(d[0], 40.0);
  const double ed = min_slack_lp(cf, d, dd);
  EXPECT_NEAR(eu, 5.0, 1e-9);
  EXPECT_NEAR(ed, eu, 1e-9);
  EXPECT_NEAR(worst_case_eta(cf, u, lam).eta, 5.0, 1e-9);
}

TEST(WorstCase, MonotoneInLambda) {
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto c = fixtures::load("desk_2bus.json");
  const auto cf = assemble(c);
  const auto u = c.uncertainty();
  const auto nb = u.n_buses(), nt = u.n_sub_intervals();
  double prev = -1.0;
  for (int k = 0; k <= 10; ++k) {
    const double eta = worst_case_eta(cf, u, ScaleVector::constant(nb, nt, 0.1 * k)).eta;
    EXPECT_GE(eta, prev - 1e-9);
    prev = eta;
  }
  for (int k = 0; k < 10; ++k) {
    const auto lo = fixtures::random_scale(rng, nb, nt);
    auto f = lo.flat();
    for (auto& v : f) v = std::min(1.0, v + 0.3 * unit(rng));
    const auto hi = ScaleVector::from_flat(f, nb, nt);
    EXPECT_LE(worst_case_eta(cf, u, lo).eta, worst_case_eta(cf, u, hi).eta + 1e-9);
  }
}

TEST(WorstCase, DimensionGuard) {
  const auto c = fixtures::single_bus(kMaxVertexDimensions);
  const auto cf = assemble(c);
  const auto u = c.uncertainty();
  EXPECT_THROW(worst_case_eta(cf, u, ScaleVector::constant(1, kMaxVertexDimensions, 1.0)), DimensionError);
  // Zero-scale dimensions are not enumerated.
  auto lam = ScaleVector::zeros(1, kMaxVertexDimensions);
  lam.lam_up_t[0] = 1.0;
  EXPECT_EQ(worst_case_eta(cf, u, lam).evaluations, 2);
}

TEST(WorstCase, AgreesWithSubproblemAcceptance) {
  std::mt19937 rng(8);
  const auto c = fixtures::load("desk_2bus.json");
  const auto cf = assemble(c);
  const auto u = c.uncertainty();
  const auto nb = u.n_buses(), nt = u.n_sub_intervals();
  int accepted = 0, rejected = 0;
  for (int k = 0; k < 24; ++k) {
    auto lam = k < 11 ? ScaleVector::constant(nb, nt, 0.1 * k) : fixtures::random_scale(rng, nb, nt);
    const double eo = worst_case_eta(cf, u, lam).eta;
    const double er = solve_rdfea(build_rdfea(cf, u, lam)).eta;
    EXPECT_EQ(eo <= 1e-6, er <= 1e-6) << k;
    EXPECT_NEAR(eo, er, 1e-6) << k;
    (eo <= 1e-6 ? accepted : rejected)++;
  }
  EXPECT_GT(accepted, 0);
  EXPECT_GT(rejected, 0);
}

TEST(Reference, UnconstrainedRayReachesOne) {
  const auto c = fixtures::single_bus(1);
  const auto cf = assemble(c);
  const auto u = c.uncertainty();
  const auto r = reference_flexibility(cf, u, ScaleVector::constant(1, 1, 1.0));
  EXPECT_EQ(r.s, 1.0);
  EXPECT_NEAR(r.tf, 2 * 10.0 + 2 * 1.0, 1e-12);
}

TEST(Reference, BaseInfeasibleReported) {
  auto c = fixtures::single_bus(1);
  c.budget = 100.0;  // nominal cost is 10 * 50
  const auto cf = assemble(c);
  const auto u = c.uncertainty();
  EXPECT_THROW(reference_flexibility(cf, u, ScaleVector::constant(1, 1, 1.0)), BaseInfeasible);
  EXPECT_THROW(run_benders(cf, u), BaseInfeasible);
}

TEST(Reference, BisectionFindsBoundary) {
  const auto c = tight_single_bus();
  const auto cf = assemble(c);
  const auto u = c.uncertainty();
  // Generation range 45..55 around a load of 50 with d_hat 10: s = 0.5.
  const auto r = reference_flexibility(cf, u, ScaleVector::constant(1, 1, 1.0));
  EXPECT_NEAR(r.s, 0.5, 2e-6);
  EXPECT_LE(r.s, 0.5 + 1e-9);
}

TEST(Reference, RayValueBoundsBendersFromBelow) {
  const auto c = fixtures::load("desk_2bus.json");
  const auto cf = assemble(c);
  const auto u = c.uncertainty();
  const auto ref = reference_flexibility(cf, u, ScaleVector::constant(u.n_buses(), u.n_sub_intervals(), 1.0));
  const auto rep = run_benders(cf, u);
  EXPECT_LE(ref.tf, rep.indices.tf + 1e-4);
  EXPECT_LE(worst_case_eta(cf, u, rep.lambda_star).eta, 1e-6);
}

TEST(MinSlack, LongAgcChainStaysBounded) {
  // Ten chained sub-intervals: a basis that inverts the small state
  // transition entries is numerically singular.
  const auto c = fixtures::load("desk_2bus_t10.json");
  const auto cf = assemble(c);
  const auto u = c.uncertainty();
  const auto lam = ScaleVector::constant(u.n_buses(), u.n_sub_intervals(), 1.0 / 3.0);
  VertexAssignment v;
  v.bus_up = {false, false};
  for (int t = 0; t < 10; ++t) v.sub_up.push_back(t == 6 || t == 9);
  std::vector<double> d, dd;
  vertex_realization(u, lam, v, d, dd);
  const auto r = solve_lp(build_min_slack_lp(cf, d, dd));
  ASSERT_TRUE(r.optimal()) << to_string(r.status);
  EXPECT_NEAR(r.objective, dual_value(cf, d, dd), 1e-6);
}
