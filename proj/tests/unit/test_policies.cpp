#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "doctest.h"

#include "fcsize/error.hpp"
#include "fcsize/policies.hpp"

using namespace fcsize;

namespace {

double Sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

PolicyConstants Constants(const EsdParams& esd) {
  PolicyConstants c;
  c.eta = esd.eta;
  c.e_min_J = esd.e_min();
  c.quantum_J = esd.quantum_J();
  return c;
}

struct Rig {
  FuelCellParams fc;
  EsdParams esd;
  Plant plant;
  EsdEnergyModel model;
  PolicyContext ctx;

  explicit Rig(double capacity)
      : esd(Make(capacity)), plant(fc, esd, 0.1), model(plant, 20) {
    ctx.model = &model;
    ctx.constants = Constants(esd);
  }
  static EsdParams Make(double capacity) {
    EsdParams e;
    e.capacity_J = capacity;
    return e;
  }

  PlannerInputs Inputs(double p_fc, double energy, double intensity, int n = 45) const {
    PlannerInputs in;
    in.plant = plant.Initial(p_fc, energy);
    in.p_fc_W = in.plant.fc.p_fc;
    in.e_measured_J = MeasuredEnergy(in.plant.esd, esd);
    in.intensity.assign(n, intensity);
    in.server_power_W.assign(n, DemandedPower(ctx.server, intensity));
    return in;
  }
};

}  // namespace

TEST_CASE("policy names round trip") {
  for (PolicyKind k : AllPolicies()) CHECK(ParsePolicy(PolicyName(k)) == k);
  CHECK_THROWS_AS(ParsePolicy("D-FCA-WA"), Error);
  CHECK(IsWorkloadAware(PolicyKind::kCFcaWa));
  CHECK(IsCentralized(PolicyKind::kCFcaWa));
  CHECK(UsesFcaPlanner(PolicyKind::kCFcaWa));
}

TEST_CASE("utilization-driven planner arithmetic") {
  EsdParams esd;
  esd.capacity_J = 100000.0;
  const PolicyConstants c = Constants(esd);
  PlannerInputs in;
  in.p_fc_W = 5000.0;
  in.e_measured_J = esd.e_min();
  PlannerBranch branch;
  CHECK(PlanFcu(in, c, &branch) == doctest::Approx(5032.0));
  CHECK(branch == PlannerBranch::kFcuRamp);

  in.e_measured_J = esd.e_min() + 2000.0 / 0.95;
  CHECK(PlanFcu(in, c, &branch) == doctest::Approx(6000.0).epsilon(1e-12));
  CHECK(branch == PlannerBranch::kFcuEnergy);

  // Less than half a quantum of usable energy counts as exhausted.
  in.e_measured_J = esd.e_min() + 0.4 * esd.quantum_J();
  CHECK(PlanFcu(in, c) == doctest::Approx(5032.0));
}

TEST_CASE("utilization-driven budget never overdraws usable energy") {
  EsdParams esd;
  esd.capacity_J = 80000.0;
  const PolicyConstants c = Constants(esd);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> e(esd.e_min(), esd.capacity_J), p(4000.0, 12000.0);
  for (int i = 0; i < 1000; ++i) {
    PlannerInputs in;
    in.p_fc_W = p(rng);
    in.e_measured_J = e(rng);
    const double budget = PlanFcu(in, c);
    if (in.e_measured_J - c.e_min_J >= 0.5 * c.quantum_J) {
      const double draw = (budget - in.p_fc_W) * c.t_capping_s / c.eta;
      CHECK(draw <= in.e_measured_J - c.e_min_J + 1e-6);
    }
  }
}

TEST_CASE("model-driven planner") {
  Rig rig(100000.0);
  SUBCASE("exhausted storage still gets the ramp budget and stays safe") {
    const PlannerInputs in = rig.Inputs(7000.0, rig.esd.e_min(), 0.9);
    const double b = PlanFca(in, rig.ctx);
    CHECK(b >= FcuRampBudget(in, rig.ctx.constants) - 1e-9);
    const auto e = rig.model.Predict(in.plant, std::vector<double>{b});
    CHECK(e[0] >= rig.esd.e_min() - 1e-6);
  }
  SUBCASE("ample storage imposes no cap on small demand") {
    const PlannerInputs in = rig.Inputs(6000.0, rig.esd.capacity_J, 0.3);
    const double demand = Sum(in.server_power_W);
    CHECK(PlanFca(in, rig.ctx) >= demand);
  }
  SUBCASE("never below the utilization-driven planner within the rack limit") {
    for (double energy : {20000.0, 25000.0, 40000.0, 70000.0, 100000.0}) {
      const PlannerInputs in = rig.Inputs(8000.0, energy, 0.8);
      const double fcu = std::min(PlanFcu(in, rig.ctx.constants), rig.ctx.constants.rack_max_W);
      CHECK(PlanFca(in, rig.ctx) >= fcu - rig.ctx.fca_resolution_W);
    }
  }
}

TEST_CASE("centralized assigner examples") {
  ServerModel s;
  s.p_peak_W = 1000.0;
  PlannerInputs in;
  in.intensity = {0.75, 0.25};
  auto out = AssignCentralized(1000.0, in, s, false);
  CHECK(out[0] == doctest::Approx(700.0));
  CHECK(out[1] == doctest::Approx(300.0));

  in.intensity = {0.5, 0.5};
  out = AssignCentralized(900.0, in, s, false);
  CHECK(out[0] == out[1]);

  // Every demand met: (150, 250) plus 100 W of headroom split 1:3.
  s.p_peak_W = 300.0;
  in.intensity = {0.25, 0.75};
  out = AssignCentralized(500.0, in, s, false);
  CHECK(out[0] == doctest::Approx(175.0));
  CHECK(out[1] == doctest::Approx(325.0));

  CHECK_THROWS_AS(AssignCentralized(150.0, in, s, false), Error);
  CHECK_THROWS_AS(AssignCentralized(500.0, in, s, true), Error);
}

TEST_CASE("decentralized assigner examples") {
  ServerModel s;
  PlannerInputs in;
  in.server_power_W = {300.0, 500.0};
  auto out = AssignDecentralized(700.0, in, s);
  CHECK(out[0] == doctest::Approx(100.0 + 500.0 * 200.0 / 600.0));
  CHECK(out[1] == doctest::Approx(100.0 + 500.0 * 400.0 / 600.0));

  in.server_power_W = {250.0, 250.0, 250.0};
  out = AssignDecentralized(600.0, in, s);
  CHECK(out[0] == out[1]);
  CHECK(out[1] == out[2]);

  bool equal = false;
  in.server_power_W = {100.0, 100.0};
  out = AssignDecentralized(500.0, in, s, &equal);
  CHECK(equal);
  CHECK(out[0] == doctest::Approx(250.0));
}

TEST_CASE("assigners preserve the rack budget") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const ServerModel s;
  for (int i = 0; i < 500; ++i) {
    const int n = 1 + static_cast<int>(rng() % 60);
    PlannerInputs in;
    for (int k = 0; k < n; ++k) {
      in.intensity.push_back(u(rng));
      in.server_power_W.push_back(DemandedPower(s, in.intensity.back()));
    }
    const double budget = n * s.p_idle_W + u(rng) * n * (s.p_peak_W - s.p_idle_W) * 1.2;
    const auto c = AssignCentralized(budget, in, s, false);
    const auto d = AssignDecentralized(budget, in, s);
    CHECK(std::abs(Sum(c) - budget) <= 1e-6 * budget);
    CHECK(std::abs(Sum(d) - budget) <= 1e-9 * budget);
    for (double b : c) CHECK(b >= s.p_idle_W - 1e-9);
    for (double b : d) CHECK(b >= s.p_idle_W - 1e-9);
  }
}

TEST_CASE("run_policy dispatch") {
  Rig rig(100000.0);
  PlannerInputs in = rig.Inputs(7000.0, 40000.0, 0.7, 8);
  rig.ctx.constants.rack_max_W = 8 * rig.ctx.server.p_peak_W;
  const PolicyDecision d = RunPolicy(PolicyKind::kDFcuWu, in, rig.ctx);
  const PolicyDecision c = RunPolicy(PolicyKind::kCFcuWu, in, rig.ctx);
  CHECK(d.rack_budget_W == c.rack_budget_W);
  CHECK(d.messages == 8);
  CHECK(c.messages == 9);
  CHECK(RunPolicy(PolicyKind::kDFcaWu, in, rig.ctx).messages == 8);
  CHECK(RunPolicy(PolicyKind::kCFcaWu, in, rig.ctx).messages == 9);
  CHECK_THROWS_AS(RunPolicy(PolicyKind::kCFcaWa, in, rig.ctx), Error);
  for (const PolicyDecision& x : {d, c}) {
    CHECK(std::abs(Sum(x.server_budget_W) - x.rack_budget_W) <= 1e-6 * x.rack_budget_W);
  }
}

TEST_CASE("workload-aware planner") {
  Rig rig(100000.0);
  SUBCASE("flat future with ample storage is uncapped") {
    PlannerInputs in = rig.Inputs(6000.0, rig.esd.capacity_J, 0.5, 45);
    in.future_intensity.assign(30, std::vector<double>(45, 0.5));
    const auto plan = PlanFcaWa(in, rig.ctx);
    REQUIRE(plan.has_value());
    CHECK(plan->uncapped);
    for (double b : plan->budgets_W) CHECK(b == doctest::Approx(Sum(in.server_power_W)).epsilon(1e-12));
    const PolicyDecision d = RunPolicy(PolicyKind::kCFcaWa, in, rig.ctx);
    CHECK(d.branch == PlannerBranch::kWaUncapped);
    CHECK(d.messages == 46);
  }
  SUBCASE("a coming spike stays above the fuel cell ramp floor and inside the floor") {
    PlannerInputs in = rig.Inputs(6000.0, 30000.0, 0.45, 45);
    for (int k = 0; k < 30; ++k) in.future_intensity.push_back(std::vector<double>(45, k < 10 ? 0.45 : 0.95));
    const auto plan = PlanFcaWa(in, rig.ctx);
    REQUIRE(plan.has_value());
    for (size_t k = 0; k < plan->budgets_W.size(); ++k) {
      const double demand = 45 * DemandedPower(rig.ctx.server, in.future_intensity[k][0]);
      const double ramp = in.p_fc_W + (k + 1) * 32.0;
      CHECK(plan->budgets_W[k] >= std::min(demand, ramp) - 1e-9);
    }
    const auto e = rig.model.Predict(in.plant, plan->budgets_W);
    for (double x : e) CHECK(x >= rig.esd.e_min() - 1e-6);
  }
}
