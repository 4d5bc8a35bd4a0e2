#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"

#include "fcsize/error.hpp"
#include "fcsize/sizing.hpp"

using namespace fcsize;

TEST_CASE("margin checks are relative to the baseline") {
  RackMetrics base{0.999, 20.0, 20.0, 100.0};
  SlaMargins sla;
  RackMetrics p{0.9985, 20.5, 21.9, 100.0};
  MarginCheck c = CheckMargins(p, base, sla);
  CHECK(c.feasible);
  CHECK(c.success_drop == doctest::Approx(0.0005));
  CHECK(c.avg_latency_increase == doctest::Approx(0.025));
  p.p95_latency_ms = 22.1;
  CHECK_FALSE(CheckMargins(p, base, sla).feasible);
  p = {0.997, 20.0, 20.0, 100.0};
  CHECK_FALSE(CheckMargins(p, base, sla).feasible);

  sla.absolute = true;
  sla.min_success_rate = 0.99;
  sla.max_avg_latency_ms = 25.0;
  sla.max_p95_latency_ms = 40.0;
  CHECK(CheckMargins(p, base, sla).feasible);
  sla.min_success_rate = 0.998;
  CHECK_FALSE(CheckMargins(p, base, sla).feasible);

  SlaMargins bad;
  bad.avg_latency_margin = -0.1;
  CHECK_THROWS_AS(bad.Validate(), Error);
}

TEST_CASE("default grid") {
  const auto f = DefaultCapacityFractions();
  CHECK(f.size() == 20);
  CHECK(f.front() == doctest::Approx(0.05));
  CHECK(f.back() == 1.0);
}

TEST_CASE("flat trace needs no storage") {
  const std::vector<double> demand(3000, 6000.0);
  const FuelCellParams fc;
  RunSettings settings;
  const auto policies = AllPolicies();
  const SizingResult r = SweepSizing(demand, fc, EsdParams{}, policies, SlaMargins{}, settings);
  CHECK(r.baseline_capacity_J == 0.0);
  CHECK(r.chosen_capacity_J == 0.0);
  CHECK_FALSE(r.no_reduction_possible);
}

TEST_CASE("unbounded margins pick the smallest grid point") {
  const std::vector<double> demand = ResampleDemand(GenSurge(SurgeSpec{}, 0.1), 0.1);
  const FuelCellParams fc;
  RunSettings settings;
  SlaMargins sla;
  const double inf = std::numeric_limits<double>::infinity();
  sla.success_rate_margin = inf;
  sla.avg_latency_margin = inf;
  sla.p95_latency_margin = inf;
  SweepOptions opt;
  opt.fractions = {0.1, 0.5, 1.0};
  const std::vector<PolicyKind> policies = {PolicyKind::kCFcuWu, PolicyKind::kDFcuWu};
  const SizingResult r = SweepSizing(demand, fc, EsdParams{}, policies, sla, settings, opt);
  CHECK(r.chosen_fraction == doctest::Approx(0.1));
  // Tie on capacity goes to the simpler policy.
  CHECK(r.chosen_policy == PolicyKind::kDFcuWu);
  for (const auto& p : r.policies) {
    REQUIRE(p.min_fraction.has_value());
    CHECK(*p.min_fraction == doctest::Approx(0.1));
  }
  CHECK(r.points.size() == 6);
}

TEST_CASE("grid-minimal point under the default margins") {
  const std::vector<double> demand = ResampleDemand(GenSurge(SurgeSpec{}, 0.1), 0.1);
  const FuelCellParams fc;
  RunSettings settings;
  SweepOptions opt;
  opt.fractions = {0.1, 0.3, 0.5, 0.7, 1.0};
  const std::vector<PolicyKind> policies = {PolicyKind::kCFcaWu};
  const SizingResult r = SweepSizing(demand, fc, EsdParams{}, policies, SlaMargins{}, settings, opt);
  const PolicySizing& p = r.policies.front();
  REQUIRE(p.min_fraction.has_value());
  bool seen = false;
  for (const auto& pt : r.points) {
    if (pt.fraction >= *p.min_fraction - 1e-12) CHECK(pt.check.feasible);
    if (pt.fraction < *p.min_fraction - 1e-12 && !pt.check.feasible) seen = true;
  }
  if (*p.min_fraction > opt.fractions.front()) CHECK(seen);
  CHECK(r.points.back().report.capped_periods == 0);
}
