#include <cmath>
#include <vector>

#include "doctest.h"

#include "fcsize/error.hpp"
#include "fcsize/simulation.hpp"
#include "fcsize/sizing.hpp"

using namespace fcsize;

namespace {

std::vector<double> Canonical() { return ResampleDemand(GenSurge(SurgeSpec{}, 0.1), 0.1); }

EsdParams Esd(double capacity) {
  EsdParams e;
  e.capacity_J = capacity;
  return e;
}

}  // namespace

TEST_CASE("fully provisioned storage never caps") {
  const FuelCellParams fc;
  const RunSettings settings;
  const std::vector<double> demand = Canonical();
  const double base = BaselineCapacity(demand, fc, EsdParams{}, settings.dt_s);
  const SimReport r = SimulateCapped(demand, fc, Esd(base), PolicyKind::kCFcaWu, settings);
  CHECK(r.capped_periods == 0);
  CHECK(r.shortfall_steps == 0);
  CHECK(r.metrics.success_rate == doctest::Approx(1.0));
  CHECK(r.metrics.avg_latency_ms == doctest::Approx(settings.server.latency_base_ms));
  // 9001 samples at 0.1 s: 450 full periods plus the final sample.
  CHECK(r.periods == 451);
  CHECK(r.messages == 451 * 46);
}

TEST_CASE("half capacity caps, stays above the floor and conserves energy") {
  const FuelCellParams fc;
  const RunSettings settings;
  const std::vector<double> demand = Canonical();
  const double base = BaselineCapacity(demand, fc, EsdParams{}, settings.dt_s);
  const EsdParams esd = Esd(0.5 * base);
  for (PolicyKind kind : {PolicyKind::kCFcuWu, PolicyKind::kCFcaWu}) {
    long steps = 0;
    double min_energy = 1e300;
    SimCallbacks cb;
    cb.on_step = [&](const StepRecord& s) {
      ++steps;
      min_energy = std::min(min_energy, s.esd_energy_J);
      CHECK(s.served_W <= s.demand_W + 1e-9);
    };
    const SimReport r = SimulateCapped(demand, fc, esd, kind, settings, &cb);
    CHECK(steps == r.steps);
    CHECK(r.capped_periods > 0);
    CHECK(r.metrics.success_rate < 1.0);
    CHECK(min_energy >= esd.e_min() - esd.quantum_J());
    CHECK(std::abs(r.energy.residual_J) <= 1e-6 * esd.capacity_J);
    REQUIRE(r.exhaustion_time_s.has_value());
    REQUIRE(r.post_exhaustion_ramp_W_per_s.has_value());
    CHECK(*r.post_exhaustion_ramp_W_per_s > 0.0);
  }
}

TEST_CASE("runs are deterministic for a seed") {
  const FuelCellParams fc;
  RunSettings settings;
  settings.seed = 42;
  const std::vector<double> demand = Canonical();
  const EsdParams esd = Esd(40000.0);
  const SimReport a = SimulateCapped(demand, fc, esd, PolicyKind::kDFcaWu, settings);
  const SimReport b = SimulateCapped(demand, fc, esd, PolicyKind::kDFcaWu, settings);
  CHECK(a.metrics.success_rate == b.metrics.success_rate);
  CHECK(a.metrics.p95_latency_ms == b.metrics.p95_latency_ms);
  CHECK(a.energy.esd_end_J == b.energy.esd_end_J);
  CHECK(a.capped_periods == b.capped_periods);
}

TEST_CASE("settings validation") {
  RunSettings s;
  s.t_capping_s = 0.25;
  CHECK_THROWS_AS(s.Validate(), Error);
  s = RunSettings{};
  s.dt_s = 0.0;
  CHECK_THROWS_AS(s.Validate(), Error);
  CHECK(ParseFutureEstimator("persistence") == FutureEstimator::kPersistence);
  CHECK_THROWS_AS(ParseFutureEstimator("oracle"), Error);
}

TEST_CASE("recorded intensities drive a run") {
  ServerIntensityTrace t;
  RunSettings settings;
  settings.rack.n_servers = 4;
  for (int k = 0; k <= 60; ++k) {
    t.t_s.push_back(k);
    const double x = k < 20 ? 0.2 : 0.9;
    t.intensity.push_back(std::vector<double>(4, x));
  }
  const RecordedIntensity source(t, settings.dt_s);
  CHECK(source.servers() == 4);
  std::vector<double> out(4);
  source.At(250, out);
  CHECK(out[0] == 0.9);
  settings.rack.heterogeneity_std = 0.0;
  const SimReport r = SimulateCapped(source, FuelCellParams{}, Esd(5000.0), PolicyKind::kCFcuWu, settings);
  CHECK(r.steps == static_cast<long>(source.steps()));
}
