#include "fcsize/simulation.hpp"

#include <algorithm>
#include <cmath>

#include "fcsize/error.hpp"

namespace fcsize {

const char* FutureEstimatorName(FutureEstimator e) {
  return e == FutureEstimator::kPerfect ? "perfect" : "persistence";
}

FutureEstimator ParseFutureEstimator(const std::string& name) {
  if (name == "perfect") return FutureEstimator::kPerfect;
  if (name == "persistence") return FutureEstimator::kPersistence;
  Fail(ErrorCode::kInvalidArgument, "unknown future estimator '" + name + "' (perfect|persistence)");
}

int RunSettings::steps_per_period() const {
  return static_cast<int>(std::lround(t_capping_s / dt_s));
}

void RunSettings::Validate() const {
  if (!(dt_s > 0.0) || !std::isfinite(dt_s)) Fail(ErrorCode::kInvalidArgument, "settings: dt_s must be > 0");
  if (!(t_capping_s > 0.0)) Fail(ErrorCode::kInvalidArgument, "settings: t_capping_s must be > 0");
  const int spp = steps_per_period();
  if (spp < 1 || std::abs(spp * dt_s - t_capping_s) > 1e-9 * t_capping_s) {
    Fail(ErrorCode::kInvalidArgument, "settings: t_capping_s must be a whole multiple of dt_s");
  }
  if (wa.horizon < 1 || wa.levels < 2) {
    Fail(ErrorCode::kInvalidArgument, "settings: workload-aware horizon >= 1 and levels >= 2 required");
  }
  if (!(fca_resolution_W > 0.0)) Fail(ErrorCode::kInvalidArgument, "settings: fca_resolution_W must be > 0");
  rack.Validate();
  server.Validate();
}

HeterogeneousIntensity::HeterogeneousIntensity(std::span<const double> demand_W,
                                               const RunSettings& settings)
    : dt_s_(settings.dt_s),
      model_(settings.rack, settings.dt_s * static_cast<double>(demand_W.size()), settings.seed) {
  mean_.reserve(demand_W.size());
  for (double d : demand_W) mean_.push_back(RackMeanIntensity(settings.server, settings.rack.n_servers, d));
}

void HeterogeneousIntensity::At(std::size_t step, std::span<double> out) const {
  model_.Intensities(mean_[step], dt_s_ * static_cast<double>(step), out);
}

RecordedIntensity::RecordedIntensity(ServerIntensityTrace trace, double dt_s)
    : trace_(std::move(trace)), dt_s_(dt_s) {
  if (trace_.t_s.empty() || trace_.servers() == 0) {
    Fail(ErrorCode::kInvalidArgument, "intensity trace: no samples");
  }
  if (!(dt_s > 0.0)) Fail(ErrorCode::kInvalidArgument, "intensity trace: dt must be > 0");
  const double duration = trace_.t_s.back() - trace_.t_s.front();
  steps_ = static_cast<std::size_t>(std::floor(duration / dt_s + 1e-9)) + 1;
}

void RecordedIntensity::At(std::size_t step, std::span<double> out) const {
  const double t = trace_.t_s.front() + dt_s_ * static_cast<double>(step);
  auto it = std::upper_bound(trace_.t_s.begin(), trace_.t_s.end(), t + 1e-9);
  const auto k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - trace_.t_s.begin()) - 1));
  const auto& row = trace_.intensity[k];
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::clamp(row[i], 0.0, 1.0);
}

SimReport SimulateCapped(const IntensitySource& source, const FuelCellParams& fc,
                         const EsdParams& esd, PolicyKind kind, const RunSettings& settings,
                         const SimCallbacks* callbacks) {
  settings.Validate();
  fc.Validate();
  esd.Validate();
  const std::size_t steps = source.steps();
  const std::size_t n = source.servers();
  if (steps == 0) Fail(ErrorCode::kInvalidArgument, "simulation: trace is empty");
  if (n != static_cast<std::size_t>(settings.rack.n_servers)) {
    Fail(ErrorCode::kInvalidArgument, "simulation: intensity source server count differs from rack");
  }
  const ServerModel& server = settings.server;
  const double dt = settings.dt_s;
  const auto spp = static_cast<std::size_t>(settings.steps_per_period());
  const std::size_t periods = (steps + spp - 1) / spp;

  const Plant plant(fc, esd, dt, settings.plant);
  const EsdEnergyModel model(plant, static_cast<int>(spp));
  PolicyContext ctx;
  ctx.model = &model;
  ctx.server = server;
  ctx.constants.eta = esd.eta;
  ctx.constants.e_min_J = esd.e_min();
  ctx.constants.quantum_J = esd.quantum_J();
  ctx.constants.t_capping_s = settings.t_capping_s;
  ctx.constants.following_W_per_s = fc.load_following_W_per_s;
  ctx.constants.rack_max_W = static_cast<double>(n) * server.p_peak_W;
  ctx.wa = settings.wa;
  ctx.fca_resolution_W = settings.fca_resolution_W;
  ctx.planner_replicas = settings.planner_replicas;
  PowerCapper capper(kind, ctx);

  const bool aware = IsWorkloadAware(kind);
  std::vector<std::vector<double>> period_max;
  std::vector<double> lambda(n);
  if (aware && settings.estimator == FutureEstimator::kPerfect) {
    period_max.assign(periods, std::vector<double>(n, 0.0));
    for (std::size_t s = 0; s < steps; ++s) {
      source.At(s, lambda);
      auto& row = period_max[s / spp];
      for (std::size_t i = 0; i < n; ++i) row[i] = std::max(row[i], lambda[i]);
    }
  }

  std::vector<double> demand(n), served(n), budgets(n), server_power(n);
  source.At(0, lambda);
  double rack_demand = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    server_power[i] = DemandedPower(server, lambda[i]);
    rack_demand += server_power[i];
  }
  PlantState state = plant.InitialFull(rack_demand);

  SimReport report;
  report.policy = PolicyName(kind);
  report.capacity_J = esd.capacity_J;
  report.steps = static_cast<long>(steps);
  report.periods = static_cast<long>(periods);
  report.duration_s = dt * static_cast<double>(steps);
  report.energy.esd_start_J = state.esd.energy_J;
  report.min_energy_margin_J = state.esd.energy_J - esd.e_min();

  MetricsAccumulator metrics(server.latency_timeout_ms);
  PlannerInputs inputs;
  double rack_budget = 0.0;
  bool period_capped = false;
  double exhaustion_p_fc = 0.0;

  for (std::size_t s = 0; s < steps; ++s) {
    const double t = dt * static_cast<double>(s);
    source.At(s, lambda);
    if (s % spp == 0) {
      if (period_capped) ++report.capped_periods;
      period_capped = false;
      inputs.p_fc_W = state.fc.p_fc;
      inputs.e_measured_J = MeasuredEnergy(state.esd, esd);
      inputs.plant = state;
      inputs.server_power_W = server_power;
      inputs.intensity = lambda;
      inputs.future_intensity.clear();
      if (aware) {
        const std::size_t p = s / spp;
        for (int k = 0; k < settings.wa.horizon; ++k) {
          if (settings.estimator == FutureEstimator::kPerfect) {
            inputs.future_intensity.push_back(period_max[std::min(p + k, periods - 1)]);
          } else {
            inputs.future_intensity.push_back(lambda);
          }
        }
      }
      const PolicyDecision d = capper.Decide(inputs);
      budgets = d.server_budget_W;
      rack_budget = d.rack_budget_W;
      report.messages += d.messages;
      if (d.branch == PlannerBranch::kFcaFallback) ++report.fallback_periods;
      if (d.branch == PlannerBranch::kWaDegraded) ++report.degraded_periods;
      if (d.equal_split) ++report.equal_split_periods;
      if (callbacks && callbacks->on_decision) {
        DecisionRecord rec;
        rec.t_s = t;
        rec.rack_budget_W = d.rack_budget_W;
        rec.min_server_budget_W = *std::min_element(budgets.begin(), budgets.end());
        rec.max_server_budget_W = *std::max_element(budgets.begin(), budgets.end());
        rec.measured_energy_J = inputs.e_measured_J;
        rec.messages = d.messages;
        rec.branch = d.branch;
        callbacks->on_decision(rec);
      }
    }

    double rack_served = 0.0;
    rack_demand = 0.0;
    bool any_capped = false;
    for (std::size_t i = 0; i < n; ++i) {
      demand[i] = DemandedPower(server, lambda[i]);
      served[i] = std::min(demand[i], budgets[i]);
      if (demand[i] > budgets[i] + 1e-9) any_capped = true;
      rack_served += served[i];
      rack_demand += demand[i];
    }
    period_capped = period_capped || any_capped;
    state = plant.Step(state, rack_served, !any_capped);

    if (state.shortfall_W > 0.0) {
      ++report.shortfall_steps;
      for (std::size_t i = 0; i < n; ++i) metrics.Add(lambda[i] * dt, 0.0, server.latency_timeout_ms);
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        if (served[i] >= demand[i]) {
          metrics.Add(lambda[i] * dt, 1.0, server.latency_base_ms);
        } else {
          const Utility u = EvaluateUtility(server, budgets[i], lambda[i]);
          metrics.Add(lambda[i] * dt, u.success_rate, u.latency_ms);
        }
      }
    }
    server_power = served;

    EnergyLedger& e = report.energy;
    e.delivered_J += state.esd_delivered_W * dt;
    e.recharge_drawn_J += state.recharge_drawn_W * dt;
    e.fc_output_J += state.fc.p_fc * dt;
    e.served_J += rack_served * dt;
    e.demanded_J += rack_demand * dt;
    e.shortfall_J += state.shortfall_W * dt;
    report.min_energy_margin_J = std::min(report.min_energy_margin_J, state.esd.energy_J - esd.e_min());

    if (esd.capacity_J > 0.0) {
      const double t_next = t + dt;
      if (!report.exhaustion_time_s) {
        if (MeasuredEnergy(state.esd, esd) - esd.e_min() < 0.5 * esd.quantum_J()) {
          report.exhaustion_time_s = t_next;
          exhaustion_p_fc = state.fc.p_fc;
        }
      } else if (!report.recovery_time_s && !any_capped && t_next > *report.exhaustion_time_s) {
        report.recovery_time_s = t_next;
        const double span = t_next - *report.exhaustion_time_s;
        report.post_exhaustion_ramp_W_per_s = (state.fc.p_fc - exhaustion_p_fc) / span;
      }
    }

    if (callbacks && callbacks->on_step) {
      StepRecord rec;
      rec.t_s = t + dt;
      rec.demand_W = rack_demand;
      rec.p_fc_W = state.fc.p_fc;
      rec.esd_delivered_W = state.esd_delivered_W;
      rec.esd_energy_J = state.esd.energy_J;
      rec.shortfall_W = state.shortfall_W;
      rec.served_W = rack_served;
      rec.rack_budget_W = rack_budget;
      callbacks->on_step(rec);
    }
  }
  if (period_capped) ++report.capped_periods;

  EnergyLedger& e = report.energy;
  e.esd_end_J = state.esd.energy_J;
  e.charged_J = state.esd.charged_total_J;
  e.discharged_J = state.esd.discharged_total_J;
  e.residual_J = (e.esd_end_J - e.esd_start_J) - (e.charged_J - e.discharged_J);
  report.charge_events = state.esd.charge_events;
  report.lifetime_years = LifetimeYears(state.esd, esd, report.duration_s);
  report.unavailable_fraction =
      static_cast<double>(report.shortfall_steps) / static_cast<double>(report.steps);
  report.metrics = metrics.Finalize();
  return report;
}

SimReport SimulateCapped(std::span<const double> demand_W, const FuelCellParams& fc,
                         const EsdParams& esd, PolicyKind kind, const RunSettings& settings,
                         const SimCallbacks* callbacks) {
  settings.Validate();
  const HeterogeneousIntensity source(demand_W, settings);
  return SimulateCapped(source, fc, esd, kind, settings, callbacks);
}

SimReport SimulateCapped(const PowerTrace& trace, const FuelCellParams& fc, const EsdParams& esd,
                         PolicyKind kind, const RunSettings& settings,
                         const SimCallbacks* callbacks) {
  settings.Validate();
  trace.Validate();
  const std::vector<double> demand = ResampleDemand(trace, settings.dt_s);
  return SimulateCapped(std::span<const double>(demand), fc, esd, kind, settings, callbacks);
}

}  // namespace fcsize
