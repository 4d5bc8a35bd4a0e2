#include "fcsize/plant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fcsize/error.hpp"

namespace fcsize {

Plant::Plant(const FuelCellParams& fc_params, const EsdParams& esd_params, double dt_s,
             PlantOptions options)
    : fc_(fc_params, dt_s), esd_(esd_params), options_(options) {
  esd_.Validate();
}

PlantState Plant::Initial(double demand_W, double energy_J) const {
  PlantState s;
  s.fc = SteadyState(fc_.params(), demand_W);
  s.esd.energy_J = std::clamp(energy_J, esd_.e_min(), esd_.capacity_J);
  s.last_rack_power_W = demand_W;
  return s;
}

PlantState Plant::InitialFull(double demand_W) const {
  return Initial(demand_W, esd_.capacity_J);
}

PlantState Plant::Step(const PlantState& state, double demanded_rack_W,
                       bool recharge_allowed) const {
  if (!(demanded_rack_W >= 0.0) || !std::isfinite(demanded_rack_W)) {
    Fail(ErrorCode::kInvalidArgument, "plant: demanded rack power must be finite and >= 0");
  }
  const double dt = fc_.dt();
  const double tol = options_.gap_tolerance_W;
  PlantState next = state;
  next.t_s = state.t_s + dt;
  next.last_rack_power_W = demanded_rack_W;
  next.esd_delivered_W = 0.0;
  next.recharge_drawn_W = 0.0;
  next.shortfall_W = 0.0;

  const bool wants_recharge = recharge_allowed && esd_.recharge_draw_W > 0.0 &&
                              state.esd.energy_J < esd_.capacity_J && state.gap_W <= tol;
  const double fc_load = demanded_rack_W + (wants_recharge ? esd_.recharge_draw_W : 0.0);
  next.fc = fc_.Step(state.fc, fc_load);

  const double gap = demanded_rack_W - next.fc.p_fc;
  if (gap > tol) {
    next.gap_W = gap;
    next.esd_delivered_W = Discharge(next.esd, esd_, gap, dt);
    next.shortfall_W = gap - next.esd_delivered_W;
  } else {
    next.gap_W = 0.0;
    if (wants_recharge) {
      next.recharge_drawn_W =
          Recharge(next.esd, esd_, true, dt, std::max(0.0, next.fc.p_fc - demanded_rack_W));
    } else {
      next.esd.charging = false;
    }
  }
  return next;
}

PlantState PlantStep(const PlantState& state, const FuelCellParams& fc_params,
                     const EsdParams& esd_params, double demanded_rack_W, double dt_s) {
  return Plant(fc_params, esd_params, dt_s).Step(state, demanded_rack_W);
}

EsdEnergyModel::EsdEnergyModel(const Plant& plant, int steps_per_period)
    : plant_(plant), steps_per_period_(steps_per_period) {
  if (steps_per_period < 1) Fail(ErrorCode::kInvalidArgument, "model: steps_per_period must be >= 1");
}

PlantState EsdEnergyModel::MeasuredStart(const PlantState& actual) const {
  PlantState start = actual;
  start.esd.energy_J = std::max(MeasuredEnergy(actual.esd, plant_.esd()), plant_.esd().e_min());
  return start;
}

PlantState EsdEnergyModel::AdvancePeriod(const PlantState& state, double budget_W,
                                         double* deficit_J) const {
  const double dt = plant_.dt();
  const double eta = plant_.esd().eta;
  PlantState s = state;
  for (int n = 0; n < steps_per_period_; ++n) {
    s = plant_.Step(s, budget_W, false);
    if (s.shortfall_W > 0.0) *deficit_J += s.shortfall_W * dt / eta;
  }
  return s;
}

std::vector<double> EsdEnergyModel::Predict(const PlantState& start,
                                            std::span<const double> rack_budgets_W) const {
  if (rack_budgets_W.empty()) Fail(ErrorCode::kInvalidArgument, "model: budget sequence is empty");
  std::vector<double> out;
  out.reserve(rack_budgets_W.size());
  PlantState s = MeasuredStart(start);
  double deficit = 0.0;
  for (double budget : rack_budgets_W) {
    s = AdvancePeriod(s, budget, &deficit);
    out.push_back(s.esd.energy_J - deficit);
  }
  return out;
}

std::vector<double> EsdEnergyModelPredict(const FuelCellParams& fc_params,
                                          const EsdParams& esd_params,
                                          const PlantState& start,
                                          std::span<const double> rack_budgets_W,
                                          double dt_s, double t_capping_s) {
  const Plant plant(fc_params, esd_params, dt_s);
  const int steps = static_cast<int>(std::lround(t_capping_s / dt_s));
  return EsdEnergyModel(plant, steps).Predict(start, rack_budgets_W);
}

UncappedRun RunUncapped(const Plant& plant, std::span<const double> demand_W) {
  if (demand_W.empty()) Fail(ErrorCode::kInvalidArgument, "uncapped run: trace is empty");
  UncappedRun run;
  PlantState s = plant.InitialFull(demand_W.front());
  const double e_min = plant.esd().e_min();
  run.min_energy_margin_J = s.esd.energy_J - e_min;
  for (double demand : demand_W) {
    s = plant.Step(s, demand);
    if (s.shortfall_W > 0.0) ++run.shortfall_steps;
    run.min_energy_margin_J = std::min(run.min_energy_margin_J, s.esd.energy_J - e_min);
  }
  run.total_steps = static_cast<long>(demand_W.size());
  run.unavailable_fraction =
      static_cast<double>(run.shortfall_steps) / static_cast<double>(run.total_steps);
  run.final_state = s;
  return run;
}

std::vector<AvailabilityPoint> AvailabilitySweep(std::span<const double> demand_W,
                                                 const FuelCellParams& fc_params,
                                                 const EsdParams& esd_base,
                                                 std::span<const double> capacities_J,
                                                 double dt_s) {
  if (capacities_J.empty()) Fail(ErrorCode::kInvalidArgument, "availability: capacity list is empty");
  if (demand_W.empty()) Fail(ErrorCode::kInvalidArgument, "availability: trace is empty");
  std::vector<AvailabilityPoint> out;
  for (double capacity : capacities_J) {
    EsdParams esd = esd_base;
    esd.capacity_J = capacity;
    const Plant plant(fc_params, esd, dt_s);
    out.push_back({capacity, RunUncapped(plant, demand_W).unavailable_fraction});
  }
  return out;
}

double MinEsdForTrace(std::span<const double> demand_W, const FuelCellParams& fc_params,
                      const EsdParams& esd_base, double dt_s, MinEsdOptions options) {
  if (demand_W.empty()) Fail(ErrorCode::kInvalidArgument, "min-esd: trace is empty");
  auto feasible = [&](double capacity) {
    EsdParams esd = esd_base;
    esd.capacity_J = capacity;
    const Plant plant(fc_params, esd, dt_s);
    const UncappedRun run = RunUncapped(plant, demand_W);
    return run.shortfall_steps == 0 &&
           run.min_energy_margin_J >= options.reserve_quanta * esd.quantum_J();
  };
  if (feasible(0.0)) return 0.0;
  double lo = 0.0;
  double hi = std::max(options.resolution_J, 1000.0);
  while (!feasible(hi)) {
    lo = hi;
    if (hi >= options.max_capacity_J) return std::numeric_limits<double>::infinity();
    hi = std::min(hi * 2.0, options.max_capacity_J);
  }
  while (hi - lo > options.resolution_J) {
    const double mid = 0.5 * (lo + hi);
    if (feasible(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace fcsize
