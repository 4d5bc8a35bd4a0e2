#pragma once

#include <cstdint>
#include <limits>
#include <optional>

namespace fcsize {

// Supercapacitor energy store. A capacity of zero models a rack with no ESD.
struct EsdParams {
  double capacity_J = 0.0;
  double eta = 0.95;
  double e_min_fraction = 0.20;
  double recharge_draw_W = 1000.0;
  double measure_precision_fraction = 0.01;
  double max_discharge_W = std::numeric_limits<double>::infinity();
  double cycle_budget = 1.0e6;

  double e_min() const { return e_min_fraction * capacity_J; }
  double usable_J() const { return capacity_J - e_min(); }
  double quantum_J() const { return measure_precision_fraction * capacity_J; }

  void Validate() const;
};

struct EsdState {
  double energy_J = 0.0;
  // Energy removed from the store to cover delivery (delivered / eta).
  double discharged_total_J = 0.0;
  // Energy added to the store (eta * drawn).
  double charged_total_J = 0.0;
  std::uint64_t charge_events = 0;
  bool charging = false;
};

EsdState FullEsd(const EsdParams& params);

// Covers up to requested_W for dt seconds without crossing e_min.
double Discharge(EsdState& state, const EsdParams& params, double requested_W, double dt_s);

// Draws recharge_draw_W (never more than max_draw_W) while below capacity;
// the final step is prorated so the store lands exactly on capacity.
double Recharge(EsdState& state, const EsdParams& params, bool surplus_available,
                double dt_s,
                double max_draw_W = std::numeric_limits<double>::infinity());

// Energy as the controller sees it: rounded down to the measurement grid.
double MeasuredEnergy(const EsdState& state, const EsdParams& params);

// Cycle-budget lifetime extrapolated from one run; nullopt when the run never
// discharged (unbounded).
std::optional<double> LifetimeYears(const EsdState& state, const EsdParams& params,
                                    double sim_duration_s);

}  // namespace fcsize
