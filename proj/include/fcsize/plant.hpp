#pragma once

#include <span>
#include <vector>

#include "fcsize/esd.hpp"
#include "fcsize/fuelcell.hpp"

namespace fcsize {

struct PlantState {
  FuelCellState fc;
  EsdState esd;
  double t_s = 0.0;
  double last_rack_power_W = 0.0;
  // Demand minus fuel cell output before the ESD acts (0 when matched).
  double gap_W = 0.0;
  double esd_delivered_W = 0.0;
  double recharge_drawn_W = 0.0;
  double shortfall_W = 0.0;
};

struct PlantOptions {
  // Gaps at or below this are absorbed by the bus; they stem from the
  // controller using the previous step's voltage.
  double gap_tolerance_W = 1.0;
};

// Fuel cell + ESD + rack wiring advanced in fixed steps. The fuel cell senses
// the served rack load plus the recharge draw whenever the ESD is charging.
class Plant {
 public:
  Plant(const FuelCellParams& fc_params, const EsdParams& esd_params, double dt_s,
        PlantOptions options = {});

  // Fuel cell at steady state for demand_W, ESD at energy_J.
  PlantState Initial(double demand_W, double energy_J) const;
  PlantState InitialFull(double demand_W) const;

  // recharge_allowed is false while any server is capped.
  PlantState Step(const PlantState& state, double demanded_rack_W,
                  bool recharge_allowed = true) const;

  const FuelCellStepper& fuel_cell() const { return fc_; }
  const EsdParams& esd() const { return esd_; }
  double dt() const { return fc_.dt(); }
  const PlantOptions& options() const { return options_; }

 private:
  FuelCellStepper fc_;
  EsdParams esd_;
  PlantOptions options_;
};

PlantState PlantStep(const PlantState& state, const FuelCellParams& fc_params,
                     const EsdParams& esd_params, double demanded_rack_W, double dt_s);

// Rolls the plant forward under constant per-period rack budgets, starting
// from the measured (quantized) ESD energy. Shortfalls the real plant would
// leave unmet are charged against the prediction, so entries below e_min mark
// a violated floor.
class EsdEnergyModel {
 public:
  EsdEnergyModel(const Plant& plant, int steps_per_period);

  std::vector<double> Predict(const PlantState& start,
                              std::span<const double> rack_budgets_W) const;

  // One period from `state` (whose energy is already the starting point);
  // returns the end state and adds unmet energy to *deficit_J.
  PlantState AdvancePeriod(const PlantState& state, double budget_W, double* deficit_J) const;

  // Start state for a prediction: same plant state, measured energy.
  PlantState MeasuredStart(const PlantState& actual) const;

  const Plant& plant() const { return plant_; }
  int steps_per_period() const { return steps_per_period_; }

 private:
  const Plant& plant_;
  int steps_per_period_;
};

std::vector<double> EsdEnergyModelPredict(const FuelCellParams& fc_params,
                                          const EsdParams& esd_params,
                                          const PlantState& start,
                                          std::span<const double> rack_budgets_W,
                                          double dt_s, double t_capping_s);

struct UncappedRun {
  double unavailable_fraction = 0.0;
  long shortfall_steps = 0;
  long total_steps = 0;
  double min_energy_margin_J = 0.0;
  PlantState final_state;
};

// Uncapped simulation over a demand series sampled every dt.
UncappedRun RunUncapped(const Plant& plant, std::span<const double> demand_W);

struct AvailabilityPoint {
  double capacity_J = 0.0;
  double unavailable_fraction = 0.0;
};

std::vector<AvailabilityPoint> AvailabilitySweep(std::span<const double> demand_W,
                                                 const FuelCellParams& fc_params,
                                                 const EsdParams& esd_base,
                                                 std::span<const double> capacities_J,
                                                 double dt_s);

struct MinEsdOptions {
  double resolution_J = 100.0;
  double max_capacity_J = 1.0e8;
  // Extra measurement quanta that must stay untouched above e_min.
  double reserve_quanta = 0.0;
};

// Smallest capacity (bisection) with zero shortfall over the series; +inf when
// even max_capacity_J fails.
double MinEsdForTrace(std::span<const double> demand_W, const FuelCellParams& fc_params,
                      const EsdParams& esd_base, double dt_s, MinEsdOptions options = {});

}  // namespace fcsize
