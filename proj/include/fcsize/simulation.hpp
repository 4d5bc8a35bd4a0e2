#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fcsize/policies.hpp"
#include "fcsize/trace.hpp"

namespace fcsize {

enum class FutureEstimator { kPerfect, kPersistence };
const char* FutureEstimatorName(FutureEstimator e);
FutureEstimator ParseFutureEstimator(const std::string& name);

struct RunSettings {
  double dt_s = 0.1;
  double t_capping_s = 2.0;
  std::uint64_t seed = 1;
  RackLoad rack;
  ServerModel server;
  PlantOptions plant;
  FutureEstimator estimator = FutureEstimator::kPerfect;
  WaOptions wa;
  double fca_resolution_W = 1.0;
  int planner_replicas = 0;

  int steps_per_period() const;
  void Validate() const;
};

// Per-server intensity at each simulation step.
class IntensitySource {
 public:
  virtual ~IntensitySource() = default;
  virtual std::size_t steps() const = 0;
  virtual std::size_t servers() const = 0;
  virtual void At(std::size_t step, std::span<double> out) const = 0;
};

// Rack demand series split across servers by the heterogeneity model.
class HeterogeneousIntensity : public IntensitySource {
 public:
  HeterogeneousIntensity(std::span<const double> demand_W, const RunSettings& settings);
  std::size_t steps() const override { return mean_.size(); }
  std::size_t servers() const override { return static_cast<std::size_t>(model_.rack().n_servers); }
  void At(std::size_t step, std::span<double> out) const override;

 private:
  std::vector<double> mean_;
  double dt_s_;
  HeterogeneityModel model_;
};

// Sampled per-server intensities held between samples.
class RecordedIntensity : public IntensitySource {
 public:
  RecordedIntensity(ServerIntensityTrace trace, double dt_s);
  std::size_t steps() const override { return steps_; }
  std::size_t servers() const override { return trace_.servers(); }
  void At(std::size_t step, std::span<double> out) const override;

 private:
  ServerIntensityTrace trace_;
  double dt_s_;
  std::size_t steps_;
};

struct StepRecord {
  double t_s = 0.0;
  double demand_W = 0.0;
  double p_fc_W = 0.0;
  double esd_delivered_W = 0.0;
  double esd_energy_J = 0.0;
  double shortfall_W = 0.0;
  double served_W = 0.0;
  double rack_budget_W = 0.0;
};

struct DecisionRecord {
  double t_s = 0.0;
  double rack_budget_W = 0.0;
  double min_server_budget_W = 0.0;
  double max_server_budget_W = 0.0;
  double measured_energy_J = 0.0;
  int messages = 0;
  PlannerBranch branch = PlannerBranch::kFcuEnergy;
};

struct SimCallbacks {
  std::function<void(const StepRecord&)> on_step;
  std::function<void(const DecisionRecord&)> on_decision;
};

struct EnergyLedger {
  double esd_start_J = 0.0;
  double esd_end_J = 0.0;
  double charged_J = 0.0;
  double discharged_J = 0.0;
  double delivered_J = 0.0;
  double recharge_drawn_J = 0.0;
  double fc_output_J = 0.0;
  double served_J = 0.0;
  double demanded_J = 0.0;
  double shortfall_J = 0.0;
  // (end - start) - (charged - discharged)
  double residual_J = 0.0;
};

struct SimReport {
  std::string policy;
  double capacity_J = 0.0;
  double duration_s = 0.0;
  long steps = 0;
  long periods = 0;
  long capped_periods = 0;
  long shortfall_steps = 0;
  double unavailable_fraction = 0.0;
  RackMetrics metrics;
  long messages = 0;
  long fallback_periods = 0;
  long degraded_periods = 0;
  long equal_split_periods = 0;
  EnergyLedger energy;
  double min_energy_margin_J = 0.0;
  std::uint64_t charge_events = 0;
  std::optional<double> lifetime_years;
  // First step whose measured usable energy rounds to zero, the first later
  // step without capping, and the mean fuel cell ramp in between.
  std::optional<double> exhaustion_time_s;
  std::optional<double> recovery_time_s;
  std::optional<double> post_exhaustion_ramp_W_per_s;
};

SimReport SimulateCapped(const IntensitySource& source, const FuelCellParams& fc,
                         const EsdParams& esd, PolicyKind kind, const RunSettings& settings,
                         const SimCallbacks* callbacks = nullptr);

// Demand series sampled every settings.dt_s.
SimReport SimulateCapped(std::span<const double> demand_W, const FuelCellParams& fc,
                         const EsdParams& esd, PolicyKind kind, const RunSettings& settings,
                         const SimCallbacks* callbacks = nullptr);

SimReport SimulateCapped(const PowerTrace& trace, const FuelCellParams& fc, const EsdParams& esd,
                         PolicyKind kind, const RunSettings& settings,
                         const SimCallbacks* callbacks = nullptr);

}  // namespace fcsize
