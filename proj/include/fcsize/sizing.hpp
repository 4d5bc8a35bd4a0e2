#pragma once

#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "fcsize/simulation.hpp"

namespace fcsize {

// Allowed degradation relative to the fully provisioned run of the same
// policy, or absolute SLA bounds when absolute is set.
struct SlaMargins {
  double success_rate_margin = 0.001;
  double avg_latency_margin = 0.03;
  double p95_latency_margin = 0.10;
  bool absolute = false;
  double min_success_rate = 0.0;
  double max_avg_latency_ms = std::numeric_limits<double>::infinity();
  double max_p95_latency_ms = std::numeric_limits<double>::infinity();

  void Validate() const;
};

struct MarginCheck {
  bool feasible = true;
  double success_drop = 0.0;
  double avg_latency_increase = 0.0;
  double p95_latency_increase = 0.0;
};

MarginCheck CheckMargins(const RackMetrics& point, const RackMetrics& baseline, const SlaMargins& sla);

struct SweepOptions {
  std::vector<double> fractions;
  // Worker threads; 0 uses the hardware concurrency.
  int threads = 0;
  MinEsdOptions baseline{100.0, 1.0e8, 1.0};
};

std::vector<double> DefaultCapacityFractions();

// Fully provisioned capacity: the uncapped minimum that also keeps one
// measurement quantum untouched above e_min, so capped policies never engage.
double BaselineCapacity(std::span<const double> demand_W, const FuelCellParams& fc,
                        const EsdParams& esd, double dt_s,
                        const MinEsdOptions& options = {100.0, 1.0e8, 1.0});

struct SweepPoint {
  PolicyKind policy = PolicyKind::kCFcaWu;
  double fraction = 1.0;
  double capacity_J = 0.0;
  SimReport report;
  MarginCheck check;
};

struct PolicySizing {
  PolicyKind policy = PolicyKind::kCFcaWu;
  SimReport baseline;
  // Smallest grid fraction from which every larger grid point is feasible.
  std::optional<double> min_fraction;
  double min_capacity_J = 0.0;
  // Feasible points that sit below an infeasible one.
  std::vector<double> monotonicity_violations;
};

struct SizingResult {
  double baseline_capacity_J = 0.0;
  std::vector<double> fractions;
  std::vector<SweepPoint> points;
  std::vector<PolicySizing> policies;
  PolicyKind chosen_policy = PolicyKind::kCFcaWu;
  double chosen_fraction = 1.0;
  double chosen_capacity_J = 0.0;
  bool no_reduction_possible = false;
};

SizingResult SweepSizing(std::span<const double> demand_W, const FuelCellParams& fc,
                         const EsdParams& esd_base, std::span<const PolicyKind> policies,
                         const SlaMargins& sla, const RunSettings& settings,
                         const SweepOptions& options = {});

}  // namespace fcsize
