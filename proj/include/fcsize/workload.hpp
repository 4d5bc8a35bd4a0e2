#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace fcsize {

// Per-server power and performance model. Success degrades with the served
// fraction f of dynamic power as 1 - ((1 - f) / (1 - f_c))^steepness, where
// f_c = latency_base_ms / latency_timeout_ms is the fraction at which every
// request times out; latency grows as base / f up to the timeout.
struct ServerModel {
  double p_idle_W = 100.0;
  double p_peak_W = 12500.0 / 45.0;
  double latency_base_ms = 20.0;
  double latency_timeout_ms = 190.0;
  double success_steepness = 4.0;

  double collapse_fraction() const { return latency_base_ms / latency_timeout_ms; }
  void Validate() const;
};

struct RackLoad {
  int n_servers = 45;
  double update_period_s = 180.0;
  double heterogeneity_std = 0.08;

  void Validate() const;
};

struct Utility {
  double success_rate = 1.0;
  double latency_ms = 0.0;
  bool offline = false;
};

double DemandedPower(const ServerModel& server, double intensity);

// Inverse of DemandedPower for a whole rack, clamped to [0, 1].
double RackMeanIntensity(const ServerModel& server, int n_servers, double rack_demand_W);

Utility EvaluateUtility(const ServerModel& server, double budget_W, double intensity);

// Per-server heterogeneity factors, redrawn every update period. Intensities
// are mean * factor clamped to [0, 1], then rebalanced so the rack mean stays
// equal to the requested mean.
class HeterogeneityModel {
 public:
  HeterogeneityModel(const RackLoad& rack, double duration_s, std::uint64_t seed);

  std::size_t EpochAt(double t_s) const;
  void Intensities(double mean_intensity, double t_s, std::span<double> out) const;
  void IntensitiesForEpoch(double mean_intensity, std::size_t epoch, std::span<double> out) const;

  const RackLoad& rack() const { return rack_; }
  std::size_t epochs() const { return factors_.size(); }

 private:
  RackLoad rack_;
  std::vector<std::vector<double>> factors_;
};

// Clamps mean * factor into [0, 1] and rebalances the free entries so their
// average equals mean (mean itself must lie in [0, 1]).
void BalancedIntensities(double mean_intensity, std::span<const double> factors,
                         std::span<double> out);

// Materialized per-server intensity series [step][server] for a mean series
// sampled every dt_s.
std::vector<std::vector<double>> GenHeterogeneity(const RackLoad& rack,
                                                  std::span<const double> mean_intensity,
                                                  double dt_s, std::uint64_t seed);

struct RackMetrics {
  double success_rate = 1.0;
  double avg_latency_ms = 0.0;
  double p95_latency_ms = 0.0;
  double total_requests = 0.0;
};

// Request-weighted aggregation. Failed requests count at the timeout in the
// latency distribution. Latencies are binned at resolution_ms; the reported
// percentile is the weighted mean of the bin that crosses the quantile, which
// is exact for degenerate distributions.
class MetricsAccumulator {
 public:
  explicit MetricsAccumulator(double timeout_ms, double resolution_ms = 0.01);

  void Add(double requests, double success_rate, double latency_ms);
  void Merge(const MetricsAccumulator& other);
  RackMetrics Finalize(double quantile = 0.95) const;

  double total_requests() const { return total_; }

 private:
  void AddLatency(double weight, double latency_ms);

  double timeout_ms_;
  double resolution_ms_;
  double total_ = 0.0;
  double succeeded_ = 0.0;
  double latency_sum_ = 0.0;
  std::vector<double> bin_weight_;
  std::vector<double> bin_latency_sum_;
};

}  // namespace fcsize
