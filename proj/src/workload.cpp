#include "fcsize/workload.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fcsize/error.hpp"

namespace fcsize {

void ServerModel::Validate() const {
  if (!(p_idle_W >= 0.0) || !(p_peak_W > p_idle_W)) {
    Fail(ErrorCode::kInvalidArgument, "server: need 0 <= p_idle_W < p_peak_W");
  }
  if (!(latency_base_ms > 0.0) || !(latency_timeout_ms > latency_base_ms)) {
    Fail(ErrorCode::kInvalidArgument, "server: need 0 < latency_base_ms < latency_timeout_ms");
  }
  if (!(success_steepness > 0.0)) {
    Fail(ErrorCode::kInvalidArgument, "server: success_steepness must be > 0");
  }
}

void RackLoad::Validate() const {
  if (n_servers < 1) Fail(ErrorCode::kInvalidArgument, "rack: n_servers must be >= 1");
  if (!(update_period_s > 0.0)) Fail(ErrorCode::kInvalidArgument, "rack: update_period_s must be > 0");
  if (!(heterogeneity_std >= 0.0)) {
    Fail(ErrorCode::kInvalidArgument, "rack: heterogeneity_std must be >= 0");
  }
}

double DemandedPower(const ServerModel& server, double intensity) {
  constexpr double kSlack = 1e-9;
  if (!(intensity >= -kSlack && intensity <= 1.0 + kSlack)) {
    Fail(ErrorCode::kInvalidArgument, "workload: intensity must lie in [0, 1]");
  }
  const double lambda = std::clamp(intensity, 0.0, 1.0);
  return server.p_idle_W + lambda * (server.p_peak_W - server.p_idle_W);
}

double RackMeanIntensity(const ServerModel& server, int n_servers, double rack_demand_W) {
  const double per_server = rack_demand_W / n_servers;
  return std::clamp((per_server - server.p_idle_W) / (server.p_peak_W - server.p_idle_W), 0.0, 1.0);
}

Utility EvaluateUtility(const ServerModel& server, double budget_W, double intensity) {
  Utility u;
  const double demand = DemandedPower(server, intensity);
  if (budget_W >= demand) {
    u.latency_ms = server.latency_base_ms;
    return u;
  }
  if (budget_W < server.p_idle_W) {
    u.offline = true;
    u.success_rate = 0.0;
    u.latency_ms = server.latency_timeout_ms;
    return u;
  }
  const double f = (budget_W - server.p_idle_W) / (demand - server.p_idle_W);
  const double fc = server.collapse_fraction();
  if (f <= fc) {
    u.success_rate = 0.0;
    u.latency_ms = server.latency_timeout_ms;
    return u;
  }
  u.success_rate = 1.0 - std::pow((1.0 - f) / (1.0 - fc), server.success_steepness);
  u.latency_ms = std::min(server.latency_timeout_ms, server.latency_base_ms / f);
  return u;
}

void BalancedIntensities(double mean_intensity, std::span<const double> factors,
                         std::span<double> out) {
  const std::size_t n = factors.size();
  const double mean = std::clamp(mean_intensity, 0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::clamp(mean * factors[i], 0.0, 1.0);
  const double target = mean * static_cast<double>(n);
  for (std::size_t iter = 0; iter <= n; ++iter) {
    const double sum = std::accumulate(out.begin(), out.begin() + n, 0.0);
    const double diff = target - sum;
    if (std::abs(diff) <= 1e-12 * std::max(1.0, target)) return;
    // Scale the entries that can still move in the needed direction.
    double free_sum = 0.0;
    double free_room = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (diff > 0.0 && out[i] < 1.0) {
        free_sum += out[i];
        free_room += 1.0 - out[i];
      } else if (diff < 0.0 && out[i] > 0.0) {
        free_sum += out[i];
      }
    }
    if (diff > 0.0) {
      if (free_room <= 0.0) return;
      if (free_sum > 0.0) {
        const double scale = (free_sum + diff) / free_sum;
        for (std::size_t i = 0; i < n; ++i) {
          if (out[i] < 1.0) out[i] = std::min(1.0, out[i] * scale);
        }
      } else {
        for (std::size_t i = 0; i < n; ++i) {
          if (out[i] < 1.0) out[i] = std::min(1.0, out[i] + diff * (1.0 - out[i]) / free_room);
        }
      }
    } else {
      if (free_sum <= 0.0) return;
      const double scale = (free_sum + diff) / free_sum;
      for (std::size_t i = 0; i < n; ++i) out[i] = std::max(0.0, out[i] * scale);
    }
  }
}

HeterogeneityModel::HeterogeneityModel(const RackLoad& rack, double duration_s, std::uint64_t seed)
    : rack_(rack) {
  rack_.Validate();
  if (!(duration_s >= 0.0)) Fail(ErrorCode::kInvalidArgument, "heterogeneity: duration must be >= 0");
  const auto epochs = static_cast<std::size_t>(std::floor(duration_s / rack.update_period_s)) + 1;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(1.0, rack.heterogeneity_std);
  const auto n = static_cast<std::size_t>(rack.n_servers);
  factors_.assign(epochs, std::vector<double>(n, 1.0));
  if (rack.heterogeneity_std == 0.0) return;
  for (auto& epoch : factors_) {
    for (auto& z : epoch) z = std::max(0.0, normal(rng));
    const double mean = std::accumulate(epoch.begin(), epoch.end(), 0.0) / static_cast<double>(n);
    if (mean > 0.0) {
      for (auto& z : epoch) z /= mean;
    } else {
      std::fill(epoch.begin(), epoch.end(), 1.0);
    }
  }
}

std::size_t HeterogeneityModel::EpochAt(double t_s) const {
  if (t_s <= 0.0) return 0;
  // Small slack so a boundary reached by accumulated steps maps consistently.
  const auto e = static_cast<std::size_t>(std::floor(t_s / rack_.update_period_s + 1e-9));
  return std::min(e, factors_.size() - 1);
}

void HeterogeneityModel::Intensities(double mean_intensity, double t_s, std::span<double> out) const {
  IntensitiesForEpoch(mean_intensity, EpochAt(t_s), out);
}

void HeterogeneityModel::IntensitiesForEpoch(double mean_intensity, std::size_t epoch,
                                             std::span<double> out) const {
  if (out.size() != static_cast<std::size_t>(rack_.n_servers)) {
    Fail(ErrorCode::kInvalidArgument, "heterogeneity: output size must equal n_servers");
  }
  BalancedIntensities(mean_intensity, factors_[std::min(epoch, factors_.size() - 1)], out);
}

std::vector<std::vector<double>> GenHeterogeneity(const RackLoad& rack,
                                                  std::span<const double> mean_intensity,
                                                  double dt_s, std::uint64_t seed) {
  if (!(dt_s > 0.0)) Fail(ErrorCode::kInvalidArgument, "heterogeneity: dt must be > 0");
  const double duration = mean_intensity.empty() ? 0.0 : dt_s * (mean_intensity.size() - 1);
  const HeterogeneityModel model(rack, duration, seed);
  std::vector<std::vector<double>> out(mean_intensity.size(),
                                       std::vector<double>(static_cast<std::size_t>(rack.n_servers)));
  for (std::size_t k = 0; k < mean_intensity.size(); ++k) {
    model.Intensities(mean_intensity[k], dt_s * static_cast<double>(k), out[k]);
  }
  return out;
}

MetricsAccumulator::MetricsAccumulator(double timeout_ms, double resolution_ms)
    : timeout_ms_(timeout_ms), resolution_ms_(resolution_ms) {
  if (!(timeout_ms > 0.0) || !(resolution_ms > 0.0)) {
    Fail(ErrorCode::kInvalidArgument, "metrics: timeout and resolution must be > 0");
  }
  const auto bins = static_cast<std::size_t>(std::ceil(timeout_ms / resolution_ms)) + 1;
  bin_weight_.assign(bins, 0.0);
  bin_latency_sum_.assign(bins, 0.0);
}

void MetricsAccumulator::AddLatency(double weight, double latency_ms) {
  const double clamped = std::clamp(latency_ms, 0.0, timeout_ms_);
  const auto bin = std::min(static_cast<std::size_t>(clamped / resolution_ms_), bin_weight_.size() - 1);
  bin_weight_[bin] += weight;
  bin_latency_sum_[bin] += weight * clamped;
  latency_sum_ += weight * clamped;
}

void MetricsAccumulator::Add(double requests, double success_rate, double latency_ms) {
  if (!(requests > 0.0)) return;
  const double s = std::clamp(success_rate, 0.0, 1.0);
  total_ += requests;
  succeeded_ += requests * s;
  if (s > 0.0) AddLatency(requests * s, latency_ms);
  if (s < 1.0) AddLatency(requests * (1.0 - s), timeout_ms_);
}

void MetricsAccumulator::Merge(const MetricsAccumulator& other) {
  if (other.bin_weight_.size() != bin_weight_.size() || other.resolution_ms_ != resolution_ms_) {
    Fail(ErrorCode::kInvalidArgument, "metrics: cannot merge accumulators with different binning");
  }
  total_ += other.total_;
  succeeded_ += other.succeeded_;
  latency_sum_ += other.latency_sum_;
  for (std::size_t i = 0; i < bin_weight_.size(); ++i) {
    bin_weight_[i] += other.bin_weight_[i];
    bin_latency_sum_[i] += other.bin_latency_sum_[i];
  }
}

RackMetrics MetricsAccumulator::Finalize(double quantile) const {
  if (!(total_ > 0.0)) {
    Fail(ErrorCode::kUndefinedMetrics, "metrics: no requests were recorded");
  }
  RackMetrics m;
  m.total_requests = total_;
  m.success_rate = succeeded_ / total_;
  m.avg_latency_ms = latency_sum_ / total_;
  const double target = quantile * total_;
  double cum = 0.0;
  for (std::size_t i = 0; i < bin_weight_.size(); ++i) {
    if (bin_weight_[i] <= 0.0) continue;
    cum += bin_weight_[i];
    if (cum >= target * (1.0 - 1e-12)) {
      m.p95_latency_ms = bin_latency_sum_[i] / bin_weight_[i];
      return m;
    }
  }
  m.p95_latency_ms = timeout_ms_;
  return m;
}

}  // namespace fcsize
