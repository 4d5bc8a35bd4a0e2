#include "fcsize/sizing.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "fcsize/error.hpp"

namespace fcsize {

void SlaMargins::Validate() const {
  if (!(success_rate_margin >= 0.0) || !(avg_latency_margin >= 0.0) || !(p95_latency_margin >= 0.0)) {
    Fail(ErrorCode::kInvalidArgument, "sla: margins must be >= 0");
  }
  if (absolute && !(min_success_rate >= 0.0 && min_success_rate <= 1.0)) {
    Fail(ErrorCode::kInvalidArgument, "sla: min_success_rate must lie in [0, 1]");
  }
}

MarginCheck CheckMargins(const RackMetrics& point, const RackMetrics& baseline, const SlaMargins& sla) {
  constexpr double kSlack = 1e-12;
  MarginCheck c;
  c.success_drop = baseline.success_rate - point.success_rate;
  c.avg_latency_increase = point.avg_latency_ms / baseline.avg_latency_ms - 1.0;
  c.p95_latency_increase = point.p95_latency_ms / baseline.p95_latency_ms - 1.0;
  if (sla.absolute) {
    c.feasible = point.success_rate >= sla.min_success_rate - kSlack &&
                 point.avg_latency_ms <= sla.max_avg_latency_ms + kSlack &&
                 point.p95_latency_ms <= sla.max_p95_latency_ms + kSlack;
  } else {
    c.feasible = c.success_drop <= sla.success_rate_margin + kSlack &&
                 c.avg_latency_increase <= sla.avg_latency_margin + kSlack &&
                 c.p95_latency_increase <= sla.p95_latency_margin + kSlack;
  }
  return c;
}

std::vector<double> DefaultCapacityFractions() {
  std::vector<double> out;
  for (int p = 5; p <= 100; p += 5) out.push_back(p / 100.0);
  return out;
}

double BaselineCapacity(std::span<const double> demand_W, const FuelCellParams& fc,
                        const EsdParams& esd, double dt_s, const MinEsdOptions& options) {
  return MinEsdForTrace(demand_W, fc, esd, dt_s, options);
}

namespace {

template <typename Fn>
void ParallelFor(std::size_t count, int threads, Fn&& fn) {
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                    : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

SizingResult SweepSizing(std::span<const double> demand_W, const FuelCellParams& fc,
                         const EsdParams& esd_base, std::span<const PolicyKind> policies,
                         const SlaMargins& sla, const RunSettings& settings,
                         const SweepOptions& options) {
  if (policies.empty()) Fail(ErrorCode::kInvalidArgument, "sizing: no policies selected");
  if (demand_W.empty()) Fail(ErrorCode::kInvalidArgument, "sizing: trace is empty");
  sla.Validate();
  settings.Validate();

  SizingResult result;
  result.fractions = options.fractions.empty() ? DefaultCapacityFractions() : options.fractions;
  for (double f : result.fractions) {
    if (!(f >= 0.0 && f <= 1.0)) Fail(ErrorCode::kInvalidArgument, "sizing: capacity fractions must lie in [0, 1]");
  }
  result.fractions.push_back(1.0);
  std::sort(result.fractions.begin(), result.fractions.end());
  result.fractions.erase(std::unique(result.fractions.begin(), result.fractions.end()),
                         result.fractions.end());

  result.baseline_capacity_J = BaselineCapacity(demand_W, fc, esd_base, settings.dt_s, options.baseline);
  if (!std::isfinite(result.baseline_capacity_J)) {
    Fail(ErrorCode::kInvalidArgument, "sizing: no capacity up to the search limit avoids shortfalls");
  }

  const std::size_t nf = result.fractions.size();
  result.points.resize(policies.size() * nf);
  for (std::size_t p = 0; p < policies.size(); ++p) {
    for (std::size_t j = 0; j < nf; ++j) {
      SweepPoint& pt = result.points[p * nf + j];
      pt.policy = policies[p];
      pt.fraction = result.fractions[j];
      pt.capacity_J = pt.fraction * result.baseline_capacity_J;
    }
  }
  ParallelFor(result.points.size(), options.threads, [&](std::size_t i) {
    SweepPoint& pt = result.points[i];
    EsdParams esd = esd_base;
    esd.capacity_J = pt.capacity_J;
    pt.report = SimulateCapped(demand_W, fc, esd, pt.policy, settings);
  });

  bool any = false;
  for (std::size_t p = 0; p < policies.size(); ++p) {
    PolicySizing ps;
    ps.policy = policies[p];
    ps.baseline = result.points[p * nf + nf - 1].report;
    bool all_above_feasible = true;
    for (std::size_t j = nf; j-- > 0;) {
      SweepPoint& pt = result.points[p * nf + j];
      pt.check = CheckMargins(pt.report.metrics, ps.baseline.metrics, sla);
      if (!pt.check.feasible) {
        all_above_feasible = false;
      } else if (all_above_feasible) {
        ps.min_fraction = pt.fraction;
        ps.min_capacity_J = pt.capacity_J;
      } else {
        ps.monotonicity_violations.push_back(pt.fraction);
      }
    }
    std::sort(ps.monotonicity_violations.begin(), ps.monotonicity_violations.end());
    if (ps.min_fraction) {
      const bool better =
          !any || ps.min_capacity_J < result.chosen_capacity_J ||
          (ps.min_capacity_J == result.chosen_capacity_J &&
           PolicySimplicity(ps.policy) < PolicySimplicity(result.chosen_policy));
      if (better) {
        result.chosen_policy = ps.policy;
        result.chosen_fraction = *ps.min_fraction;
        result.chosen_capacity_J = ps.min_capacity_J;
        any = true;
      }
    }
    result.policies.push_back(std::move(ps));
  }
  if (!any) {
    result.chosen_policy = policies.front();
    result.chosen_fraction = 1.0;
    result.chosen_capacity_J = result.baseline_capacity_J;
    result.no_reduction_possible = true;
  } else {
    result.no_reduction_possible = result.chosen_fraction >= 1.0 && result.baseline_capacity_J > 0.0;
  }
  return result;
}

}  // namespace fcsize
