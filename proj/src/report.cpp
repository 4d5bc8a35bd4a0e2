#include "fcsize/report.hpp"

#include <charconv>
#include <cmath>
#include <ostream>
#include <sstream>

namespace fcsize {

using nlohmann::json;

namespace {

json Optional(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json MetricsJson(const RackMetrics& m) {
  return {{"success_rate", m.success_rate},
          {"avg_latency_ms", m.avg_latency_ms},
          {"p95_latency_ms", m.p95_latency_ms},
          {"total_requests", m.total_requests}};
}

}  // namespace

std::string FormatNumber(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

json SimReportToJson(const SimReport& r) {
  const EnergyLedger& e = r.energy;
  return {
      {"policy", r.policy},
      {"capacity_J", r.capacity_J},
      {"duration_s", r.duration_s},
      {"steps", r.steps},
      {"periods", r.periods},
      {"capped_periods", r.capped_periods},
      {"shortfall_steps", r.shortfall_steps},
      {"unavailable_fraction", r.unavailable_fraction},
      {"metrics", MetricsJson(r.metrics)},
      {"messages", r.messages},
      {"fallback_periods", r.fallback_periods},
      {"degraded_periods", r.degraded_periods},
      {"equal_split_periods", r.equal_split_periods},
      {"energy",
       {{"esd_start_J", e.esd_start_J},
        {"esd_end_J", e.esd_end_J},
        {"charged_J", e.charged_J},
        {"discharged_J", e.discharged_J},
        {"delivered_J", e.delivered_J},
        {"recharge_drawn_J", e.recharge_drawn_J},
        {"fc_output_J", e.fc_output_J},
        {"served_J", e.served_J},
        {"demanded_J", e.demanded_J},
        {"shortfall_J", e.shortfall_J},
        {"residual_J", e.residual_J}}},
      {"min_energy_margin_J", r.min_energy_margin_J},
      {"charge_events", r.charge_events},
      {"lifetime_years", Optional(r.lifetime_years)},
      {"exhaustion_time_s", Optional(r.exhaustion_time_s)},
      {"recovery_time_s", Optional(r.recovery_time_s)},
      {"post_exhaustion_ramp_W_per_s", Optional(r.post_exhaustion_ramp_W_per_s)},
  };
}

json SizingResultToJson(const SizingResult& r) {
  json policies = json::array();
  for (const auto& p : r.policies) {
    policies.push_back({
        {"policy", PolicyName(p.policy)},
        {"min_fraction", Optional(p.min_fraction)},
        {"min_capacity_J", p.min_fraction ? json(p.min_capacity_J) : json(nullptr)},
        {"monotonicity_violations", p.monotonicity_violations},
        {"baseline", SimReportToJson(p.baseline)},
    });
  }
  json points = json::array();
  for (const auto& pt : r.points) {
    points.push_back({
        {"policy", PolicyName(pt.policy)},
        {"fraction", pt.fraction},
        {"capacity_J", pt.capacity_J},
        {"feasible", pt.check.feasible},
        {"success_drop", pt.check.success_drop},
        {"avg_latency_increase", pt.check.avg_latency_increase},
        {"p95_latency_increase", pt.check.p95_latency_increase},
        {"report", SimReportToJson(pt.report)},
    });
  }
  return {
      {"baseline_capacity_J", r.baseline_capacity_J},
      {"fractions", r.fractions},
      {"chosen",
       {{"policy", PolicyName(r.chosen_policy)},
        {"fraction", r.chosen_fraction},
        {"capacity_J", r.chosen_capacity_J},
        {"no_reduction_possible", r.no_reduction_possible}}},
      {"policies", policies},
      {"points", points},
  };
}

std::string SweepCsv(const SizingResult& r) {
  std::ostringstream out;
  out << "policy,fraction,success,avg_ms,p95_ms,unavailability,capacity_J,feasible\n";
  for (const auto& pt : r.points) {
    const RackMetrics& m = pt.report.metrics;
    out << PolicyName(pt.policy) << ',' << FormatNumber(pt.fraction) << ','
        << FormatNumber(m.success_rate) << ',' << FormatNumber(m.avg_latency_ms) << ','
        << FormatNumber(m.p95_latency_ms) << ',' << FormatNumber(pt.report.unavailable_fraction)
        << ',' << FormatNumber(pt.capacity_J) << ',' << (pt.check.feasible ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string AvailabilityCsv(std::span<const AvailabilityPoint> points, double baseline_J) {
  std::ostringstream out;
  out << "capacity_J,fraction,unavailable_fraction\n";
  for (const auto& p : points) {
    const double fraction = baseline_J > 0.0 ? p.capacity_J / baseline_J : 0.0;
    out << FormatNumber(p.capacity_J) << ',' << FormatNumber(fraction) << ','
        << FormatNumber(p.unavailable_fraction) << '\n';
  }
  return out.str();
}

StepCsvWriter::StepCsvWriter(std::ostream& out) : out_(out) {
  out_ << "t_s,demand_W,p_fc_W,esd_delivered_W,esd_energy_J,shortfall_W,served_W,rack_budget_W\n";
}

void StepCsvWriter::Write(const StepRecord& r) {
  out_ << FormatNumber(r.t_s) << ',' << FormatNumber(r.demand_W) << ',' << FormatNumber(r.p_fc_W)
       << ',' << FormatNumber(r.esd_delivered_W) << ',' << FormatNumber(r.esd_energy_J) << ','
       << FormatNumber(r.shortfall_W) << ',' << FormatNumber(r.served_W) << ','
       << FormatNumber(r.rack_budget_W) << '\n';
}

DecisionCsvWriter::DecisionCsvWriter(std::ostream& out, PolicyKind kind)
    : out_(out), kind_(PolicyName(kind)) {
  out_ << "t_s,kind,rack_budget_W,min_server_budget_W,max_server_budget_W,messages,branch,measured_energy_J\n";
}

void DecisionCsvWriter::Write(const DecisionRecord& r) {
  out_ << FormatNumber(r.t_s) << ',' << kind_ << ',' << FormatNumber(r.rack_budget_W) << ','
       << FormatNumber(r.min_server_budget_W) << ',' << FormatNumber(r.max_server_budget_W) << ','
       << r.messages << ',' << PlannerBranchName(r.branch) << ','
       << FormatNumber(r.measured_energy_J) << '\n';
}

}  // namespace fcsize
