#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include "json.hpp"

#include "fcsize/config.hpp"

namespace fcsize {

nlohmann::json SimReportToJson(const SimReport& report);

// Per-point reports are included; the resolved config is attached by callers.
nlohmann::json SizingResultToJson(const SizingResult& result);

// policy,fraction,success,avg_ms,p95_ms,unavailability,capacity_J,feasible
std::string SweepCsv(const SizingResult& result);

// capacity_J,fraction,unavailable_fraction
std::string AvailabilityCsv(std::span<const AvailabilityPoint> points, double baseline_J);

// Streaming writers for per-step and per-period logs.
class StepCsvWriter {
 public:
  explicit StepCsvWriter(std::ostream& out);
  void Write(const StepRecord& r);

 private:
  std::ostream& out_;
};

class DecisionCsvWriter {
 public:
  DecisionCsvWriter(std::ostream& out, PolicyKind kind);
  void Write(const DecisionRecord& r);

 private:
  std::ostream& out_;
  const char* kind_;
};

// Shortest round-trip formatting used by every CSV writer.
std::string FormatNumber(double v);

}  // namespace fcsize
