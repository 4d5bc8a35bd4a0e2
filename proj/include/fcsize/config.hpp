#pragma once

#include <string>
#include <utility>

#include "json.hpp"

#include "fcsize/fuelcell.hpp"
#include "fcsize/sizing.hpp"

namespace fcsize {

inline constexpr int kSchemaVersion = 1;

struct CalibrationSettings {
  std::pair<double, double> range_W{5600.0, 12500.0};
  CalibrationOptions options;
};

// Everything a run needs apart from the trace and the ESD capacity.
struct Config {
  FuelCellParams fuel_cell;
  EsdParams esd;
  RunSettings run;
  SlaMargins sla;
  SweepOptions sweep;
  MinEsdOptions min_esd;
  CalibrationSettings calibration;

  void Validate() const;
};

Config DefaultConfig();

// Missing keys keep their defaults; unknown keys and a schema_version other
// than kSchemaVersion are parse errors.
Config ConfigFromJson(const nlohmann::json& j);
nlohmann::json ConfigToJson(const Config& config);
Config ParseConfig(const std::string& text);
Config LoadConfig(const std::string& path);
void SaveConfig(const std::string& path, const Config& config);

SlaMargins SlaFromJson(const nlohmann::json& j);
nlohmann::json SlaToJson(const SlaMargins& sla);

std::string ReadTextFile(const std::string& path);
void WriteTextFile(const std::string& path, const std::string& text);

}  // namespace fcsize
