#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace fcsize {

// Rack demand samples; times strictly increasing.
struct PowerTrace {
  std::vector<double> t_s;
  std::vector<double> demand_W;

  std::size_t size() const { return t_s.size(); }
  bool empty() const { return t_s.empty(); }
  double duration_s() const { return empty() ? 0.0 : t_s.back() - t_s.front(); }
  double sample_period_s() const;
  // Throws kInvalidArgument (row-numbered) on NaN, negative demand or
  // non-increasing time; rated_W <= 0 skips the upper bound.
  void Validate(double rated_W = 0.0) const;
};

// Linear interpolation onto t0 + k*dt. Sample times that land on an original
// sample (within 1e-9 of the period) copy it exactly.
PowerTrace Resample(const PowerTrace& trace, double dt_s);
std::vector<double> ResampleDemand(const PowerTrace& trace, double dt_s);

struct SurgeSpec {
  double base_W = 5600.0;
  double magnitude_W = 4700.0;
  double slope_W_per_s = 78.0;
  // Ramp up + plateau + ramp down.
  double width_s = 660.0;
  double pre_s = 120.0;
  double post_s = 120.0;

  void Validate() const;
  double ramp_s() const { return magnitude_W / slope_W_per_s; }
};

// Trapezoid: dwell, ramp up, plateau, ramp down, dwell.
PowerTrace GenSurge(const SurgeSpec& spec, double dt_s);

// Surge offset (W above base) at time t after the surge's own start
// (i.e. excluding the pre dwell).
double SurgeOffset(const SurgeSpec& spec, double t_s);

struct PlacedSurge {
  double start_s = 0.0;  // ramp-up start
  SurgeSpec shape;       // base and dwell fields are ignored
};

// Flat base with surge offsets summed on top, clipped to cap_W when > 0.
PowerTrace ComposeSurges(double base_W, double duration_s, std::span<const PlacedSurge> surges,
                         double dt_s, double cap_W = 0.0);

// Eight hours at 5.6 kW with a single 4.7 kW / 78 W/s / 11 min surge.
PowerTrace SingleSurgeDayTrace(double dt_s);
// Eight hours with frequent surges of varied slope, magnitude and width.
PowerTrace FrequentSurgeDayTrace(double dt_s, std::uint64_t seed);

// CSV `t_s,demand_w`. Errors name the 1-based file line.
PowerTrace ReadTraceCsv(std::istream& in, const std::string& source = "<stream>");
PowerTrace LoadTrace(const std::string& path);
void WriteTraceCsv(std::ostream& out, const PowerTrace& trace);
void SaveTrace(const std::string& path, const PowerTrace& trace);

// CSV `t_s,server_id,intensity` (per-server intensity samples).
struct ServerIntensityTrace {
  std::vector<double> t_s;  // distinct, increasing
  // intensity[k][i] for time k and server i
  std::vector<std::vector<double>> intensity;
  std::size_t servers() const { return intensity.empty() ? 0 : intensity.front().size(); }
};

ServerIntensityTrace ReadServerIntensityCsv(std::istream& in, const std::string& source = "<stream>");
ServerIntensityTrace LoadServerIntensity(const std::string& path);

}  // namespace fcsize
