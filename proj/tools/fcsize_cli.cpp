// Command-line front end. Everything goes through the C API in fcsize.h.
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fcsize/fcsize.h"

namespace {

struct CliError {
  fcs_status status;
  std::string message;
};

void Check(fcs_status s) {
  if (s != FCS_OK) throw CliError{s, fcs_last_error()};
}

[[noreturn]] void Usage(const std::string& message) { throw CliError{FCS_ERR_INVALID_ARGUMENT, message}; }

struct ConfigDeleter {
  void operator()(fcs_config* c) const { fcs_config_free(c); }
};
struct TraceDeleter {
  void operator()(fcs_trace* t) const { fcs_trace_free(t); }
};
struct StringDeleter {
  void operator()(char* s) const { fcs_string_free(s); }
};
using ConfigPtr = std::unique_ptr<fcs_config, ConfigDeleter>;
using TracePtr = std::unique_ptr<fcs_trace, TraceDeleter>;
using StringPtr = std::unique_ptr<char, StringDeleter>;

struct Globals {
  std::string config_path;
  std::optional<double> dt_s;
  std::optional<uint64_t> seed;
  std::optional<double> t_capping_s;
};

ConfigPtr LoadConfig(const Globals& g) {
  fcs_config* raw = nullptr;
  if (g.config_path.empty()) {
    Check(fcs_config_default(&raw));
  } else {
    Check(fcs_config_load(g.config_path.c_str(), &raw));
  }
  ConfigPtr config(raw);
  if (g.dt_s) Check(fcs_config_set_dt(config.get(), *g.dt_s));
  if (g.seed) Check(fcs_config_set_seed(config.get(), *g.seed));
  if (g.t_capping_s) Check(fcs_config_set_tcapping(config.get(), *g.t_capping_s));
  return config;
}

// A trace argument is a CSV path, or "single-surge-day" / "frequent-surge-day".
TracePtr LoadTrace(const std::string& spec, const Globals& g) {
  fcs_trace* raw = nullptr;
  if (spec == "single-surge-day" || spec == "frequent-surge-day") {
    Check(fcs_trace_archetype(spec.c_str(), g.dt_s.value_or(0.1), g.seed.value_or(7), &raw));
  } else {
    Check(fcs_trace_load(spec.c_str(), &raw));
  }
  return TracePtr(raw);
}

std::string Num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void WriteFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw CliError{FCS_ERR_IO, "cannot write '" + path.string() + "'"};
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError{FCS_ERR_IO, "cannot open '" + path + "'"};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void EnsureDir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw CliError{FCS_ERR_IO, "cannot create '" + dir.string() + "': " + ec.message()};
}

std::vector<double> SplitNumbers(const std::string& text, char sep) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    double v = 0.0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (res.ec != std::errc() || res.ptr != item.data() + item.size()) {
      Usage("not a number: '" + item + "'");
    }
    out.push_back(v);
  }
  return out;
}

// "lo:hi:step" expands to an inclusive grid; a comma list is taken as is.
std::vector<double> ParseGrid(const std::string& text) {
  if (text.find(':') == std::string::npos) return SplitNumbers(text, ',');
  const std::vector<double> p = SplitNumbers(text, ':');
  if (p.size() != 3 || !(p[2] > 0.0) || p[1] < p[0]) Usage("grid must be lo:hi:step with step > 0");
  std::vector<double> out;
  const long n = std::lround(std::floor((p[1] - p[0]) / p[2] + 1e-9));
  for (long i = 0; i <= n; ++i) out.push_back(p[0] + static_cast<double>(i) * p[2]);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fuel-cell rack simulator and energy-storage sizing"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "Plant/run configuration JSON (defaults if omitted)");
  app.add_option("--dt", g.dt_s, "Simulation step in seconds");
  app.add_option("--seed", g.seed, "Random seed for heterogeneity and generated traces");
  app.add_option("--tcapping", g.t_capping_s, "Capping period in seconds");

  std::string trace_spec, policy = "C-FCA-WU", out_path, sla_path, policies = "all", grid = "0:1:0.05";
  double fraction = 1.0;

  auto* simulate = app.add_subcommand("simulate", "Run one capped simulation");
  simulate->add_option("--trace", trace_spec, "Demand trace CSV or archetype name")->required();
  simulate->add_option("--policy", policy, "D-FCU-WU, C-FCU-WU, D-FCA-WU, C-FCA-WU or C-FCA-WA");
  simulate->add_option("--capacity-frac", fraction, "ESD capacity as a fraction of the baseline");
  simulate->add_option("--out", out_path, "Output directory")->required();

  double base = 5600.0, magnitude = 4700.0, slope = 78.0, width = 660.0, pre = 120.0, post = 120.0;
  auto* surge = app.add_subcommand("surge", "Write a single trapezoidal surge trace");
  surge->add_option("--base", base, "Base load in W");
  surge->add_option("--magnitude", magnitude, "Surge height in W");
  surge->add_option("--slope", slope, "Ramp slope in W/s");
  surge->add_option("--width", width, "Surge width in s, both ramps included");
  surge->add_option("--pre", pre, "Flat lead-in in s");
  surge->add_option("--post", post, "Flat tail in s");
  surge->add_option("--out", out_path, "Output CSV")->required();

  std::string archetype;
  auto* trace_cmd = app.add_subcommand("trace", "Write a day-long archetype trace");
  trace_cmd->add_option("--kind", archetype, "single-surge-day or frequent-surge-day")->required();
  trace_cmd->add_option("--out", out_path, "Output CSV")->required();

  auto* min_esd = app.add_subcommand("min-esd", "Smallest ESD with no uncapped shortfall");
  min_esd->add_option("--trace", trace_spec, "Demand trace CSV or archetype name")->required();

  auto* availability = app.add_subcommand("availability", "Uncapped unavailability versus capacity");
  availability->add_option("--trace", trace_spec, "Demand trace CSV or archetype name")->required();
  availability->add_option("--capacities", grid, "Fractions of the baseline: lo:hi:step or a list");
  availability->add_option("--out", out_path, "Output CSV (stdout if omitted)");

  auto* size = app.add_subcommand("size", "Sweep capacities and pick the smallest ESD per policy");
  size->add_option("--trace", trace_spec, "Demand trace CSV or archetype name")->required();
  size->add_option("--sla", sla_path, "SLA margins JSON (config margins if omitted)");
  size->add_option("--policies", policies, "all or a comma separated list");
  size->add_option("--out", out_path, "Output directory")->required();

  double target_slope = 0.0;
  std::string range;
  auto* calibrate = app.add_subcommand("calibrate", "Fit the fuel processor lag to a load-following rate");
  calibrate->add_option("--target-slope", target_slope, "Gap-free ramp rate in W/s");
  calibrate->add_option("--range", range, "Load range lo:hi in W");
  calibrate->add_option("--out", out_path, "Calibrated config JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*simulate) {
      ConfigPtr config = LoadConfig(g);
      TracePtr trace = LoadTrace(trace_spec, g);
      const std::filesystem::path dir(out_path);
      EnsureDir(dir);
      const std::string steps = (dir / "steps.csv").string();
      const std::string decisions = (dir / "decisions.csv").string();
      char* raw = nullptr;
      Check(fcs_simulate(config.get(), trace.get(), policy.c_str(), fraction, steps.c_str(),
                         decisions.c_str(), &raw));
      StringPtr report(raw);
      WriteFile(dir / "report.json", std::string(report.get()) + "\n");
    } else if (*surge) {
      fcs_trace* raw = nullptr;
      Check(fcs_trace_surge(base, magnitude, slope, width, pre, post, g.dt_s.value_or(0.1), &raw));
      TracePtr trace(raw);
      Check(fcs_trace_save(trace.get(), out_path.c_str()));
    } else if (*trace_cmd) {
      TracePtr trace = LoadTrace(archetype, g);
      Check(fcs_trace_save(trace.get(), out_path.c_str()));
    } else if (*min_esd) {
      ConfigPtr config = LoadConfig(g);
      TracePtr trace = LoadTrace(trace_spec, g);
      double min_j = 0.0, baseline_j = 0.0;
      Check(fcs_min_esd(config.get(), trace.get(), &min_j));
      Check(fcs_baseline_capacity(config.get(), trace.get(), &baseline_j));
      const nlohmann::json j = {{"min_esd_J", min_j}, {"baseline_capacity_J", baseline_j}};
      std::cout << j.dump(2) << "\n";
    } else if (*availability) {
      ConfigPtr config = LoadConfig(g);
      TracePtr trace = LoadTrace(trace_spec, g);
      double baseline_j = 0.0;
      Check(fcs_baseline_capacity(config.get(), trace.get(), &baseline_j));
      const std::vector<double> fractions = ParseGrid(grid);
      std::vector<double> caps, unavailable(fractions.size());
      for (double f : fractions) caps.push_back(f * baseline_j);
      Check(fcs_availability(config.get(), trace.get(), caps.data(), caps.size(), unavailable.data()));
      std::ostringstream csv;
      csv << "capacity_J,fraction,unavailable_fraction\n";
      for (size_t i = 0; i < caps.size(); ++i) {
        csv << Num(caps[i]) << ',' << Num(fractions[i]) << ',' << Num(unavailable[i]) << '\n';
      }
      if (out_path.empty()) {
        std::cout << csv.str();
      } else {
        WriteFile(out_path, csv.str());
      }
    } else if (*size) {
      ConfigPtr config = LoadConfig(g);
      TracePtr trace = LoadTrace(trace_spec, g);
      const std::string sla = sla_path.empty() ? std::string() : ReadFile(sla_path);
      const std::filesystem::path dir(out_path);
      EnsureDir(dir);
      char* report_raw = nullptr;
      char* csv_raw = nullptr;
      Check(fcs_size(config.get(), trace.get(), policies.c_str(), sla_path.empty() ? nullptr : sla.c_str(),
                     &report_raw, &csv_raw));
      StringPtr report(report_raw), csv(csv_raw);
      WriteFile(dir / "sizing_report.json", std::string(report.get()) + "\n");
      WriteFile(dir / "sweep.csv", csv.get());
    } else if (*calibrate) {
      ConfigPtr config = LoadConfig(g);
      double lo = 0.0, hi = 0.0;
      if (!range.empty()) {
        const std::vector<double> r = SplitNumbers(range, ':');
        if (r.size() != 2) Usage("--range must be lo:hi");
        lo = r[0];
        hi = r[1];
      }
      fcs_config* raw = nullptr;
      double achieved = 0.0;
      Check(fcs_calibrate(config.get(), target_slope, lo, hi, &raw, &achieved));
      ConfigPtr calibrated(raw);
      Check(fcs_config_save(calibrated.get(), out_path.c_str()));
      std::cout << nlohmann::json{{"achieved_slope_W_per_s", achieved}}.dump() << "\n";
    }
  } catch (const CliError& e) {
    const nlohmann::json err = {{"error", fcs_status_name(e.status)}, {"message", e.message}};
    std::cerr << err.dump() << "\n";
    return static_cast<int>(e.status);
  }
  return 0;
}
