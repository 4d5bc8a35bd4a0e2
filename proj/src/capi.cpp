#include "fcsize/fcsize.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "fcsize/config.hpp"
#include "fcsize/error.hpp"
#include "fcsize/report.hpp"

struct fcs_config {
  fcsize::Config config;
};

struct fcs_trace {
  // Rack demand; for per-server files it is derived with the default server
  // model and recomputed from `servers` with the run's model when used.
  fcsize::PowerTrace trace;
  std::optional<fcsize::ServerIntensityTrace> servers;
};

namespace {

thread_local std::string g_last_error;

template <typename Fn>
fcs_status Guard(Fn&& fn) {
  try {
    fn();
    return FCS_OK;
  } catch (const fcsize::Error& e) {
    g_last_error = e.what();
    return static_cast<fcs_status>(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return FCS_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return FCS_ERR_INTERNAL;
  }
}

void Require(bool ok, const char* what) {
  if (!ok) fcsize::Fail(fcsize::ErrorCode::kInvalidArgument, what);
}

char* Dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

// Rack demand of a per-server trace on the dt grid (samples held).
std::vector<double> ServerDemand(const fcsize::ServerIntensityTrace& servers,
                                 const fcsize::ServerModel& model, double dt_s) {
  const fcsize::RecordedIntensity source(servers, dt_s);
  std::vector<double> lambda(source.servers());
  std::vector<double> out(source.steps());
  for (std::size_t s = 0; s < out.size(); ++s) {
    source.At(s, lambda);
    double sum = 0.0;
    for (double l : lambda) sum += fcsize::DemandedPower(model, l);
    out[s] = sum;
  }
  return out;
}

std::vector<double> Demand(const fcs_config* c, const fcs_trace* t) {
  const fcsize::Config& cfg = c->config;
  if (!t->servers) {
    t->trace.Validate(cfg.fuel_cell.rated_power_W);
    return fcsize::ResampleDemand(t->trace, cfg.run.dt_s);
  }
  std::vector<double> demand = ServerDemand(*t->servers, cfg.run.server, cfg.run.dt_s);
  for (std::size_t k = 0; k < demand.size(); ++k) {
    if (demand[k] > cfg.fuel_cell.rated_power_W) {
      fcsize::Fail(fcsize::ErrorCode::kInvalidArgument,
                   "trace step " + std::to_string(k) + ": rack demand exceeds rated power");
    }
  }
  return demand;
}

bool IsServerTrace(const char* path) {
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  header.erase(std::remove_if(header.begin(), header.end(), ::isspace), header.end());
  std::transform(header.begin(), header.end(), header.begin(), ::tolower);
  return header.rfind("t_s,server_id", 0) == 0;
}

std::vector<fcsize::PolicyKind> ParsePolicies(const std::string& list) {
  if (list.empty() || list == "all") return fcsize::AllPolicies();
  std::vector<fcsize::PolicyKind> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(fcsize::ParsePolicy(item));
  }
  if (out.empty()) fcsize::Fail(fcsize::ErrorCode::kInvalidArgument, "no policies given");
  return out;
}

std::ofstream OpenOut(const char* path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fcsize::Fail(fcsize::ErrorCode::kIo, std::string("cannot open '") + path + "' for writing");
  return out;
}

}  // namespace

extern "C" {

const char* fcs_version(void) { return "1.0.0"; }

const char* fcs_status_name(fcs_status status) {
  return fcsize::ErrorCodeName(static_cast<fcsize::ErrorCode>(status));
}

const char* fcs_last_error(void) { return g_last_error.c_str(); }

void fcs_string_free(char* s) { std::free(s); }

fcs_status fcs_config_default(fcs_config** out) {
  return Guard([&] {
    Require(out != nullptr, "out must not be null");
    *out = new fcs_config{fcsize::DefaultConfig()};
  });
}

fcs_status fcs_config_load(const char* path, fcs_config** out) {
  return Guard([&] {
    Require(path != nullptr && out != nullptr, "path and out must not be null");
    *out = new fcs_config{fcsize::LoadConfig(path)};
  });
}

fcs_status fcs_config_parse(const char* json, fcs_config** out) {
  return Guard([&] {
    Require(json != nullptr && out != nullptr, "json and out must not be null");
    *out = new fcs_config{fcsize::ParseConfig(json)};
  });
}

fcs_status fcs_config_to_json(const fcs_config* config, char** out_json) {
  return Guard([&] {
    Require(config != nullptr && out_json != nullptr, "config and out_json must not be null");
    *out_json = Dup(fcsize::ConfigToJson(config->config).dump(2));
  });
}

fcs_status fcs_config_save(const fcs_config* config, const char* path) {
  return Guard([&] {
    Require(config != nullptr && path != nullptr, "config and path must not be null");
    fcsize::SaveConfig(path, config->config);
  });
}

fcs_status fcs_config_set_dt(fcs_config* config, double dt_s) {
  return Guard([&] {
    Require(config != nullptr, "config must not be null");
    fcsize::Config c = config->config;
    c.run.dt_s = dt_s;
    c.Validate();
    config->config = c;
  });
}

fcs_status fcs_config_set_seed(fcs_config* config, uint64_t seed) {
  return Guard([&] {
    Require(config != nullptr, "config must not be null");
    config->config.run.seed = seed;
  });
}

fcs_status fcs_config_set_tcapping(fcs_config* config, double t_capping_s) {
  return Guard([&] {
    Require(config != nullptr, "config must not be null");
    fcsize::Config c = config->config;
    c.run.t_capping_s = t_capping_s;
    c.Validate();
    config->config = c;
  });
}

void fcs_config_free(fcs_config* config) { delete config; }

fcs_status fcs_trace_load(const char* path, fcs_trace** out) {
  return Guard([&] {
    Require(path != nullptr && out != nullptr, "path and out must not be null");
    if (!IsServerTrace(path)) {
      *out = new fcs_trace{fcsize::LoadTrace(path), std::nullopt};
      return;
    }
    fcsize::ServerIntensityTrace servers = fcsize::LoadServerIntensity(path);
    const double dt = servers.t_s.size() > 1 ? servers.t_s[1] - servers.t_s[0] : 1.0;
    fcsize::PowerTrace rack;
    const std::vector<double> demand = ServerDemand(servers, fcsize::ServerModel{}, dt);
    for (std::size_t k = 0; k < demand.size(); ++k) {
      rack.t_s.push_back(servers.t_s.front() + dt * static_cast<double>(k));
      rack.demand_W.push_back(demand[k]);
    }
    *out = new fcs_trace{std::move(rack), std::move(servers)};
  });
}

fcs_status fcs_trace_from_samples(const double* t_s, const double* demand_w, size_t n,
                                  fcs_trace** out) {
  return Guard([&] {
    Require(out != nullptr && (n == 0 || (t_s != nullptr && demand_w != nullptr)),
            "sample arrays and out must not be null");
    fcsize::PowerTrace trace;
    trace.t_s.assign(t_s, t_s + n);
    trace.demand_W.assign(demand_w, demand_w + n);
    trace.Validate();
    *out = new fcs_trace{std::move(trace)};
  });
}

fcs_status fcs_trace_surge(double base_w, double magnitude_w, double slope_w_per_s, double width_s,
                           double pre_s, double post_s, double dt_s, fcs_trace** out) {
  return Guard([&] {
    Require(out != nullptr, "out must not be null");
    fcsize::SurgeSpec spec;
    spec.base_W = base_w;
    spec.magnitude_W = magnitude_w;
    spec.slope_W_per_s = slope_w_per_s;
    spec.width_s = width_s;
    spec.pre_s = pre_s;
    spec.post_s = post_s;
    *out = new fcs_trace{fcsize::GenSurge(spec, dt_s)};
  });
}

fcs_status fcs_trace_archetype(const char* kind, double dt_s, uint64_t seed, fcs_trace** out) {
  return Guard([&] {
    Require(kind != nullptr && out != nullptr, "kind and out must not be null");
    const std::string k = kind;
    if (k == "single-surge-day") {
      *out = new fcs_trace{fcsize::SingleSurgeDayTrace(dt_s)};
    } else if (k == "frequent-surge-day") {
      *out = new fcs_trace{fcsize::FrequentSurgeDayTrace(dt_s, seed)};
    } else {
      fcsize::Fail(fcsize::ErrorCode::kInvalidArgument,
                   "unknown archetype '" + k + "' (single-surge-day|frequent-surge-day)");
    }
  });
}

fcs_status fcs_trace_save(const fcs_trace* trace, const char* path) {
  return Guard([&] {
    Require(trace != nullptr && path != nullptr, "trace and path must not be null");
    fcsize::SaveTrace(path, trace->trace);
  });
}

size_t fcs_trace_size(const fcs_trace* trace) { return trace == nullptr ? 0 : trace->trace.size(); }

fcs_status fcs_trace_sample(const fcs_trace* trace, size_t index, double* t_s, double* demand_w) {
  return Guard([&] {
    Require(trace != nullptr && t_s != nullptr && demand_w != nullptr, "arguments must not be null");
    Require(index < trace->trace.size(), "sample index out of range");
    *t_s = trace->trace.t_s[index];
    *demand_w = trace->trace.demand_W[index];
  });
}

void fcs_trace_free(fcs_trace* trace) { delete trace; }

fcs_status fcs_calibrate(const fcs_config* config, double target_slope_w_per_s, double lo_w,
                         double hi_w, fcs_config** out_calibrated, double* out_achieved_slope) {
  return Guard([&] {
    Require(config != nullptr && out_calibrated != nullptr, "config and out must not be null");
    fcsize::Config c = config->config;
    if (target_slope_w_per_s > 0.0) c.fuel_cell.load_following_W_per_s = target_slope_w_per_s;
    if (lo_w > 0.0 || hi_w > 0.0) c.calibration.range_W = {lo_w, hi_w};
    c.Validate();
    const fcsize::CalibrationResult r =
        fcsize::CalibrateLoadFollowing(c.fuel_cell, c.calibration.range_W, c.calibration.options);
    c.fuel_cell = r.params;
    if (out_achieved_slope) *out_achieved_slope = r.achieved_slope_W_per_s;
    *out_calibrated = new fcs_config{c};
  });
}

fcs_status fcs_min_esd(const fcs_config* config, const fcs_trace* trace, double* out_joules) {
  return Guard([&] {
    Require(config != nullptr && trace != nullptr && out_joules != nullptr, "arguments must not be null");
    const fcsize::Config& c = config->config;
    *out_joules = fcsize::MinEsdForTrace(Demand(config, trace), c.fuel_cell, c.esd, c.run.dt_s, c.min_esd);
  });
}

fcs_status fcs_baseline_capacity(const fcs_config* config, const fcs_trace* trace, double* out_joules) {
  return Guard([&] {
    Require(config != nullptr && trace != nullptr && out_joules != nullptr, "arguments must not be null");
    const fcsize::Config& c = config->config;
    *out_joules = fcsize::BaselineCapacity(Demand(config, trace), c.fuel_cell, c.esd, c.run.dt_s,
                                           c.sweep.baseline);
  });
}

fcs_status fcs_availability(const fcs_config* config, const fcs_trace* trace,
                            const double* capacities_j, size_t n, double* out_unavailable_fraction) {
  return Guard([&] {
    Require(config != nullptr && trace != nullptr && capacities_j != nullptr &&
                out_unavailable_fraction != nullptr,
            "arguments must not be null");
    const fcsize::Config& c = config->config;
    const std::vector<double> caps(capacities_j, capacities_j + n);
    const auto points = fcsize::AvailabilitySweep(Demand(config, trace), c.fuel_cell, c.esd, caps, c.run.dt_s);
    for (size_t i = 0; i < n; ++i) out_unavailable_fraction[i] = points[i].unavailable_fraction;
  });
}

fcs_status fcs_simulate(const fcs_config* config, const fcs_trace* trace, const char* policy,
                        double capacity_fraction, const char* step_csv_path,
                        const char* decision_csv_path, char** out_report_json) {
  return Guard([&] {
    Require(config != nullptr && trace != nullptr && policy != nullptr && out_report_json != nullptr,
            "arguments must not be null");
    Require(capacity_fraction >= 0.0, "capacity fraction must be >= 0");
    const fcsize::Config& c = config->config;
    const fcsize::PolicyKind kind = fcsize::ParsePolicy(policy);
    const std::vector<double> demand = Demand(config, trace);
    const double baseline = fcsize::BaselineCapacity(demand, c.fuel_cell, c.esd, c.run.dt_s, c.sweep.baseline);
    if (!std::isfinite(baseline)) {
      fcsize::Fail(fcsize::ErrorCode::kInvalidArgument, "no capacity up to the search limit avoids shortfalls");
    }
    fcsize::EsdParams esd = c.esd;
    esd.capacity_J = capacity_fraction * baseline;

    std::ofstream step_out, decision_out;
    std::optional<fcsize::StepCsvWriter> steps;
    std::optional<fcsize::DecisionCsvWriter> decisions;
    fcsize::SimCallbacks callbacks;
    if (step_csv_path != nullptr) {
      step_out = OpenOut(step_csv_path);
      steps.emplace(step_out);
      callbacks.on_step = [&](const fcsize::StepRecord& r) { steps->Write(r); };
    }
    if (decision_csv_path != nullptr) {
      decision_out = OpenOut(decision_csv_path);
      decisions.emplace(decision_out, kind);
      callbacks.on_decision = [&](const fcsize::DecisionRecord& r) { decisions->Write(r); };
    }
    const fcsize::SimReport report =
        trace->servers
            ? fcsize::SimulateCapped(fcsize::RecordedIntensity(*trace->servers, c.run.dt_s), c.fuel_cell,
                                     esd, kind, c.run, &callbacks)
            : fcsize::SimulateCapped(std::span<const double>(demand), c.fuel_cell, esd, kind, c.run,
                                     &callbacks);
    if (step_out.is_open() && !step_out.flush()) fcsize::Fail(fcsize::ErrorCode::kIo, "step CSV write failed");
    if (decision_out.is_open() && !decision_out.flush()) {
      fcsize::Fail(fcsize::ErrorCode::kIo, "decision CSV write failed");
    }
    nlohmann::json j = {
        {"baseline_capacity_J", baseline},
        {"capacity_fraction", capacity_fraction},
        {"report", fcsize::SimReportToJson(report)},
        {"config", fcsize::ConfigToJson(c)},
    };
    *out_report_json = Dup(j.dump(2));
  });
}

fcs_status fcs_size(const fcs_config* config, const fcs_trace* trace, const char* policies,
                    const char* sla_json, char** out_report_json, char** out_sweep_csv) {
  return Guard([&] {
    Require(config != nullptr && trace != nullptr && out_report_json != nullptr,
            "arguments must not be null");
    const fcsize::Config& c = config->config;
    const std::vector<fcsize::PolicyKind> kinds = ParsePolicies(policies ? policies : "all");
    fcsize::SlaMargins sla = c.sla;
    if (sla_json != nullptr) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(sla_json);
      } catch (const nlohmann::json::parse_error& e) {
        fcsize::Fail(fcsize::ErrorCode::kParse, std::string("sla: ") + e.what());
      }
      sla = fcsize::SlaFromJson(j);
    }
    const std::vector<double> demand = Demand(config, trace);
    const fcsize::SizingResult result =
        fcsize::SweepSizing(demand, c.fuel_cell, c.esd, kinds, sla, c.run, c.sweep);
    nlohmann::json j = fcsize::SizingResultToJson(result);
    j["sla"] = fcsize::SlaToJson(sla);
    j["config"] = fcsize::ConfigToJson(c);
    char* report = Dup(j.dump(2));
    if (out_sweep_csv != nullptr) {
      try {
        *out_sweep_csv = Dup(fcsize::SweepCsv(result));
      } catch (...) {
        std::free(report);
        throw;
      }
    }
    *out_report_json = report;
  });
}

}  // extern "C"
