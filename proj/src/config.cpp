#include "fcsize/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "fcsize/error.hpp"

namespace fcsize {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Reads known keys out of one JSON object and rejects the rest.
class Section {
 public:
  Section(const json& parent, const std::string& name) : name_(name) {
    if (!parent.contains(name)) {
      obj_ = &kEmpty();
      return;
    }
    obj_ = &parent.at(name);
    if (!obj_->is_object()) Fail(ErrorCode::kParse, "config: '" + name + "' must be an object");
  }

  void Num(const char* key, double& v) {
    if (const json* x = Take(key)) {
      if (!x->is_number()) Bad(key, "a number");
      v = x->get<double>();
    }
  }

  // null stands for an unbounded value.
  void NumOrInf(const char* key, double& v) {
    if (const json* x = Take(key)) {
      if (x->is_null()) {
        v = kInf;
      } else if (x->is_number()) {
        v = x->get<double>();
      } else {
        Bad(key, "a number or null");
      }
    }
  }

  void Int(const char* key, int& v) {
    if (const json* x = Take(key)) {
      if (!x->is_number_integer()) Bad(key, "an integer");
      v = x->get<int>();
    }
  }

  void U64(const char* key, std::uint64_t& v) {
    if (const json* x = Take(key)) {
      if (!x->is_number_unsigned()) Bad(key, "a non-negative integer");
      v = x->get<std::uint64_t>();
    }
  }

  void Bool(const char* key, bool& v) {
    if (const json* x = Take(key)) {
      if (!x->is_boolean()) Bad(key, "a boolean");
      v = x->get<bool>();
    }
  }

  void Str(const char* key, std::string& v) {
    if (const json* x = Take(key)) {
      if (!x->is_string()) Bad(key, "a string");
      v = x->get<std::string>();
    }
  }

  void NumList(const char* key, std::vector<double>& v) {
    if (const json* x = Take(key)) {
      if (!x->is_array()) Bad(key, "an array of numbers");
      v.clear();
      for (const auto& e : *x) {
        if (!e.is_number()) Bad(key, "an array of numbers");
        v.push_back(e.get<double>());
      }
    }
  }

  void Finish() const {
    for (auto it = obj_->begin(); it != obj_->end(); ++it) {
      if (!seen_.count(it.key())) {
        Fail(ErrorCode::kParse, "config: unknown key '" + name_ + "." + it.key() + "'");
      }
    }
  }

 private:
  static const json& kEmpty() {
    static const json empty = json::object();
    return empty;
  }

  const json* Take(const char* key) {
    seen_.insert(key);
    return obj_->contains(key) ? &obj_->at(key) : nullptr;
  }

  [[noreturn]] void Bad(const char* key, const char* what) const {
    Fail(ErrorCode::kParse, "config: '" + name_ + "." + key + "' must be " + what);
  }

  std::string name_;
  const json* obj_;
  std::set<std::string> seen_;
};

json InfToNull(double v) { return std::isinf(v) ? json(nullptr) : json(v); }

}  // namespace

void Config::Validate() const {
  fuel_cell.Validate();
  esd.Validate();
  run.Validate();
  sla.Validate();
  for (double f : sweep.fractions) {
    if (!(f >= 0.0 && f <= 1.0)) Fail(ErrorCode::kInvalidArgument, "config: capacity fractions must lie in [0, 1]");
  }
  if (!(calibration.range_W.first < calibration.range_W.second) || !(calibration.range_W.first > 0.0)) {
    Fail(ErrorCode::kInvalidArgument, "config: calibration range must satisfy 0 < lo < hi");
  }
  if (!(min_esd.resolution_J > 0.0) || !(min_esd.max_capacity_J > 0.0)) {
    Fail(ErrorCode::kInvalidArgument, "config: min-esd resolution and limit must be > 0");
  }
}

Config DefaultConfig() {
  Config c;
  c.sweep.fractions = DefaultCapacityFractions();
  return c;
}

Config ConfigFromJson(const json& j) {
  if (!j.is_object()) Fail(ErrorCode::kParse, "config: top level must be an object");
  if (!j.contains("schema_version")) Fail(ErrorCode::kParse, "config: missing schema_version");
  if (!j.at("schema_version").is_number_integer() || j.at("schema_version").get<int>() != kSchemaVersion) {
    Fail(ErrorCode::kParse, "config: unsupported schema_version (expected " +
                                std::to_string(kSchemaVersion) + ")");
  }
  static const std::set<std::string> kSections = {"schema_version", "fuel_cell", "esd", "server",
                                                  "rack", "simulation", "policy", "sizing",
                                                  "sla", "calibration"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!kSections.count(it.key())) Fail(ErrorCode::kParse, "config: unknown section '" + it.key() + "'");
  }

  Config c = DefaultConfig();
  {
    FuelCellParams& p = c.fuel_cell;
    Section s(j, "fuel_cell");
    s.Int("n_cells_series", p.n_cells_series);
    s.Num("e0_volts", p.e0_volts);
    s.Num("gas_const", p.gas_const);
    s.Num("faraday", p.faraday);
    s.Num("stack_temp_K", p.stack_temp_K);
    s.Num("r_ohmic", p.r_ohmic);
    s.Num("k_r", p.k_r);
    s.Num("u_opt", p.u_opt);
    s.Num("u_min", p.u_min);
    s.Num("u_max", p.u_max);
    s.Num("t_f_s", p.t_f_s);
    s.Num("r_h_o", p.r_h_o);
    s.Num("k_h2", p.k_h2);
    s.Num("k_o2", p.k_o2);
    s.Num("k_h2o", p.k_h2o);
    s.Num("t_h2_s", p.t_h2_s);
    s.Num("t_o2_s", p.t_o2_s);
    s.Num("t_h2o_s", p.t_h2o_s);
    s.Num("baseline_p_h2o", p.baseline_p_h2o);
    s.Num("rated_power_W", p.rated_power_W);
    s.Num("load_following_W_per_s", p.load_following_W_per_s);
    s.Finish();
  }
  {
    EsdParams& e = c.esd;
    Section s(j, "esd");
    s.Num("eta", e.eta);
    s.Num("e_min_fraction", e.e_min_fraction);
    s.Num("recharge_draw_W", e.recharge_draw_W);
    s.Num("measure_precision_fraction", e.measure_precision_fraction);
    s.NumOrInf("max_discharge_W", e.max_discharge_W);
    s.Num("cycle_budget", e.cycle_budget);
    s.Finish();
  }
  {
    ServerModel& m = c.run.server;
    Section s(j, "server");
    s.Num("p_idle_W", m.p_idle_W);
    s.Num("p_peak_W", m.p_peak_W);
    s.Num("latency_base_ms", m.latency_base_ms);
    s.Num("latency_timeout_ms", m.latency_timeout_ms);
    s.Num("success_steepness", m.success_steepness);
    s.Finish();
  }
  {
    RackLoad& r = c.run.rack;
    Section s(j, "rack");
    s.Int("n_servers", r.n_servers);
    s.Num("update_period_s", r.update_period_s);
    s.Num("heterogeneity_std", r.heterogeneity_std);
    s.Finish();
  }
  {
    RunSettings& r = c.run;
    Section s(j, "simulation");
    s.Num("dt_s", r.dt_s);
    s.Num("t_capping_s", r.t_capping_s);
    s.U64("seed", r.seed);
    s.Num("gap_tolerance_W", r.plant.gap_tolerance_W);
    std::string estimator = FutureEstimatorName(r.estimator);
    s.Str("future_estimator", estimator);
    r.estimator = ParseFutureEstimator(estimator);
    s.Finish();
  }
  {
    RunSettings& r = c.run;
    Section s(j, "policy");
    s.Int("wa_horizon", r.wa.horizon);
    s.Int("wa_levels", r.wa.levels);
    s.Int("wa_max_sweeps", r.wa.solver.max_sweeps);
    s.Int("wa_max_exchange_checks", r.wa.solver.max_exchange_checks);
    s.Num("fca_resolution_W", r.fca_resolution_W);
    s.Int("planner_replicas", r.planner_replicas);
    s.Finish();
  }
  {
    Section s(j, "sizing");
    s.NumList("capacity_fractions", c.sweep.fractions);
    s.Int("threads", c.sweep.threads);
    s.Num("baseline_reserve_quanta", c.sweep.baseline.reserve_quanta);
    s.Num("min_esd_resolution_J", c.min_esd.resolution_J);
    s.Num("min_esd_max_capacity_J", c.min_esd.max_capacity_J);
    s.Finish();
    c.sweep.baseline.resolution_J = c.min_esd.resolution_J;
    c.sweep.baseline.max_capacity_J = c.min_esd.max_capacity_J;
  }
  if (j.contains("sla")) c.sla = SlaFromJson(j.at("sla"));
  {
    Section s(j, "calibration");
    std::vector<double> range = {c.calibration.range_W.first, c.calibration.range_W.second};
    s.NumList("range_W", range);
    if (range.size() != 2) Fail(ErrorCode::kParse, "config: 'calibration.range_W' must have two entries");
    c.calibration.range_W = {range[0], range[1]};
    s.Num("dt_s", c.calibration.options.dt_s);
    s.Num("gap_tolerance_W", c.calibration.options.gap_tolerance_W);
    s.Int("start_points", c.calibration.options.start_points);
    s.Num("relative_tolerance", c.calibration.options.relative_tolerance);
    s.Finish();
  }
  c.Validate();
  return c;
}

json ConfigToJson(const Config& c) {
  const FuelCellParams& p = c.fuel_cell;
  json j;
  j["schema_version"] = kSchemaVersion;
  j["fuel_cell"] = {
      {"n_cells_series", p.n_cells_series}, {"e0_volts", p.e0_volts},
      {"gas_const", p.gas_const},           {"faraday", p.faraday},
      {"stack_temp_K", p.stack_temp_K},     {"r_ohmic", p.r_ohmic},
      {"k_r", p.k_r},                       {"u_opt", p.u_opt},
      {"u_min", p.u_min},                   {"u_max", p.u_max},
      {"t_f_s", p.t_f_s},                   {"r_h_o", p.r_h_o},
      {"k_h2", p.k_h2},                     {"k_o2", p.k_o2},
      {"k_h2o", p.k_h2o},                   {"t_h2_s", p.t_h2_s},
      {"t_o2_s", p.t_o2_s},                 {"t_h2o_s", p.t_h2o_s},
      {"baseline_p_h2o", p.baseline_p_h2o}, {"rated_power_W", p.rated_power_W},
      {"load_following_W_per_s", p.load_following_W_per_s},
  };
  j["esd"] = {
      {"eta", c.esd.eta},
      {"e_min_fraction", c.esd.e_min_fraction},
      {"recharge_draw_W", c.esd.recharge_draw_W},
      {"measure_precision_fraction", c.esd.measure_precision_fraction},
      {"max_discharge_W", InfToNull(c.esd.max_discharge_W)},
      {"cycle_budget", c.esd.cycle_budget},
  };
  const ServerModel& m = c.run.server;
  j["server"] = {
      {"p_idle_W", m.p_idle_W},
      {"p_peak_W", m.p_peak_W},
      {"latency_base_ms", m.latency_base_ms},
      {"latency_timeout_ms", m.latency_timeout_ms},
      {"success_steepness", m.success_steepness},
  };
  j["rack"] = {
      {"n_servers", c.run.rack.n_servers},
      {"update_period_s", c.run.rack.update_period_s},
      {"heterogeneity_std", c.run.rack.heterogeneity_std},
  };
  j["simulation"] = {
      {"dt_s", c.run.dt_s},
      {"t_capping_s", c.run.t_capping_s},
      {"seed", c.run.seed},
      {"gap_tolerance_W", c.run.plant.gap_tolerance_W},
      {"future_estimator", FutureEstimatorName(c.run.estimator)},
  };
  j["policy"] = {
      {"wa_horizon", c.run.wa.horizon},
      {"wa_levels", c.run.wa.levels},
      {"wa_max_sweeps", c.run.wa.solver.max_sweeps},
      {"wa_max_exchange_checks", c.run.wa.solver.max_exchange_checks},
      {"fca_resolution_W", c.run.fca_resolution_W},
      {"planner_replicas", c.run.planner_replicas},
  };
  j["sizing"] = {
      {"capacity_fractions", c.sweep.fractions},
      {"threads", c.sweep.threads},
      {"baseline_reserve_quanta", c.sweep.baseline.reserve_quanta},
      {"min_esd_resolution_J", c.min_esd.resolution_J},
      {"min_esd_max_capacity_J", c.min_esd.max_capacity_J},
  };
  j["sla"] = SlaToJson(c.sla);
  j["calibration"] = {
      {"range_W", {c.calibration.range_W.first, c.calibration.range_W.second}},
      {"dt_s", c.calibration.options.dt_s},
      {"gap_tolerance_W", c.calibration.options.gap_tolerance_W},
      {"start_points", c.calibration.options.start_points},
      {"relative_tolerance", c.calibration.options.relative_tolerance},
  };
  return j;
}

SlaMargins SlaFromJson(const json& j) {
  if (!j.is_object()) Fail(ErrorCode::kParse, "sla: must be an object");
  json wrapper = {{"sla", j}};
  SlaMargins sla;
  Section s(wrapper, "sla");
  s.NumOrInf("success_rate_margin", sla.success_rate_margin);
  s.NumOrInf("avg_latency_margin", sla.avg_latency_margin);
  s.NumOrInf("p95_latency_margin", sla.p95_latency_margin);
  std::string mode = sla.absolute ? "absolute" : "relative";
  s.Str("mode", mode);
  if (mode != "relative" && mode != "absolute") {
    Fail(ErrorCode::kParse, "sla: mode must be 'relative' or 'absolute'");
  }
  sla.absolute = mode == "absolute";
  s.Num("min_success_rate", sla.min_success_rate);
  s.NumOrInf("max_avg_latency_ms", sla.max_avg_latency_ms);
  s.NumOrInf("max_p95_latency_ms", sla.max_p95_latency_ms);
  s.Finish();
  sla.Validate();
  return sla;
}

json SlaToJson(const SlaMargins& sla) {
  return {
      {"mode", sla.absolute ? "absolute" : "relative"},
      {"success_rate_margin", InfToNull(sla.success_rate_margin)},
      {"avg_latency_margin", InfToNull(sla.avg_latency_margin)},
      {"p95_latency_margin", InfToNull(sla.p95_latency_margin)},
      {"min_success_rate", sla.min_success_rate},
      {"max_avg_latency_ms", InfToNull(sla.max_avg_latency_ms)},
      {"max_p95_latency_ms", InfToNull(sla.max_p95_latency_ms)},
  };
}

Config ParseConfig(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    Fail(ErrorCode::kParse, std::string("config: ") + e.what());
  }
  return ConfigFromJson(j);
}

Config LoadConfig(const std::string& path) { return ParseConfig(ReadTextFile(path)); }

void SaveConfig(const std::string& path, const Config& config) {
  WriteTextFile(path, ConfigToJson(config).dump(2) + "\n");
}

std::string ReadTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteTextFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  out << text;
  if (!out) Fail(ErrorCode::kIo, "write to '" + path + "' failed");
}

}  // namespace fcsize
