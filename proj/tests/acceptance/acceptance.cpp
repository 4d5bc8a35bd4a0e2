// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Run from the build tree; takes several minutes.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "fcsize/config.hpp"
#include "fcsize/fcsize.h"
#include "fcsize/horizon_solver.hpp"
#include "fcsize/plant.hpp"
#include "fcsize/policies.hpp"
#include "fcsize/simulation.hpp"
#include "fcsize/sizing.hpp"
#include "fcsize/trace.hpp"

using namespace fcsize;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string Fmt(const char* fmt, double a) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), fmt, a);
  return buf;
}

void Note(Outcome& o, bool ok, const std::string& what) {
  if (!ok) o.pass = false;
  if (!o.detail.empty()) o.detail += "; ";
  o.detail += (ok ? "" : "FAILED ") + what;
}

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

std::vector<double> SurgeDemand(const SurgeSpec& spec, double dt) {
  return ResampleDemand(GenSurge(spec, dt), dt);
}

// Criterion 1: recalibrate from an off-target lag, then probe ramps.
Outcome LoadFollowing(const Config& cfg) {
  Outcome o;
  const auto t0 = Clock::now();
  FuelCellParams start = cfg.fuel_cell;
  start.t_f_s = 8.0;
  start.load_following_W_per_s = 16.0;
  const CalibrationResult cal = CalibrateLoadFollowing(start, {5600.0, 12500.0});
  Note(o, cal.achieved_slope_W_per_s >= 16.0, Fmt("achieved %.3f W/s", cal.achieved_slope_W_per_s));
  const double dt = 0.1;
  EsdParams none = cfg.esd;
  none.capacity_J = 0.0;
  const Plant bare(cal.params, none, dt);
  int probes = 0, clean = 0;
  for (double base : {5600.0, 7000.0, 9000.0, 11000.0}) {
    for (double top : {8000.0, 10300.0, 12500.0}) {
      if (top <= base) continue;
      for (double slope : {2.0, 8.0, 12.0, 16.0}) {
        SurgeSpec s;
        s.base_W = base;
        s.magnitude_W = top - base;
        s.slope_W_per_s = slope;
        s.width_s = 2.0 * s.ramp_s() + 300.0;
        ++probes;
        if (RunUncapped(bare, SurgeDemand(s, dt)).shortfall_steps == 0) ++clean;
      }
    }
  }
  Note(o, clean == probes, std::to_string(clean) + "/" + std::to_string(probes) + " ramps <= 16 W/s without shortfall");
  SurgeSpec steep;
  steep.base_W = 5600.0;
  steep.magnitude_W = 12500.0 - 5600.0;
  steep.slope_W_per_s = 21.0;
  steep.width_s = 2.0 * steep.ramp_s() + 300.0;
  const long short21 = RunUncapped(bare, SurgeDemand(steep, dt)).shortfall_steps;
  Note(o, short21 > 0, "21 W/s full-range ramp: " + std::to_string(short21) + " shortfall steps");
  const double secs = Seconds(t0);
  Note(o, secs < 120.0, Fmt("%.1f s", secs));
  return o;
}

// Time after ramp start at which the fuel cell first meets the plateau load.
double MatchLag(const FuelCellParams& fc, const SurgeSpec& spec, double dt) {
  const std::vector<double> demand = SurgeDemand(spec, dt);
  const Plant plant(fc, EsdParams{1.0e7}, dt);
  PlantState s = plant.InitialFull(demand.front());
  const double top = spec.base_W + spec.magnitude_W;
  for (std::size_t k = 1; k < demand.size(); ++k) {
    s = plant.Step(s, demand[k]);
    const double t = dt * static_cast<double>(k) - spec.pre_s;
    if (t > 0.0 && demand[k] >= top && s.gap_W == 0.0) return t;
  }
  return NAN;
}

// Criterion 2.
Outcome SurgeReproduction(const Config& cfg, double* min_esd_out) {
  Outcome o;
  const auto t0 = Clock::now();
  const double dt = cfg.run.dt_s;
  const SurgeSpec spec;
  const double lag = MatchLag(cfg.fuel_cell, spec, dt);
  Note(o, lag >= 60.0 && lag <= 150.0, Fmt("match %.1f s after ramp start", lag));
  const double j = MinEsdForTrace(SurgeDemand(spec, dt), cfg.fuel_cell, cfg.esd, dt, cfg.min_esd);
  *min_esd_out = j;
  Note(o, j >= 0.7 * 91000.0 && j <= 1.3 * 91000.0, Fmt("min-esd %.0f J", j));
  const double secs = Seconds(t0);
  Note(o, secs < 10.0, Fmt("%.2f s", secs));
  return o;
}

double RSquared(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double icpt = (sy - slope * sx) / n;
  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = icpt + slope * x[i];
    ss_res += (y[i] - f) * (y[i] - f);
    ss_tot += (y[i] - sy / n) * (y[i] - sy / n);
  }
  return 1.0 - ss_res / ss_tot;
}

// Zero prefix, then non-decreasing (strictly increasing when strict).
bool ZeroThenRising(const std::vector<double>& v, bool strict) {
  if (v.empty() || v.front() != 0.0) return false;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] < v[i - 1]) return false;
    if (strict && v[i - 1] > 0.0 && v[i] <= v[i - 1]) return false;
  }
  return v.back() > 0.0;
}

// Criterion 3.
Outcome SurgeShapes(const Config& cfg) {
  Outcome o;
  const auto t0 = Clock::now();
  const double dt = cfg.run.dt_s;
  auto need = [&](const SurgeSpec& s) {
    return MinEsdForTrace(SurgeDemand(s, dt), cfg.fuel_cell, cfg.esd, dt, cfg.min_esd);
  };
  int specs = 0;

  std::vector<double> by_slope;
  double last_free = 0.0;
  for (double slope : {2.0, 5.0, 8.0, 12.0, 16.0, 20.0, 30.0, 45.0, 60.0, 78.0, 100.0, 150.0}) {
    SurgeSpec s;
    s.slope_W_per_s = slope;
    s.width_s = 2.0 * s.ramp_s() + 600.0;
    by_slope.push_back(need(s));
    if (by_slope.back() == 0.0) last_free = slope;
    ++specs;
  }
  Note(o, ZeroThenRising(by_slope, false),
       Fmt("slope: 0 up to %.0f W/s", last_free) + Fmt(", then non-decreasing to %.0f J", by_slope.back()));

  std::vector<double> mags, by_mag;
  for (double m = 250.0; m <= 6900.0; m += 475.0) {
    SurgeSpec s;
    s.base_W = 5600.0;
    s.magnitude_W = m;
    mags.push_back(m);
    by_mag.push_back(need(s));
    ++specs;
  }
  std::vector<double> tail_x, tail_y;
  for (std::size_t i = 0; i < mags.size(); ++i) {
    if (by_mag[i] > 0.0) {
      tail_x.push_back(mags[i]);
      tail_y.push_back(by_mag[i]);
    }
  }
  const bool mag_shape = ZeroThenRising(by_mag, true) || (by_mag.front() > 0.0 && [&] {
    for (std::size_t i = 1; i < by_mag.size(); ++i) {
      if (by_mag[i] <= by_mag[i - 1]) return false;
    }
    return true;
  }());
  Note(o, mag_shape, std::to_string(mags.size() - tail_x.size()) + " zero magnitudes, then increasing");
  const double r2 = tail_x.size() >= 3 ? RSquared(tail_x, tail_y) : 0.0;
  Note(o, r2 > 0.98, Fmt("linear tail R^2 %.5f", r2));

  const SurgeSpec ref;
  const double lag = MatchLag(cfg.fuel_cell, ref, dt);
  std::vector<double> widths, by_width;
  for (double w : {125.0, 150.0, 180.0, 220.0, 260.0, 330.0, 420.0, 660.0, 900.0, 1400.0}) {
    SurgeSpec s;
    s.width_s = w;
    widths.push_back(w);
    by_width.push_back(need(s));
    ++specs;
  }
  bool width_ok = true;
  double settled = -1.0;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    if (i > 0 && by_width[i] < by_width[i - 1]) width_ok = false;
    // Plateau still running when the fuel cell catches up.
    if (widths[i] - ref.ramp_s() >= lag) {
      if (settled < 0.0) settled = by_width[i];
      if (by_width[i] != settled) width_ok = false;
    }
  }
  Note(o, width_ok && settled > 0.0 && by_width.front() < settled,
       Fmt("width: rising, then constant at %.0f J", settled));
  Note(o, specs >= 20, std::to_string(specs) + " specs");
  const double secs = Seconds(t0);
  Note(o, secs < 60.0, Fmt("%.1f s", secs));
  return o;
}

// Criterion 4.
Outcome AssignerAlgebra(const Config& cfg) {
  Outcome o;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const ServerModel& server = cfg.run.server;
  double worst_c = 0.0, worst_d = 0.0;
  bool negative = false;
  const int instances = 10000;
  for (int i = 0; i < instances; ++i) {
    const int n = 1 + static_cast<int>(unit(rng) * 64);
    PlannerInputs in;
    for (int s = 0; s < n; ++s) {
      const double r = unit(rng);
      const double lambda = r < 0.1 ? 0.0 : (r > 0.95 ? 1.0 : unit(rng));
      in.intensity.push_back(lambda);
      // Measured draw may sit below demand after a cap.
      in.server_power_W.push_back(server.p_idle_W + (DemandedPower(server, lambda) - server.p_idle_W) * (0.5 + 0.5 * unit(rng)));
    }
    const double lo = server.p_idle_W * n;
    const double hi = server.p_peak_W * n * 1.2;
    const double budget = lo + (hi - lo) * unit(rng);
    double sum_c = 0.0, sum_d = 0.0;
    for (double b : AssignCentralized(budget, in, server, false)) {
      sum_c += b;
      negative = negative || b < 0.0;
    }
    for (double b : AssignDecentralized(budget, in, server)) {
      sum_d += b;
      negative = negative || b < 0.0;
    }
    worst_c = std::max(worst_c, std::abs(sum_c - budget) / budget);
    worst_d = std::max(worst_d, std::abs(sum_d - budget) / budget);
  }
  Note(o, worst_c <= 1e-6, Fmt("centralized worst %.2e", worst_c));
  // Proportional shares sum to the budget up to rounding.
  Note(o, worst_d <= 1e-12, Fmt("decentralized worst %.2e", worst_d));
  Note(o, !negative, std::to_string(instances) + " instances, no negative budgets");
  return o;
}

// Criterion 5.
Outcome FloorSafety(const Config& cfg) {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double dt = cfg.run.dt_s;
  const double rated = cfg.fuel_cell.rated_power_W;
  int runs = 0, floor_breaks = 0, residual_breaks = 0;
  double worst_margin = INFINITY, worst_residual = 0.0;
  for (int trace = 0; trace < 100; ++trace) {
    // Above rack idle power so every trace carries requests.
    const double base = 5000.0 + 4000.0 * unit(rng);
    std::vector<PlacedSurge> surges;
    const int count = 1 + static_cast<int>(unit(rng) * 3);
    for (int k = 0; k < count; ++k) {
      PlacedSurge p;
      p.start_s = 20.0 + 200.0 * unit(rng);
      p.shape.magnitude_W = 500.0 + (rated - base - 500.0) * unit(rng);
      p.shape.slope_W_per_s = 5.0 + 145.0 * unit(rng);
      p.shape.width_s = p.shape.ramp_s() * 2.0 + 30.0 + 200.0 * unit(rng);
      surges.push_back(p);
    }
    const std::vector<double> demand = ResampleDemand(ComposeSurges(base, 360.0, surges, dt, rated), dt);
    const double baseline = BaselineCapacity(demand, cfg.fuel_cell, cfg.esd, dt, cfg.sweep.baseline);
    RunSettings rs = cfg.run;
    rs.seed = 100 + static_cast<std::uint64_t>(trace);
    for (double frac : {0.1, 0.4, 0.7, 1.0}) {
      EsdParams esd = cfg.esd;
      esd.capacity_J = frac * baseline;
      const double floor = esd.e_min() - esd.quantum_J();
      for (PolicyKind kind : AllPolicies()) {
        double lowest = INFINITY;
        SimCallbacks cb;
        cb.on_step = [&](const StepRecord& r) { lowest = std::min(lowest, r.esd_energy_J); };
        const SimReport r = SimulateCapped(demand, cfg.fuel_cell, esd, kind, rs, &cb);
        ++runs;
        if (esd.capacity_J > 0.0) worst_margin = std::min(worst_margin, (lowest - esd.e_min()) / esd.quantum_J());
        if (lowest < floor - 1e-9) ++floor_breaks;
        const EnergyLedger& e = r.energy;
        const double scale = std::max({1.0, e.esd_start_J, e.charged_J, e.discharged_J});
        const double rel = std::abs(e.residual_J) / scale;
        worst_residual = std::max(worst_residual, rel);
        if (rel >= 1e-6) ++residual_breaks;
      }
    }
  }
  Note(o, floor_breaks == 0, std::to_string(floor_breaks) + "/" + std::to_string(runs) +
                                 " runs below e_min - quantum" + Fmt(" (lowest %.3f quanta above e_min)", worst_margin));
  Note(o, residual_breaks == 0, Fmt("worst residual %.2e", worst_residual));
  Note(o, true, Fmt("%.0f s", Seconds(t0)));
  return o;
}

// Criterion 6.
Outcome PolicyOrdering(const Config& cfg) {
  Outcome o;
  const double dt = cfg.run.dt_s;
  const std::vector<double> demand = SurgeDemand(SurgeSpec{}, dt);
  const double baseline = BaselineCapacity(demand, cfg.fuel_cell, cfg.esd, dt, cfg.sweep.baseline);
  EsdParams esd = cfg.esd;
  esd.capacity_J = 0.5 * baseline;
  std::map<PolicyKind, SimReport> r;
  for (PolicyKind kind : AllPolicies()) r[kind] = SimulateCapped(demand, cfg.fuel_cell, esd, kind, cfg.run);
  auto drop = [&](PolicyKind k) { return 1.0 - r[k].metrics.success_rate; };
  auto ramp = [&](PolicyKind k) { return r[k].post_exhaustion_ramp_W_per_s.value_or(NAN); };
  using K = PolicyKind;
  const double dfcu = drop(K::kDFcuWu), cfcu = drop(K::kCFcuWu), dfca = drop(K::kDFcaWu),
               cfca = drop(K::kCFcaWu), wa = drop(K::kCFcaWa);
  char buf[256];
  std::snprintf(buf, sizeof(buf), "drops D-FCU %.5f C-FCU %.5f D-FCA %.5f C-FCA %.5f WA %.5f", dfcu,
                cfcu, dfca, cfca, wa);
  Note(o, true, buf);
  Note(o, dfcu >= cfcu, "D-FCU >= C-FCU");
  Note(o, cfcu >= std::max(dfca, cfca), "C-FCU >= {D,C}-FCA");
  Note(o, std::min(dfca, cfca) >= wa, "{D,C}-FCA >= WA");
  const double ca = ramp(K::kCFcaWu), cu = ramp(K::kCFcuWu);
  const double da = ramp(K::kDFcaWu), du = ramp(K::kDFcuWu);
  Note(o, ca > cu && da > du, Fmt("ramp C-FCA %.1f", ca) + Fmt(" > C-FCU %.1f", cu) +
                                  Fmt(", D-FCA %.1f", da) + Fmt(" > D-FCU %.1f W/s", du));
  Note(o, ca >= 29.0 * 0.7 && ca <= 29.0 * 1.3, "C-FCA ramp within 29 W/s +-30%");
  Note(o, cu >= 16.0 * 0.7 && cu <= 16.0 * 1.3, "C-FCU ramp within 16 W/s +-30%");
  return o;
}

class ModelFeasibility : public PlanFeasibility {
 public:
  ModelFeasibility(const EsdEnergyModel& model, const PlantState& start, const HorizonProblem& p,
                   double e_min)
      : model_(model), start_(start), p_(p), e_min_(e_min) {}
  bool Feasible(std::span<const int> plan) override {
    std::vector<double> b;
    for (std::size_t k = 0; k < plan.size(); ++k) b.push_back(p_.budget_W[k][static_cast<std::size_t>(plan[k])]);
    for (double e : model_.Predict(start_, b)) {
      if (e < e_min_) return false;
    }
    return true;
  }

 private:
  const EsdEnergyModel& model_;
  PlantState start_;
  const HorizonProblem& p_;
  double e_min_;
};

// Criterion 7: workload-aware tables over three periods and five levels,
// feasibility from the ESD model, instances where the cap binds.
Outcome SolverOracle(const Config& cfg) {
  Outcome o;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double dt = cfg.run.dt_s;
  const int spp = cfg.run.steps_per_period();
  const std::size_t n = static_cast<std::size_t>(cfg.run.rack.n_servers);
  int exact = 0, worse = 0, instances = 0, skipped = 0;
  double worst = 1.0;
  while (instances < 200) {
    EsdParams esd = cfg.esd;
    esd.capacity_J = 5000.0 + 40000.0 * unit(rng);
    const Plant plant(cfg.fuel_cell, esd, dt);
    const EsdEnergyModel model(plant, spp);
    PolicyContext ctx;
    ctx.model = &model;
    ctx.server = cfg.run.server;
    ctx.constants.eta = esd.eta;
    ctx.constants.e_min_J = esd.e_min();
    ctx.constants.quantum_J = esd.quantum_J();
    ctx.constants.t_capping_s = cfg.run.t_capping_s;
    ctx.constants.rack_max_W = cfg.run.server.p_peak_W * static_cast<double>(n);
    ctx.wa = cfg.run.wa;
    ctx.wa.horizon = 3;
    ctx.wa.levels = 5;
    PlannerInputs in;
    in.plant = plant.Initial(5600.0 + 3000.0 * unit(rng), esd.e_min() + 0.5 * esd.usable_J() * unit(rng));
    in.p_fc_W = in.plant.fc.p_fc;
    in.e_measured_J = MeasuredEnergy(in.plant.esd, esd);
    for (std::size_t i = 0; i < n; ++i) {
      in.intensity.push_back(0.5);
      in.server_power_W.push_back(DemandedPower(ctx.server, 0.5));
    }
    for (int k = 0; k < 3; ++k) {
      std::vector<double> l(n);
      for (double& x : l) x = 0.3 + 0.7 * unit(rng);
      in.future_intensity.push_back(l);
    }
    const HorizonProblem p = BuildWaProblem(in, ctx);
    ModelFeasibility f(model, in.plant, p, esd.e_min());
    std::vector<int> top, floor(3, 0);
    for (int k = 0; k < 3; ++k) top.push_back(p.levels(static_cast<std::size_t>(k)) - 1);
    if (f.Feasible(top) || !f.Feasible(floor)) {
      ++skipped;
      continue;
    }
    ++instances;
    const HorizonSolution s = SolveHorizon(p, f, {}, ctx.wa.solver);
    double best = -1.0;
    std::vector<int> plan(3, 0);
    while (true) {
      if (f.Feasible(plan)) best = std::max(best, p.Objective(plan));
      std::size_t k = 0;
      while (k < 3 && ++plan[k] == p.levels(k)) plan[k++] = 0;
      if (k == 3) break;
    }
    if (s.feasible && s.objective >= best - 1e-12) ++exact;
    if (!s.feasible || s.objective < 0.99 * best) ++worse;
    worst = std::min(worst, s.objective / best);
  }
  Note(o, exact >= 190, std::to_string(exact) + "/200 optimal (" + std::to_string(skipped) +
                            " non-binding draws skipped)");
  Note(o, worse == 0, std::to_string(worse) + " worse by >1%" + Fmt(", worst ratio %.4f", worst));
  return o;
}

// Criterion 8.
Outcome Availability(const Config& cfg) {
  Outcome o;
  const double dt = cfg.run.dt_s;
  const std::vector<double> t1 = ResampleDemand(SingleSurgeDayTrace(dt), dt);
  const std::vector<double> t2 = ResampleDemand(FrequentSurgeDayTrace(dt, 7), dt);
  for (const auto* demand : {&t1, &t2}) {
    const double baseline = BaselineCapacity(*demand, cfg.fuel_cell, cfg.esd, dt, cfg.sweep.baseline);
    std::vector<double> caps;
    for (int p = 0; p <= 100; p += 5) caps.push_back(baseline * p / 100.0);
    const auto pts = AvailabilitySweep(*demand, cfg.fuel_cell, cfg.esd, caps, dt);
    bool mono = true;
    for (std::size_t i = 1; i < pts.size(); ++i) mono = mono && pts[i].unavailable_fraction <= pts[i - 1].unavailable_fraction;
    const std::string name = demand == &t1 ? "trace-1" : "trace-2";
    Note(o, mono, name + " non-increasing");
    Note(o, pts.back().unavailable_fraction == 0.0, name + " 0 at baseline");
    if (demand == &t1) {
      const double at15 = pts[3].unavailable_fraction;
      Note(o, at15 < 0.01, Fmt("trace-1 at 15%% capacity %.4f%% unavailable", 100.0 * at15));
    }
  }
  return o;
}

// Criterion 9.
Outcome SizingConsistency(const Config& cfg) {
  Outcome o;
  const auto t0 = Clock::now();
  const double dt = cfg.run.dt_s;
  const std::vector<PolicyKind> all = AllPolicies();
  std::map<PolicyKind, double> mins[2];
  for (int which = 0; which < 2; ++which) {
    const std::vector<double> demand =
        ResampleDemand(which == 0 ? SingleSurgeDayTrace(dt) : FrequentSurgeDayTrace(dt, 7), dt);
    const SizingResult r = SweepSizing(demand, cfg.fuel_cell, cfg.esd, all, cfg.sla, cfg.run, cfg.sweep);
    for (const PolicySizing& ps : r.policies) {
      const std::string name = std::string(which == 0 ? "trace-1 " : "trace-2 ") + PolicyName(ps.policy);
      if (!ps.min_fraction) {
        Note(o, false, name + " no feasible fraction");
        continue;
      }
      mins[which][ps.policy] = *ps.min_fraction;
      bool at_ok = false, below_bad = true;
      const auto it = std::find(r.fractions.begin(), r.fractions.end(), *ps.min_fraction);
      for (const SweepPoint& pt : r.points) {
        if (pt.policy != ps.policy) continue;
        if (pt.fraction == *ps.min_fraction) at_ok = pt.check.feasible;
        if (it != r.fractions.begin() && pt.fraction == *(it - 1)) below_bad = !pt.check.feasible;
      }
      Note(o, at_ok && below_bad, name + Fmt(" %.2f", *ps.min_fraction));
    }
  }
  for (PolicyKind k : all) {
    if (mins[0].count(k) && mins[1].count(k)) {
      Note(o, mins[1][k] > mins[0][k], std::string(PolicyName(k)) + " trace-2 > trace-1");
    }
  }
  Note(o, true, Fmt("%.0f s", Seconds(t0)));
  return o;
}

// Criterion 10, through the C interface.
Outcome Determinism(double min_esd_dt) {
  Outcome o;
  fcs_config* cfg = nullptr;
  fcs_trace* trace = nullptr;
  if (fcs_config_default(&cfg) != FCS_OK || fcs_config_set_seed(cfg, 11) != FCS_OK ||
      fcs_trace_surge(5600.0, 4700.0, 78.0, 660.0, 120.0, 120.0, 0.1, &trace) != FCS_OK) {
    Note(o, false, std::string("setup: ") + fcs_last_error());
    return o;
  }
  for (const char* policy : {"D-FCU-WU", "C-FCA-WA"}) {
    char* a = nullptr;
    char* b = nullptr;
    const bool ran = fcs_simulate(cfg, trace, policy, 0.5, nullptr, nullptr, &a) == FCS_OK &&
                     fcs_simulate(cfg, trace, policy, 0.5, nullptr, nullptr, &b) == FCS_OK;
    Note(o, ran && std::string(a) == std::string(b), std::string(policy) + " reports byte-identical");
    fcs_string_free(a);
    fcs_string_free(b);
  }
  fcs_trace* t1 = nullptr;
  fcs_trace* t2 = nullptr;
  bool same = fcs_trace_archetype("frequent-surge-day", 0.1, 9, &t1) == FCS_OK &&
              fcs_trace_archetype("frequent-surge-day", 0.1, 9, &t2) == FCS_OK &&
              fcs_trace_size(t1) == fcs_trace_size(t2);
  for (std::size_t k = 0; same && k < fcs_trace_size(t1); ++k) {
    double ta, da, tb, db;
    fcs_trace_sample(t1, k, &ta, &da);
    fcs_trace_sample(t2, k, &tb, &db);
    same = ta == tb && da == db;
  }
  Note(o, same, "archetype traces identical per seed");
  fcs_trace_free(t1);
  fcs_trace_free(t2);

  double coarse = 0.0, fine = 0.0;
  const bool ok = fcs_min_esd(cfg, trace, &coarse) == FCS_OK && fcs_config_set_dt(cfg, 0.05) == FCS_OK &&
                  fcs_min_esd(cfg, trace, &fine) == FCS_OK;
  const double shift = std::abs(fine - coarse) / coarse;
  Note(o, ok && shift < 0.01, Fmt("min-esd %.0f J", coarse) + Fmt(" -> %.0f J at dt/2", fine) +
                                  Fmt(" (%.2f%%)", 100.0 * shift));
  Note(o, coarse == min_esd_dt, "C interface agrees with the core");
  fcs_trace_free(trace);
  fcs_config_free(cfg);
  return o;
}

}  // namespace

// Arguments select criteria by number; none runs all of them.
int main(int argc, char** argv) {
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  const Config cfg = DefaultConfig();
  double min_esd = 0.0;
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
      {1, [&] { return LoadFollowing(cfg); }},
      {2, [&] { return SurgeReproduction(cfg, &min_esd); }},
      {3, [&] { return SurgeShapes(cfg); }},
      {4, [&] { return AssignerAlgebra(cfg); }},
      {5, [&] { return FloorSafety(cfg); }},
      {6, [&] { return PolicyOrdering(cfg); }},
      {7, [&] { return SolverOracle(cfg); }},
      {8, [&] { return Availability(cfg); }},
      {9, [&] { return SizingConsistency(cfg); }},
      {10, [&] { return Determinism(min_esd); }},
  };
  int failed = 0, ran = 0;
  for (const auto& [id, run] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    ++ran;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failed;
    std::printf("criterion %2d: %s  %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}
