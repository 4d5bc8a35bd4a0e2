#include "fcsize/fuelcell.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fcsize/error.hpp"

namespace fcsize {

namespace {

void Require(bool ok, const char* what) {
  if (!ok) Fail(ErrorCode::kInvalidArgument, std::string("fuel cell params: ") + what);
}

double Decay(double dt, double tau) { return std::exp(-dt / tau); }

void CheckPressure(double p, const char* channel) {
  if (!(p > 0.0) || !std::isfinite(p)) {
    std::ostringstream os;
    os << "fuel cell model diverged: " << channel << " partial pressure " << p;
    Fail(ErrorCode::kModelDivergence, os.str());
  }
}

struct PressureTargets {
  double h2;
  double o2;
  double h2o;
};

PressureTargets Targets(const FuelCellParams& p, double q_h2, double q_o2,
                        double i_fc) {
  return {(q_h2 - 2.0 * p.k_r * i_fc) / p.k_h2,
          (q_o2 - p.k_r * i_fc) / p.k_o2,
          p.baseline_p_h2o + (-2.0 * p.k_r * i_fc) / p.k_h2o};
}

ControllerOutput Control(const FuelCellParams& p, double q_h2, double v_fc,
                         double p_load_W) {
  if (!std::isfinite(p_load_W) || p_load_W < 0.0) {
    Fail(ErrorCode::kInvalidState, "controller: load power must be finite and non-negative");
  }
  if (!(v_fc > 0.0) || !std::isfinite(v_fc)) {
    Fail(ErrorCode::kInvalidState, "controller: stack voltage must be positive");
  }
  const double i_demand = p_load_W / v_fc;
  const double i_lo = p.u_min * q_h2 / (2.0 * p.k_r);
  const double i_hi = p.u_max * q_h2 / (2.0 * p.k_r);
  ControllerOutput out;
  out.i_fc = std::clamp(i_demand, i_lo, i_hi);
  out.q_h2_set = std::max(0.0, 2.0 * p.k_r / p.u_opt * i_demand);
  return out;
}

}  // namespace

void FuelCellParams::Validate() const {
  Require(n_cells_series >= 1, "n_cells_series must be >= 1");
  Require(0.0 < u_min && u_min < u_opt && u_opt < u_max && u_max <= 1.0,
          "require 0 < u_min < u_opt < u_max <= 1");
  Require(t_f_s > 0.0 && t_h2_s > 0.0 && t_o2_s > 0.0 && t_h2o_s > 0.0,
          "time constants must be positive");
  Require(k_h2 > 0.0 && k_o2 > 0.0 && k_h2o > 0.0, "valve constants must be positive");
  Require(k_r > 0.0, "k_r must be positive");
  Require(r_ohmic > 0.0, "r_ohmic must be positive");
  Require(r_h_o > 0.0, "r_h_o must be positive");
  Require(stack_temp_K > 0.0 && gas_const > 0.0 && faraday > 0.0,
          "physical constants must be positive");
  Require(baseline_p_h2o > 0.0, "baseline_p_h2o must be positive");
  Require(rated_power_W > 0.0, "rated_power_W must be positive");
  Require(load_following_W_per_s > 0.0, "load_following_W_per_s must be positive");
}

ControllerOutput ControllerStep(const FuelCellParams& params,
                                const FuelCellState& state, double p_load_W) {
  return Control(params, state.q_h2, state.v_fc, p_load_W);
}

FlowRates ProcessorStep(const FuelCellParams& params, const FuelCellState& state,
                        double dt_s) {
  if (!(dt_s > 0.0)) Fail(ErrorCode::kInvalidArgument, "processor: dt must be positive");
  const double gain = -std::expm1(-dt_s / params.t_f_s);
  FlowRates out;
  out.q_h2 = state.q_h2 + gain * (state.q_h2_set - state.q_h2);
  out.q_o2 = out.q_h2 / params.r_h_o;
  return out;
}

double StackVoltage(const FuelCellParams& p, double p_h2, double p_o2,
                    double p_h2o, double i_fc) {
  const double scale = p.gas_const * p.stack_temp_K / (2.0 * p.faraday);
  return p.n_cells_series * (p.e0_volts + scale * std::log(p_h2 * std::sqrt(p_o2) / p_h2o)) -
         p.r_ohmic * i_fc;
}

FuelCellState StackStep(const FuelCellParams& params, const FuelCellState& state,
                        double dt_s) {
  if (!(dt_s > 0.0)) Fail(ErrorCode::kInvalidArgument, "stack: dt must be positive");
  const PressureTargets target = Targets(params, state.q_h2, state.q_o2, state.i_fc);
  FuelCellState next = state;
  next.p_h2 = target.h2 + (state.p_h2 - target.h2) * Decay(dt_s, params.t_h2_s);
  next.p_o2 = target.o2 + (state.p_o2 - target.o2) * Decay(dt_s, params.t_o2_s);
  next.p_h2o = target.h2o + (state.p_h2o - target.h2o) * Decay(dt_s, params.t_h2o_s);
  CheckPressure(next.p_h2, "hydrogen");
  CheckPressure(next.p_o2, "oxygen");
  CheckPressure(next.p_h2o, "water");
  next.v_fc = StackVoltage(params, next.p_h2, next.p_o2, next.p_h2o, next.i_fc);
  next.p_fc = next.v_fc * next.i_fc;
  return next;
}

FuelCellState SteadyState(const FuelCellParams& params, double p_load_W) {
  params.Validate();
  if (!(p_load_W > 0.0) || !std::isfinite(p_load_W)) {
    Fail(ErrorCode::kInvalidArgument, "steady state requires a positive load");
  }
  FuelCellState s;
  double v = params.n_cells_series * params.e0_volts;
  double i = p_load_W / v;
  for (int iter = 0; iter < 200; ++iter) {
    s.q_h2 = 2.0 * params.k_r * i / params.u_opt;
    s.q_o2 = s.q_h2 / params.r_h_o;
    const PressureTargets t = Targets(params, s.q_h2, s.q_o2, i);
    s.p_h2 = t.h2;
    s.p_o2 = t.o2;
    s.p_h2o = t.h2o;
    CheckPressure(s.p_h2, "hydrogen");
    CheckPressure(s.p_o2, "oxygen");
    CheckPressure(s.p_h2o, "water");
    v = StackVoltage(params, s.p_h2, s.p_o2, s.p_h2o, i);
    if (!(v > 0.0)) Fail(ErrorCode::kModelDivergence, "steady state: non-positive stack voltage");
    const double next_i = p_load_W / v;
    if (std::abs(next_i - i) <= 1e-13 * i) {
      i = next_i;
      break;
    }
    i = next_i;
  }
  s.q_h2 = 2.0 * params.k_r * i / params.u_opt;
  s.q_o2 = s.q_h2 / params.r_h_o;
  s.q_h2_set = s.q_h2;
  const PressureTargets t = Targets(params, s.q_h2, s.q_o2, i);
  s.p_h2 = t.h2;
  s.p_o2 = t.o2;
  s.p_h2o = t.h2o;
  s.i_fc = i;
  s.v_fc = StackVoltage(params, s.p_h2, s.p_o2, s.p_h2o, i);
  s.p_fc = s.v_fc * s.i_fc;
  return s;
}

FuelCellStepper::FuelCellStepper(const FuelCellParams& params, double dt_s)
    : params_(params), dt_(dt_s) {
  params_.Validate();
  if (!(dt_s > 0.0)) Fail(ErrorCode::kInvalidArgument, "dt must be positive");
  fuel_gain_ = -std::expm1(-dt_s / params_.t_f_s);
  decay_h2_ = Decay(dt_s, params_.t_h2_s);
  decay_o2_ = Decay(dt_s, params_.t_o2_s);
  decay_h2o_ = Decay(dt_s, params_.t_h2o_s);
  nernst_scale_ = params_.gas_const * params_.stack_temp_K / (2.0 * params_.faraday);
}

FuelCellState FuelCellStepper::Step(const FuelCellState& state, double p_load_W) const {
  const FuelCellParams& p = params_;
  FuelCellState next = state;

  next.q_h2 = state.q_h2 + fuel_gain_ * (state.q_h2_set - state.q_h2);
  next.q_o2 = next.q_h2 / p.r_h_o;

  const ControllerOutput ctl = Control(p, next.q_h2, state.v_fc, p_load_W);
  next.i_fc = ctl.i_fc;
  next.q_h2_set = ctl.q_h2_set;

  const PressureTargets t = Targets(p, next.q_h2, next.q_o2, next.i_fc);
  next.p_h2 = t.h2 + (state.p_h2 - t.h2) * decay_h2_;
  next.p_o2 = t.o2 + (state.p_o2 - t.o2) * decay_o2_;
  next.p_h2o = t.h2o + (state.p_h2o - t.h2o) * decay_h2o_;
  CheckPressure(next.p_h2, "hydrogen");
  CheckPressure(next.p_o2, "oxygen");
  CheckPressure(next.p_h2o, "water");

  next.v_fc = p.n_cells_series *
                  (p.e0_volts +
                   nernst_scale_ * std::log(next.p_h2 * std::sqrt(next.p_o2) / next.p_h2o)) -
              p.r_ohmic * next.i_fc;
  next.p_fc = next.v_fc * next.i_fc;
  return next;
}

FuelCellState FuelCellStep(const FuelCellParams& params, const FuelCellState& state,
                           double p_load_W, double dt_s) {
  return FuelCellStepper(params, dt_s).Step(state, p_load_W);
}

double RampMaxGap(const FuelCellParams& params, double start_W, double end_W,
                  double slope_W_per_s, double dt_s) {
  const FuelCellStepper stepper(params, dt_s);
  FuelCellState s = SteadyState(params, start_W);
  const double ramp_s = (end_W - start_W) / slope_W_per_s;
  const double settle_s =
      5.0 * std::max({params.t_f_s, params.t_h2_s, params.t_o2_s, params.t_h2o_s});
  const auto steps = static_cast<long>(std::ceil((ramp_s + settle_s) / dt_s));
  double max_gap = -1e300;
  for (long n = 1; n <= steps; ++n) {
    const double t = n * dt_s;
    const double load = std::min(end_W, start_W + slope_W_per_s * t);
    s = stepper.Step(s, load);
    max_gap = std::max(max_gap, load - s.p_fc);
  }
  return max_gap;
}

namespace {

std::vector<double> StartPoints(double lo_W, double hi_W, int count) {
  std::vector<double> out;
  for (int k = 0; k < count; ++k) out.push_back(lo_W + (hi_W - lo_W) * k / count);
  return out;
}

bool SlopeIsSafe(const FuelCellParams& params, const std::vector<double>& starts,
                 double hi_W, double slope, const CalibrationOptions& opt) {
  for (double start : starts) {
    if (RampMaxGap(params, start, hi_W, slope, opt.dt_s) > opt.gap_tolerance_W) return false;
  }
  return true;
}

}  // namespace

double MaxShortfallFreeSlope(const FuelCellParams& params, double lo_W, double hi_W,
                             const CalibrationOptions& options) {
  if (!(0.0 < lo_W && lo_W < hi_W)) {
    Fail(ErrorCode::kInvalidArgument, "operating range must satisfy 0 < lo < hi");
  }
  const auto starts = StartPoints(lo_W, hi_W, std::max(1, options.start_points));
  double safe = 0.0;
  double unsafe = 1.0;
  while (SlopeIsSafe(params, starts, hi_W, unsafe, options)) {
    safe = unsafe;
    unsafe *= 2.0;
    if (unsafe > 1e6) return safe;
  }
  if (safe == 0.0) {
    // The lower bracket needs one safe probe; shrink until one is found.
    double probe = unsafe / 2.0;
    while (probe > 1e-3 && !SlopeIsSafe(params, starts, hi_W, probe, options)) probe /= 2.0;
    if (probe <= 1e-3) return 0.0;
    safe = probe;
    unsafe = probe * 2.0;
  }
  while (unsafe - safe > 1e-4 * unsafe) {
    const double mid = 0.5 * (safe + unsafe);
    if (SlopeIsSafe(params, starts, hi_W, mid, options)) {
      safe = mid;
    } else {
      unsafe = mid;
    }
  }
  return safe;
}

CalibrationResult CalibrateLoadFollowing(const FuelCellParams& params,
                                         std::pair<double, double> range_W,
                                         const CalibrationOptions& options) {
  params.Validate();
  const auto [lo_W, hi_W] = range_W;
  if (!(0.0 < lo_W && lo_W < hi_W && hi_W <= params.rated_power_W)) {
    Fail(ErrorCode::kInvalidArgument, "operating range must lie within (0, rated_power_W]");
  }
  const double target = params.load_following_W_per_s;
  const double upper = target * (1.0 + options.relative_tolerance);

  CalibrationResult result;
  result.params = params;
  auto probe = [&](double t_f) {
    FuelCellParams candidate = params;
    candidate.t_f_s = t_f;
    const double slope = MaxShortfallFreeSlope(candidate, lo_W, hi_W, options);
    std::ostringstream os;
    os << "t_f_s=" << t_f << " max_safe_slope=" << slope;
    result.probe_log.push_back(os.str());
    return slope;
  };

  double slope = probe(params.t_f_s);
  if (slope >= target && slope <= upper) {
    result.achieved_slope_W_per_s = slope;
    return result;
  }

  // Safe slope decreases as the fuel processor slows down.
  double fast = params.t_f_s;  // slope too high at this t_f
  double slow = params.t_f_s;  // slope too low at this t_f
  if (slope > upper) {
    for (int i = 0; i < 40 && slope > upper; ++i) {
      fast = slow;
      slow *= 2.0;
      slope = probe(slow);
      if (slope >= target && slope <= upper) {
        result.params.t_f_s = slow;
        result.achieved_slope_W_per_s = slope;
        result.changed = true;
        return result;
      }
    }
    if (slope > upper) Fail(ErrorCode::kCalibrationInfeasible, "cannot bracket t_f_s from above");
  } else {
    for (int i = 0; i < 40 && slope < target; ++i) {
      slow = fast;
      fast /= 2.0;
      slope = probe(fast);
      if (slope >= target && slope <= upper) {
        result.params.t_f_s = fast;
        result.achieved_slope_W_per_s = slope;
        result.changed = true;
        return result;
      }
    }
    if (slope < target) Fail(ErrorCode::kCalibrationInfeasible, "cannot bracket t_f_s from below");
  }

  for (int i = 0; i < 60; ++i) {
    const double mid = std::sqrt(fast * slow);
    slope = probe(mid);
    if (slope >= target && slope <= upper) {
      result.params.t_f_s = mid;
      result.achieved_slope_W_per_s = slope;
      result.changed = true;
      return result;
    }
    if (slope > upper) {
      fast = mid;
    } else {
      slow = mid;
    }
  }
  std::ostringstream os;
  os << "calibration did not converge; probes:";
  for (const auto& line : result.probe_log) os << "\n  " << line;
  Fail(ErrorCode::kCalibrationInfeasible, os.str());
}

}  // namespace fcsize
