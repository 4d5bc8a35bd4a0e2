#pragma once

#include <string>
#include <utility>
#include <vector>

namespace fcsize {

// Fuel cell system: controller, fuel processor and stack. Pressures are in
// atm, flows in mol/s, current in A, voltage in V, power in W.
struct FuelCellParams {
  int n_cells_series = 384;
  double e0_volts = 0.8;
  double gas_const = 8.314;
  double faraday = 96484.6;
  double stack_temp_K = 343.0;
  double r_ohmic = 0.126;
  double k_r = 384.0 / (4.0 * 96484.6);
  double u_opt = 0.85;
  double u_min = 0.8;
  double u_max = 0.9;
  // Calibrated so 16 W/s is the steepest ramp followed without a gap over
  // 5.6-12.5 kW.
  double t_f_s = 23.784142300054423;
  double r_h_o = 1.168;
  double k_h2 = 8.43e-4;
  double k_o2 = 2.52e-3;
  double k_h2o = 2.81e-3;
  double t_h2_s = 3.37;
  double t_o2_s = 6.74;
  double t_h2o_s = 18.418;
  // The water channel is driven only by consumption, so the stack carries it
  // as a deviation on top of this baseline.
  double baseline_p_h2o = 200.0;
  double rated_power_W = 12500.0;
  double load_following_W_per_s = 16.0;

  // Throws kInvalidArgument naming the first violated invariant.
  void Validate() const;
};

struct FuelCellState {
  double p_h2 = 0.0;
  double p_o2 = 0.0;
  double p_h2o = 0.0;
  double q_h2 = 0.0;
  double q_o2 = 0.0;
  double q_h2_set = 0.0;
  double i_fc = 0.0;
  double v_fc = 0.0;
  double p_fc = 0.0;
};

struct ControllerOutput {
  double i_fc = 0.0;
  double q_h2_set = 0.0;
};

struct FlowRates {
  double q_h2 = 0.0;
  double q_o2 = 0.0;
};

// Demanded current from the previous stack voltage, clamped into the safe
// utilization window, plus the feedforward fuel set value.
ControllerOutput ControllerStep(const FuelCellParams& params,
                                const FuelCellState& state, double p_load_W);

// Zero-order-hold step of the first-order fuel processor lag toward
// state.q_h2_set.
FlowRates ProcessorStep(const FuelCellParams& params, const FuelCellState& state,
                        double dt_s);

// Advances the three partial pressures with state.q_h2, state.q_o2 and
// state.i_fc held over dt, then evaluates the stack voltage and power.
FuelCellState StackStep(const FuelCellParams& params, const FuelCellState& state,
                        double dt_s);

// Open-circuit-style Nernst voltage minus ohmic drop.
double StackVoltage(const FuelCellParams& params, double p_h2, double p_o2,
                    double p_h2o, double i_fc);

// Equilibrium state that delivers p_load_W with fuel at u_opt.
FuelCellState SteadyState(const FuelCellParams& params, double p_load_W);

// Fixed-step integrator with the exponential decay factors cached for one dt.
// A full step runs processor, controller and stack in that order, so the
// utilization window is evaluated against the flow that is actually present
// after the step.
class FuelCellStepper {
 public:
  FuelCellStepper(const FuelCellParams& params, double dt_s);

  FuelCellState Step(const FuelCellState& state, double p_load_W) const;

  const FuelCellParams& params() const { return params_; }
  double dt() const { return dt_; }

 private:
  FuelCellParams params_;
  double dt_;
  double fuel_gain_;
  double decay_h2_;
  double decay_o2_;
  double decay_h2o_;
  double nernst_scale_;
};

// Convenience wrapper around FuelCellStepper for one-off steps.
FuelCellState FuelCellStep(const FuelCellParams& params,
                           const FuelCellState& state, double p_load_W,
                           double dt_s);

struct RampProbe {
  double start_W = 0.0;
  double slope_W_per_s = 0.0;
  double max_gap_W = 0.0;
};

struct CalibrationResult {
  FuelCellParams params;
  double achieved_slope_W_per_s = 0.0;
  bool changed = false;
  std::vector<std::string> probe_log;
};

struct CalibrationOptions {
  double dt_s = 0.1;
  double gap_tolerance_W = 1.0;
  int start_points = 8;
  double relative_tolerance = 0.05;
};

// Largest ramp slope that never leaves a gap above the tolerance, over ramps
// starting at steady state anywhere in [lo, hi) and ending at hi.
double MaxShortfallFreeSlope(const FuelCellParams& params, double lo_W,
                             double hi_W, const CalibrationOptions& options = {});

// Maximum (load - output) while the fuel cell alone follows a ramp from
// steady state at start_W to end_W.
double RampMaxGap(const FuelCellParams& params, double start_W, double end_W,
                  double slope_W_per_s, double dt_s);

// Bisects t_f_s until the shortfall-free slope lands in
// [target, target * (1 + relative_tolerance)].
CalibrationResult CalibrateLoadFollowing(const FuelCellParams& params,
                                         std::pair<double, double> range_W,
                                         const CalibrationOptions& options = {});

}  // namespace fcsize
