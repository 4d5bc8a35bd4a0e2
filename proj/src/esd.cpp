#include "fcsize/esd.hpp"

#include <algorithm>
#include <cmath>

#include "fcsize/error.hpp"

namespace fcsize {

void EsdParams::Validate() const {
  if (!(capacity_J >= 0.0) || !std::isfinite(capacity_J)) {
    Fail(ErrorCode::kInvalidArgument, "esd: capacity_J must be finite and >= 0");
  }
  if (!(eta > 0.0 && eta <= 1.0)) Fail(ErrorCode::kInvalidArgument, "esd: eta must be in (0, 1]");
  if (!(e_min_fraction >= 0.0 && e_min_fraction < 1.0)) {
    Fail(ErrorCode::kInvalidArgument, "esd: e_min_fraction must be in [0, 1)");
  }
  if (!(recharge_draw_W >= 0.0)) Fail(ErrorCode::kInvalidArgument, "esd: recharge_draw_W must be >= 0");
  if (!(measure_precision_fraction > 0.0 && measure_precision_fraction <= 1.0)) {
    Fail(ErrorCode::kInvalidArgument, "esd: measure_precision_fraction must be in (0, 1]");
  }
  if (!(max_discharge_W >= 0.0)) Fail(ErrorCode::kInvalidArgument, "esd: max_discharge_W must be >= 0");
  if (!(cycle_budget > 0.0)) Fail(ErrorCode::kInvalidArgument, "esd: cycle_budget must be > 0");
}

EsdState FullEsd(const EsdParams& params) {
  EsdState s;
  s.energy_J = params.capacity_J;
  return s;
}

double Discharge(EsdState& state, const EsdParams& params, double requested_W, double dt_s) {
  if (!(requested_W > 0.0)) return 0.0;
  const double available_J = state.energy_J - params.e_min();
  if (!(available_J > 0.0)) return 0.0;
  const double cap_W = params.eta * available_J / dt_s;
  double delivered = std::min({requested_W, params.max_discharge_W, cap_W});
  const double drained_J = delivered * dt_s / params.eta;
  if (delivered == cap_W || drained_J >= available_J) {
    // Land exactly on the floor rather than a rounding error above or below.
    state.discharged_total_J += available_J;
    state.energy_J = params.e_min();
  } else {
    state.discharged_total_J += drained_J;
    state.energy_J -= drained_J;
  }
  state.charging = false;
  return delivered;
}

double Recharge(EsdState& state, const EsdParams& params, bool surplus_available,
                double dt_s, double max_draw_W) {
  if (!surplus_available || !(state.energy_J < params.capacity_J) || !(max_draw_W > 0.0)) {
    state.charging = false;
    return 0.0;
  }
  const double room_J = params.capacity_J - state.energy_J;
  double drawn = std::min(params.recharge_draw_W, max_draw_W);
  if (!(drawn > 0.0)) {
    state.charging = false;
    return 0.0;
  }
  const double stored_J = params.eta * drawn * dt_s;
  if (stored_J >= room_J) {
    drawn = room_J / (params.eta * dt_s);
    state.charged_total_J += room_J;
    state.energy_J = params.capacity_J;
  } else {
    state.charged_total_J += stored_J;
    state.energy_J += stored_J;
  }
  if (!state.charging) ++state.charge_events;
  state.charging = true;
  return drawn;
}

double MeasuredEnergy(const EsdState& state, const EsdParams& params) {
  const double q = params.quantum_J();
  if (!(q > 0.0)) return 0.0;
  if (state.energy_J >= params.capacity_J) return params.capacity_J;
  double steps = std::floor(state.energy_J / q);
  // The quotient can round just below an exact grid point.
  if ((steps + 1.0) * q <= state.energy_J) steps += 1.0;
  return steps * q;
}

std::optional<double> LifetimeYears(const EsdState& state, const EsdParams& params,
                                    double sim_duration_s) {
  if (!(sim_duration_s > 0.0)) Fail(ErrorCode::kInvalidArgument, "lifetime: duration must be > 0");
  const double usable = params.usable_J();
  if (!(state.discharged_total_J > 0.0) || !(usable > 0.0)) return std::nullopt;
  const double cycles = state.discharged_total_J / usable;
  constexpr double kSecondsPerYear = 365.0 * 86400.0;
  const double cycles_per_year = cycles * kSecondsPerYear / sim_duration_s;
  return params.cycle_budget / cycles_per_year;
}

}  // namespace fcsize
