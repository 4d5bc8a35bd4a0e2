#include "fcsize/policies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fcsize/error.hpp"

namespace fcsize {

namespace {

struct PolicyInfo {
  PolicyKind kind;
  const char* name;
  bool centralized;
  bool fca;
  bool workload_aware;
  int simplicity;
};

constexpr PolicyInfo kPolicies[] = {
    {PolicyKind::kDFcuWu, "D-FCU-WU", false, false, false, 0},
    {PolicyKind::kCFcuWu, "C-FCU-WU", true, false, false, 1},
    {PolicyKind::kDFcaWu, "D-FCA-WU", false, true, false, 2},
    {PolicyKind::kCFcaWu, "C-FCA-WU", true, true, false, 3},
    {PolicyKind::kCFcaWa, "C-FCA-WA", true, true, true, 4},
};

const PolicyInfo& Info(PolicyKind kind) {
  for (const auto& p : kPolicies) {
    if (p.kind == kind) return p;
  }
  Fail(ErrorCode::kInvalidArgument, "unknown policy kind");
}

double RackDemand(const ServerModel& server, std::span<const double> intensity) {
  double sum = 0.0;
  for (double l : intensity) sum += DemandedPower(server, l);
  return sum;
}

double MeanOf(std::span<const double> v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Replays candidate plans through the ESD model, reusing the period start
// states of the last committed plan up to the first differing period.
class ModelPlanFeasibility : public PlanFeasibility {
 public:
  ModelPlanFeasibility(const EsdEnergyModel& model, const PlantState& start,
                       const HorizonProblem& problem, double e_min)
      : model_(model), problem_(problem), e_min_(e_min) {
    const std::size_t periods = problem.periods();
    committed_.assign(periods, -1);
    states_.assign(periods + 1, start);
    deficits_.assign(periods + 1, 0.0);
    valid_ = 0;
  }

  bool Feasible(std::span<const int> plan) override {
    const std::size_t periods = problem_.periods();
    std::size_t d = 0;
    while (d < valid_ && plan[d] == committed_[d]) ++d;
    scratch_states_.assign(states_.begin(), states_.end());
    scratch_deficits_.assign(deficits_.begin(), deficits_.end());
    for (std::size_t k = d; k < periods; ++k) {
      double deficit = scratch_deficits_[k];
      const double budget = problem_.budget_W[k][static_cast<std::size_t>(plan[k])];
      scratch_states_[k + 1] = model_.AdvancePeriod(scratch_states_[k], budget, &deficit);
      scratch_deficits_[k + 1] = deficit;
      if (scratch_states_[k + 1].esd.energy_J - deficit < e_min_ - kSlack) {
        last_ok_ = false;
        return false;
      }
    }
    last_plan_.assign(plan.begin(), plan.end());
    last_ok_ = true;
    return true;
  }

  void Commit(std::span<const int> plan) override {
    if (!last_ok_ || !std::equal(plan.begin(), plan.end(), last_plan_.begin(), last_plan_.end())) {
      valid_ = 0;
      if (!Feasible(plan)) {
        // Committing an infeasible plan keeps no cached prefix.
        return;
      }
    }
    states_.swap(scratch_states_);
    deficits_.swap(scratch_deficits_);
    committed_.assign(plan.begin(), plan.end());
    valid_ = plan.size();
  }

 private:
  static constexpr double kSlack = 1e-9;
  const EsdEnergyModel& model_;
  const HorizonProblem& problem_;
  double e_min_;
  std::vector<int> committed_;
  std::vector<PlantState> states_;
  std::vector<double> deficits_;
  std::size_t valid_ = 0;
  std::vector<PlantState> scratch_states_;
  std::vector<double> scratch_deficits_;
  std::vector<int> last_plan_;
  bool last_ok_ = false;
};

bool OnePeriodFeasible(const EsdEnergyModel& model, const PlantState& plant, double budget,
                       double e_min) {
  const double b[1] = {budget};
  return model.Predict(plant, b)[0] >= e_min - 1e-9;
}

bool PlanFeasibleFromScratch(const EsdEnergyModel& model, const PlantState& plant,
                             std::span<const double> budgets, double e_min) {
  PlantState s = model.MeasuredStart(plant);
  double deficit = 0.0;
  for (double b : budgets) {
    s = model.AdvancePeriod(s, b, &deficit);
    if (s.esd.energy_J - deficit < e_min - 1e-9) return false;
  }
  return true;
}

}  // namespace

const char* PolicyName(PolicyKind kind) { return Info(kind).name; }

PolicyKind ParsePolicy(std::string_view name) {
  for (const auto& p : kPolicies) {
    if (name == p.name) return p.kind;
  }
  Fail(ErrorCode::kInvalidArgument, "unknown policy '" + std::string(name) +
                                        "' (expected D-FCU-WU, C-FCU-WU, D-FCA-WU, C-FCA-WU or C-FCA-WA)");
}

std::vector<PolicyKind> AllPolicies() {
  std::vector<PolicyKind> out;
  for (const auto& p : kPolicies) out.push_back(p.kind);
  return out;
}

bool IsCentralized(PolicyKind kind) { return Info(kind).centralized; }
bool UsesFcaPlanner(PolicyKind kind) { return Info(kind).fca; }
bool IsWorkloadAware(PolicyKind kind) { return Info(kind).workload_aware; }
int PolicySimplicity(PolicyKind kind) { return Info(kind).simplicity; }

const char* PlannerBranchName(PlannerBranch branch) {
  switch (branch) {
    case PlannerBranch::kFcuEnergy: return "fcu-energy";
    case PlannerBranch::kFcuRamp: return "fcu-ramp";
    case PlannerBranch::kFca: return "fca";
    case PlannerBranch::kFcaFallback: return "fca-fallback";
    case PlannerBranch::kWa: return "wa";
    case PlannerBranch::kWaUncapped: return "wa-uncapped";
    case PlannerBranch::kWaDegraded: return "wa-degraded";
  }
  return "?";
}

double FcuRampBudget(const PlannerInputs& in, const PolicyConstants& c) {
  return in.p_fc_W + c.following_W_per_s * c.t_capping_s;
}

double PlanFcu(const PlannerInputs& in, const PolicyConstants& c, PlannerBranch* branch) {
  const double usable = in.e_measured_J - c.e_min_J;
  if (c.quantum_J <= 0.0 || usable < 0.5 * c.quantum_J) {
    if (branch) *branch = PlannerBranch::kFcuRamp;
    return FcuRampBudget(in, c);
  }
  if (branch) *branch = PlannerBranch::kFcuEnergy;
  return in.p_fc_W + c.eta * usable / c.t_capping_s;
}

double PlanFca(const PlannerInputs& in, const PolicyContext& ctx, PlannerBranch* branch) {
  if (ctx.model == nullptr) Fail(ErrorCode::kInvalidArgument, "fca planner: no ESD model");
  const PolicyConstants& c = ctx.constants;
  try {
    double hi = c.rack_max_W;
    double lo = std::min(FcuRampBudget(in, c), hi);
    if (branch) *branch = PlannerBranch::kFca;
    if (OnePeriodFeasible(*ctx.model, in.plant, hi, c.e_min_J)) return hi;
    if (!OnePeriodFeasible(*ctx.model, in.plant, lo, c.e_min_J)) return lo;
    while (hi - lo > ctx.fca_resolution_W) {
      const double mid = 0.5 * (lo + hi);
      if (OnePeriodFeasible(*ctx.model, in.plant, mid, c.e_min_J)) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return lo;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kModelDivergence) throw;
    if (branch) *branch = PlannerBranch::kFcaFallback;
    return PlanFcu(in, c);
  }
}

HorizonProblem BuildWaProblem(const PlannerInputs& in, const PolicyContext& ctx) {
  const PolicyConstants& c = ctx.constants;
  const auto horizon = std::min<std::size_t>(static_cast<std::size_t>(std::max(ctx.wa.horizon, 1)),
                                             in.future_intensity.size());
  const int levels = std::max(ctx.wa.levels, 2);
  const double n = static_cast<double>(in.servers());
  HorizonProblem problem;
  problem.utility.resize(horizon);
  problem.budget_W.resize(horizon);
  for (std::size_t k = 0; k < horizon; ++k) {
    const auto& lambda = in.future_intensity[k];
    const double demand = RackDemand(ctx.server, lambda);
    const double mean = MeanOf(lambda);
    const double ramp = in.p_fc_W + static_cast<double>(k + 1) * c.following_W_per_s * c.t_capping_s;
    const double floor = std::max(std::min(demand, ramp), n * ctx.server.p_idle_W);
    auto& b = problem.budget_W[k];
    auto& u = problem.utility[k];
    if (demand - floor <= 1e-6) {
      b.push_back(demand);
    } else {
      for (int l = 0; l < levels; ++l) {
        b.push_back(floor + (demand - floor) * l / (levels - 1));
      }
    }
    for (double budget : b) u.push_back(EvaluateUtility(ctx.server, budget / n, mean).success_rate);
  }
  return problem;
}

std::optional<WaPlan> PlanFcaWa(const PlannerInputs& in, const PolicyContext& ctx,
                                std::span<const int> warm_start) {
  if (ctx.model == nullptr) Fail(ErrorCode::kInvalidArgument, "workload-aware planner: no ESD model");
  if (in.future_intensity.empty()) {
    Fail(ErrorCode::kPrecondition, "workload-aware planner: future intensities are required");
  }
  const HorizonProblem problem = BuildWaProblem(in, ctx);
  const std::size_t periods = problem.periods();
  const double e_min = ctx.constants.e_min_J;
  WaPlan plan;

  std::vector<double> top(periods);
  for (std::size_t k = 0; k < periods; ++k) top[k] = problem.budget_W[k].back();
  if (PlanFeasibleFromScratch(*ctx.model, in.plant, top, e_min)) {
    plan.budgets_W = top;
    plan.uncapped = true;
    plan.checks = 1;
    for (std::size_t k = 0; k < periods; ++k) plan.levels.push_back(problem.levels(k) - 1);
    return plan;
  }

  const PlantState start = ctx.model->MeasuredStart(in.plant);
  ModelPlanFeasibility feasibility(*ctx.model, start, problem, e_min);
  const HorizonSolution sol = SolveHorizon(problem, feasibility, warm_start, ctx.wa.solver);
  if (!sol.feasible) return std::nullopt;
  plan.levels = sol.plan;
  plan.checks = sol.checks + 1;
  for (std::size_t k = 0; k < periods; ++k) {
    plan.budgets_W.push_back(problem.budget_W[k][static_cast<std::size_t>(sol.plan[k])]);
  }
  return plan;
}

std::vector<double> AssignCentralized(double rack_budget_W, const PlannerInputs& in,
                                      const ServerModel& server, bool use_next_intensity) {
  if (use_next_intensity && in.future_intensity.empty()) {
    Fail(ErrorCode::kPrecondition, "workload-aware assignment: next-period intensities are required");
  }
  const std::vector<double>& lambda = use_next_intensity ? in.future_intensity.front() : in.intensity;
  const std::size_t n = lambda.size();
  if (n == 0) Fail(ErrorCode::kInvalidArgument, "assignment: no servers");
  const double idle_total = server.p_idle_W * static_cast<double>(n);
  if (rack_budget_W < idle_total - 1e-9) {
    Fail(ErrorCode::kInfeasibleBudget, "assignment: rack budget " + std::to_string(rack_budget_W) +
                                           " W is below total idle power " +
                                           std::to_string(idle_total) + " W");
  }
  std::vector<double> out(n, server.p_idle_W);
  std::vector<bool> active(n, true);
  double remaining = std::max(0.0, rack_budget_W - idle_total);
  bool clamped_any = true;
  while (clamped_any) {
    clamped_any = false;
    double weight = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (active[i]) weight += lambda[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      const double need = DemandedPower(server, lambda[i]) - server.p_idle_W;
      const double share = weight > 0.0 ? remaining * lambda[i] / weight : 0.0;
      if (share >= need) {
        out[i] = server.p_idle_W + need;
        active[i] = false;
        clamped_any = true;
      }
    }
    if (clamped_any) {
      // Active entries still hold idle power only.
      remaining = std::max(0.0, rack_budget_W - std::accumulate(out.begin(), out.end(), 0.0));
    }
  }
  double weight = 0.0;
  std::size_t active_count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (active[i]) {
      weight += lambda[i];
      ++active_count;
    }
  }
  if (active_count > 0) {
    for (std::size_t i = 0; i < n; ++i) {
      if (active[i]) out[i] = server.p_idle_W + (weight > 0.0 ? remaining * lambda[i] / weight : 0.0);
    }
    return out;
  }
  // Every demand is met; leftover headroom follows intensity.
  const double total_lambda = std::accumulate(lambda.begin(), lambda.end(), 0.0);
  const double headroom = rack_budget_W - std::accumulate(out.begin(), out.end(), 0.0);
  if (headroom > 0.0) {
    for (std::size_t i = 0; i < n; ++i) {
      out[i] += total_lambda > 0.0 ? headroom * lambda[i] / total_lambda
                                   : headroom / static_cast<double>(n);
    }
  }
  return out;
}

std::vector<double> AssignDecentralized(double rack_budget_W, const PlannerInputs& in,
                                        const ServerModel& server, bool* equal_split) {
  const std::size_t n = in.server_power_W.size();
  if (n == 0) Fail(ErrorCode::kInvalidArgument, "assignment: no servers");
  const double idle_total = server.p_idle_W * static_cast<double>(n);
  if (rack_budget_W < idle_total - 1e-9) {
    Fail(ErrorCode::kInfeasibleBudget, "assignment: rack budget " + std::to_string(rack_budget_W) +
                                           " W is below total idle power " +
                                           std::to_string(idle_total) + " W");
  }
  double above_idle = 0.0;
  for (double p : in.server_power_W) above_idle += std::max(0.0, p - server.p_idle_W);
  std::vector<double> out(n);
  const double dynamic = rack_budget_W - idle_total;
  if (equal_split) *equal_split = above_idle <= 0.0;
  if (above_idle <= 0.0) {
    std::fill(out.begin(), out.end(), rack_budget_W / static_cast<double>(n));
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = server.p_idle_W + dynamic * std::max(0.0, in.server_power_W[i] - server.p_idle_W) / above_idle;
  }
  return out;
}

PowerCapper::PowerCapper(PolicyKind kind, PolicyContext ctx) : kind_(kind), ctx_(std::move(ctx)) {
  if (UsesFcaPlanner(kind) && ctx_.model == nullptr) {
    Fail(ErrorCode::kInvalidArgument, "policy: FCA planners need an ESD model");
  }
}

double PowerCapper::PlanOnce(const PlannerInputs& in, PlannerBranch* branch) {
  if (!UsesFcaPlanner(kind_)) return PlanFcu(in, ctx_.constants, branch);
  if (!IsWorkloadAware(kind_)) return PlanFca(in, ctx_, branch);
  std::optional<WaPlan> plan;
  try {
    plan = PlanFcaWa(in, ctx_, warm_);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kModelDivergence) throw;
  }
  if (!plan) {
    warm_.clear();
    PlannerBranch ignored;
    const double budget = PlanFca(in, ctx_, &ignored);
    *branch = PlannerBranch::kWaDegraded;
    return budget;
  }
  *branch = plan->uncapped ? PlannerBranch::kWaUncapped : PlannerBranch::kWa;
  warm_.assign(plan->levels.begin() + 1, plan->levels.end());
  if (!plan->levels.empty()) warm_.push_back(plan->levels.back());
  return plan->budgets_W.front();
}

PolicyDecision PowerCapper::Decide(const PlannerInputs& in) {
  const std::size_t n = in.servers();
  if (n == 0) Fail(ErrorCode::kInvalidArgument, "policy: no servers");
  if (in.intensity.size() != n) {
    Fail(ErrorCode::kInvalidArgument, "policy: intensity and server power sizes differ");
  }
  if (IsWorkloadAware(kind_) && in.future_intensity.empty()) {
    Fail(ErrorCode::kPrecondition, std::string(PolicyName(kind_)) + ": future intensities are required");
  }
  PolicyDecision d;
  d.rack_budget_W = PlanOnce(in, &d.branch);
  if (!IsCentralized(kind_)) {
    // Every server runs the same planner on the same broadcast inputs.
    const std::size_t replicas =
        ctx_.planner_replicas <= 0 ? n : std::min<std::size_t>(n, static_cast<std::size_t>(ctx_.planner_replicas));
    for (std::size_t r = 1; r < replicas; ++r) {
      PlannerBranch branch;
      if (PlanOnce(in, &branch) != d.rack_budget_W) {
        Fail(ErrorCode::kInternal, "policy: decentralized planner replicas disagree");
      }
    }
    d.server_budget_W = AssignDecentralized(d.rack_budget_W, in, ctx_.server, &d.equal_split);
    d.messages = static_cast<int>(n);
  } else {
    d.server_budget_W = AssignCentralized(d.rack_budget_W, in, ctx_.server, IsWorkloadAware(kind_));
    d.messages = static_cast<int>(n) + 1;
  }
  return d;
}

PolicyDecision RunPolicy(PolicyKind kind, const PlannerInputs& in, const PolicyContext& ctx) {
  PowerCapper capper(kind, ctx);
  return capper.Decide(in);
}

}  // namespace fcsize
