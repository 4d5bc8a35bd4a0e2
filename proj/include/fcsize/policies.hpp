#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fcsize/horizon_solver.hpp"
#include "fcsize/plant.hpp"
#include "fcsize/workload.hpp"

namespace fcsize {

// Decentralized/centralized, utilization-driven (FCU) or ESD-model-driven
// (FCA) planner, workload-unaware (WU) or workload-aware (WA) assignment.
enum class PolicyKind { kDFcuWu, kCFcuWu, kDFcaWu, kCFcaWu, kCFcaWa };

const char* PolicyName(PolicyKind kind);
PolicyKind ParsePolicy(std::string_view name);
std::vector<PolicyKind> AllPolicies();
bool IsCentralized(PolicyKind kind);
bool UsesFcaPlanner(PolicyKind kind);
bool IsWorkloadAware(PolicyKind kind);
// Order used to break ties between equally small capacities.
int PolicySimplicity(PolicyKind kind);

struct PolicyConstants {
  double eta = 0.95;
  double e_min_J = 0.0;
  double quantum_J = 0.0;
  double t_capping_s = 2.0;
  double following_W_per_s = 16.0;
  // Upper end of the budget search (every server at peak).
  double rack_max_W = 12500.0;
};

struct PlannerInputs {
  double p_fc_W = 0.0;
  double e_measured_J = 0.0;
  PlantState plant;
  std::vector<double> server_power_W;
  std::vector<double> intensity;
  // future_intensity[k][i]: server i during the (k+1)-th coming period.
  std::vector<std::vector<double>> future_intensity;

  std::size_t servers() const { return server_power_W.size(); }
};

struct WaOptions {
  int horizon = 30;
  int levels = 50;
  HorizonSolverOptions solver;
};

struct PolicyContext {
  const EsdEnergyModel* model = nullptr;
  ServerModel server;
  PolicyConstants constants;
  WaOptions wa;
  double fca_resolution_W = 1.0;
  // Planner copies run by decentralized kinds; 0 means one per server.
  int planner_replicas = 0;
};

enum class PlannerBranch { kFcuEnergy, kFcuRamp, kFca, kFcaFallback, kWa, kWaUncapped, kWaDegraded };
const char* PlannerBranchName(PlannerBranch branch);

struct PolicyDecision {
  double rack_budget_W = 0.0;
  std::vector<double> server_budget_W;
  int messages = 0;
  PlannerBranch branch = PlannerBranch::kFcuEnergy;
  bool equal_split = false;
};

// Budget from measured ESD energy spread over one period, or, when the ESD is
// exhausted, what the fuel cell can add by ramping.
double PlanFcu(const PlannerInputs& in, const PolicyConstants& c, PlannerBranch* branch = nullptr);
double FcuRampBudget(const PlannerInputs& in, const PolicyConstants& c);

// Largest budget (to fca_resolution_W) whose one-period prediction keeps the
// ESD at or above e_min. Falls back to PlanFcu if the model diverges.
double PlanFca(const PlannerInputs& in, const PolicyContext& ctx, PlannerBranch* branch = nullptr);

struct WaPlan {
  std::vector<double> budgets_W;
  std::vector<int> levels;
  bool uncapped = false;
  int checks = 0;
};

// Horizon plan maximizing summed per-period success. Empty when even the
// slowest admissible plan breaks the ESD floor.
std::optional<WaPlan> PlanFcaWa(const PlannerInputs& in, const PolicyContext& ctx,
                                std::span<const int> warm_start = {});

// Budget tables for the workload-aware horizon (exposed for tests).
HorizonProblem BuildWaProblem(const PlannerInputs& in, const PolicyContext& ctx);

// Idle power first, dynamic power in proportion to intensity, clamped at each
// server's demand with the excess redistributed; headroom left once every
// demand is met is spread in proportion to intensity.
std::vector<double> AssignCentralized(double rack_budget_W, const PlannerInputs& in,
                                      const ServerModel& server, bool use_next_intensity);

// Split of the dynamic budget in proportion to each server's non-idle power.
// Equal split when the whole rack is idle.
std::vector<double> AssignDecentralized(double rack_budget_W, const PlannerInputs& in,
                                        const ServerModel& server, bool* equal_split = nullptr);

// Stateful runner (keeps the workload-aware warm start between periods).
class PowerCapper {
 public:
  PowerCapper(PolicyKind kind, PolicyContext ctx);

  PolicyDecision Decide(const PlannerInputs& in);
  void Reset() { warm_.clear(); }

  PolicyKind kind() const { return kind_; }

 private:
  double PlanOnce(const PlannerInputs& in, PlannerBranch* branch);

  PolicyKind kind_;
  PolicyContext ctx_;
  std::vector<int> warm_;
};

PolicyDecision RunPolicy(PolicyKind kind, const PlannerInputs& in, const PolicyContext& ctx);

}  // namespace fcsize
