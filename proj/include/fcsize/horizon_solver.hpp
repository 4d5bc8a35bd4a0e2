#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fcsize {

// Discrete budget plan over a horizon: period k picks a level in
// [0, levels(k)). Utility and budget are nondecreasing in the level.
struct HorizonProblem {
  std::vector<std::vector<double>> utility;
  std::vector<std::vector<double>> budget_W;

  std::size_t periods() const { return utility.size(); }
  int levels(std::size_t k) const { return static_cast<int>(utility[k].size()); }
  double Objective(std::span<const int> plan) const;
  void Validate() const;
};

// Feasibility oracle for whole plans. Commit marks a plan as the new
// reference so implementations can reuse work on shared prefixes.
class PlanFeasibility {
 public:
  virtual ~PlanFeasibility() = default;
  virtual bool Feasible(std::span<const int> plan) = 0;
  virtual void Commit(std::span<const int> plan) { (void)plan; }
};

struct HorizonSolverOptions {
  int max_sweeps = 6;
  // Upper bound on feasibility checks spent in pairwise exchanges.
  int max_exchange_checks = 100;
};

struct HorizonSolution {
  std::vector<int> plan;
  double objective = 0.0;
  bool feasible = false;
  int checks = 0;
};

// Seeds from the better of a marginal-utility threshold plan and the warm
// start, raises each period as far as feasibility allows, then tries
// exchanges that move levels between periods. Returns feasible=false when even
// the all-zero plan is infeasible.
HorizonSolution SolveHorizon(const HorizonProblem& problem, PlanFeasibility& feasibility,
                             std::span<const int> warm_start = {},
                             const HorizonSolverOptions& options = {});

}  // namespace fcsize
