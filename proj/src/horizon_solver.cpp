#include "fcsize/horizon_solver.hpp"

#include <algorithm>
#include <optional>

#include "fcsize/error.hpp"

namespace fcsize {

double HorizonProblem::Objective(std::span<const int> plan) const {
  double sum = 0.0;
  for (std::size_t k = 0; k < plan.size(); ++k) sum += utility[k][static_cast<std::size_t>(plan[k])];
  return sum;
}

void HorizonProblem::Validate() const {
  if (utility.empty()) Fail(ErrorCode::kInvalidArgument, "horizon: no periods");
  if (utility.size() != budget_W.size()) {
    Fail(ErrorCode::kInvalidArgument, "horizon: utility and budget tables differ in length");
  }
  for (std::size_t k = 0; k < utility.size(); ++k) {
    if (utility[k].empty() || utility[k].size() != budget_W[k].size()) {
      Fail(ErrorCode::kInvalidArgument, "horizon: period tables must be non-empty and aligned");
    }
    for (std::size_t l = 1; l < utility[k].size(); ++l) {
      if (!(budget_W[k][l] > budget_W[k][l - 1])) {
        Fail(ErrorCode::kInvalidArgument, "horizon: budgets must increase with level");
      }
    }
  }
}

namespace {

class Search {
 public:
  Search(const HorizonProblem& problem, PlanFeasibility& feasibility)
      : problem_(problem), feasibility_(feasibility) {}

  bool Check(std::span<const int> plan) {
    ++checks_;
    return feasibility_.Feasible(plan);
  }

  // Highest feasible level for period k, given plan[k] itself is feasible.
  int Raise(std::vector<int>& plan, std::size_t k) {
    int lo = plan[k];
    int hi = problem_.levels(k) - 1;
    while (lo < hi) {
      const int mid = (lo + hi + 1) / 2;
      plan[k] = mid;
      if (Check(plan)) {
        lo = mid;
      } else {
        hi = mid - 1;
      }
    }
    plan[k] = lo;
    return lo;
  }

  bool Sweep(std::vector<int>& plan) {
    bool changed = false;
    for (std::size_t k = 0; k < plan.size(); ++k) {
      const int before = plan[k];
      if (Raise(plan, k) > before) {
        changed = true;
        feasibility_.Commit(plan);
      }
    }
    return changed;
  }

  std::vector<int> ThresholdPlan(double theta) const {
    std::vector<int> plan(problem_.periods(), 0);
    for (std::size_t k = 0; k < plan.size(); ++k) {
      for (int l = problem_.levels(k) - 1; l >= 1; --l) {
        if (Gain(k, l) >= theta) {
          plan[k] = l;
          break;
        }
      }
    }
    return plan;
  }

  // Per-period maximizer of utility - price * budget; ties go to the lower
  // level so raising the price never raises a level.
  std::vector<int> PricePlan(double price) const {
    std::vector<int> plan(problem_.periods(), 0);
    for (std::size_t k = 0; k < plan.size(); ++k) {
      double best = problem_.utility[k][0] - price * problem_.budget_W[k][0];
      for (int l = 1; l < problem_.levels(k); ++l) {
        const auto i = static_cast<std::size_t>(l);
        const double v = problem_.utility[k][i] - price * problem_.budget_W[k][i];
        if (v > best) {
          best = v;
          plan[k] = l;
        }
      }
    }
    return plan;
  }

  // Raises periods other than `fixed` one level at a time, always taking the
  // step with the best marginal gain that stays feasible.
  void Refill(std::vector<int>& plan, std::size_t fixed) {
    std::vector<bool> blocked(plan.size(), false);
    blocked[fixed] = true;
    while (true) {
      std::size_t pick = plan.size();
      double best = -1.0;
      for (std::size_t k = 0; k < plan.size(); ++k) {
        if (blocked[k] || plan[k] + 1 >= problem_.levels(k)) continue;
        const double g = Gain(k, plan[k] + 1);
        if (g > best) {
          best = g;
          pick = k;
        }
      }
      if (pick == plan.size()) return;
      ++plan[pick];
      if (!Check(plan)) {
        --plan[pick];
        blocked[pick] = true;
      }
    }
  }

  double Gain(std::size_t k, int l) const {
    const auto i = static_cast<std::size_t>(l);
    return (problem_.utility[k][i] - problem_.utility[k][i - 1]) /
           (problem_.budget_W[k][i] - problem_.budget_W[k][i - 1]);
  }

  int checks() const { return checks_; }

 private:
  const HorizonProblem& problem_;
  PlanFeasibility& feasibility_;
  int checks_ = 0;
};

// Binary search for the smallest key whose plan is feasible, assuming plans
// only lose levels as the key grows.
template <typename MakePlan>
std::optional<std::vector<int>> SmallestFeasible(Search& search, std::vector<double> keys,
                                                 MakePlan make_plan) {
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  std::size_t lo = 0;
  std::size_t hi = keys.size();
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (search.Check(make_plan(keys[mid]))) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  if (hi == keys.size()) return std::nullopt;
  return make_plan(keys[hi]);
}

}  // namespace

HorizonSolution SolveHorizon(const HorizonProblem& problem, PlanFeasibility& feasibility,
                             std::span<const int> warm_start, const HorizonSolverOptions& options) {
  problem.Validate();
  const std::size_t periods = problem.periods();
  Search search(problem, feasibility);
  HorizonSolution out;
  std::vector<int> plan(periods, 0);
  if (!search.Check(plan)) {
    out.plan = plan;
    out.objective = problem.Objective(plan);
    out.checks = search.checks();
    return out;
  }

  // Smallest marginal-gain threshold whose plan is feasible.
  std::vector<double> gains;
  for (std::size_t k = 0; k < periods; ++k) {
    for (int l = 1; l < problem.levels(k); ++l) gains.push_back(search.Gain(k, l));
  }
  const auto threshold = SmallestFeasible(search, gains, [&](double g) { return search.ThresholdPlan(g); });
  if (threshold) plan = *threshold;

  // Same search over prices (Lagrangian seed); the breakpoints are the slopes
  // between any two levels, which also covers non-concave utility tables.
  std::vector<double> prices;
  for (std::size_t k = 0; k < periods; ++k) {
    const auto& u = problem.utility[k];
    const auto& b = problem.budget_W[k];
    for (std::size_t a = 0; a < u.size(); ++a) {
      for (std::size_t c = a + 1; c < u.size(); ++c) {
        const double slope = (u[c] - u[a]) / (b[c] - b[a]);
        if (slope > 0.0) prices.push_back(slope);
      }
    }
  }
  const auto priced = SmallestFeasible(search, prices, [&](double p) { return search.PricePlan(p); });
  if (priced && problem.Objective(*priced) > problem.Objective(plan)) plan = *priced;

  if (warm_start.size() == periods) {
    std::vector<int> warm(periods);
    for (std::size_t k = 0; k < periods; ++k) {
      warm[k] = std::clamp(warm_start[k], 0, problem.levels(k) - 1);
    }
    if (problem.Objective(warm) > problem.Objective(plan) && search.Check(warm)) plan = warm;
  }
  feasibility.Commit(plan);

  for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
    if (!search.Sweep(plan)) break;
  }

  // Pairwise re-optimization: for each pair (j, k) move j to every other level,
  // drop k to the floor, then either raise k alone or refill every period but j
  // greedily; keep the best.
  const int exchange_start = search.checks();
  auto budget_left = [&] { return search.checks() - exchange_start < options.max_exchange_checks; };
  double objective = problem.Objective(plan);
  bool improved = true;
  while (improved && budget_left()) {
    improved = false;
    for (std::size_t j = 0; j < periods && budget_left(); ++j) {
      // Fix j at each other level, drop every other period to its floor and
      // refill greedily.
      std::vector<int> rebuilt;
      double rebuilt_value = objective;
      for (int l = 0; l < problem.levels(j) && budget_left(); ++l) {
        if (l == plan[j]) continue;
        std::vector<int> trial(periods, 0);
        trial[j] = l;
        if (!search.Check(trial)) break;
        search.Refill(trial, j);
        const double value = problem.Objective(trial);
        if (value > rebuilt_value + 1e-12) {
          rebuilt = trial;
          rebuilt_value = value;
        }
      }
      if (!rebuilt.empty()) {
        plan = rebuilt;
        feasibility.Commit(plan);
        search.Sweep(plan);
        objective = problem.Objective(plan);
        improved = true;
      }
      for (std::size_t k = j + 1; k < periods && budget_left(); ++k) {
        std::vector<int> best;
        double best_value = objective;
        for (int l = 0; l < problem.levels(j) && budget_left(); ++l) {
          if (l == plan[j]) continue;
          std::vector<int> trial = plan;
          trial[j] = l;
          trial[k] = 0;
          if (!search.Check(trial)) break;
          std::vector<int> raised = trial;
          search.Raise(raised, k);
          search.Refill(trial, j);
          for (const auto* t : {&raised, &trial}) {
            const double value = problem.Objective(*t);
            if (value > best_value + 1e-12) {
              best = *t;
              best_value = value;
            }
          }
        }
        if (!best.empty()) {
          plan = best;
          feasibility.Commit(plan);
          search.Sweep(plan);
          objective = problem.Objective(plan);
          improved = true;
        }
      }
    }
  }

  out.plan = plan;
  out.objective = problem.Objective(plan);
  out.feasible = true;
  out.checks = search.checks();
  return out;
}

}  // namespace fcsize
