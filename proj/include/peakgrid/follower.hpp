#pragma once

#include <string>
#include <vector>

#include "peakgrid/model.hpp"

namespace peakgrid {

// Exact optimum of the scheduling level for fixed prices, together with the
// LP duals certifying it: demand_dual[k] is the marginal cost of one more
// kWh for flat job k, cap_dual[k][t] prices the per-slot power limit.
struct FollowerSolution {
  Schedule schedule;
  double objective = 0.0;
  std::vector<double> demand_dual;
  std::vector<std::vector<double>> cap_dual;
};

// Monopoly response: per job, fill the cheapest (price + inconvenience)
// slots at the power cap until demand is met; ties go to the earliest slot.
FollowerSolution best_response_mp(const Instance& inst,
                                  const PriceVector& prices);

// Two-supplier response: slots are ranked by min(price, competitor price)
// plus inconvenience; within a slot the cheaper supplier serves the load,
// the leader on price ties.
FollowerSolution best_response_cp(const Instance& inst,
                                  const PriceVector& prices);

// Total disutility of an arbitrary schedule at the given prices.
double follower_objective(const Instance& inst, const PriceVector& prices,
                          const Schedule& schedule);

struct KktReport {
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double comp_residual = 0.0;
  std::string worst_check;

  double worst() const;
};

// Optimality certificate for (schedule, duals) at the given prices.
// Complementarity is measured in min-form: min(primal slack, dual value).
KktReport kkt_check(const Instance& inst, const PriceVector& prices,
                    const Schedule& schedule,
                    const std::vector<std::vector<double>>& cap_dual,
                    const std::vector<double>& demand_dual);

}  // namespace peakgrid
