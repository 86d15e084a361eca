#include "peakgrid/follower.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace peakgrid {

namespace {

struct SlotCost {
  double cost;
  int offset;
};

// Greedy fill of one continuous knapsack: cheapest unit cost first, earliest
// slot on ties, exactly `demand` in total. Returns the marginal unit cost
// (the demand dual) and writes per-slot takes into `take`.
double greedy_fill(const Job& job, const std::vector<double>& unit_cost,
                   std::vector<double>* take) {
  std::vector<SlotCost> order;
  order.reserve(unit_cost.size());
  for (int t = 0; t < static_cast<int>(unit_cost.size()); ++t)
    order.push_back({unit_cost[t], t});
  std::stable_sort(order.begin(), order.end(),
                   [](const SlotCost& a, const SlotCost& b) {
                     if (a.cost != b.cost) return a.cost < b.cost;
                     return a.offset < b.offset;
                   });
  double remaining = job.demand;
  double marginal = 0.0;
  for (const SlotCost& sc : order) {
    if (remaining <= 0.0) break;
    const double amount = std::min(job.power_cap, remaining);
    (*take)[sc.offset] = amount;
    remaining -= amount;
    marginal = sc.cost;
  }
  if (remaining > 1e-9)
    throw std::runtime_error("job demand exceeds window capacity: " +
                             job.appliance);
  return marginal;
}

}  // namespace

double KktReport::worst() const {
  return std::max({primal_residual, dual_residual, comp_residual});
}

FollowerSolution best_response_mp(const Instance& inst,
                                  const PriceVector& prices) {
  if (static_cast<int>(prices.p.size()) != inst.horizon)
    throw std::invalid_argument("price vector length mismatch");
  const auto refs = flatten(inst);
  FollowerSolution sol;
  sol.schedule = zero_schedule(inst, false);
  sol.demand_dual.assign(refs.size(), 0.0);
  sol.cap_dual.resize(refs.size());
  for (size_t k = 0; k < refs.size(); ++k) {
    const Job& job = *refs[k].job;
    const int n = job.num_slots();
    std::vector<double> cost(n);
    for (int t = 0; t < n; ++t)
      cost[t] = prices.p[job.tw_begin + t] +
                inconvenience_cost(job, refs[k].lambda, job.tw_begin + t);
    const double v = greedy_fill(job, cost, &sol.schedule.x[k]);
    sol.demand_dual[k] = v;
    sol.cap_dual[k].assign(n, 0.0);
    for (int t = 0; t < n; ++t) {
      sol.cap_dual[k][t] = std::max(0.0, v - cost[t]);
      sol.objective += cost[t] * sol.schedule.x[k][t];
    }
  }
  return sol;
}

FollowerSolution best_response_cp(const Instance& inst,
                                  const PriceVector& prices) {
  if (!inst.has_competitor())
    throw std::invalid_argument("competitor prices required for CP response");
  if (static_cast<int>(prices.p.size()) != inst.horizon)
    throw std::invalid_argument("price vector length mismatch");
  const std::vector<double>& comp = *inst.competitor_prices;
  const auto refs = flatten(inst);
  FollowerSolution sol;
  sol.schedule = zero_schedule(inst, true);
  sol.demand_dual.assign(refs.size(), 0.0);
  sol.cap_dual.resize(refs.size());
  for (size_t k = 0; k < refs.size(); ++k) {
    const Job& job = *refs[k].job;
    const int n = job.num_slots();
    std::vector<double> cost(n);
    for (int t = 0; t < n; ++t) {
      const int h = job.tw_begin + t;
      cost[t] = std::min(prices.p[h], comp[h]) +
                inconvenience_cost(job, refs[k].lambda, h);
    }
    std::vector<double> take(n, 0.0);
    const double v = greedy_fill(job, cost, &take);
    sol.demand_dual[k] = v;
    sol.cap_dual[k].assign(n, 0.0);
    for (int t = 0; t < n; ++t) {
      const int h = job.tw_begin + t;
      if (prices.p[h] <= comp[h])
        sol.schedule.x[k][t] = take[t];
      else
        sol.schedule.x_bar[k][t] = take[t];
      sol.cap_dual[k][t] = std::max(0.0, v - cost[t]);
      sol.objective += cost[t] * take[t];
    }
  }
  return sol;
}

double follower_objective(const Instance& inst, const PriceVector& prices,
                          const Schedule& schedule) {
  if (schedule.has_competitor() && !inst.has_competitor())
    throw std::invalid_argument(
        "schedule has competitor supply but instance has no competitor prices");
  const auto refs = flatten(inst);
  if (schedule.x.size() != refs.size())
    throw std::invalid_argument("schedule size mismatch");
  double total = 0.0;
  for (size_t k = 0; k < refs.size(); ++k) {
    const Job& job = *refs[k].job;
    for (int t = 0; t < job.num_slots(); ++t) {
      const int h = job.tw_begin + t;
      const double c = inconvenience_cost(job, refs[k].lambda, h);
      total += (prices.p[h] + c) * schedule.x[k][t];
      if (schedule.has_competitor())
        total += ((*inst.competitor_prices)[h] + c) * schedule.x_bar[k][t];
    }
  }
  return total;
}

KktReport kkt_check(const Instance& inst, const PriceVector& prices,
                    const Schedule& schedule,
                    const std::vector<std::vector<double>>& cap_dual,
                    const std::vector<double>& demand_dual) {
  const auto refs = flatten(inst);
  const bool cp = schedule.has_competitor();
  KktReport rep;
  auto note = [&rep](double residual, double* bucket, const std::string& what) {
    if (residual > *bucket) {
      *bucket = residual;
    }
    if (residual >= rep.worst() && residual > 0.0) rep.worst_check = what;
  };
  for (size_t k = 0; k < refs.size(); ++k) {
    const Job& job = *refs[k].job;
    const double v = demand_dual[k];
    note(std::max(0.0, -v), &rep.dual_residual, "demand dual sign");
    double supplied = 0.0;
    for (int t = 0; t < job.num_slots(); ++t) {
      const int h = job.tw_begin + t;
      const double c = inconvenience_cost(job, refs[k].lambda, h);
      const double x = schedule.x[k][t];
      const double xb = cp ? schedule.x_bar[k][t] : 0.0;
      const double w = cap_dual[k][t];
      supplied += x + xb;
      note(std::max(0.0, -x), &rep.primal_residual, "supply sign");
      note(std::max(0.0, -xb), &rep.primal_residual, "competitor supply sign");
      note(std::max(0.0, x + xb - job.power_cap), &rep.primal_residual,
           "power cap");
      note(std::max(0.0, -w), &rep.dual_residual, "cap dual sign");
      // Reduced cost of x must be non-negative: p + C + w - v >= 0.
      const double slack = prices.p[h] + c + w - v;
      note(std::max(0.0, -slack), &rep.dual_residual, "dual feasibility x");
      note(std::min(std::max(0.0, x), std::max(0.0, slack)),
           &rep.comp_residual, "complementarity x");
      if (cp) {
        const double slack_bar = (*inst.competitor_prices)[h] + c + w - v;
        note(std::max(0.0, -slack_bar), &rep.dual_residual,
             "dual feasibility x_bar");
        note(std::min(std::max(0.0, xb), std::max(0.0, slack_bar)),
             &rep.comp_residual, "complementarity x_bar");
      }
      note(std::min(std::max(0.0, w),
                    std::max(0.0, job.power_cap - x - xb)),
           &rep.comp_residual, "complementarity power cap");
    }
    note(std::max(0.0, job.demand - supplied), &rep.primal_residual,
         "demand satisfaction");
    note(std::min(std::max(0.0, v), std::max(0.0, supplied - job.demand)),
         &rep.comp_residual, "complementarity demand");
  }
  return rep;
}

}  // namespace peakgrid
