#include "peakgrid/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace peakgrid {

namespace {

void check_schedule(const Instance& inst, const Schedule& s) {
  const auto refs = flatten(inst);
  if (s.x.size() != refs.size())
    throw std::invalid_argument("schedule does not match the instance");
  const double tol = 1e-6;
  for (size_t k = 0; k < refs.size(); ++k) {
    const Job& job = *refs[k].job;
    if (static_cast<int>(s.x[k].size()) != job.num_slots())
      throw std::invalid_argument("schedule window size mismatch");
    double supplied = 0.0;
    for (int t = 0; t < job.num_slots(); ++t) {
      const double xb = s.has_competitor() ? s.x_bar[k][t] : 0.0;
      if (s.x[k][t] < -tol || xb < -tol)
        throw std::invalid_argument("negative power in schedule");
      if (s.x[k][t] + xb > job.power_cap + tol)
        throw std::invalid_argument("schedule exceeds power cap");
      supplied += s.x[k][t] + xb;
    }
    if (supplied < job.demand - tol)
      throw std::invalid_argument("schedule does not meet demand");
  }
}

}  // namespace

MetricsReport evaluate(const Instance& inst, const PriceVector& prices,
                       const Schedule& schedule) {
  check_schedule(inst, schedule);
  const auto refs = flatten(inst);
  MetricsReport r;
  for (size_t k = 0; k < refs.size(); ++k) {
    const Job& job = *refs[k].job;
    for (int t = 0; t < job.num_slots(); ++t) {
      const int h = job.tw_begin + t;
      const double c = inconvenience_cost(job, refs[k].lambda, h);
      r.eb += prices.p[h] * schedule.x[k][t];
      r.ic += c * schedule.x[k][t];
      if (schedule.has_competitor()) {
        r.eb_total += (*inst.competitor_prices)[h] * schedule.x_bar[k][t];
        r.ic += c * schedule.x_bar[k][t];
      }
    }
  }
  r.eb_total += r.eb;
  r.tc = r.eb_total + r.ic;
  const auto lead = leader_load(inst, schedule);
  const auto total = total_load(inst, schedule);
  r.peak_load = lead.empty() ? 0.0 : *std::max_element(lead.begin(), lead.end());
  r.peak_load_total =
      total.empty() ? 0.0 : *std::max_element(total.begin(), total.end());
  r.peak_cost = inst.kappa * r.peak_load;
  r.revenue = r.eb;
  r.net_revenue = r.revenue - r.peak_cost;
  return r;
}

BaseCase base_case(const Instance& inst) {
  require_valid(inst);
  BaseCase bc;
  bc.prices.p = inst.price_cap;
  bc.schedule = zero_schedule(inst, false);
  const auto refs = flatten(inst);
  for (size_t k = 0; k < refs.size(); ++k) {
    const Job& job = *refs[k].job;
    double remaining = job.demand;
    for (int t = 0; t < job.num_slots() && remaining > 0.0; ++t) {
      const double amount = std::min(job.power_cap, remaining);
      bc.schedule.x[k][t] = amount;
      remaining -= amount;
    }
  }
  bc.report = evaluate(inst, bc.prices, bc.schedule);
  return bc;
}

void compare(MetricsReport& report, const MetricsReport& base) {
  if (base.tc <= 0.0) {
    report.eb_pct.reset();
    report.ic_pct.reset();
    report.tc_pct.reset();
    return;
  }
  report.eb_pct = 100.0 * report.eb_total / base.tc;
  report.ic_pct = 100.0 * report.ic / base.tc;
  report.tc_pct = *report.eb_pct + *report.ic_pct;
}

}  // namespace peakgrid
