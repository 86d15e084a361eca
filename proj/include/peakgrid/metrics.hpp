#pragma once

#include <optional>

#include "peakgrid/model.hpp"

namespace peakgrid {

// Customer-cost decomposition and leader economics of one outcome. eb is the
// bill paid to the leader; eb_total also counts competitor payments; tc is
// always eb_total + ic. Peak figures count leader-supplied load only (the
// peak penalty applies to the leader's own generation), with the combined
// load reported separately.
struct MetricsReport {
  double eb = 0.0;
  double eb_total = 0.0;
  double ic = 0.0;
  double tc = 0.0;
  double peak_load = 0.0;
  double peak_load_total = 0.0;
  double peak_cost = 0.0;
  double revenue = 0.0;
  double net_revenue = 0.0;
  // percentages of the base case's total cost; set by compare()
  std::optional<double> eb_pct;
  std::optional<double> ic_pct;
  std::optional<double> tc_pct;
};

MetricsReport evaluate(const Instance& inst, const PriceVector& prices,
                       const Schedule& schedule);

// Cap prices, preferred-slot schedule: every job runs at full power from the
// start of its window.
struct BaseCase {
  PriceVector prices;
  Schedule schedule;
  MetricsReport report;
};
BaseCase base_case(const Instance& inst);

// Fills the percentage fields of `report` relative to base.tc; percentages
// stay unset when the base total cost is zero.
void compare(MetricsReport& report, const MetricsReport& base);

}  // namespace peakgrid
