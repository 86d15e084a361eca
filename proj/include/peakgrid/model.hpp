#pragma once

#include <optional>
#include <string>
#include <vector>

namespace peakgrid {

// One preemptive appliance task: an energy demand that must be delivered
// inside an inclusive slot window, at bounded per-slot power.
struct Job {
  std::string appliance;
  double demand = 0.0;     // kWh over the whole window
  double power_cap = 0.0;  // kW ceiling per slot
  int tw_begin = 0;
  int tw_end = 0;

  int num_slots() const { return tw_end - tw_begin + 1; }
  bool contains(int slot) const { return slot >= tw_begin && slot <= tw_end; }
};

struct Customer {
  std::string id;
  double lambda = 0.0;  // delay sensitivity; scales the inconvenience cost
  std::vector<Job> jobs;
};

struct Instance {
  int horizon = 24;
  std::vector<double> price_cap;  // per-slot ceiling, length == horizon
  double kappa = 0.0;             // currency per kW of peak load
  std::optional<std::vector<double>> competitor_prices;
  std::vector<Customer> customers;

  int num_jobs() const;
  bool has_competitor() const { return competitor_prices.has_value(); }
};

// Flat view over (customer, job) pairs in declaration order. Schedules, duals
// and solver variables are all indexed by this order.
struct JobRef {
  int customer_index = 0;
  int job_index = 0;
  const Job* job = nullptr;
  double lambda = 0.0;
};
std::vector<JobRef> flatten(const Instance& inst);

struct PriceVector {
  std::vector<double> p;
};

// Power per flat job and window offset t (slot tw_begin + t). x_bar carries
// competitor-supplied power and is empty for monopoly schedules.
struct Schedule {
  std::vector<std::vector<double>> x;
  std::vector<std::vector<double>> x_bar;

  bool has_competitor() const { return !x_bar.empty(); }
};

Schedule zero_schedule(const Instance& inst, bool with_competitor);

// Per-unit delay penalty for running `job` at slot h: zero at the window
// start, lambda * demand at the window end, linear in between.
double inconvenience_cost(const Job& job, double lambda, int h);

// Leader load (and total load when x_bar is present) per slot.
std::vector<double> leader_load(const Instance& inst, const Schedule& s);
std::vector<double> total_load(const Instance& inst, const Schedule& s);

struct Violation {
  std::string where;
  std::string rule;
};

// Structural checks: window sanity, demand feasibility, vector lengths.
// Returns all violations instead of stopping at the first.
std::vector<Violation> validate(const Instance& inst);
void require_valid(const Instance& inst);  // throws std::invalid_argument

bool prices_feasible(const Instance& inst, const PriceVector& prices,
                     double tol = 1e-9);

// Instance JSON, schema documented in the README.
std::string instance_to_json(const Instance& inst, int indent = -1);
Instance instance_from_json_text(const std::string& text);
Instance load_instance(const std::string& path);
void save_instance(const Instance& inst, const std::string& path);

}  // namespace peakgrid
