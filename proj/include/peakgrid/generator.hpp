#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "peakgrid/model.hpp"

namespace peakgrid {

// Experiment-style random instances: uniform power caps, demands and delay
// sensitivities, windows sized by the minimum completion time stretched by
// the width fraction tww. All defaults are overridable from a JSON config
// with identical key names.
struct GeneratorConfig {
  int n_customers = 10;
  int jobs_per_customer = 3;
  int horizon = 24;
  std::vector<double> tww = {0.2, 1.0};
  std::vector<double> beta_range = {1.0, 3.0};
  std::vector<double> demand_range = {2.0, 10.0};
  std::vector<double> lambda_range = {0.5, 2.0};
  double p_max = 10.0;
  std::vector<double> kappa_set = {200, 400, 600, 800, 1000};
  uint64_t seed = 1;
  int replicates = 10;
};

// Throws std::invalid_argument naming the offending field.
void check_config(const GeneratorConfig& config);
GeneratorConfig config_from_json_text(const std::string& text);
GeneratorConfig load_config(const std::string& path);
std::string config_to_json(const GeneratorConfig& config);

// Fewest slots that meet the demand at full power: ceil(demand / power).
int mct(double demand, double power_cap);

// One seeded instance. Draws are addressed by (seed, customer, job, field)
// counters, so draws for one job never depend on how many other customers
// or jobs exist, and only the windows change with tww.
Instance generate(const GeneratorConfig& config, double kappa, double tww);

struct GeneratedInstance {
  double kappa = 0.0;
  double tww = 0.0;
  int replicate = 0;
  uint64_t seed = 0;
  Instance instance;
};

// Full experimental design: kappa_set x tww x replicates, with replicate
// seeds shared across kappa and tww so sweeps compare identical job mixes.
std::vector<GeneratedInstance> batch(const GeneratorConfig& config);

}  // namespace peakgrid
