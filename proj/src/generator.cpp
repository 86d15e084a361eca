#include "peakgrid/generator.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace peakgrid {

namespace {

uint64_t mix64(uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Counter-based stream: every draw is a pure function of its address.
uint64_t stream(uint64_t seed, uint64_t customer, uint64_t job,
                uint64_t field) {
  uint64_t h = mix64(seed);
  h = mix64(h ^ (customer + 1));
  h = mix64(h ^ ((job + 1) << 20));
  h = mix64(h ^ (field << 40));
  return h;
}

double unit_interval(uint64_t h) {
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double draw_uniform(uint64_t h, double lo, double hi) {
  return lo + unit_interval(h) * (hi - lo);
}

// uniform integer in {0, ..., n}
int draw_int(uint64_t h, int n) {
  const int v = static_cast<int>(unit_interval(h) * (n + 1));
  return v > n ? n : v;
}

enum Field : uint64_t {
  kFieldLambda = 1,
  kFieldBeta = 2,
  kFieldDemand = 3,
  kFieldWindow = 4,
  kFieldReplicate = 5,
};

void check_range(const std::vector<double>& r, const char* field,
                 bool positive) {
  if (r.size() != 2)
    throw std::invalid_argument(std::string("config field ") + field +
                                ": expected [min, max]");
  if (!(r[0] <= r[1]))
    throw std::invalid_argument(std::string("config field ") + field +
                                ": min exceeds max");
  if (positive && r[0] <= 0.0)
    throw std::invalid_argument(std::string("config field ") + field +
                                ": values must be positive");
  if (!positive && r[0] < 0.0)
    throw std::invalid_argument(std::string("config field ") + field +
                                ": values must be non-negative");
}

}  // namespace

void check_config(const GeneratorConfig& config) {
  if (config.n_customers < 0)
    throw std::invalid_argument("config field n_customers: must be >= 0");
  if (config.jobs_per_customer < 0)
    throw std::invalid_argument("config field jobs_per_customer: must be >= 0");
  if (config.horizon < 2)
    throw std::invalid_argument("config field horizon: must be >= 2");
  check_range(config.beta_range, "beta_range", true);
  check_range(config.demand_range, "demand_range", true);
  check_range(config.lambda_range, "lambda_range", false);
  if (config.p_max < 0.0)
    throw std::invalid_argument("config field p_max: must be >= 0");
  if (config.tww.empty())
    throw std::invalid_argument("config field tww: must not be empty");
  for (double t : config.tww)
    if (t < 0.0)
      throw std::invalid_argument("config field tww: values must be >= 0");
  if (config.kappa_set.empty())
    throw std::invalid_argument("config field kappa_set: must not be empty");
  for (double k : config.kappa_set)
    if (k < 0.0)
      throw std::invalid_argument("config field kappa_set: values must be >= 0");
  if (config.replicates < 1)
    throw std::invalid_argument("config field replicates: must be >= 1");
  // worst-case window must fit the horizon
  const int worst_mct =
      mct(config.demand_range[1], config.beta_range[0]);
  double worst_tww = 0.0;
  for (double t : config.tww) worst_tww = std::max(worst_tww, t);
  const int worst_len =
      static_cast<int>(std::ceil((1.0 + worst_tww) * worst_mct - 1e-9));
  if (worst_len > config.horizon - 1)
    throw std::invalid_argument(
        "config field horizon: too short for the widest possible window");
}

int mct(double demand, double power_cap) {
  if (demand <= 0.0 || power_cap <= 0.0)
    throw std::invalid_argument("mct requires positive demand and power");
  return static_cast<int>(std::ceil(demand / power_cap - 1e-9));
}

Instance generate(const GeneratorConfig& config, double kappa, double tww) {
  check_config(config);
  Instance inst;
  inst.horizon = config.horizon;
  inst.price_cap.assign(config.horizon, config.p_max);
  inst.kappa = kappa;
  inst.competitor_prices = std::vector<double>(config.horizon, config.p_max);
  for (int c = 0; c < config.n_customers; ++c) {
    Customer cust;
    cust.id = "c" + std::to_string(c);
    cust.lambda = draw_uniform(stream(config.seed, c, 0, kFieldLambda),
                               config.lambda_range[0], config.lambda_range[1]);
    for (int j = 0; j < config.jobs_per_customer; ++j) {
      Job job;
      job.appliance = "a" + std::to_string(j);
      job.power_cap = draw_uniform(stream(config.seed, c, j, kFieldBeta),
                                   config.beta_range[0], config.beta_range[1]);
      job.demand = draw_uniform(stream(config.seed, c, j, kFieldDemand),
                                config.demand_range[0],
                                config.demand_range[1]);
      const int completion = mct(job.demand, job.power_cap);
      const int length =
          static_cast<int>(std::ceil((1.0 + tww) * completion - 1e-9));
      const int latest_start = config.horizon - 1 - length;
      if (latest_start < 0)
        throw std::invalid_argument(
            "config field horizon: window longer than horizon");
      job.tw_begin =
          draw_int(stream(config.seed, c, j, kFieldWindow), latest_start);
      job.tw_end = job.tw_begin + length;
      cust.jobs.push_back(std::move(job));
    }
    inst.customers.push_back(std::move(cust));
  }
  require_valid(inst);
  return inst;
}

std::vector<GeneratedInstance> batch(const GeneratorConfig& config) {
  check_config(config);
  std::vector<GeneratedInstance> out;
  out.reserve(config.kappa_set.size() * config.tww.size() * config.replicates);
  for (double kappa : config.kappa_set) {
    for (double tww : config.tww) {
      for (int rep = 0; rep < config.replicates; ++rep) {
        GeneratorConfig sub = config;
        sub.seed = mix64(config.seed ^ stream(config.seed, rep, 0,
                                              kFieldReplicate));
        GeneratedInstance gi;
        gi.kappa = kappa;
        gi.tww = tww;
        gi.replicate = rep;
        gi.seed = sub.seed;
        gi.instance = generate(sub, kappa, tww);
        out.push_back(std::move(gi));
      }
    }
  }
  return out;
}

GeneratorConfig config_from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config JSON parse error: ") +
                                e.what());
  }
  GeneratorConfig c;
  try {
    if (j.contains("n_customers")) c.n_customers = j["n_customers"].get<int>();
    if (j.contains("jobs_per_customer"))
      c.jobs_per_customer = j["jobs_per_customer"].get<int>();
    if (j.contains("horizon")) c.horizon = j["horizon"].get<int>();
    if (j.contains("tww")) c.tww = j["tww"].get<std::vector<double>>();
    if (j.contains("beta_range"))
      c.beta_range = j["beta_range"].get<std::vector<double>>();
    if (j.contains("demand_range"))
      c.demand_range = j["demand_range"].get<std::vector<double>>();
    if (j.contains("lambda_range"))
      c.lambda_range = j["lambda_range"].get<std::vector<double>>();
    if (j.contains("p_max")) c.p_max = j["p_max"].get<double>();
    if (j.contains("kappa_set"))
      c.kappa_set = j["kappa_set"].get<std::vector<double>>();
    if (j.contains("seed")) c.seed = j["seed"].get<uint64_t>();
    if (j.contains("replicates")) c.replicates = j["replicates"].get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config JSON field error: ") +
                                e.what());
  }
  check_config(c);
  return c;
}

GeneratorConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return config_from_json_text(buf.str());
}

std::string config_to_json(const GeneratorConfig& c) {
  nlohmann::json j;
  j["n_customers"] = c.n_customers;
  j["jobs_per_customer"] = c.jobs_per_customer;
  j["horizon"] = c.horizon;
  j["tww"] = c.tww;
  j["beta_range"] = c.beta_range;
  j["demand_range"] = c.demand_range;
  j["lambda_range"] = c.lambda_range;
  j["p_max"] = c.p_max;
  j["kappa_set"] = c.kappa_set;
  j["seed"] = c.seed;
  j["replicates"] = c.replicates;
  return j.dump(2);
}

}  // namespace peakgrid
