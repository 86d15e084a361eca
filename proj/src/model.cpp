#include "peakgrid/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace peakgrid {

int Instance::num_jobs() const {
  int n = 0;
  for (const auto& c : customers) n += static_cast<int>(c.jobs.size());
  return n;
}

std::vector<JobRef> flatten(const Instance& inst) {
  std::vector<JobRef> refs;
  refs.reserve(inst.num_jobs());
  for (int c = 0; c < static_cast<int>(inst.customers.size()); ++c) {
    const Customer& cust = inst.customers[c];
    for (int j = 0; j < static_cast<int>(cust.jobs.size()); ++j) {
      refs.push_back(JobRef{c, j, &cust.jobs[j], cust.lambda});
    }
  }
  return refs;
}

Schedule zero_schedule(const Instance& inst, bool with_competitor) {
  Schedule s;
  for (const auto& ref : flatten(inst)) {
    s.x.emplace_back(ref.job->num_slots(), 0.0);
    if (with_competitor) s.x_bar.emplace_back(ref.job->num_slots(), 0.0);
  }
  return s;
}

double inconvenience_cost(const Job& job, double lambda, int h) {
  const int width = job.tw_end - job.tw_begin;
  if (width <= 0) throw std::invalid_argument("degenerate window");
  if (!job.contains(h)) throw std::domain_error("slot outside job window");
  return lambda * job.demand * static_cast<double>(h - job.tw_begin) /
         static_cast<double>(width);
}

std::vector<double> leader_load(const Instance& inst, const Schedule& s) {
  std::vector<double> load(inst.horizon, 0.0);
  const auto refs = flatten(inst);
  for (size_t k = 0; k < refs.size(); ++k) {
    const Job& job = *refs[k].job;
    for (int t = 0; t < job.num_slots(); ++t) load[job.tw_begin + t] += s.x[k][t];
  }
  return load;
}

std::vector<double> total_load(const Instance& inst, const Schedule& s) {
  std::vector<double> load = leader_load(inst, s);
  if (!s.has_competitor()) return load;
  const auto refs = flatten(inst);
  for (size_t k = 0; k < refs.size(); ++k) {
    const Job& job = *refs[k].job;
    for (int t = 0; t < job.num_slots(); ++t)
      load[job.tw_begin + t] += s.x_bar[k][t];
  }
  return load;
}

namespace {

bool finite(double x) { return std::isfinite(x); }

void check_price_vector(const std::vector<double>& v, int horizon,
                        const char* name, std::vector<Violation>* out) {
  if (static_cast<int>(v.size()) != horizon) {
    out->push_back({name, "length must equal horizon"});
    return;
  }
  for (double x : v) {
    if (!finite(x) || x < 0.0) {
      out->push_back({name, "entries must be finite and non-negative"});
      return;
    }
  }
}

}  // namespace

std::vector<Violation> validate(const Instance& inst) {
  std::vector<Violation> out;
  if (inst.horizon < 1) out.push_back({"instance", "horizon must be >= 1"});
  if (!finite(inst.kappa) || inst.kappa < 0.0)
    out.push_back({"instance", "kappa must be finite and non-negative"});
  check_price_vector(inst.price_cap, inst.horizon, "price_cap", &out);
  if (inst.competitor_prices)
    check_price_vector(*inst.competitor_prices, inst.horizon,
                       "competitor_prices", &out);

  for (const Customer& cust : inst.customers) {
    if (!finite(cust.lambda) || cust.lambda < 0.0)
      out.push_back({"customer " + cust.id,
                     "lambda must be finite and non-negative"});
    for (const Job& job : cust.jobs) {
      const std::string where =
          "customer " + cust.id + " appliance " + job.appliance;
      if (!finite(job.demand) || job.demand <= 0.0)
        out.push_back({where, "demand must be finite and positive"});
      if (!finite(job.power_cap) || job.power_cap <= 0.0)
        out.push_back({where, "power_cap must be finite and positive"});
      if (job.tw_begin == job.tw_end) {
        out.push_back({where, "degenerate window"});
        continue;
      }
      if (job.tw_begin > job.tw_end) {
        out.push_back({where, "window reversed"});
        continue;
      }
      if (job.tw_begin < 0 || job.tw_end > inst.horizon - 1) {
        out.push_back({where, "window out of range"});
        continue;
      }
      if (job.demand > job.power_cap * job.num_slots() + 1e-12)
        out.push_back({where, "demand infeasible"});
    }
  }
  return out;
}

void require_valid(const Instance& inst) {
  const auto violations = validate(inst);
  if (violations.empty()) return;
  std::ostringstream msg;
  msg << "invalid instance:";
  for (const auto& v : violations) msg << " [" << v.where << ": " << v.rule << "]";
  throw std::invalid_argument(msg.str());
}

bool prices_feasible(const Instance& inst, const PriceVector& prices,
                     double tol) {
  if (static_cast<int>(prices.p.size()) != inst.horizon) return false;
  for (int h = 0; h < inst.horizon; ++h) {
    if (!finite(prices.p[h])) return false;
    if (prices.p[h] < -tol || prices.p[h] > inst.price_cap[h] + tol)
      return false;
  }
  return true;
}

std::string instance_to_json(const Instance& inst, int indent) {
  nlohmann::json j;
  j["horizon"] = inst.horizon;
  j["price_cap"] = inst.price_cap;
  j["kappa"] = inst.kappa;
  if (inst.competitor_prices)
    j["competitor_prices"] = *inst.competitor_prices;
  else
    j["competitor_prices"] = nullptr;
  nlohmann::json customers = nlohmann::json::array();
  for (const Customer& cust : inst.customers) {
    nlohmann::json cj;
    cj["id"] = cust.id;
    cj["lambda"] = cust.lambda;
    nlohmann::json jobs = nlohmann::json::array();
    for (const Job& job : cust.jobs) {
      jobs.push_back({{"appliance", job.appliance},
                      {"demand", job.demand},
                      {"power_cap", job.power_cap},
                      {"tw_begin", job.tw_begin},
                      {"tw_end", job.tw_end}});
    }
    cj["jobs"] = jobs;
    customers.push_back(cj);
  }
  j["customers"] = customers;
  return j.dump(indent);
}

Instance instance_from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("instance JSON parse error: ") +
                                e.what());
  }
  try {
    Instance inst;
    inst.horizon = j.at("horizon").get<int>();
    inst.price_cap = j.at("price_cap").get<std::vector<double>>();
    inst.kappa = j.at("kappa").get<double>();
    if (j.contains("competitor_prices") && !j["competitor_prices"].is_null())
      inst.competitor_prices = j["competitor_prices"].get<std::vector<double>>();
    for (const auto& cj : j.at("customers")) {
      Customer cust;
      cust.id = cj.at("id").get<std::string>();
      cust.lambda = cj.at("lambda").get<double>();
      for (const auto& jj : cj.at("jobs")) {
        Job job;
        job.appliance = jj.at("appliance").get<std::string>();
        job.demand = jj.at("demand").get<double>();
        job.power_cap = jj.at("power_cap").get<double>();
        job.tw_begin = jj.at("tw_begin").get<int>();
        job.tw_end = jj.at("tw_end").get<int>();
        cust.jobs.push_back(std::move(job));
      }
      inst.customers.push_back(std::move(cust));
    }
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("instance JSON field error: ") +
                                e.what());
  }
}

Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open instance file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return instance_from_json_text(buf.str());
}

void save_instance(const Instance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write instance file: " + path);
  out << instance_to_json(inst, 2) << "\n";
}

}  // namespace peakgrid
