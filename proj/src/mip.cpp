#include "peakgrid/mip.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace peakgrid {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::vector<BigMBundle> compute_big_ms(const Instance& inst) {
  std::vector<BigMBundle> out;
  const auto refs = flatten(inst);
  out.reserve(refs.size());
  for (const auto& ref : refs) {
    const Job& job = *ref.job;
    double vmax = 0.0;
    for (int h = job.tw_begin; h <= job.tw_end; ++h) {
      double cap = inst.price_cap[h];
      if (inst.has_competitor())
        cap = std::max(cap, (*inst.competitor_prices)[h]);
      vmax = std::max(vmax, cap + inconvenience_cost(job, ref.lambda, h));
    }
    BigMBundle b;
    b.m1 = std::max(job.power_cap, 2.0 * vmax);
    b.m2 = std::max(vmax, job.num_slots() * job.power_cap - job.demand);
    b.m3 = std::max(vmax, job.power_cap);
    out.push_back(b);
  }
  return out;
}

int MilpModel::expected_var_count(const Instance& inst, bool competitive) {
  int count = inst.horizon + 1;
  for (const auto& ref : flatten(inst))
    count += (competitive ? 6 : 4) * ref.job->num_slots() + 2;
  return count;
}

int MilpModel::expected_row_count(const Instance& inst, bool competitive) {
  int count = inst.horizon;
  for (const auto& ref : flatten(inst))
    count += (competitive ? 9 : 5) * ref.job->num_slots() + 3;
  return count;
}

namespace {

MilpModel build(const Instance& inst, bool competitive,
                const std::vector<BigMBundle>* big_m_override) {
  {
    const auto violations = validate(inst);
    if (!violations.empty()) {
      std::ostringstream msg;
      msg << "cannot build model from invalid instance:";
      for (const auto& v : violations)
        msg << " [" << v.where << ": " << v.rule << "]";
      throw BuildError(msg.str());
    }
  }
  if (competitive && !inst.has_competitor())
    throw BuildError("competitor prices required for the competitive model");

  MilpModel model;
  model.competitive = competitive;
  model.instance = inst;
  const auto refs = flatten(model.instance);
  const auto big_ms = big_m_override && big_m_override->size() ==
                              static_cast<size_t>(inst.num_jobs())
                          ? *big_m_override
                          : compute_big_ms(model.instance);
  const int horizon = inst.horizon;
  const std::vector<double>* comp =
      competitive ? &*model.instance.competitor_prices : nullptr;

  LinearProgram& lp = model.lp;
  const int var_count = MilpModel::expected_var_count(inst, competitive);
  lp.lower.assign(var_count, 0.0);
  lp.upper.assign(var_count, kInf);
  lp.objective.assign(var_count, 0.0);
  model.is_binary.assign(var_count, 0);
  model.var_names.assign(var_count, {});

  for (int h = 0; h < horizon; ++h) {
    lp.upper[h] = inst.price_cap[h];
    model.var_names[h] = "p_" + std::to_string(h);
  }
  lp.objective[model.peak_var()] = -inst.kappa;
  model.var_names[model.peak_var()] = "peak";
  if (!competitive) {
    // valid lower bound on the peak: jobs whose window sits inside [a, b]
    // must place all their energy there, so the max load is at least the
    // densest such interval. With a competitor the leader may supply nothing.
    double peak_lb = 0.0;
    for (int a = 0; a < horizon; ++a) {
      double energy = 0.0;
      std::vector<double> ending(horizon, 0.0);
      for (const auto& ref : refs)
        if (ref.job->tw_begin >= a) ending[ref.job->tw_end] += ref.job->demand;
      for (int b = a; b < horizon; ++b) {
        energy += ending[b];
        peak_lb = std::max(peak_lb, energy / (b - a + 1));
      }
    }
    lp.lower[model.peak_var()] = peak_lb;
  }

  int base = horizon + 1;
  for (size_t k = 0; k < refs.size(); ++k) {
    const Job& job = *refs[k].job;
    MilpModel::JobBlock block;
    block.tw_begin = job.tw_begin;
    block.slots = job.num_slots();
    block.power_cap = job.power_cap;
    block.demand = job.demand;
    block.big_m = big_ms[k];
    block.var_base = base;
    block.delay_cost.resize(block.slots);
    for (int t = 0; t < block.slots; ++t)
      block.delay_cost[t] =
          inconvenience_cost(job, refs[k].lambda, job.tw_begin + t);
    model.jobs.push_back(std::move(block));
    base += (competitive ? 6 : 4) * job.num_slots() + 2;
  }

  auto name_var = [&model](int var, const char* stem, int k, int t) {
    model.var_names[var] = t >= 0 ? std::string(stem) + "_" + std::to_string(k) +
                                        "_" + std::to_string(t)
                                  : std::string(stem) + "_" + std::to_string(k);
  };

  for (size_t k = 0; k < model.jobs.size(); ++k) {
    const auto& jb = model.jobs[k];
    const int ki = static_cast<int>(k);
    for (int t = 0; t < jb.slots; ++t) {
      const int h = jb.tw_begin + t;
      lp.upper[model.x_var(ki, t)] = jb.power_cap;
      lp.objective[model.x_var(ki, t)] = -jb.delay_cost[t];
      name_var(model.x_var(ki, t), "x", ki, h);
      lp.upper[model.w_var(ki, t)] = jb.big_m.m3;
      lp.objective[model.w_var(ki, t)] = -jb.power_cap;
      name_var(model.w_var(ki, t), "w", ki, h);
      lp.upper[model.bx_var(ki, t)] = 1.0;
      model.is_binary[model.bx_var(ki, t)] = 1;
      name_var(model.bx_var(ki, t), "bx", ki, h);
      lp.upper[model.bw_var(ki, t)] = 1.0;
      model.is_binary[model.bw_var(ki, t)] = 1;
      name_var(model.bw_var(ki, t), "bw", ki, h);
      if (competitive) {
        lp.upper[model.xb_var(ki, t)] = jb.power_cap;
        lp.objective[model.xb_var(ki, t)] = -((*comp)[h] + jb.delay_cost[t]);
        name_var(model.xb_var(ki, t), "xb", ki, h);
        lp.upper[model.bxb_var(ki, t)] = 1.0;
        model.is_binary[model.bxb_var(ki, t)] = 1;
        name_var(model.bxb_var(ki, t), "bxb", ki, h);
      }
    }
    lp.upper[model.v_var(ki)] = jb.big_m.m2;
    lp.objective[model.v_var(ki)] = jb.demand;
    name_var(model.v_var(ki), "v", ki, -1);
    lp.upper[model.bv_var(ki)] = 1.0;
    model.is_binary[model.bv_var(ki)] = 1;
    name_var(model.bv_var(ki), "bv", ki, -1);
  }
  for (int j = 0; j < var_count; ++j)
    if (model.is_binary[j]) model.binary_vars.push_back(j);

  // peak rows: sum_k x_k,h - peak <= 0
  lp.rows.reserve(MilpModel::expected_row_count(inst, competitive));
  for (int h = 0; h < horizon; ++h) {
    LinearProgram::Row row;
    for (size_t k = 0; k < model.jobs.size(); ++k) {
      const auto& jb = model.jobs[k];
      if (h >= jb.tw_begin && h < jb.tw_begin + jb.slots)
        row.coefs.push_back({model.x_var(static_cast<int>(k), h - jb.tw_begin),
                             1.0});
    }
    row.coefs.push_back({model.peak_var(), -1.0});
    row.rhs = 0.0;
    lp.rows.push_back(std::move(row));
  }

  for (size_t k = 0; k < model.jobs.size(); ++k) {
    auto& jb = model.jobs[k];
    const int ki = static_cast<int>(k);
    jb.row_base = lp.num_rows();
    const double m1 = jb.big_m.m1, m2 = jb.big_m.m2, m3 = jb.big_m.m3;

    if (competitive) {
      for (int t = 0; t < jb.slots; ++t) {
        LinearProgram::Row row;
        row.coefs = {{model.x_var(ki, t), 1.0}, {model.xb_var(ki, t), 1.0}};
        row.rhs = jb.power_cap;
        lp.rows.push_back(std::move(row));
      }
    }

    {
      LinearProgram::Row row;  // demand: -sum x (-sum xb) <= -E
      for (int t = 0; t < jb.slots; ++t) {
        row.coefs.push_back({model.x_var(ki, t), -1.0});
        if (competitive) row.coefs.push_back({model.xb_var(ki, t), -1.0});
      }
      row.rhs = -jb.demand;
      lp.rows.push_back(std::move(row));
    }

    for (int t = 0; t < jb.slots; ++t) {
      LinearProgram::Row row;  // -w + v - p <= C
      row.coefs = {{model.w_var(ki, t), -1.0},
                   {model.v_var(ki), 1.0},
                   {model.price_var(jb.tw_begin + t), -1.0}};
      row.rhs = jb.delay_cost[t];
      lp.rows.push_back(std::move(row));
    }
    if (competitive) {
      for (int t = 0; t < jb.slots; ++t) {
        LinearProgram::Row row;  // -w + v <= C + comp price
        row.coefs = {{model.w_var(ki, t), -1.0}, {model.v_var(ki), 1.0}};
        row.rhs = jb.delay_cost[t] + (*comp)[jb.tw_begin + t];
        lp.rows.push_back(std::move(row));
      }
    }

    for (int t = 0; t < jb.slots; ++t) {
      {
        // unused capacity forced to zero when bw = 1; the slack is at most
        // the power cap itself, which is the tightest valid gate
        LinearProgram::Row row;
        row.coefs.push_back({model.x_var(ki, t), -1.0});
        if (competitive) row.coefs.push_back({model.xb_var(ki, t), -1.0});
        row.coefs.push_back({model.bw_var(ki, t), jb.power_cap});
        row.rhs = 0.0;
        lp.rows.push_back(std::move(row));
      }
      {
        LinearProgram::Row row;  // w <= m3 * bw
        row.coefs = {{model.w_var(ki, t), 1.0}, {model.bw_var(ki, t), -m3}};
        row.rhs = 0.0;
        lp.rows.push_back(std::move(row));
      }
    }
    {
      // demand surplus forced to zero when bv = 1; the surplus can never
      // exceed the total window capacity minus the demand
      LinearProgram::Row row;
      const double surplus = jb.slots * jb.power_cap - jb.demand;
      for (int t = 0; t < jb.slots; ++t) {
        row.coefs.push_back({model.x_var(ki, t), 1.0});
        if (competitive) row.coefs.push_back({model.xb_var(ki, t), 1.0});
      }
      row.coefs.push_back({model.bv_var(ki), surplus});
      row.rhs = surplus + jb.demand;
      lp.rows.push_back(std::move(row));
    }
    {
      LinearProgram::Row row;  // v <= m2 * bv
      row.coefs = {{model.v_var(ki), 1.0}, {model.bv_var(ki), -m2}};
      row.rhs = 0.0;
      lp.rows.push_back(std::move(row));
    }
    for (int t = 0; t < jb.slots; ++t) {
      {
        LinearProgram::Row row;  // dual slack of x forced to zero when bx = 1
        row.coefs = {{model.w_var(ki, t), 1.0},
                     {model.v_var(ki), -1.0},
                     {model.price_var(jb.tw_begin + t), 1.0},
                     {model.bx_var(ki, t), m1}};
        row.rhs = m1 - jb.delay_cost[t];
        lp.rows.push_back(std::move(row));
      }
      {
        LinearProgram::Row row;  // x <= power_cap * bx
        row.coefs = {{model.x_var(ki, t), 1.0},
                     {model.bx_var(ki, t), -jb.power_cap}};
        row.rhs = 0.0;
        lp.rows.push_back(std::move(row));
      }
    }
    if (competitive) {
      for (int t = 0; t < jb.slots; ++t) {
        {
          LinearProgram::Row row;  // dual slack of xb forced to zero, bxb = 1
          row.coefs = {{model.w_var(ki, t), 1.0},
                       {model.v_var(ki), -1.0},
                       {model.bxb_var(ki, t), m1}};
          row.rhs = m1 - jb.delay_cost[t] - (*comp)[jb.tw_begin + t];
          lp.rows.push_back(std::move(row));
        }
        {
          LinearProgram::Row row;  // xb <= power_cap * bxb
          row.coefs = {{model.xb_var(ki, t), 1.0},
                       {model.bxb_var(ki, t), -jb.power_cap}};
          row.rhs = 0.0;
          lp.rows.push_back(std::move(row));
        }
      }
    }
  }
  return model;
}

}  // namespace

MilpModel build_mp_mip(const Instance& inst,
                       const std::vector<BigMBundle>* big_m_override) {
  return build(inst, false, big_m_override);
}

MilpModel build_cp_mip(const Instance& inst,
                       const std::vector<BigMBundle>* big_m_override) {
  return build(inst, true, big_m_override);
}

double max_violation(const MilpModel& model,
                     const std::vector<double>& assignment) {
  const LinearProgram& lp = model.lp;
  double worst = 0.0;
  for (int j = 0; j < lp.num_vars(); ++j) {
    worst = std::max(worst, lp.lower[j] - assignment[j]);
    if (std::isfinite(lp.upper[j]))
      worst = std::max(worst, (assignment[j] - lp.upper[j]) /
                                  std::max(1.0, std::abs(lp.upper[j])));
  }
  for (const auto& row : lp.rows) {
    double activity = 0.0;
    for (const auto& [j, v] : row.coefs) activity += v * assignment[j];
    worst = std::max(worst,
                     (activity - row.rhs) / std::max(1.0, std::abs(row.rhs)));
  }
  return worst;
}

double model_objective(const MilpModel& model,
                       const std::vector<double>& assignment) {
  double acc = 0.0;
  for (int j = 0; j < model.lp.num_vars(); ++j)
    acc += model.lp.objective[j] * assignment[j];
  return acc;
}

double leader_value(const Instance& inst, const PriceVector& prices,
                    const Schedule& schedule) {
  const auto refs = flatten(inst);
  double revenue = 0.0;
  for (size_t k = 0; k < refs.size(); ++k) {
    const Job& job = *refs[k].job;
    for (int t = 0; t < job.num_slots(); ++t)
      revenue += prices.p[job.tw_begin + t] * schedule.x[k][t];
  }
  const auto load = leader_load(inst, schedule);
  const double peak = load.empty() ? 0.0 : *std::max_element(load.begin(),
                                                             load.end());
  return revenue - inst.kappa * peak;
}

ExtractedSolution extract_solution(const MilpModel& model,
                                   const std::vector<double>& assignment,
                                   double tol) {
  if (static_cast<int>(assignment.size()) != model.lp.num_vars())
    throw ExtractionError("assignment length mismatch");
  const double violation = max_violation(model, assignment);
  if (violation > tol) {
    std::ostringstream msg;
    msg << "assignment violates model constraints, worst residual "
        << violation;
    throw ExtractionError(msg.str());
  }

  ExtractedSolution out;
  out.prices.p.resize(model.horizon());
  for (int h = 0; h < model.horizon(); ++h)
    out.prices.p[h] = assignment[model.price_var(h)];
  out.peak = assignment[model.peak_var()];
  out.schedule = zero_schedule(model.instance, model.competitive);
  out.duals.demand_dual.resize(model.jobs.size());
  out.duals.cap_dual.resize(model.jobs.size());
  for (size_t k = 0; k < model.jobs.size(); ++k) {
    const int ki = static_cast<int>(k);
    const auto& jb = model.jobs[k];
    out.duals.demand_dual[k] = assignment[model.v_var(ki)];
    out.duals.cap_dual[k].resize(jb.slots);
    for (int t = 0; t < jb.slots; ++t) {
      out.schedule.x[k][t] = assignment[model.x_var(ki, t)];
      out.duals.cap_dual[k][t] = assignment[model.w_var(ki, t)];
      if (model.competitive)
        out.schedule.x_bar[k][t] = assignment[model.xb_var(ki, t)];
    }
  }

  const auto load = leader_load(model.instance, out.schedule);
  const double max_load =
      load.empty() ? 0.0 : *std::max_element(load.begin(), load.end());
  if (model.instance.kappa > 0.0) {
    if (std::abs(out.peak - max_load) > 1e-6) {
      std::ostringstream msg;
      msg << "peak variable " << out.peak << " does not match max load "
          << max_load;
      throw ExtractionError(msg.str());
    }
  } else {
    out.peak = max_load;  // nothing pins the peak variable when kappa == 0
  }
  return out;
}

std::vector<double> assignment_from_response(const MilpModel& model,
                                             const PriceVector& prices,
                                             const FollowerSolution& response) {
  std::vector<double> z(model.lp.num_vars(), 0.0);
  for (int h = 0; h < model.horizon(); ++h) z[model.price_var(h)] = prices.p[h];
  const Schedule& s = response.schedule;
  for (size_t k = 0; k < model.jobs.size(); ++k) {
    const int ki = static_cast<int>(k);
    const auto& jb = model.jobs[k];
    const double v = response.demand_dual[k];
    z[model.v_var(ki)] = v;
    z[model.bv_var(ki)] = v > 1e-12 ? 1.0 : 0.0;
    for (int t = 0; t < jb.slots; ++t) {
      const double x = s.x[k][t];
      const double w = response.cap_dual[k][t];
      z[model.x_var(ki, t)] = x;
      z[model.w_var(ki, t)] = w;
      z[model.bx_var(ki, t)] = x > 1e-12 ? 1.0 : 0.0;
      z[model.bw_var(ki, t)] = w > 1e-12 ? 1.0 : 0.0;
      if (model.competitive) {
        const double xb = s.has_competitor() ? s.x_bar[k][t] : 0.0;
        z[model.xb_var(ki, t)] = xb;
        z[model.bxb_var(ki, t)] = xb > 1e-12 ? 1.0 : 0.0;
      }
    }
  }
  const auto load = leader_load(model.instance, s);
  z[model.peak_var()] =
      load.empty() ? 0.0 : *std::max_element(load.begin(), load.end());
  return z;
}

namespace {

void write_term(std::ostream& os, double coef, const std::string& name,
                bool* first) {
  if (coef == 0.0) return;
  if (*first) {
    if (coef < 0.0) os << "- ";
    *first = false;
  } else {
    os << (coef < 0.0 ? " - " : " + ");
  }
  const double mag = std::abs(coef);
  os << mag << " " << name;
}

}  // namespace

void write_lp_file(const MilpModel& model, std::ostream& os) {
  const LinearProgram& lp = model.lp;
  os.precision(17);
  os << "Maximize\n obj:";
  bool first = true;
  os << " ";
  for (int j = 0; j < lp.num_vars(); ++j)
    write_term(os, lp.objective[j], model.var_names[j], &first);
  if (first) os << "0";
  os << "\nSubject To\n";
  for (int i = 0; i < lp.num_rows(); ++i) {
    os << " c" << i << ": ";
    bool row_first = true;
    for (const auto& [j, v] : lp.rows[i].coefs)
      write_term(os, v, model.var_names[j], &row_first);
    os << " <= " << lp.rows[i].rhs << "\n";
  }
  os << "Bounds\n";
  for (int j = 0; j < lp.num_vars(); ++j) {
    if (model.is_binary[j]) continue;
    os << " " << lp.lower[j] << " <= " << model.var_names[j];
    if (std::isfinite(lp.upper[j])) os << " <= " << lp.upper[j];
    os << "\n";
  }
  os << "Binaries\n";
  for (int j : model.binary_vars) os << " " << model.var_names[j] << "\n";
  os << "End\n";
}

}  // namespace peakgrid
