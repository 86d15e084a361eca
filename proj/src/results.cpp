#include "peakgrid/results.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "peakgrid/follower.hpp"

namespace peakgrid {

const char* to_string(RunModel m) {
  switch (m) {
    case RunModel::BC: return "bc";
    case RunModel::MP: return "mp";
    case RunModel::CP: return "cp";
  }
  return "?";
}

RunModel run_model_from_string(const std::string& name) {
  if (name == "bc") return RunModel::BC;
  if (name == "mp") return RunModel::MP;
  if (name == "cp") return RunModel::CP;
  throw std::invalid_argument("unknown model: " + name +
                              " (expected bc, mp or cp)");
}

RunRecord solve_instance(const Instance& inst, RunModel model,
                         const SolverLimits& limits) {
  require_valid(inst);
  RunRecord rec;
  rec.model = model;
  rec.instance = inst;
  const BaseCase bc = base_case(inst);

  if (model == RunModel::BC) {
    rec.status = "Evaluated";
    rec.prices = bc.prices;
    rec.schedule = bc.schedule;
    rec.peak = bc.report.peak_load;
    rec.metrics = bc.report;
    compare(rec.metrics, bc.report);
    rec.objective = rec.metrics.net_revenue;
    return rec;
  }

  if (model == RunModel::CP && !inst.has_competitor())
    throw std::invalid_argument("competitor prices required for model cp");

  // The MP model ignores competitor prices; strip them so the builder sees a
  // plain monopoly instance.
  Instance working = inst;
  if (model == RunModel::MP) working.competitor_prices.reset();

  const MilpModel milp = model == RunModel::CP ? build_cp_mip(working)
                                               : build_mp_mip(working);
  const std::vector<double> seed = warm_start(milp);
  SolveResult res = solve(milp, limits, &seed);
  if (!res.has_incumbent())
    throw SolverError("no feasible point found (status " +
                      std::string(to_string(res.status)) + ")");

  const ExtractedSolution ext = extract_solution(milp, res.incumbent);
  rec.status = to_string(res.status);
  rec.prices = ext.prices;
  rec.schedule = ext.schedule;
  rec.duals = ext.duals;
  rec.peak = ext.peak;
  rec.objective = res.objective;
  rec.metrics = evaluate(working, rec.prices, rec.schedule);
  compare(rec.metrics, bc.report);
  SolverInfo info;
  info.status = to_string(res.status);
  info.nodes = res.stats.nodes;
  info.lp_iterations = res.stats.lp_iterations;
  info.det_seconds = res.stats.det_seconds;
  info.wall_seconds = res.stats.wall_seconds;
  info.best_bound = res.best_bound;
  info.gap = res.gap;
  info.warm_started = res.warm_started;
  rec.solver = info;
  return rec;
}

namespace {

nlohmann::json matrix_to_json(const std::vector<std::vector<double>>& m) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& row : m) out.push_back(row);
  return out;
}

std::vector<std::vector<double>> matrix_from_json(const nlohmann::json& j) {
  std::vector<std::vector<double>> out;
  for (const auto& row : j) out.push_back(row.get<std::vector<double>>());
  return out;
}

}  // namespace

std::string run_record_to_json(const RunRecord& rec, int indent) {
  nlohmann::json j;
  j["model"] = to_string(rec.model);
  j["status"] = rec.status;
  j["instance"] = nlohmann::json::parse(instance_to_json(rec.instance));
  j["prices"] = rec.prices.p;
  j["schedule"]["x"] = matrix_to_json(rec.schedule.x);
  if (rec.schedule.has_competitor())
    j["schedule"]["x_bar"] = matrix_to_json(rec.schedule.x_bar);
  else
    j["schedule"]["x_bar"] = nullptr;
  if (rec.duals) {
    j["duals"]["w"] = matrix_to_json(rec.duals->cap_dual);
    j["duals"]["v"] = rec.duals->demand_dual;
  } else {
    j["duals"] = nullptr;
  }
  j["peak"] = rec.peak;
  j["objective"] = rec.objective;
  nlohmann::json m;
  m["eb"] = rec.metrics.eb;
  m["eb_total"] = rec.metrics.eb_total;
  m["ic"] = rec.metrics.ic;
  m["tc"] = rec.metrics.tc;
  m["peak_load"] = rec.metrics.peak_load;
  m["peak_load_total"] = rec.metrics.peak_load_total;
  m["peak_cost"] = rec.metrics.peak_cost;
  m["revenue"] = rec.metrics.revenue;
  m["net_revenue"] = rec.metrics.net_revenue;
  m["eb_pct"] = rec.metrics.eb_pct ? nlohmann::json(*rec.metrics.eb_pct)
                                   : nlohmann::json(nullptr);
  m["ic_pct"] = rec.metrics.ic_pct ? nlohmann::json(*rec.metrics.ic_pct)
                                   : nlohmann::json(nullptr);
  m["tc_pct"] = rec.metrics.tc_pct ? nlohmann::json(*rec.metrics.tc_pct)
                                   : nlohmann::json(nullptr);
  j["metrics"] = m;
  if (rec.solver) {
    nlohmann::json s;
    s["status"] = rec.solver->status;
    s["nodes"] = rec.solver->nodes;
    s["lp_iterations"] = rec.solver->lp_iterations;
    s["det_seconds"] = rec.solver->det_seconds;
    s["wall_seconds"] = rec.solver->wall_seconds;
    s["best_bound"] = rec.solver->best_bound;
    s["gap"] = rec.solver->gap;
    s["warm_started"] = rec.solver->warm_started;
    j["solver"] = s;
  } else {
    j["solver"] = nullptr;
  }
  return j.dump(indent);
}

RunRecord run_record_from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("result JSON parse error: ") +
                                e.what());
  }
  try {
    RunRecord rec;
    rec.model = run_model_from_string(j.at("model").get<std::string>());
    rec.status = j.at("status").get<std::string>();
    rec.instance = instance_from_json_text(j.at("instance").dump());
    rec.prices.p = j.at("prices").get<std::vector<double>>();
    rec.schedule.x = matrix_from_json(j.at("schedule").at("x"));
    if (!j.at("schedule").at("x_bar").is_null())
      rec.schedule.x_bar = matrix_from_json(j.at("schedule").at("x_bar"));
    if (j.contains("duals") && !j["duals"].is_null()) {
      DualSolution d;
      d.cap_dual = matrix_from_json(j["duals"].at("w"));
      d.demand_dual = j["duals"].at("v").get<std::vector<double>>();
      rec.duals = std::move(d);
    }
    rec.peak = j.at("peak").get<double>();
    rec.objective = j.at("objective").get<double>();
    const auto& m = j.at("metrics");
    rec.metrics.eb = m.at("eb").get<double>();
    rec.metrics.eb_total = m.at("eb_total").get<double>();
    rec.metrics.ic = m.at("ic").get<double>();
    rec.metrics.tc = m.at("tc").get<double>();
    rec.metrics.peak_load = m.at("peak_load").get<double>();
    rec.metrics.peak_load_total = m.at("peak_load_total").get<double>();
    rec.metrics.peak_cost = m.at("peak_cost").get<double>();
    rec.metrics.revenue = m.at("revenue").get<double>();
    rec.metrics.net_revenue = m.at("net_revenue").get<double>();
    if (!m.at("eb_pct").is_null()) rec.metrics.eb_pct = m["eb_pct"].get<double>();
    if (!m.at("ic_pct").is_null()) rec.metrics.ic_pct = m["ic_pct"].get<double>();
    if (!m.at("tc_pct").is_null()) rec.metrics.tc_pct = m["tc_pct"].get<double>();
    if (j.contains("solver") && !j["solver"].is_null()) {
      SolverInfo s;
      const auto& sj = j["solver"];
      s.status = sj.at("status").get<std::string>();
      s.nodes = sj.at("nodes").get<long>();
      s.lp_iterations = sj.at("lp_iterations").get<long>();
      s.det_seconds = sj.at("det_seconds").get<double>();
      s.wall_seconds = sj.at("wall_seconds").get<double>();
      s.best_bound = sj.at("best_bound").get<double>();
      s.gap = sj.at("gap").get<double>();
      s.warm_started = sj.at("warm_started").get<bool>();
      rec.solver = std::move(s);
    }
    return rec;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("result JSON field error: ") +
                                e.what());
  }
}

RunRecord load_run_record(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open result file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return run_record_from_json_text(buf.str());
}

void save_run_record(const RunRecord& rec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write result file: " + path);
  out << run_record_to_json(rec, 2) << "\n";
}

VerifyReport verify_run(const RunRecord& rec) {
  VerifyReport rep;
  auto fail = [&rep](const std::string& what) {
    rep.pass = false;
    rep.failures.push_back(what);
  };

  const auto violations = validate(rec.instance);
  if (!violations.empty()) {
    fail("embedded instance invalid");
    return rep;
  }
  Instance working = rec.instance;
  if (rec.model != RunModel::CP) working.competitor_prices.reset();
  if (rec.model == RunModel::CP && !rec.instance.has_competitor()) {
    fail("cp result without competitor prices");
    return rep;
  }
  if (!prices_feasible(working, rec.prices, 1e-7))
    fail("prices violate their caps");

  // follower response mismatch: the reported schedule must cost exactly what
  // the oracle optimum costs at the reported prices
  const FollowerSolution oracle = rec.model == RunModel::CP
                                      ? best_response_cp(working, rec.prices)
                                      : best_response_mp(working, rec.prices);
  double reported_cost = 0.0;
  try {
    reported_cost = follower_objective(working, rec.prices, rec.schedule);
  } catch (const std::exception& e) {
    fail(std::string("schedule rejected: ") + e.what());
    return rep;
  }
  rep.follower_gap = std::abs(reported_cost - oracle.objective);
  if (rep.follower_gap > 1e-6 * std::max(1.0, std::abs(oracle.objective)))
    fail("follower response mismatch");

  // KKT certificate from the reported duals (solver models only)
  if (rec.model != RunModel::BC) {
    if (!rec.duals) {
      fail("missing duals");
    } else {
      const KktReport kkt = kkt_check(working, rec.prices, rec.schedule,
                                      rec.duals->cap_dual,
                                      rec.duals->demand_dual);
      rep.kkt_residual = kkt.worst();
      if (rep.kkt_residual > 1e-8)
        fail("KKT certificate failed: " + kkt.worst_check);
    }
  }

  // peak must equal the leader's max load
  const auto load = leader_load(working, rec.schedule);
  const double max_load =
      load.empty() ? 0.0 : *std::max_element(load.begin(), load.end());
  rep.peak_residual = std::abs(rec.peak - max_load);
  if (rep.peak_residual > 1e-6) fail("peak does not equal max load");

  // strong duality: reported net revenue equals revenue - kappa * peak
  const double direct = leader_value(working, rec.prices, rec.schedule);
  rep.duality_residual = std::abs(direct - rec.objective);
  if (rep.duality_residual > 1e-6 * std::max(1.0, std::abs(direct)))
    fail("objective does not equal revenue minus peak cost");
  if (std::abs(rec.metrics.net_revenue - direct) >
      1e-6 * std::max(1.0, std::abs(direct)))
    fail("metrics net_revenue inconsistent");

  // dominance: with a strictly cheaper competitor the leader supplies nothing
  if (rec.model == RunModel::CP) {
    const auto refs = flatten(working);
    const auto& comp = *working.competitor_prices;
    for (size_t k = 0; k < refs.size() && rep.pass; ++k) {
      const Job& job = *refs[k].job;
      for (int t = 0; t < job.num_slots(); ++t) {
        const int h = job.tw_begin + t;
        if (rec.prices.p[h] > comp[h] + 1e-9 && rec.schedule.x[k][t] > 1e-6) {
          fail("dominance violation");
          break;
        }
      }
    }
  }
  return rep;
}

}  // namespace peakgrid
