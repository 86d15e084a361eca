#include "peakgrid/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "json.hpp"

namespace peakgrid {

namespace fs = std::filesystem;

ExperimentPlan desk_plan() {
  ExperimentPlan plan;
  plan.gen.n_customers = 5;
  plan.gen.jobs_per_customer = 2;
  plan.limits.time_limit = 60.0;
  return plan;
}

ExperimentPlan full_plan() {
  ExperimentPlan plan;
  plan.gen.n_customers = 10;
  plan.gen.jobs_per_customer = 3;
  plan.limits.time_limit = 14400.0;
  return plan;
}

namespace {

std::string fmt(double v, const char* spec = "%.6f") {
  if (!std::isfinite(v)) return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v + 0.0);  // normalize -0
  return buf;
}

std::string kappa_tag(double kappa) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", kappa);
  return buf;
}

std::string tww_tag(double tww) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", 100.0 * tww);
  return buf;
}

std::string instance_file_name(const GeneratedInstance& gi) {
  return "inst_k" + kappa_tag(gi.kappa) + "_tww" + tww_tag(gi.tww) + "_r" +
         std::to_string(gi.replicate) + ".json";
}

std::string result_file_name(const GeneratedInstance& gi, RunModel model) {
  return std::string("result_") + to_string(model) + "_k" +
         kappa_tag(gi.kappa) + "_tww" + tww_tag(gi.tww) + "_r" +
         std::to_string(gi.replicate) + ".json";
}

struct Averager {
  double sum = 0.0;
  int count = 0;
  void add(double v) {
    sum += v;
    ++count;
  }
  bool empty() const { return count == 0; }
  double mean() const { return count ? sum / count : 0.0; }
};

}  // namespace

const RunRecord* ExperimentOutput::find(double kappa, double tww,
                                        int replicate, RunModel model) const {
  for (size_t t = 0; t < tasks.size(); ++t) {
    if (tasks[t].model != model || !records[t]) continue;
    const GeneratedInstance& gi = instances[tasks[t].instance_index];
    if (gi.kappa == kappa && gi.tww == tww && gi.replicate == replicate)
      return &*records[t];
  }
  return nullptr;
}

ExperimentOutput run_experiment(const ExperimentPlan& plan) {
  check_config(plan.gen);
  ExperimentOutput out;
  out.instances = batch(plan.gen);

  fs::path dir(plan.out_dir.empty() ? "." : plan.out_dir);
  if (plan.write_files) {
    fs::create_directories(dir / "instances");
    fs::create_directories(dir / "results");
    for (const auto& gi : out.instances)
      save_instance(gi.instance, (dir / "instances" / instance_file_name(gi)).string());
  }

  for (int i = 0; i < static_cast<int>(out.instances.size()); ++i)
    for (RunModel model : plan.models)
      out.tasks.push_back(ExperimentTask{i, model});
  out.records.assign(out.tasks.size(), std::nullopt);
  out.errors.assign(out.tasks.size(), {});

  const int threads = std::max(1, plan.threads);
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const size_t t = next.fetch_add(1);
      if (t >= out.tasks.size()) break;
      const ExperimentTask& task = out.tasks[t];
      try {
        out.records[t] = solve_instance(out.instances[task.instance_index].instance,
                                        task.model, plan.limits);
      } catch (const std::exception& e) {
        out.errors[t] = e.what();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (size_t t = 0; t < out.tasks.size(); ++t) {
    if (!out.errors[t].empty())
      std::cerr << "experiment cell failed ("
                << to_string(out.tasks[t].model) << ", instance "
                << out.tasks[t].instance_index << "): " << out.errors[t]
                << "\n";
  }

  if (!plan.write_files) return out;

  for (size_t t = 0; t < out.tasks.size(); ++t) {
    if (!out.records[t]) continue;
    const auto& gi = out.instances[out.tasks[t].instance_index];
    save_run_record(*out.records[t],
                    (dir / "results" / result_file_name(gi, out.tasks[t].model))
                        .string());
  }

  // cost tables (percent of BC) and solver tables, one pair per tww value
  const auto& tww_values = plan.gen.tww;
  for (size_t wi = 0; wi < tww_values.size() && wi < 2; ++wi) {
    const double tww = tww_values[wi];
    const std::string cost_name = wi == 0 ? "table1.csv" : "table2.csv";
    const std::string solver_name = wi == 0 ? "table3.csv" : "table4.csv";

    std::ofstream cost(dir / cost_name);
    cost << "kappa,MP_EB,MP_IC,MP_TC,CP_EB,CP_IC,CP_TC\n";
    Averager all_mp_eb, all_mp_ic, all_mp_tc, all_cp_eb, all_cp_ic, all_cp_tc;
    std::ofstream solver(dir / solver_name);
    solver << "kappa,avg_time_MP,avg_time_CP,avg_gap_MP,avg_gap_CP,"
              "unsolved_MP,unsolved_CP\n";

    for (double kappa : plan.gen.kappa_set) {
      Averager mp_eb, mp_ic, mp_tc, cp_eb, cp_ic, cp_tc;
      Averager time_mp, time_cp, gap_mp, gap_cp;
      int unsolved_mp = 0, unsolved_cp = 0;
      for (int rep = 0; rep < plan.gen.replicates; ++rep) {
        for (RunModel model : {RunModel::MP, RunModel::CP}) {
          const RunRecord* rec = out.find(kappa, tww, rep, model);
          if (!rec) continue;
          const bool mp = model == RunModel::MP;
          if (rec->metrics.eb_pct) {
            (mp ? mp_eb : cp_eb).add(*rec->metrics.eb_pct);
            (mp ? mp_ic : cp_ic).add(*rec->metrics.ic_pct);
            (mp ? mp_tc : cp_tc).add(*rec->metrics.tc_pct);
          }
          if (rec->solver) {
            if (rec->solver->status == "Optimal") {
              (mp ? time_mp : time_cp).add(rec->solver->det_seconds);
            } else {
              (mp ? unsolved_mp : unsolved_cp) += 1;
              (mp ? gap_mp : gap_cp).add(100.0 * rec->solver->gap);
            }
          }
        }
      }
      cost << kappa_tag(kappa) << "," << fmt(mp_eb.mean()) << ","
           << fmt(mp_ic.mean()) << "," << fmt(mp_tc.mean()) << ","
           << fmt(cp_eb.mean()) << "," << fmt(cp_ic.mean()) << ","
           << fmt(cp_tc.mean()) << "\n";
      all_mp_eb.add(mp_eb.mean());
      all_mp_ic.add(mp_ic.mean());
      all_mp_tc.add(mp_tc.mean());
      all_cp_eb.add(cp_eb.mean());
      all_cp_ic.add(cp_ic.mean());
      all_cp_tc.add(cp_tc.mean());
      solver << kappa_tag(kappa) << "," << fmt(time_mp.mean()) << ","
             << fmt(time_cp.mean()) << "," << fmt(gap_mp.mean(), "%.4f") << ","
             << fmt(gap_cp.mean(), "%.4f") << "," << unsolved_mp << ","
             << unsolved_cp << "\n";
    }
    cost << "average," << fmt(all_mp_eb.mean()) << "," << fmt(all_mp_ic.mean())
         << "," << fmt(all_mp_tc.mean()) << "," << fmt(all_cp_eb.mean()) << ","
         << fmt(all_cp_ic.mean()) << "," << fmt(all_cp_tc.mean()) << "\n";
    out.csv_files.push_back((dir / cost_name).string());
    out.csv_files.push_back((dir / solver_name).string());
  }

  {
    std::ofstream fig(dir / "figures.csv");
    fig << "tww,kappa,model,peak_cost,peak_load,peak_load_total,net_revenue\n";
    for (double tww : tww_values) {
      for (double kappa : plan.gen.kappa_set) {
        for (RunModel model : plan.models) {
          Averager pc, pl, plt, nr;
          for (int rep = 0; rep < plan.gen.replicates; ++rep) {
            const RunRecord* rec = out.find(kappa, tww, rep, model);
            if (!rec) continue;
            pc.add(rec->metrics.peak_cost);
            pl.add(rec->metrics.peak_load);
            plt.add(rec->metrics.peak_load_total);
            nr.add(rec->metrics.net_revenue);
          }
          if (pc.empty()) continue;
          fig << tww_tag(tww) << "," << kappa_tag(kappa) << ","
              << to_string(model) << "," << fmt(pc.mean()) << ","
              << fmt(pl.mean()) << "," << fmt(plt.mean()) << ","
              << fmt(nr.mean()) << "\n";
        }
      }
    }
    out.csv_files.push_back((dir / "figures.csv").string());
  }

  {
    // per-slot picture of replicate 0, mirroring the load/price panels
    std::ofstream curve(dir / "loadcurve.csv");
    curve << "tww,kappa,model,slot,load,load_total,price\n";
    for (double tww : tww_values) {
      for (double kappa : plan.gen.kappa_set) {
        for (RunModel model : plan.models) {
          const RunRecord* rec = out.find(kappa, tww, 0, model);
          if (!rec) continue;
          const auto lead = leader_load(rec->instance, rec->schedule);
          const auto total = total_load(rec->instance, rec->schedule);
          for (int h = 0; h < rec->instance.horizon; ++h) {
            curve << tww_tag(tww) << "," << kappa_tag(kappa) << ","
                  << to_string(model) << "," << h << "," << fmt(lead[h]) << ","
                  << fmt(total[h]) << "," << fmt(rec->prices.p[h]) << "\n";
          }
        }
      }
    }
    out.csv_files.push_back((dir / "loadcurve.csv").string());
  }

  {
    nlohmann::json manifest;
    manifest["config"] = nlohmann::json::parse(config_to_json(plan.gen));
    manifest["time_limit"] = plan.limits.time_limit;
    manifest["gap_tolerance"] = plan.limits.gap_tolerance;
    nlohmann::json files = nlohmann::json::array();
    for (const auto& gi : out.instances) {
      nlohmann::json f;
      f["file"] = instance_file_name(gi);
      f["kappa"] = gi.kappa;
      f["tww"] = gi.tww;
      f["replicate"] = gi.replicate;
      f["seed"] = gi.seed;
      files.push_back(f);
    }
    manifest["instances"] = files;
    std::ofstream mf(dir / "manifest.json");
    mf << manifest.dump(2) << "\n";
  }

  return out;
}

}  // namespace peakgrid
