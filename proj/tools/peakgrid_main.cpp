// peakgrid: day-ahead pricing optimizer for preemptive smart-grid loads.
// Subcommands: generate | solve | experiment | verify.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "peakgrid/experiment.hpp"
#include "peakgrid/generator.hpp"
#include "peakgrid/results.hpp"

namespace fs = std::filesystem;
using namespace peakgrid;

namespace {

std::optional<double> env_time_limit() {
  const char* raw = std::getenv("PEAKGRID_TIME_LIMIT");
  if (!raw || !*raw) return std::nullopt;
  try {
    return std::stod(raw);
  } catch (const std::exception&) {
    throw std::invalid_argument(
        "PEAKGRID_TIME_LIMIT must be a number of seconds");
  }
}

int cmd_generate(const std::string& config_path, const std::string& out_dir,
                 std::optional<uint64_t> seed) {
  GeneratorConfig config =
      config_path.empty() ? GeneratorConfig{} : load_config(config_path);
  if (seed) config.seed = *seed;
  check_config(config);
  fs::create_directories(out_dir);
  const auto instances = batch(config);
  nlohmann::json files = nlohmann::json::array();
  for (const auto& gi : instances) {
    char name[96];
    std::snprintf(name, sizeof(name), "inst_k%g_tww%g_r%d.json", gi.kappa,
                  100.0 * gi.tww, gi.replicate);
    save_instance(gi.instance, (fs::path(out_dir) / name).string());
    nlohmann::json f;
    f["file"] = name;
    f["kappa"] = gi.kappa;
    f["tww"] = gi.tww;
    f["replicate"] = gi.replicate;
    f["seed"] = gi.seed;
    files.push_back(f);
  }
  nlohmann::json manifest;
  manifest["config"] = nlohmann::json::parse(config_to_json(config));
  manifest["instances"] = files;
  std::ofstream mf(fs::path(out_dir) / "manifest.json");
  mf << manifest.dump(2) << "\n";
  std::cout << "wrote " << instances.size() << " instances to " << out_dir
            << "\n";
  return 0;
}

int cmd_solve(const std::string& instance_path, const std::string& model_name,
              SolverLimits limits, const std::string& out_path) {
  const Instance inst = load_instance(instance_path);
  const RunModel model = run_model_from_string(model_name);
  const RunRecord rec = solve_instance(inst, model, limits);
  const std::string text = run_record_to_json(rec, 2);
  if (out_path.empty()) {
    std::cout << text << "\n";
  } else {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << text << "\n";
    std::cout << to_string(model) << " " << rec.status
              << " net_revenue=" << rec.metrics.net_revenue << " -> "
              << out_path << "\n";
  }
  return 0;
}

int cmd_experiment(const std::string& config_path, const std::string& out_dir,
                   SolverLimits limits, int threads, bool full,
                   std::optional<uint64_t> seed,
                   const std::vector<std::string>& model_names) {
  ExperimentPlan plan = full ? full_plan() : desk_plan();
  if (!config_path.empty()) plan.gen = load_config(config_path);
  if (seed) plan.gen.seed = *seed;
  plan.limits = limits;
  plan.threads = threads;
  plan.out_dir = out_dir;
  if (!model_names.empty()) {
    plan.models.clear();
    for (const auto& name : model_names)
      plan.models.push_back(run_model_from_string(name));
  }
  fs::create_directories(out_dir);
  const ExperimentOutput out = run_experiment(plan);
  int failures = 0;
  for (const auto& err : out.errors)
    if (!err.empty()) ++failures;
  std::cout << "experiment: " << out.tasks.size() - failures << "/"
            << out.tasks.size() << " cells solved, outputs in " << out_dir
            << "\n";
  return failures == 0 ? 0 : 1;
}

int cmd_verify(const std::string& result_path) {
  const RunRecord rec = load_run_record(result_path);
  const VerifyReport rep = verify_run(rec);
  std::cout << "follower objective gap: " << rep.follower_gap << "\n"
            << "KKT residual:          " << rep.kkt_residual << "\n"
            << "duality residual:      " << rep.duality_residual << "\n"
            << "peak residual:         " << rep.peak_residual << "\n";
  if (rep.pass) {
    std::cout << "verify: PASS\n";
    return 0;
  }
  for (const auto& f : rep.failures) std::cout << "verify: FAIL - " << f << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Day-ahead pricing with demand response: generate instances, "
               "solve the monopoly (mp) or competitive (cp) pricing model or "
               "evaluate the base case (bc), run the experiment sweep, and "
               "verify result files."};
  app.require_subcommand(1);

  std::string config_path, out_path, instance_path, model_name = "mp",
              result_path;
  std::vector<std::string> model_names;
  uint64_t seed_value = 0;
  bool seed_given = false;
  double time_limit = 60.0;
  double gap = 1e-6;
  int threads = 1;
  bool full = false;

  auto* gen = app.add_subcommand("generate", "write seeded instance files");
  gen->add_option("--config", config_path, "generator config JSON");
  gen->add_option("--out", out_path, "output directory")->required();
  gen->add_option("--seed", seed_value, "override the config seed")
      ->each([&](const std::string&) { seed_given = true; });

  auto* solve_cmd = app.add_subcommand("solve", "solve one instance");
  solve_cmd->add_option("--instance", instance_path, "instance JSON file")
      ->required();
  solve_cmd->add_option("--model", model_name, "bc | mp | cp")->required();
  solve_cmd->add_option("--time-limit", time_limit,
                        "deterministic seconds per solve");
  solve_cmd->add_option("--gap", gap, "relative gap tolerance");
  solve_cmd->add_option("--threads", threads, "accepted for symmetry");
  solve_cmd->add_option("--out", out_path, "result JSON path (default stdout)");

  auto* exp = app.add_subcommand("experiment", "run the full sweep");
  exp->add_option("--config", config_path, "generator config JSON");
  exp->add_option("--out", out_path, "output directory")->required();
  exp->add_option("--time-limit", time_limit,
                  "deterministic seconds per solve");
  exp->add_option("--gap", gap, "relative gap tolerance");
  exp->add_option("--threads", threads, "parallel instance solves");
  exp->add_option("--models", model_names, "subset of bc,mp,cp")
      ->delimiter(',');
  exp->add_option("--seed", seed_value, "override the config seed")
      ->each([&](const std::string&) { seed_given = true; });
  exp->add_flag("--full", full, "paper-scale design (10x3 jobs, 4h limit)");

  auto* ver = app.add_subcommand("verify", "re-check a result file");
  ver->add_option("--result", result_path, "result JSON file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    SolverLimits limits;
    limits.time_limit = time_limit;
    limits.gap_tolerance = gap;
    if (const auto env = env_time_limit()) limits.time_limit = *env;
    const std::optional<uint64_t> seed =
        seed_given ? std::optional<uint64_t>(seed_value) : std::nullopt;

    if (gen->parsed()) return cmd_generate(config_path, out_path, seed);
    if (solve_cmd->parsed())
      return cmd_solve(instance_path, model_name, limits, out_path);
    if (exp->parsed()) {
      if (full && exp->count("--time-limit") == 0 && !env_time_limit())
        limits.time_limit = 14400.0;
      return cmd_experiment(config_path, out_path, limits, threads, full, seed,
                            model_names);
    }
    if (ver->parsed()) return cmd_verify(result_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
