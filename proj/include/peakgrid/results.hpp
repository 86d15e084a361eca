#pragma once

#include <optional>
#include <string>
#include <vector>

#include "peakgrid/metrics.hpp"
#include "peakgrid/mip.hpp"
#include "peakgrid/model.hpp"
#include "peakgrid/solver.hpp"

namespace peakgrid {

enum class RunModel { BC, MP, CP };

const char* to_string(RunModel m);
RunModel run_model_from_string(const std::string& name);

struct SolverInfo {
  std::string status;
  long nodes = 0;
  long lp_iterations = 0;
  double det_seconds = 0.0;
  double wall_seconds = 0.0;
  double best_bound = 0.0;
  double gap = 0.0;
  bool warm_started = false;
};

// One solved (or evaluated) instance: everything needed to audit the outcome
// without re-running the solver. The instance itself is embedded.
struct RunRecord {
  RunModel model = RunModel::BC;
  std::string status;  // Evaluated for BC, solver status otherwise
  Instance instance;
  PriceVector prices;
  Schedule schedule;
  std::optional<DualSolution> duals;
  double peak = 0.0;
  double objective = 0.0;  // leader net revenue
  MetricsReport metrics;
  std::optional<SolverInfo> solver;
};

// BC evaluates the cap-price preferred-slot outcome; MP and CP build the
// single-level MIP, seed it with the base-case response and run branch and
// bound. Percentage metrics are always relative to the instance's own BC.
RunRecord solve_instance(const Instance& inst, RunModel model,
                         const SolverLimits& limits);

std::string run_record_to_json(const RunRecord& record, int indent = -1);
RunRecord run_record_from_json_text(const std::string& text);
RunRecord load_run_record(const std::string& path);
void save_run_record(const RunRecord& record, const std::string& path);

struct VerifyReport {
  bool pass = true;
  std::vector<std::string> failures;
  double follower_gap = 0.0;  // |schedule cost - oracle optimum|
  double kkt_residual = 0.0;
  double duality_residual = 0.0;
  double peak_residual = 0.0;
};

// Re-derives everything checkable from the record: the follower oracle must
// agree with the reported schedule's cost, the reported duals must certify
// it, the linearized objective must equal revenue minus peak penalty, the
// peak must match the actual max load, and (CP) the leader must supply
// nothing where it is strictly undercut.
VerifyReport verify_run(const RunRecord& record);

}  // namespace peakgrid
