#pragma once

#include <optional>
#include <string>
#include <vector>

#include "peakgrid/generator.hpp"
#include "peakgrid/results.hpp"

namespace peakgrid {

struct ExperimentPlan {
  GeneratorConfig gen;
  SolverLimits limits;
  std::vector<RunModel> models = {RunModel::BC, RunModel::MP, RunModel::CP};
  std::string out_dir;
  int threads = 1;
  bool write_files = true;
};

// Desk-scale default: 5 customers x 2 jobs, 60 deterministic-second limit.
ExperimentPlan desk_plan();
// Paper-scale: 10 customers x 3 jobs, 4 hour limit per solve.
ExperimentPlan full_plan();

struct ExperimentTask {
  int instance_index = 0;
  RunModel model = RunModel::BC;
};

struct ExperimentOutput {
  std::vector<GeneratedInstance> instances;
  std::vector<ExperimentTask> tasks;
  std::vector<std::optional<RunRecord>> records;  // parallel to tasks
  std::vector<std::string> errors;                // parallel to tasks
  std::vector<std::string> csv_files;             // paths written

  const RunRecord* find(double kappa, double tww, int replicate,
                        RunModel model) const;
};

// Generates the design, solves every (instance, model) cell, persists
// instances, per-run results and the aggregate CSV tables. Cells are solved
// in parallel across `threads` workers; outputs do not depend on the worker
// count because solver time is deterministic.
ExperimentOutput run_experiment(const ExperimentPlan& plan);

}  // namespace peakgrid
