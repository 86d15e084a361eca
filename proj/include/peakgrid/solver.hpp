#pragma once

#include <stdexcept>
#include <vector>

#include "peakgrid/mip.hpp"

namespace peakgrid {

// time_limit counts deterministic seconds derived from the solver's
// floating-point work, so runs are reproducible; wall clock only acts as a
// 10x safety valve.
struct SolverLimits {
  double time_limit = 60.0;
  double gap_tolerance = 1e-6;
  long node_limit = -1;   // < 0: unlimited
  long log_interval = 0;  // > 0: progress lines every that many nodes
};

enum class SolveStatus { Optimal, GapLimit, TimeLimit, NodeLimit, Infeasible };

const char* to_string(SolveStatus s);

struct SolveStats {
  long nodes = 0;           // node LPs solved, root included
  long lp_iterations = 0;
  int incumbents = 0;       // improving incumbents found by the search
  int rejected_candidates = 0;
  long refactorizations = 0;
  double det_seconds = 0.0;
  double wall_seconds = 0.0;
  bool wall_cutoff = false;
};

struct SolveResult {
  SolveStatus status = SolveStatus::Infeasible;
  std::vector<double> incumbent;  // full assignment; empty if none found
  double objective = 0.0;         // incumbent objective, maximize sense
  double best_bound = 0.0;
  double gap = 0.0;               // (bound - objective) / max(1, |objective|)
  SolveStats stats;
  bool warm_started = false;

  bool has_incumbent() const { return !incumbent.empty(); }
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Integer-feasible seed: cap prices plus the follower's best response to
// them (the all-prices-at-cap outcome). Rejected by solve() if it fails the
// feasibility tolerances, in which case the search simply starts unseeded.
std::vector<double> warm_start(const MilpModel& model);

// Branch and bound over the complementarity binaries: best-bound node
// selection (depth-first until a first incumbent exists), branching on the
// most fractional binary with lowest-index ties, candidate incumbents
// re-verified against the follower oracle before acceptance.
SolveResult solve(const MilpModel& model, const SolverLimits& limits = {},
                  const std::vector<double>* seed = nullptr);

}  // namespace peakgrid
