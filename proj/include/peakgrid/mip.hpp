#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "peakgrid/follower.hpp"
#include "peakgrid/model.hpp"
#include "peakgrid/simplex.hpp"

namespace peakgrid {

// Valid linearization constants for one job. m1 gates supply against the
// dual slack, m2 gates the demand dual against the demand surplus, m3 gates
// the capacity dual against the unused capacity.
struct BigMBundle {
  double m1 = 0.0;
  double m2 = 0.0;
  double m3 = 0.0;
};

std::vector<BigMBundle> compute_big_ms(const Instance& inst);

// Single-level MIP equivalent of the bilevel pricing problem. The leader's
// bilinear revenue is replaced through lower-level strong duality, and each
// complementarity pair is linearized with a binary and a big-M:
//   bx gates supply vs. the dual slack of its column,
//   bw gates the capacity dual vs. unused capacity,
//   bv gates the demand dual vs. the demand surplus,
//   bxb (competitive only) gates competitor supply vs. its dual slack.
//
// Variable order: p_0..p_{H-1}, peak, then per job
//   x_t.., w_t.., v, bx_t.., bw_t.., bv [, xb_t.., bxb_t..].
// Row order: peak rows per slot, then per job
//   [capacity_t..], demand, dual_x_t.., [dual_xb_t..],
//   {cap pair}_t.., {demand pair}, {supply pair}_t.. [, {comp supply pair}_t..].
// Row counts per job: 5*T + 3 (monopoly), 9*T + 3 (competitive);
// variable counts per job: 4*T + 2 and 6*T + 2, plus H + 1 shared.
struct MilpModel {
  bool competitive = false;
  Instance instance;

  struct JobBlock {
    int tw_begin = 0;
    int slots = 0;
    double power_cap = 0.0;
    double demand = 0.0;
    std::vector<double> delay_cost;  // inconvenience per slot offset
    BigMBundle big_m;
    int var_base = 0;
    int row_base = 0;
  };
  std::vector<JobBlock> jobs;

  LinearProgram lp;  // maximize form
  std::vector<uint8_t> is_binary;
  std::vector<int32_t> binary_vars;
  std::vector<std::string> var_names;

  int horizon() const { return instance.horizon; }
  int price_var(int h) const { return h; }
  int peak_var() const { return instance.horizon; }
  int x_var(int k, int t) const { return jobs[k].var_base + t; }
  int w_var(int k, int t) const { return jobs[k].var_base + jobs[k].slots + t; }
  int v_var(int k) const { return jobs[k].var_base + 2 * jobs[k].slots; }
  int bx_var(int k, int t) const {
    return jobs[k].var_base + 2 * jobs[k].slots + 1 + t;
  }
  int bw_var(int k, int t) const {
    return jobs[k].var_base + 3 * jobs[k].slots + 1 + t;
  }
  int bv_var(int k) const { return jobs[k].var_base + 4 * jobs[k].slots + 1; }
  int xb_var(int k, int t) const {
    return jobs[k].var_base + 4 * jobs[k].slots + 2 + t;
  }
  int bxb_var(int k, int t) const {
    return jobs[k].var_base + 5 * jobs[k].slots + 2 + t;
  }

  static int expected_var_count(const Instance& inst, bool competitive);
  static int expected_row_count(const Instance& inst, bool competitive);
};

class BuildError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class ExtractionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// big_m_override replaces the computed per-job constants; values must still
// be valid upper bounds (used to confirm the optimum is M-independent).
MilpModel build_mp_mip(const Instance& inst,
                       const std::vector<BigMBundle>* big_m_override = nullptr);
MilpModel build_cp_mip(const Instance& inst,
                       const std::vector<BigMBundle>* big_m_override = nullptr);

struct DualSolution {
  std::vector<std::vector<double>> cap_dual;
  std::vector<double> demand_dual;
};

struct ExtractedSolution {
  PriceVector prices;
  Schedule schedule;
  DualSolution duals;
  double peak = 0.0;
};

// Maps an assignment back to domain types after checking it satisfies every
// model constraint to tolerance.
ExtractedSolution extract_solution(const MilpModel& model,
                                   const std::vector<double>& assignment,
                                   double tol = 1e-6);

// Largest relative constraint violation of an assignment (rows and bounds).
double max_violation(const MilpModel& model,
                     const std::vector<double>& assignment);

// Linearized objective (what the MIP maximizes).
double model_objective(const MilpModel& model,
                       const std::vector<double>& assignment);

// Revenue minus peak penalty evaluated directly from prices and schedule;
// equals model_objective at every complementary point (strong duality).
double leader_value(const Instance& inst, const PriceVector& prices,
                    const Schedule& schedule);

// Integer-feasible assignment encoding a follower best response at the given
// prices; used for warm starts and incumbent repair.
std::vector<double> assignment_from_response(const MilpModel& model,
                                             const PriceVector& prices,
                                             const FollowerSolution& response);

// CPLEX-style LP text format, for cross-checks with external solvers.
void write_lp_file(const MilpModel& model, std::ostream& os);

}  // namespace peakgrid
