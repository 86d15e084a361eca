#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace peakgrid {

// Bounded-variable LP in the solver's computational form:
//   maximize objective . z   subject to   coefs . z <= rhs  (per row),
//   lower <= z <= upper.
// Rows with >= sense must be negated by the caller before loading.
struct LinearProgram {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> objective;
  struct Row {
    std::vector<std::pair<int32_t, double>> coefs;
    double rhs = 0.0;
  };
  std::vector<Row> rows;

  int num_vars() const { return static_cast<int>(objective.size()); }
  int num_rows() const { return static_cast<int>(rows.size()); }
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

// Basis snapshot: one variable index per row plus the rest position of every
// variable (structurals first, then one slack per row).
struct SimplexBasis {
  std::vector<int32_t> basic;
  std::vector<uint8_t> at_upper;

  bool empty() const { return basic.empty(); }
  bool operator==(const SimplexBasis&) const = default;
};

struct LpSolution {
  LpStatus status = LpStatus::IterationLimit;
  double objective = 0.0;            // maximize sense
  std::vector<double> values;        // structural variables only
  std::vector<double> row_duals;     // maximize sense: >= 0 on binding rows
  long iterations = 0;
};

class LpNumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Primal simplex over bounded variables with a dense product-form inverse.
// Phase 1 drives bound violations of the basic variables to zero with a
// composite objective; phase 2 is Dantzig pricing with a Bland fallback once
// progress stalls. All tie-breaking is by variable index, so identical input
// yields an identical pivot sequence.
class BoundedSimplex {
 public:
  explicit BoundedSimplex(const LinearProgram& lp);

  // Solve from the all-slack basis. Bound overrides, when given, replace the
  // structural bounds for this call (arrays of length num_vars).
  LpSolution solve_cold(const std::vector<double>* lower = nullptr,
                        const std::vector<double>* upper = nullptr,
                        long max_iterations = kDefaultMaxIterations);

  // Continue from the current internal basis and factorization.
  LpSolution solve_warm(const std::vector<double>* lower = nullptr,
                        const std::vector<double>* upper = nullptr,
                        long max_iterations = kDefaultMaxIterations);

  SimplexBasis current_basis() const;
  bool basis_matches(const SimplexBasis& basis) const;
  void set_basis(const SimplexBasis& basis);

  struct State {
    std::vector<int32_t> basic;
    std::vector<uint8_t> vstat;
    std::vector<double> binv;
  };
  State snapshot() const;
  void restore(const State& state);

  // Cumulative floating-point work estimate; the deterministic clock.
  double work_flops() const { return flops_; }
  long refactor_count() const { return refactors_; }

  static constexpr long kDefaultMaxIterations = 2000000;
  static constexpr double kFeasTol = 1e-9;
  static constexpr double kOptTol = 1e-9;

 private:
  enum VStat : uint8_t { kAtLower = 0, kAtUpper = 1, kBasic = 2 };

  void load_bounds(const std::vector<double>* lower,
                   const std::vector<double>* upper);
  void reset_to_slack_basis();
  void rebuild_positions();
  void refactorize();
  bool try_incremental_rebase(const SimplexBasis& basis);
  void compute_basic_values();
  double nonbasic_value(int var) const;
  void ftran(int var, std::vector<double>* out) const;
  void btran_dense(const std::vector<double>& row_costs,
                   std::vector<double>* y) const;
  double column_dot(int var, const std::vector<double>& y) const;
  LpSolution run(long max_iterations);

  int n_ = 0;       // structural variables
  int m_ = 0;       // rows
  int total_ = 0;   // n_ + m_
  std::vector<double> rhs_;
  std::vector<double> cost_;  // minimize sense, structurals only (slacks 0)
  // structural columns, CSC
  std::vector<int32_t> col_start_;
  std::vector<int32_t> col_row_;
  std::vector<double> col_val_;
  std::vector<double> lb_, ub_;  // per variable incl. slacks

  std::vector<int32_t> basic_;
  std::vector<int32_t> position_;  // var -> basis row, -1 if nonbasic
  std::vector<uint8_t> vstat_;
  std::vector<double> xb_;
  std::vector<double> binv_;  // row-major m_ x m_
  bool factor_valid_ = false;
  int pivots_since_refactor_ = 0;

  double flops_ = 0.0;
  long refactors_ = 0;

  // scratch
  std::vector<double> alpha_, y_, work_;
};

}  // namespace peakgrid
