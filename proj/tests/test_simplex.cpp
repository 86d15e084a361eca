#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "peakgrid/simplex.hpp"

using namespace peakgrid;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

uint64_t mix(uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}
double u01(uint64_t h) { return double(h >> 11) * 0x1.0p-53; }

// Independent optimality certificate: primal feasibility, dual feasibility
// and complementary slackness recomputed from the raw problem data.
void check_certificate(const LinearProgram& lp, const LpSolution& sol) {
  REQUIRE(sol.status == LpStatus::Optimal);
  const int n = lp.num_vars();
  const int m = lp.num_rows();
  for (int j = 0; j < n; ++j) {
    CHECK(sol.values[j] >= lp.lower[j] - 1e-7);
    if (std::isfinite(lp.upper[j])) CHECK(sol.values[j] <= lp.upper[j] + 1e-7);
  }
  std::vector<double> activity(m, 0.0);
  for (int i = 0; i < m; ++i)
    for (const auto& [j, v] : lp.rows[i].coefs) activity[i] += v * sol.values[j];
  for (int i = 0; i < m; ++i) {
    CHECK(activity[i] <= lp.rows[i].rhs + 1e-7);
    CHECK(sol.row_duals[i] >= -1e-7);  // maximize sense duals on <= rows
    // complementary slackness on rows
    CHECK(std::min(sol.row_duals[i], lp.rows[i].rhs - activity[i]) <= 1e-6);
  }
  // reduced costs: c_j - sum_i y_i a_ij must be <= 0 at lower, >= 0 at upper
  for (int j = 0; j < n; ++j) {
    double yaj = 0.0;
    for (int i = 0; i < m; ++i)
      for (const auto& [col, v] : lp.rows[i].coefs)
        if (col == j) yaj += sol.row_duals[i] * v;
    const double d = lp.objective[j] - yaj;
    const bool at_lower = sol.values[j] <= lp.lower[j] + 1e-6;
    const bool at_upper =
        std::isfinite(lp.upper[j]) && sol.values[j] >= lp.upper[j] - 1e-6;
    if (!at_lower && !at_upper) CHECK(std::abs(d) <= 1e-6);
    if (at_lower && !at_upper) CHECK(d <= 1e-6);
    if (at_upper && !at_lower) CHECK(d >= -1e-6);
  }
}

}  // namespace

TEST_CASE("empty model solves to zero") {
  LinearProgram lp;
  BoundedSimplex simplex(lp);
  const LpSolution sol = simplex.solve_cold();
  CHECK(sol.status == LpStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(0.0));
}

TEST_CASE("simple two-variable LP") {
  // max 3x + 2y s.t. x + y <= 4, x + 3y <= 6, 0 <= x,y <= 3
  LinearProgram lp;
  lp.lower = {0.0, 0.0};
  lp.upper = {3.0, 3.0};
  lp.objective = {3.0, 2.0};
  lp.rows.push_back({{{0, 1.0}, {1, 1.0}}, 4.0});
  lp.rows.push_back({{{0, 1.0}, {1, 3.0}}, 6.0});
  BoundedSimplex simplex(lp);
  const LpSolution sol = simplex.solve_cold();
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(11.0));  // x=3, y=1
  CHECK(sol.values[0] == doctest::Approx(3.0));
  CHECK(sol.values[1] == doctest::Approx(1.0));
  check_certificate(lp, sol);
}

TEST_CASE("phase one repairs >= rows") {
  // max -x s.t. -x <= -2  (x >= 2), x <= 5
  LinearProgram lp;
  lp.lower = {0.0};
  lp.upper = {5.0};
  lp.objective = {-1.0};
  lp.rows.push_back({{{0, -1.0}}, -2.0});
  BoundedSimplex simplex(lp);
  const LpSolution sol = simplex.solve_cold();
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.values[0] == doctest::Approx(2.0));
  CHECK(sol.objective == doctest::Approx(-2.0));
}

TEST_CASE("infeasible detected") {
  // x <= 1 and x >= 3 with bounds [0, 5]
  LinearProgram lp;
  lp.lower = {0.0};
  lp.upper = {5.0};
  lp.objective = {1.0};
  lp.rows.push_back({{{0, 1.0}}, 1.0});
  lp.rows.push_back({{{0, -1.0}}, -3.0});
  BoundedSimplex simplex(lp);
  CHECK(simplex.solve_cold().status == LpStatus::Infeasible);
}

TEST_CASE("unbounded detected") {
  LinearProgram lp;
  lp.lower = {0.0};
  lp.upper = {kInf};
  lp.objective = {1.0};
  lp.rows.push_back({{{0, -1.0}}, 0.0});
  BoundedSimplex simplex(lp);
  CHECK(simplex.solve_cold().status == LpStatus::Unbounded);
}

TEST_CASE("bound overrides and warm restarts") {
  // max x + y s.t. x + y <= 10, boxes
  LinearProgram lp;
  lp.lower = {0.0, 0.0};
  lp.upper = {8.0, 8.0};
  lp.objective = {1.0, 1.0};
  lp.rows.push_back({{{0, 1.0}, {1, 1.0}}, 10.0});
  BoundedSimplex simplex(lp);
  LpSolution sol = simplex.solve_cold();
  CHECK(sol.objective == doctest::Approx(10.0));
  std::vector<double> lower = {0.0, 0.0};
  std::vector<double> upper = {1.0, 8.0};
  sol = simplex.solve_warm(&lower, &upper);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(9.0));
  CHECK(sol.values[0] == doctest::Approx(1.0));
  lower = {2.0, 0.0};
  upper = {2.0, 8.0};
  sol = simplex.solve_warm(&lower, &upper);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.values[0] == doctest::Approx(2.0));
  CHECK(sol.objective == doctest::Approx(10.0));
}

TEST_CASE("snapshot and restore reproduce the state") {
  LinearProgram lp;
  lp.lower = {0.0, 0.0, 0.0};
  lp.upper = {4.0, 4.0, 4.0};
  lp.objective = {2.0, 3.0, 1.0};
  lp.rows.push_back({{{0, 1.0}, {1, 1.0}, {2, 1.0}}, 6.0});
  lp.rows.push_back({{{0, 1.0}, {1, 2.0}}, 5.0});
  BoundedSimplex simplex(lp);
  const LpSolution first = simplex.solve_cold();
  const auto snap = simplex.snapshot();
  std::vector<double> lower = {0.0, 0.0, 0.0};
  std::vector<double> upper = {0.0, 4.0, 4.0};
  const LpSolution restricted = simplex.solve_warm(&lower, &upper);
  simplex.restore(snap);
  const LpSolution again = simplex.solve_warm(&lp.lower, &lp.upper);
  CHECK(again.objective == doctest::Approx(first.objective));
  CHECK(restricted.objective <= first.objective + 1e-9);
}

TEST_CASE("determinism: identical runs pivot identically") {
  LinearProgram lp;
  lp.lower.assign(6, 0.0);
  lp.upper.assign(6, 3.0);
  lp.objective = {1.0, 2.0, 3.0, 1.5, 2.5, 0.5};
  lp.rows.push_back({{{0, 1.0}, {1, 1.0}, {2, 1.0}}, 5.0});
  lp.rows.push_back({{{2, 1.0}, {3, 1.0}, {4, 1.0}}, 4.0});
  lp.rows.push_back({{{0, 1.0}, {4, 2.0}, {5, 1.0}}, 6.0});
  BoundedSimplex a(lp), b(lp);
  const LpSolution sa = a.solve_cold();
  const LpSolution sb = b.solve_cold();
  CHECK(sa.iterations == sb.iterations);
  CHECK(sa.objective == sb.objective);
  CHECK(sa.values == sb.values);
}

TEST_CASE("random LPs carry a valid optimality certificate") {
  uint64_t state = 42;
  int optimal_count = 0;
  for (int trial = 0; trial < 120; ++trial) {
    const int n = 2 + static_cast<int>(u01(state = mix(state)) * 6);
    const int m = 1 + static_cast<int>(u01(state = mix(state)) * 6);
    LinearProgram lp;
    lp.lower.assign(n, 0.0);
    lp.upper.assign(n, 0.0);
    lp.objective.assign(n, 0.0);
    for (int j = 0; j < n; ++j) {
      lp.upper[j] = 1.0 + 4.0 * u01(state = mix(state));
      lp.objective[j] = -2.0 + 4.0 * u01(state = mix(state));
    }
    for (int i = 0; i < m; ++i) {
      LinearProgram::Row row;
      for (int j = 0; j < n; ++j) {
        const double r = u01(state = mix(state));
        if (r < 0.5) continue;
        row.coefs.push_back({j, -2.0 + 4.0 * u01(state = mix(state))});
      }
      row.rhs = -1.0 + 6.0 * u01(state = mix(state));
      lp.rows.push_back(std::move(row));
    }
    BoundedSimplex simplex(lp);
    const LpSolution sol = simplex.solve_cold();
    REQUIRE(sol.status != LpStatus::IterationLimit);
    REQUIRE(sol.status != LpStatus::Unbounded);  // boxes keep it bounded
    if (sol.status == LpStatus::Optimal) {
      ++optimal_count;
      check_certificate(lp, sol);
    }
  }
  CHECK(optimal_count > 60);  // most random boxes are feasible
}
