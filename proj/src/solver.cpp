#include "peakgrid/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

namespace peakgrid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDetFlopsPerSecond = 25.0e9;
constexpr double kNodeDetSeconds = 2.0e-5;
constexpr double kProvenGap = 1.0e-6;
constexpr double kIntegralityTol = 1e-6;
constexpr double kSeedTol = 1e-7;

struct Node {
  double bound = kInf;
  long id = 0;
  int depth = 0;
  std::vector<std::pair<int32_t, int8_t>> fixes;
  std::vector<double> binary_values;
  SimplexBasis basis;
};

double wall_seconds_since(
    const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

}  // namespace

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::GapLimit: return "GapLimit";
    case SolveStatus::TimeLimit: return "TimeLimit";
    case SolveStatus::NodeLimit: return "NodeLimit";
    case SolveStatus::Infeasible: return "Infeasible";
  }
  return "Unknown";
}

std::vector<double> warm_start(const MilpModel& model) {
  PriceVector caps{model.instance.price_cap};
  const FollowerSolution response =
      model.competitive ? best_response_cp(model.instance, caps)
                        : best_response_mp(model.instance, caps);
  return assignment_from_response(model, caps, response);
}

namespace {

class BranchAndBound {
 public:
  BranchAndBound(const MilpModel& model, const SolverLimits& limits,
                 const std::vector<double>* seed)
      : model_(model),
        limits_(limits),
        simplex_(model.lp),
        start_(std::chrono::steady_clock::now()) {
    root_lower_ = model.lp.lower;
    root_upper_ = model.lp.upper;
    binary_index_.assign(model.lp.num_vars(), -1);
    for (size_t i = 0; i < model.binary_vars.size(); ++i)
      binary_index_[model.binary_vars[i]] = static_cast<int>(i);
    if (seed) load_seed(*seed);
  }

  SolveResult run() {
    solve_root();
    while (result_.status != SolveStatus::Infeasible) {
      prune_open();
      const double bound = global_bound();
      const double gap = current_gap(bound);
      if (gap <= limits_.gap_tolerance + 1e-15) {
        result_.status =
            gap <= kProvenGap + 1e-15 ? SolveStatus::Optimal : SolveStatus::GapLimit;
        break;
      }
      if (open_.empty()) {
        result_.status = incumbent_.empty() ? SolveStatus::Infeasible
                                            : SolveStatus::Optimal;
        break;
      }
      if (limit_hit()) break;
      if (limits_.log_interval > 0 &&
          result_.stats.nodes >= logged_nodes_ + limits_.log_interval) {
        logged_nodes_ = result_.stats.nodes;
        std::fprintf(stderr,
                     "node=%ld bound=%.6f incumbent=%.6f gap=%.3e\n",
                     result_.stats.nodes, bound,
                     incumbent_.empty() ? std::nan("") : incumbent_obj_, gap);
      }
      expand(pop_node());
    }
    finalize();
    return std::move(result_);
  }

 private:
  void load_seed(const std::vector<double>& seed) {
    if (static_cast<int>(seed.size()) != model_.lp.num_vars()) return;
    if (max_violation(model_, seed) > kSeedTol) return;
    for (int j : model_.binary_vars) {
      if (std::abs(seed[j] - std::round(seed[j])) > kIntegralityTol) return;
    }
    incumbent_ = seed;
    incumbent_obj_ = model_objective(model_, seed);
    result_.warm_started = true;
  }

  void solve_root() {
    LpSolution root = simplex_.solve_cold(&root_lower_, &root_upper_);
    ++result_.stats.nodes;
    result_.stats.lp_iterations += root.iterations;
    if (root.status == LpStatus::Infeasible) {
      result_.status = incumbent_.empty() ? SolveStatus::Infeasible
                                          : SolveStatus::Optimal;
      return;
    }
    if (root.status == LpStatus::Unbounded)
      throw SolverError("relaxation unbounded: model is malformed");
    if (root.status == LpStatus::IterationLimit)
      throw SolverError("root LP hit the iteration limit");
    result_.status = SolveStatus::GapLimit;  // placeholder while searching
    Node root_node;
    root_node.bound = root.objective;
    root_node.id = next_id_++;
    root_node.depth = 0;
    admit(std::move(root_node), root);
  }

  void try_prices(const PriceVector& prices) {
    const FollowerSolution response =
        model_.competitive ? best_response_cp(model_.instance, prices)
                           : best_response_mp(model_.instance, prices);
    std::vector<double> candidate =
        assignment_from_response(model_, prices, response);
    const double value = model_objective(model_, candidate);
    if (value <= incumbent_obj_ + 1e-12) return;
    if (max_violation(model_, candidate) <= kSeedTol)
      offer_incumbent(candidate, value);
  }

  // Any price vector induces a true bilevel outcome through the follower
  // oracle (the same repair construction used when accepting integral
  // candidates). Each node offers two candidates: its raw LP prices and the
  // largest prices supporting the LP schedule against the LP's own marginal
  // cost estimates.
  void offer_oracle_incumbent(const LpSolution& sol) {
    PriceVector prices;
    prices.p.resize(model_.horizon());
    for (int h = 0; h < model_.horizon(); ++h)
      prices.p[h] = std::clamp(sol.values[model_.price_var(h)], 0.0,
                               model_.instance.price_cap[h]);
    try_prices(prices);

    for (int h = 0; h < model_.horizon(); ++h)
      prices.p[h] = model_.instance.price_cap[h];
    for (size_t k = 0; k < model_.jobs.size(); ++k) {
      const auto& jb = model_.jobs[k];
      const double v = sol.values[model_.v_var(static_cast<int>(k))];
      for (int t = 0; t < jb.slots; ++t) {
        if (sol.values[model_.x_var(static_cast<int>(k), t)] <= 1e-7) continue;
        const int h = jb.tw_begin + t;
        const double supporting = std::max(0.0, v - jb.delay_cost[t]);
        prices.p[h] = std::min(prices.p[h], supporting);
      }
    }
    try_prices(prices);
  }

  // Classify a solved node: drop, record incumbent, or keep open.
  void admit(Node&& node, const LpSolution& sol) {
    node.bound = std::min(node.bound, sol.objective);
    if (node.bound <= incumbent_obj_ + 1e-9) return;
    offer_oracle_incumbent(sol);
    if (node.bound <= incumbent_obj_ + 1e-9) return;
    int frac_var = -1;
    double frac_score = -1.0;
    node.binary_values.resize(model_.binary_vars.size());
    for (size_t i = 0; i < model_.binary_vars.size(); ++i) {
      const double v = sol.values[model_.binary_vars[i]];
      node.binary_values[i] = v;
      const double dist = std::min(v - std::floor(v), std::ceil(v) - v);
      if (dist > kIntegralityTol && dist > frac_score + 1e-12) {
        frac_score = dist;
        frac_var = static_cast<int>(i);
      }
    }
    if (frac_var < 0) {
      accept_candidate(node, sol);
      return;
    }
    node.basis = simplex_.current_basis();
    open_.push_back(std::move(node));
  }

  // All binaries integral: pin them and re-solve so complementarity holds
  // exactly, then verify the point against the follower oracle.
  void accept_candidate(const Node& node, const LpSolution& sol) {
    std::vector<double> lower = root_lower_;
    std::vector<double> upper = root_upper_;
    for (size_t i = 0; i < model_.binary_vars.size(); ++i) {
      const double v = std::round(node.binary_values[i]);
      lower[model_.binary_vars[i]] = v;
      upper[model_.binary_vars[i]] = v;
    }
    LpSolution fixed = simplex_.solve_warm(&lower, &upper);
    result_.stats.lp_iterations += fixed.iterations;
    if (fixed.status != LpStatus::Optimal) {
      ++result_.stats.rejected_candidates;
      return;
    }
    try {
      const ExtractedSolution ext = extract_solution(model_, fixed.values);
      const FollowerSolution oracle =
          model_.competitive ? best_response_cp(model_.instance, ext.prices)
                             : best_response_mp(model_.instance, ext.prices);
      const double reported =
          follower_objective(model_.instance, ext.prices, ext.schedule);
      const double tol = 1e-6 * std::max(1.0, std::abs(oracle.objective));
      if (std::abs(reported - oracle.objective) <= tol) {
        offer_incumbent(fixed.values, fixed.objective);
      } else {
        ++result_.stats.rejected_candidates;
        std::vector<double> repaired =
            assignment_from_response(model_, ext.prices, oracle);
        if (max_violation(model_, repaired) <= kSeedTol)
          offer_incumbent(repaired, model_objective(model_, repaired));
      }
    } catch (const ExtractionError&) {
      ++result_.stats.rejected_candidates;
    }
  }

  void offer_incumbent(const std::vector<double>& assignment, double value) {
    if (value <= incumbent_obj_ + 1e-12) return;
    incumbent_ = assignment;
    incumbent_obj_ = value;
    ++result_.stats.incumbents;
  }

  void prune_open() {
    std::erase_if(open_, [this](const Node& n) {
      return n.bound <= incumbent_obj_ + 1e-9;
    });
  }

  double global_bound() {
    double bound = incumbent_.empty() ? -kInf : incumbent_obj_;
    for (const Node& n : open_) bound = std::max(bound, n.bound);
    bound_cap_ = std::min(bound_cap_, std::max(bound, incumbent_obj_));
    return std::min(std::max(bound, incumbent_obj_), bound_cap_);
  }

  double current_gap(double bound) const {
    if (incumbent_.empty()) return kInf;
    return (bound - incumbent_obj_) / std::max(1.0, std::abs(incumbent_obj_));
  }

  double det_seconds() const {
    return simplex_.work_flops() / kDetFlopsPerSecond +
           static_cast<double>(result_.stats.nodes) * kNodeDetSeconds;
  }

  bool limit_hit() {
    if (limits_.node_limit >= 0 && result_.stats.nodes >= limits_.node_limit) {
      result_.status = SolveStatus::NodeLimit;
      return true;
    }
    if (det_seconds() >= limits_.time_limit) {
      result_.status = SolveStatus::TimeLimit;
      return true;
    }
    if (wall_seconds_since(start_) >= 10.0 * limits_.time_limit) {
      result_.status = SolveStatus::TimeLimit;
      result_.stats.wall_cutoff = true;
      return true;
    }
    return false;
  }

  Node pop_node() {
    size_t best = 0;
    if (incumbent_.empty()) {
      // dive: deepest node first until something integer-feasible exists
      for (size_t i = 1; i < open_.size(); ++i) {
        if (open_[i].depth > open_[best].depth ||
            (open_[i].depth == open_[best].depth &&
             open_[i].id < open_[best].id))
          best = i;
      }
    } else {
      for (size_t i = 1; i < open_.size(); ++i) {
        if (open_[i].bound > open_[best].bound + 1e-12 ||
            (open_[i].bound > open_[best].bound - 1e-12 &&
             open_[i].id < open_[best].id))
          best = i;
      }
    }
    Node node = std::move(open_[best]);
    open_[best] = std::move(open_.back());
    open_.pop_back();
    return node;
  }

  void expand(Node node) {
    std::vector<uint8_t> fixed(model_.binary_vars.size(), 0);
    for (const auto& [var, val] : node.fixes) {
      (void)val;
      if (binary_index_[var] >= 0) fixed[binary_index_[var]] = 1;
    }
    // branch variable: most fractional unfixed binary, lowest index on ties
    int branch = -1;
    double best_dist = kIntegralityTol;
    for (size_t i = 0; i < node.binary_values.size(); ++i) {
      if (fixed[i]) continue;
      const double v = node.binary_values[i];
      const double dist = std::min(v - std::floor(v), std::ceil(v) - v);
      if (dist > best_dist + 1e-12) {
        best_dist = dist;
        branch = static_cast<int>(i);
      }
    }
    if (branch < 0) {
      // numerically integral after all; take the lowest unfixed binary
      for (size_t i = 0; i < fixed.size(); ++i)
        if (!fixed[i]) {
          branch = static_cast<int>(i);
          break;
        }
      if (branch < 0) return;  // fully fixed; nothing left
    }
    const int32_t branch_var = model_.binary_vars[branch];

    if (!simplex_.basis_matches(node.basis)) simplex_.set_basis(node.basis);
    const BoundedSimplex::State state = simplex_.snapshot();

    for (int8_t value = 0; value <= 1; ++value) {
      if (value == 1) simplex_.restore(state);
      std::vector<double> lower = root_lower_;
      std::vector<double> upper = root_upper_;
      for (const auto& [var, val] : node.fixes) {
        lower[var] = val;
        upper[var] = val;
      }
      lower[branch_var] = value;
      upper[branch_var] = value;
      LpSolution sol = simplex_.solve_warm(&lower, &upper);
      ++result_.stats.nodes;
      result_.stats.lp_iterations += sol.iterations;
      if (sol.status == LpStatus::IterationLimit)
        throw SolverError("node LP hit the iteration limit");
      if (sol.status == LpStatus::Unbounded)
        throw SolverError("node LP unbounded: model is malformed");
      if (sol.status == LpStatus::Infeasible) continue;
      Node child;
      child.bound = std::min(node.bound, sol.objective);
      child.id = next_id_++;
      child.depth = node.depth + 1;
      child.fixes = node.fixes;
      child.fixes.emplace_back(branch_var, value);
      admit(std::move(child), sol);
      if (limit_hit()) {
        if (value == 0) {
          // keep the unexplored sibling open so the bound stays valid
          Node sibling;
          sibling.bound = node.bound;
          sibling.id = next_id_++;
          sibling.depth = node.depth + 1;
          sibling.fixes = node.fixes;
          sibling.fixes.emplace_back(branch_var, int8_t(1));
          sibling.binary_values = node.binary_values;
          sibling.basis = node.basis;
          open_.push_back(std::move(sibling));
        }
        return;
      }
    }
  }

  void finalize() {
    result_.stats.refactorizations = simplex_.refactor_count();
    result_.stats.det_seconds = det_seconds();
    result_.stats.wall_seconds = wall_seconds_since(start_);
    const bool have_incumbent = !incumbent_.empty();
    result_.objective = have_incumbent ? incumbent_obj_ : 0.0;
    result_.incumbent = std::move(incumbent_);
    double bound = have_incumbent ? result_.objective : -kInf;
    for (const Node& n : open_) bound = std::max(bound, n.bound);
    bound = std::min(bound, bound_cap_);
    if (result_.status == SolveStatus::Optimal && have_incumbent)
      bound = result_.objective;
    result_.best_bound = bound;
    result_.gap = have_incumbent
                      ? (result_.best_bound - result_.objective) /
                            std::max(1.0, std::abs(result_.objective))
                      : kInf;
    if (result_.status == SolveStatus::Infeasible && have_incumbent)
      result_.status = SolveStatus::Optimal;
  }

  const MilpModel& model_;
  SolverLimits limits_;
  BoundedSimplex simplex_;
  std::chrono::steady_clock::time_point start_;
  std::vector<double> root_lower_, root_upper_;
  std::vector<int> binary_index_;
  std::vector<Node> open_;
  std::vector<double> incumbent_;
  double incumbent_obj_ = -kInf;
  double bound_cap_ = kInf;
  long next_id_ = 0;
  long logged_nodes_ = 0;
  SolveResult result_;
};

}  // namespace

SolveResult solve(const MilpModel& model, const SolverLimits& limits,
                  const std::vector<double>* seed) {
  BranchAndBound bb(model, limits, seed);
  return bb.run();
}

}  // namespace peakgrid
