#include "peakgrid/simplex.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstring>
#include <limits>

namespace peakgrid {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-9;      // smallest usable ratio-test entry
constexpr double kRebasePivotTol = 1e-7;
constexpr int kRefactorInterval = 120;
constexpr int kStallLimit = 600;        // degenerate pivots before Bland
}  // namespace

BoundedSimplex::BoundedSimplex(const LinearProgram& lp) {
  n_ = lp.num_vars();
  m_ = lp.num_rows();
  total_ = n_ + m_;
  rhs_.resize(m_);
  for (int i = 0; i < m_; ++i) rhs_[i] = lp.rows[i].rhs;
  cost_.assign(total_, 0.0);
  for (int j = 0; j < n_; ++j) cost_[j] = -lp.objective[j];  // minimize

  // transpose rows into CSC columns
  std::vector<int32_t> counts(n_, 0);
  for (const auto& row : lp.rows)
    for (const auto& [j, v] : row.coefs) {
      (void)v;
      ++counts[j];
    }
  col_start_.assign(n_ + 1, 0);
  for (int j = 0; j < n_; ++j) col_start_[j + 1] = col_start_[j] + counts[j];
  col_row_.resize(col_start_[n_]);
  col_val_.resize(col_start_[n_]);
  std::vector<int32_t> fill(col_start_.begin(), col_start_.end() - 1);
  for (int i = 0; i < m_; ++i)
    for (const auto& [j, v] : lp.rows[i].coefs) {
      col_row_[fill[j]] = i;
      col_val_[fill[j]] = v;
      ++fill[j];
    }

  lb_.assign(total_, 0.0);
  ub_.assign(total_, kInf);
  for (int j = 0; j < n_; ++j) {
    lb_[j] = lp.lower[j];
    ub_[j] = lp.upper[j];
  }
  // slack bounds stay [0, inf)
  reset_to_slack_basis();
}

void BoundedSimplex::load_bounds(const std::vector<double>* lower,
                                 const std::vector<double>* upper) {
  if (lower) {
    assert(static_cast<int>(lower->size()) == n_);
    std::copy(lower->begin(), lower->end(), lb_.begin());
  }
  if (upper) {
    assert(static_cast<int>(upper->size()) == n_);
    std::copy(upper->begin(), upper->end(), ub_.begin());
  }
  for (int j = 0; j < n_; ++j) {
    if (!std::isfinite(lb_[j]))
      throw LpNumericalError("free variables are not supported");
  }
}

void BoundedSimplex::reset_to_slack_basis() {
  basic_.resize(m_);
  vstat_.assign(total_, kAtLower);
  for (int i = 0; i < m_; ++i) {
    basic_[i] = n_ + i;
    vstat_[n_ + i] = kBasic;
  }
  binv_.assign(static_cast<size_t>(m_) * m_, 0.0);
  for (int i = 0; i < m_; ++i) binv_[static_cast<size_t>(i) * m_ + i] = 1.0;
  rebuild_positions();
  factor_valid_ = true;
  pivots_since_refactor_ = 0;
}

void BoundedSimplex::rebuild_positions() {
  position_.assign(total_, -1);
  for (int i = 0; i < m_; ++i) position_[basic_[i]] = i;
}

double BoundedSimplex::nonbasic_value(int var) const {
  return vstat_[var] == kAtUpper ? ub_[var] : lb_[var];
}

void BoundedSimplex::ftran(int var, std::vector<double>* out) const {
  out->assign(m_, 0.0);
  if (var >= n_) {
    const int r = var - n_;
    for (int i = 0; i < m_; ++i)
      (*out)[i] = binv_[static_cast<size_t>(i) * m_ + r];
    return;
  }
  for (int32_t k = col_start_[var]; k < col_start_[var + 1]; ++k) {
    const int r = col_row_[k];
    const double v = col_val_[k];
    const double* col = binv_.data() + r;
    for (int i = 0; i < m_; ++i)
      (*out)[i] += v * col[static_cast<size_t>(i) * m_];
  }
}

void BoundedSimplex::btran_dense(const std::vector<double>& row_costs,
                                 std::vector<double>* y) const {
  y->assign(m_, 0.0);
  for (int i = 0; i < m_; ++i) {
    const double c = row_costs[i];
    if (c == 0.0) continue;
    const double* row = binv_.data() + static_cast<size_t>(i) * m_;
    double* yd = y->data();
    for (int k = 0; k < m_; ++k) yd[k] += c * row[k];
  }
}

double BoundedSimplex::column_dot(int var, const std::vector<double>& y) const {
  if (var >= n_) return y[var - n_];
  double acc = 0.0;
  for (int32_t k = col_start_[var]; k < col_start_[var + 1]; ++k)
    acc += col_val_[k] * y[col_row_[k]];
  return acc;
}

void BoundedSimplex::refactorize() {
  // Gauss-Jordan on [B | I] with partial pivoting.
  std::vector<double> a(static_cast<size_t>(m_) * m_, 0.0);
  for (int k = 0; k < m_; ++k) {
    const int var = basic_[k];
    if (var >= n_) {
      a[static_cast<size_t>(var - n_) * m_ + k] = 1.0;
    } else {
      for (int32_t e = col_start_[var]; e < col_start_[var + 1]; ++e)
        a[static_cast<size_t>(col_row_[e]) * m_ + k] = col_val_[e];
    }
  }
  std::vector<double>& inv = binv_;
  std::fill(inv.begin(), inv.end(), 0.0);
  for (int i = 0; i < m_; ++i) inv[static_cast<size_t>(i) * m_ + i] = 1.0;

  for (int col = 0; col < m_; ++col) {
    int piv = col;
    double best = std::abs(a[static_cast<size_t>(col) * m_ + col]);
    for (int r = col + 1; r < m_; ++r) {
      const double cand = std::abs(a[static_cast<size_t>(r) * m_ + col]);
      if (cand > best) {
        best = cand;
        piv = r;
      }
    }
    if (best < 1e-12) throw LpNumericalError("singular basis matrix");
    if (piv != col) {
      for (int k = 0; k < m_; ++k) {
        std::swap(a[static_cast<size_t>(piv) * m_ + k],
                  a[static_cast<size_t>(col) * m_ + k]);
        std::swap(inv[static_cast<size_t>(piv) * m_ + k],
                  inv[static_cast<size_t>(col) * m_ + k]);
      }
    }
    double* arow = a.data() + static_cast<size_t>(col) * m_;
    double* irow = inv.data() + static_cast<size_t>(col) * m_;
    const double scale = 1.0 / arow[col];
    for (int k = 0; k < m_; ++k) {
      arow[k] *= scale;
      irow[k] *= scale;
    }
    for (int r = 0; r < m_; ++r) {
      if (r == col) continue;
      const double f = a[static_cast<size_t>(r) * m_ + col];
      if (f == 0.0) continue;
      double* ar = a.data() + static_cast<size_t>(r) * m_;
      double* ir = inv.data() + static_cast<size_t>(r) * m_;
      for (int k = 0; k < m_; ++k) {
        ar[k] -= f * arow[k];
        ir[k] -= f * irow[k];
      }
    }
  }
  factor_valid_ = true;
  pivots_since_refactor_ = 0;
  ++refactors_;
  flops_ += 2.0 * static_cast<double>(m_) * m_ * m_;
}

void BoundedSimplex::compute_basic_values() {
  // xb = binv * (rhs - N x_N)
  work_.assign(m_, 0.0);
  for (int i = 0; i < m_; ++i) work_[i] = rhs_[i];
  for (int j = 0; j < total_; ++j) {
    if (vstat_[j] == kBasic) continue;
    const double v = nonbasic_value(j);
    if (v == 0.0) continue;
    if (j >= n_) {
      work_[j - n_] -= v;
    } else {
      for (int32_t k = col_start_[j]; k < col_start_[j + 1]; ++k)
        work_[col_row_[k]] -= v * col_val_[k];
    }
  }
  xb_.assign(m_, 0.0);
  for (int i = 0; i < m_; ++i) {
    const double* row = binv_.data() + static_cast<size_t>(i) * m_;
    double acc = 0.0;
    for (int k = 0; k < m_; ++k) acc += row[k] * work_[k];
    xb_[i] = acc;
  }
  flops_ += 2.0 * static_cast<double>(m_) * m_;
}

SimplexBasis BoundedSimplex::current_basis() const {
  SimplexBasis b;
  b.basic = basic_;
  b.at_upper.assign(total_, 0);
  for (int j = 0; j < total_; ++j)
    b.at_upper[j] = (vstat_[j] == kAtUpper) ? 1 : 0;
  return b;
}

bool BoundedSimplex::basis_matches(const SimplexBasis& basis) const {
  // set comparison: row order is an internal detail
  if (static_cast<int>(basis.basic.size()) != m_ ||
      static_cast<int>(basis.at_upper.size()) != total_)
    return false;
  for (int32_t v : basis.basic)
    if (position_[v] < 0) return false;
  for (int j = 0; j < total_; ++j) {
    if (vstat_[j] == kBasic) continue;
    const bool up = vstat_[j] == kAtUpper;
    if (static_cast<bool>(basis.at_upper[j]) != up) return false;
  }
  return true;
}

bool BoundedSimplex::try_incremental_rebase(const SimplexBasis& basis) {
  // The basis is a column set; our internal row order may differ from the
  // stored order. Pivot each missing column into some row whose variable is
  // leaving, best pivot magnitude first. Bail to a full refactor on small
  // pivots or large set differences.
  std::vector<uint8_t> in_new(total_, 0);
  for (int32_t v : basis.basic) in_new[v] = 1;
  std::vector<int32_t> entering;
  for (int32_t v : basis.basic)
    if (position_[v] < 0) entering.push_back(v);
  if (entering.empty()) return true;
  if (static_cast<int>(entering.size()) > std::max(8, m_ / 4)) return false;
  std::sort(entering.begin(), entering.end());
  std::vector<uint8_t> removable(m_, 0);
  for (int r = 0; r < m_; ++r) removable[r] = in_new[basic_[r]] ? 0 : 1;
  for (int32_t q : entering) {
    ftran(q, &alpha_);
    flops_ += 8.0 * m_;
    int best_r = -1;
    double best_a = kRebasePivotTol;
    for (int r = 0; r < m_; ++r) {
      if (!removable[r]) continue;
      const double a = std::abs(alpha_[r]);
      if (a > best_a) {
        best_a = a;
        best_r = r;
      }
    }
    if (best_r < 0) return false;
    const double inv_piv = 1.0 / alpha_[best_r];
    double* prow = binv_.data() + static_cast<size_t>(best_r) * m_;
    for (int k = 0; k < m_; ++k) prow[k] *= inv_piv;
    for (int i = 0; i < m_; ++i) {
      if (i == best_r) continue;
      const double f = alpha_[i];
      if (f == 0.0) continue;
      double* irow = binv_.data() + static_cast<size_t>(i) * m_;
      for (int k = 0; k < m_; ++k) irow[k] -= f * prow[k];
    }
    flops_ += 2.0 * static_cast<double>(m_) * m_;
    position_[basic_[best_r]] = -1;
    basic_[best_r] = q;
    position_[q] = best_r;
    removable[best_r] = 0;
    ++pivots_since_refactor_;
  }
  return true;
}

void BoundedSimplex::set_basis(const SimplexBasis& basis) {
  if (static_cast<int>(basis.basic.size()) != m_ ||
      static_cast<int>(basis.at_upper.size()) != total_)
    throw LpNumericalError("basis shape mismatch");

  bool rebased = factor_valid_ && try_incremental_rebase(basis);
  if (!rebased) {
    basic_ = basis.basic;
    rebuild_positions();
  }
  for (int j = 0; j < total_; ++j)
    vstat_[j] = basis.at_upper[j] ? kAtUpper : kAtLower;
  for (int i = 0; i < m_; ++i) vstat_[basic_[i]] = kBasic;
  if (!rebased) refactorize();
}

BoundedSimplex::State BoundedSimplex::snapshot() const {
  return State{basic_, vstat_, binv_};
}

void BoundedSimplex::restore(const State& state) {
  basic_ = state.basic;
  vstat_ = state.vstat;
  binv_ = state.binv;
  rebuild_positions();
  factor_valid_ = true;
  pivots_since_refactor_ = 0;
}

LpSolution BoundedSimplex::solve_cold(const std::vector<double>* lower,
                                      const std::vector<double>* upper,
                                      long max_iterations) {
  load_bounds(lower, upper);
  reset_to_slack_basis();
  return run(max_iterations);
}

LpSolution BoundedSimplex::solve_warm(const std::vector<double>* lower,
                                      const std::vector<double>* upper,
                                      long max_iterations) {
  load_bounds(lower, upper);
  // A nonbasic variable may sit at a bound that no longer exists after an
  // override; snap it to the nearest finite bound.
  for (int j = 0; j < total_; ++j) {
    if (vstat_[j] == kAtUpper && !std::isfinite(ub_[j])) vstat_[j] = kAtLower;
  }
  if (!factor_valid_) refactorize();
  return run(max_iterations);
}

LpSolution BoundedSimplex::run(long max_iterations) {
  LpSolution out;
  compute_basic_values();

  long iter = 0;
  int stall = 0;
  bool bland = false;
  int cleanup_rounds = 0;
  double last_measure = kInf;
  int last_phase = 0;
  std::vector<double> phase_costs(m_, 0.0);

  while (true) {
    if (iter >= max_iterations) {
      out.status = LpStatus::IterationLimit;
      break;
    }

    // classify basic feasibility
    double infeas = 0.0;
    for (int i = 0; i < m_; ++i) {
      const int b = basic_[i];
      if (xb_[i] < lb_[b] - kFeasTol) infeas += lb_[b] - xb_[i];
      else if (xb_[i] > ub_[b] + kFeasTol) infeas += xb_[i] - ub_[b];
    }
    const int phase = infeas > 0.0 ? 1 : 2;

    // pricing vector
    if (phase == 1) {
      for (int i = 0; i < m_; ++i) {
        const int b = basic_[i];
        if (xb_[i] < lb_[b] - kFeasTol) phase_costs[i] = -1.0;
        else if (xb_[i] > ub_[b] + kFeasTol) phase_costs[i] = 1.0;
        else phase_costs[i] = 0.0;
      }
    } else {
      for (int i = 0; i < m_; ++i) phase_costs[i] = cost_[basic_[i]];
    }
    btran_dense(phase_costs, &y_);
    flops_ += static_cast<double>(m_) * m_;

    // progress / stall tracking
    double measure;
    if (phase == 1) {
      measure = infeas;
    } else {
      measure = 0.0;
      for (int j = 0; j < total_; ++j) {
        if (cost_[j] == 0.0) continue;
        measure += cost_[j] *
                   (vstat_[j] == kBasic ? xb_[position_[j]] : nonbasic_value(j));
      }
    }
    if (phase != last_phase) {
      last_measure = kInf;
      stall = 0;
      bland = false;
      last_phase = phase;
    }
    if (measure < last_measure - 1e-12 * (1.0 + std::abs(last_measure))) {
      stall = 0;
      bland = false;
      last_measure = measure;
    } else if (++stall > kStallLimit) {
      bland = true;
    }

    // entering variable
    int enter = -1;
    double best_score = 0.0;
    for (int j = 0; j < total_; ++j) {
      const uint8_t st = vstat_[j];
      if (st == kBasic) continue;
      if (ub_[j] - lb_[j] < 1e-12) continue;  // fixed
      const double d = (phase == 1 ? 0.0 : cost_[j]) - column_dot(j, y_);
      bool eligible;
      if (st == kAtLower)
        eligible = d < -kOptTol;
      else
        eligible = d > kOptTol;
      if (!eligible) continue;
      if (bland) {
        enter = j;
        break;
      }
      const double score = std::abs(d);
      if (score > best_score + 1e-15) {
        best_score = score;
        enter = j;
      }
    }

    if (enter < 0) {
      // confirm the claim with fresh factors, but only when they are stale
      if (cleanup_rounds < 1 && pivots_since_refactor_ >= 40) {
        ++cleanup_rounds;
        refactorize();
        compute_basic_values();
        continue;
      }
      out.status = phase == 1 ? LpStatus::Infeasible : LpStatus::Optimal;
      break;
    }

    const int sigma = vstat_[enter] == kAtLower ? 1 : -1;
    ftran(enter, &alpha_);
    flops_ += 2.0 * m_ * 4.0;

    // ratio test
    double best_t = kInf;
    int leave_row = -1;
    int leave_bound = 0;
    double leave_alpha = 0.0;
    for (int i = 0; i < m_; ++i) {
      const double a = alpha_[i];
      if (std::abs(a) <= kPivotTol) continue;
      const double delta = -sigma * a;  // basic value change per unit step
      const int b = basic_[i];
      double target;
      int tb;
      if (delta > 0.0) {
        if (xb_[i] < lb_[b] - kFeasTol) {
          target = lb_[b];
          tb = 0;
        } else if (xb_[i] > ub_[b] + kFeasTol) {
          continue;  // already above range; composite cost accounts for it
        } else if (std::isfinite(ub_[b])) {
          target = ub_[b];
          tb = 1;
        } else {
          continue;
        }
      } else {
        if (xb_[i] > ub_[b] + kFeasTol) {
          target = ub_[b];
          tb = 1;
        } else if (xb_[i] < lb_[b] - kFeasTol) {
          continue;
        } else {
          target = lb_[b];
          tb = 0;
        }
      }
      double t = (target - xb_[i]) / delta;
      if (t < 0.0) t = 0.0;
      bool take = false;
      if (t < best_t - 1e-12) {
        take = true;
      } else if (t <= best_t + 1e-12 && leave_row >= 0) {
        if (bland) {
          take = b < basic_[leave_row];
        } else if (std::abs(a) > std::abs(leave_alpha) * (1.0 + 1e-12)) {
          take = true;
        } else if (std::abs(a) >= std::abs(leave_alpha) * (1.0 - 1e-12)) {
          take = b < basic_[leave_row];
        }
      }
      if (take) {
        best_t = std::min(best_t, t);
        leave_row = i;
        leave_bound = tb;
        leave_alpha = a;
      }
    }

    const double range = ub_[enter] - lb_[enter];
    const bool flip = std::isfinite(range) && range <= best_t + 1e-12;
    if (!flip && leave_row < 0) {
      if (phase == 1)
        throw LpNumericalError("phase-1 ray: numerical breakdown");
      out.status = LpStatus::Unbounded;
      break;
    }

    const double step = flip ? range : best_t;
    if (step > 0.0) {
      for (int i = 0; i < m_; ++i) xb_[i] -= sigma * step * alpha_[i];
    }

    if (flip) {
      vstat_[enter] = vstat_[enter] == kAtLower ? kAtUpper : kAtLower;
    } else {
      const int leave_var = basic_[leave_row];
      const double enter_value = nonbasic_value(enter) + sigma * step;
      // product-form update of the inverse
      const double inv_piv = 1.0 / alpha_[leave_row];
      double* prow = binv_.data() + static_cast<size_t>(leave_row) * m_;
      for (int k = 0; k < m_; ++k) prow[k] *= inv_piv;
      for (int i = 0; i < m_; ++i) {
        if (i == leave_row) continue;
        const double f = alpha_[i];
        if (f == 0.0) continue;
        double* irow = binv_.data() + static_cast<size_t>(i) * m_;
        for (int k = 0; k < m_; ++k) irow[k] -= f * prow[k];
      }
      flops_ += 2.0 * static_cast<double>(m_) * m_;
      vstat_[leave_var] = leave_bound ? kAtUpper : kAtLower;
      position_[leave_var] = -1;
      basic_[leave_row] = enter;
      position_[enter] = leave_row;
      vstat_[enter] = kBasic;
      xb_[leave_row] = enter_value;
      if (++pivots_since_refactor_ >= kRefactorInterval) {
        refactorize();
        compute_basic_values();
      }
    }
    ++iter;
    if (step > 0.0) cleanup_rounds = 0;
  }

  out.iterations = iter;
  if (out.status == LpStatus::Optimal) {
    out.values.resize(n_);
    for (int j = 0; j < n_; ++j)
      out.values[j] = vstat_[j] == kBasic ? xb_[position_[j]] : nonbasic_value(j);
    double obj = 0.0;
    for (int j = 0; j < n_; ++j) obj += cost_[j] * out.values[j];
    out.objective = -obj;
    out.row_duals.assign(m_, 0.0);
    for (int i = 0; i < m_; ++i) phase_costs[i] = cost_[basic_[i]];
    btran_dense(phase_costs, &y_);
    for (int i = 0; i < m_; ++i) out.row_duals[i] = -y_[i];
  }
  return out;
}

}  // namespace peakgrid
