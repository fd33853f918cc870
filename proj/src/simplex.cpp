#include "simplex.hpp"

#include "flexgauge/errors.hpp"
#include "flexgauge/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace flexgauge {
namespace {

constexpr double kTieEps = 1e-12;
constexpr double kDegenerateStep = 1e-12;
constexpr double kHarrisTol = 1e-9;
// Pivots this small are only trusted on a fresh factorization.
constexpr double kSuspectPivot = 1e-6;
// Row and column computations of the pivot element must agree this well.
constexpr double kPivotAgreement = 1e-8;
constexpr double kDropTol = 1e-14;
constexpr std::size_t kMaxEtas = 100;
// Crash pivots smaller than this fraction of the column's largest entry are skipped.
constexpr double kCrashPivot = 1e-3;

}  // namespace

SimplexCore::SimplexCore(const LinearProgram& lp, const SolverOptions& opts) : lp_(lp), opts_(opts) {
  m_ = static_cast<int>(lp.n_rows());
  n_ = static_cast<int>(lp.n_cols());
  const double sign = lp.sense == ObjectiveSense::minimize ? 1.0 : -1.0;
  lb_.assign(lp.lower.begin(), lp.lower.end());
  ub_.assign(lp.upper.begin(), lp.upper.end());
  cost_.resize(n_);
  for (int j = 0; j < n_; ++j) cost_[j] = sign * lp.objective[j];
  for (int i = 0; i < m_; ++i) {
    const double rhs = lp.rhs[i];
    switch (lp.row_sense[i]) {
      case RowSense::less_equal: lb_.push_back(-kInf); ub_.push_back(rhs); break;
      case RowSense::equal: lb_.push_back(rhs); ub_.push_back(rhs); break;
      case RowSense::greater_equal: lb_.push_back(rhs); ub_.push_back(kInf); break;
    }
    cost_.push_back(0.0);
  }

  col_start_.assign(n_ + 1, 0);
  for (int i = 0; i < m_; ++i)
    for (const auto& [c, v] : lp.rows[i]) ++col_start_[c + 1];
  for (int j = 0; j < n_; ++j) col_start_[j + 1] += col_start_[j];
  col_row_.resize(col_start_[n_]);
  col_val_.resize(col_start_[n_]);
  std::vector<int> fill(col_start_.begin(), col_start_.end() - 1);
  for (int i = 0; i < m_; ++i)
    for (const auto& [c, v] : lp.rows[i]) {
      col_row_[fill[c]] = i;
      col_val_[fill[c]++] = v;
    }
  work_col_.assign(m_, 0.0);
  work_rho_.assign(m_, 0.0);
}

SimplexCore::~SimplexCore() = default;

long SimplexCore::call_limit() const {
  return opts_.iteration_limit > 0 ? opts_.iteration_limit : 50L * (m_ + n_) + 100;
}

void SimplexCore::set_costs(std::span<const double> c) {
  for (int j = 0; j < n_; ++j) cost_[j] = c[j];
}

void SimplexCore::set_col_bounds(int col, double lb, double ub) {
  lb_[col] = lb;
  ub_[col] = ub;
  if (have_basis_ && status_[col] != Status::basic) place_nonbasic(col);
}

void SimplexCore::set_row_bounds(int row, double lb, double ub) { set_col_bounds(n_ + row, lb, ub); }

void SimplexCore::add_column(int j, double scale, std::vector<double>& v) const {
  if (j < n_) {
    for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) v[col_row_[k]] += scale * col_val_[k];
  } else if (j < n_ + m_) {
    v[j - n_] -= scale;
  } else {
    const int a = j - n_ - m_;
    v[art_row_[a]] += scale * art_sign_[a];
  }
}

void SimplexCore::place_nonbasic(int j) {
  const bool lo = std::isfinite(lb_[j]);
  const bool hi = std::isfinite(ub_[j]);
  Status st = status_[j];
  if (st == Status::at_lower && !lo) st = hi ? Status::at_upper : Status::free_zero;
  else if (st == Status::at_upper && !hi) st = lo ? Status::at_lower : Status::free_zero;
  else if (st == Status::free_zero && (lo || hi)) st = lo ? Status::at_lower : Status::at_upper;
  status_[j] = st;
  const double target = st == Status::at_lower ? lb_[j] : st == Status::at_upper ? ub_[j] : 0.0;
  move_nonbasic(j, target);
}

void SimplexCore::move_nonbasic(int j, double new_value) {
  const double delta = new_value - x_[j];
  if (delta == 0.0) return;
  x_[j] = new_value;
  std::fill(work_col_.begin(), work_col_.end(), 0.0);
  add_column(j, 1.0, work_col_);
  ftran(work_col_);
  for (int i = 0; i < m_; ++i)
    if (work_col_[i] != 0.0) x_[basis_[i]] -= work_col_[i] * delta;
}

void SimplexCore::ftran(std::vector<double>& v) const {
  if (m_ == 0) return;
  Eigen::Map<Eigen::VectorXd> vec(v.data(), m_);
  const Eigen::VectorXd solved = lu_->solve(vec);
  vec = solved;
  for (const Eta& e : etas_) {
    const double vr = v[e.pos] / e.pivot;
    v[e.pos] = vr;
    if (vr == 0.0) continue;
    for (std::size_t k = 0; k < e.index.size(); ++k) v[e.index[k]] -= e.value[k] * vr;
  }
}

void SimplexCore::btran(std::vector<double>& v) const {
  for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
    double s = v[it->pos];
    for (std::size_t k = 0; k < it->index.size(); ++k) s -= v[it->index[k]] * it->value[k];
    v[it->pos] = s / it->pivot;
  }
  if (m_ == 0) return;
  Eigen::Map<Eigen::VectorXd> vec(v.data(), m_);
  const Eigen::VectorXd solved = lu_->transpose().solve(vec);
  vec = solved;
}

void SimplexCore::compute_column(int j) {
  std::fill(work_col_.begin(), work_col_.end(), 0.0);
  add_column(j, 1.0, work_col_);
  ftran(work_col_);
}

void SimplexCore::compute_row(int pos) {
  std::fill(work_rho_.begin(), work_rho_.end(), 0.0);
  work_rho_[pos] = 1.0;
  btran(work_rho_);
  work_row_.assign(nc_, 0.0);
  for (int j = 0; j < n_; ++j) {
    if (status_[j] == Status::basic) continue;
    double s = 0.0;
    for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) s += work_rho_[col_row_[k]] * col_val_[k];
    work_row_[j] = s;
  }
  for (int i = 0; i < m_; ++i)
    if (status_[n_ + i] != Status::basic) work_row_[n_ + i] = -work_rho_[i];
  for (std::size_t a = 0; a < art_row_.size(); ++a) {
    const int j = n_ + m_ + static_cast<int>(a);
    if (status_[j] != Status::basic) work_row_[j] = art_sign_[a] * work_rho_[art_row_[a]];
  }
  for (double& v : work_row_)
    if (std::fabs(v) < kDropTol) v = 0.0;
  work_row_[basis_[pos]] = 1.0;
}

void SimplexCore::cold_start() {
  ++generation_;
  const int base = n_ + m_;
  lb_.resize(base);
  ub_.resize(base);
  cost_.resize(base);
  x_.assign(base, 0.0);
  status_.assign(base, Status::at_lower);
  art_row_.clear();
  art_sign_.clear();

  for (int j = 0; j < n_; ++j) {
    if (std::isfinite(lb_[j])) {
      status_[j] = Status::at_lower;
      x_[j] = lb_[j];
    } else if (std::isfinite(ub_[j])) {
      status_[j] = Status::at_upper;
      x_[j] = ub_[j];
    } else {
      status_[j] = Status::free_zero;
      x_[j] = 0.0;
    }
  }
  // Crash: place free columns over equality rows in column-singleton order,
  // so the starting basis is triangular. Their values then follow from the
  // rows and the remaining activities are measured with them in place.
  const std::vector<int> crash_row = crash_free_columns();
  basis_.assign(m_, -1);
  bool crashed = false;
  for (int i = 0; i < m_; ++i) {
    basis_[i] = crash_row[i] >= 0 ? crash_row[i] : n_ + i;
    crashed = crashed || crash_row[i] >= 0;
  }
  nc_ = base;
  std::vector<double> activity(m_, 0.0);
  if (crashed) {
    for (int i = 0; i < m_; ++i) {
      const int r = n_ + i;
      if (crash_row[i] < 0) continue;
      status_[r] = Status::at_lower;
      x_[r] = lb_[r];
    }
    for (int i = 0; i < m_; ++i) status_[basis_[i]] = Status::basic;
    if (refactor()) {
      for (int i = 0; i < m_; ++i) {
        const int b = basis_[i];
        activity[i] = crash_row[i] >= 0 ? lb_[n_ + i] : x_[b];
      }
    } else {
      crashed = false;
    }
  }
  if (!crashed) {
    for (int i = 0; i < m_; ++i) {
      basis_[i] = n_ + i;
      if (std::isfinite(lb_[n_ + i])) status_[n_ + i] = Status::at_lower;
    }
    for (int j = 0; j < n_; ++j)
      if (status_[j] == Status::basic) {
        status_[j] = Status::free_zero;
        x_[j] = 0.0;
      }
    for (int i = 0; i < m_; ++i)
      for (const auto& [c, v] : lp_.rows[i]) activity[i] += v * x_[c];
  }

  std::vector<int> art_of_row(m_, -1);
  for (int i = 0; i < m_; ++i) {
    if (basis_[i] != n_ + i) continue;
    const int r = n_ + i;
    const double act = activity[i];
    if (act < lb_[r] - opts_.feasibility_tol || act > ub_[r] + opts_.feasibility_tol) {
      art_of_row[i] = static_cast<int>(art_row_.size());
      art_row_.push_back(i);
      const double bound = act < lb_[r] ? lb_[r] : ub_[r];
      art_sign_.push_back(act - bound > 0.0 ? -1.0 : 1.0);
    }
  }
  const int n_art = static_cast<int>(art_row_.size());
  nc_ = base + n_art;
  lb_.resize(nc_, 0.0);
  ub_.resize(nc_, kInf);
  cost_.resize(nc_, 0.0);
  x_.resize(nc_, 0.0);
  status_.resize(nc_, Status::at_lower);

  for (int i = 0; i < m_; ++i) {
    const int r = n_ + i;
    if (basis_[i] != r) continue;
    if (art_of_row[i] < 0) {
      status_[r] = Status::basic;
      x_[r] = activity[i];
    } else {
      const int a = base + art_of_row[i];
      const double bound = activity[i] < lb_[r] ? lb_[r] : ub_[r];
      status_[r] = bound == lb_[r] ? Status::at_lower : Status::at_upper;
      x_[r] = bound;
      basis_[i] = a;
      status_[a] = Status::basic;
      x_[a] = std::fabs(activity[i] - bound);
    }
  }
  d_.assign(nc_, 0.0);
  have_basis_ = true;
  refactor();
}

std::vector<int> SimplexCore::crash_free_columns() const {
  std::vector<int> row_col(m_, -1);
  std::vector<bool> open_row(m_, false);
  for (int i = 0; i < m_; ++i) open_row[i] = lb_[n_ + i] == ub_[n_ + i];
  std::vector<int> count(n_, 0);
  std::vector<double> col_max(n_, 0.0);
  std::vector<int> queue;
  for (int j = 0; j < n_; ++j) {
    if (std::isfinite(lb_[j]) || std::isfinite(ub_[j])) continue;
    for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) {
      col_max[j] = std::max(col_max[j], std::fabs(col_val_[k]));
      if (open_row[col_row_[k]]) ++count[j];
    }
    if (count[j] == 1) queue.push_back(j);
  }
  // Rows of every structural column, for count updates when a row closes.
  std::vector<std::vector<int>> row_cols(m_);
  for (int j = 0; j < n_; ++j)
    if (count[j] > 0)
      for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) row_cols[col_row_[k]].push_back(j);
  std::vector<bool> placed(n_, false);
  for (std::size_t q = 0; q < queue.size(); ++q) {
    const int j = queue[q];
    if (placed[j] || count[j] != 1) continue;
    int row = -1;
    double a = 0.0;
    for (int k = col_start_[j]; k < col_start_[j + 1]; ++k)
      if (open_row[col_row_[k]]) {
        row = col_row_[k];
        a = col_val_[k];
      }
    if (row < 0 || std::fabs(a) < kCrashPivot * col_max[j]) continue;
    placed[j] = true;
    row_col[row] = j;
    open_row[row] = false;
    for (int c : row_cols[row])
      if (!placed[c] && --count[c] == 1) queue.push_back(c);
  }
  return row_col;
}

void SimplexCore::compute_reduced_costs(const std::vector<double>& c) {
  for (int i = 0; i < m_; ++i) work_rho_[i] = c[basis_[i]];
  btran(work_rho_);
  d_.assign(nc_, 0.0);
  for (int j = 0; j < n_; ++j) {
    if (status_[j] == Status::basic) continue;
    double s = c[j];
    for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) s -= work_rho_[col_row_[k]] * col_val_[k];
    d_[j] = s;
  }
  for (int i = 0; i < m_; ++i)
    if (status_[n_ + i] != Status::basic) d_[n_ + i] = c[n_ + i] + work_rho_[i];
  for (std::size_t a = 0; a < art_row_.size(); ++a) {
    const int j = n_ + m_ + static_cast<int>(a);
    if (status_[j] != Status::basic) d_[j] = c[j] - art_sign_[a] * work_rho_[art_row_[a]];
  }
}

void SimplexCore::recompute_basic_values() {
  std::vector<double> rhs(m_, 0.0);
  for (int j = 0; j < nc_; ++j)
    if (status_[j] != Status::basic && x_[j] != 0.0) add_column(j, -x_[j], rhs);
  ftran(rhs);
  for (int i = 0; i < m_; ++i) x_[basis_[i]] = rhs[i];
}

// Expects work_col_ = B^-1 a_j and, when update_duals, work_row_ = row `pos` of B^-1 [A -I art].
void SimplexCore::pivot(int pos, int j, bool update_duals) {
  const double piv = work_col_[pos];
  Eta e;
  e.pos = pos;
  e.pivot = piv;
  for (int i = 0; i < m_; ++i)
    if (i != pos && std::fabs(work_col_[i]) > kDropTol) {
      e.index.push_back(i);
      e.value.push_back(work_col_[i]);
    }
  etas_.push_back(std::move(e));
  if (update_duals) {
    const double f = d_[j] / work_row_[j];
    if (f != 0.0) kernels::active().axpy(-f, work_row_.data(), d_.data(), static_cast<std::size_t>(nc_));
    d_[j] = 0.0;
    d_[basis_[pos]] = -f;
  }
  basis_[pos] = j;
  status_[j] = Status::basic;
}

bool SimplexCore::primal_feasible() const {
  for (int i = 0; i < m_; ++i) {
    const int b = basis_[i];
    if (x_[b] < lb_[b] - opts_.feasibility_tol || x_[b] > ub_[b] + opts_.feasibility_tol) return false;
  }
  return true;
}

bool SimplexCore::dual_feasible() const {
  const double tol = opts_.optimality_tol;
  for (int j = 0; j < nc_; ++j) {
    const Status st = status_[j];
    if (st == Status::basic || lb_[j] == ub_[j]) continue;
    if (st == Status::at_lower && d_[j] < -tol) return false;
    if (st == Status::at_upper && d_[j] > tol) return false;
    if (st == Status::free_zero && std::fabs(d_[j]) > tol) return false;
  }
  return true;
}

SimplexCore::Outcome SimplexCore::primal(const std::vector<double>& c, long limit, SolveStats& stats, bool phase1) {
  compute_reduced_costs(c);
  const double tol = opts_.optimality_tol;
  const long threshold = opts_.bland_threshold > 0 ? opts_.bland_threshold : std::max(m_, 1);
  long degenerate_run = 0;
  bool bland = false;
  for (long iter = 0;; ++iter) {
    if (iter >= limit) return Outcome::iteration_limit;
    if (etas_.size() >= kMaxEtas) {
      if (!refactor()) return Outcome::numerical;
      compute_reduced_costs(c);
    }

    int enter = -1;
    int dir = 0;
    double best = 0.0;
    for (int j = 0; j < nc_; ++j) {
      const Status st = status_[j];
      if (st == Status::basic || lb_[j] == ub_[j]) continue;
      const double dj = d_[j];
      int jdir = 0;
      if ((st == Status::at_lower || st == Status::free_zero) && dj < -tol) jdir = 1;
      else if ((st == Status::at_upper || st == Status::free_zero) && dj > tol) jdir = -1;
      if (jdir == 0) continue;
      if (bland) {
        enter = j;
        dir = jdir;
        break;
      }
      if (std::fabs(dj) > best) {
        best = std::fabs(dj);
        enter = j;
        dir = jdir;
      }
    }
    if (enter < 0) return Outcome::optimal;

    compute_column(enter);
    const std::vector<double>& col = work_col_;
    const double range = (std::isfinite(lb_[enter]) && std::isfinite(ub_[enter])) ? ub_[enter] - lb_[enter] : kInf;
    // Two-pass ratio test: bound the step with slightly relaxed limits, then
    // take the largest pivot among the rows that block within that step.
    double relaxed = range;
    for (int i = 0; i < m_; ++i) {
      const double a = col[i];
      if (std::fabs(a) <= opts_.pivot_tol) continue;
      const int b = basis_[i];
      const double rate = -dir * a;
      // Basics already slightly past a bound count as sitting on it.
      if (rate < 0.0 && std::isfinite(lb_[b]))
        relaxed = std::min(relaxed, (std::max(x_[b] - lb_[b], 0.0) + kHarrisTol) / -rate);
      else if (rate > 0.0 && std::isfinite(ub_[b]))
        relaxed = std::min(relaxed, (std::max(ub_[b] - x_[b], 0.0) + kHarrisTol) / rate);
    }
    double theta = range;
    int leave = -1;
    bool leave_to_lower = false;
    double leave_abs = 0.0;
    if (std::isfinite(relaxed)) {
      for (int i = 0; i < m_; ++i) {
        const double a = col[i];
        if (std::fabs(a) <= opts_.pivot_tol) continue;
        const int b = basis_[i];
        const double rate = -dir * a;
        double lim;
        bool to_lower;
        if (rate < 0.0) {
          if (!std::isfinite(lb_[b])) continue;
          lim = (x_[b] - lb_[b]) / -rate;
          to_lower = true;
        } else {
          if (!std::isfinite(ub_[b])) continue;
          lim = (ub_[b] - x_[b]) / rate;
          to_lower = false;
        }
        lim = std::max(lim, 0.0);
        if (lim > relaxed) continue;
        bool take;
        if (leave < 0) take = true;
        else if (bland) take = lim < theta - kTieEps || (lim <= theta + kTieEps && b < basis_[leave]);
        else take = std::fabs(a) > leave_abs;
        if (take) {
          theta = lim;
          leave = i;
          leave_to_lower = to_lower;
          leave_abs = std::fabs(a);
        }
      }
      if (leave >= 0 && range <= theta) {
        leave = -1;
        theta = range;
      }
    }
    if (leave < 0 && !std::isfinite(theta)) {
      // Confirm on a fresh factorization; drifted reduced costs can fake a ray.
      if (etas_.empty()) return Outcome::unbounded;
      if (!refactor()) return Outcome::numerical;
      compute_reduced_costs(c);
      continue;
    }

    if (leave >= 0) {
      compute_row(leave);
      const double from_row = work_row_[enter];
      const bool disagree = std::fabs(from_row - col[leave]) > kPivotAgreement * (1.0 + std::fabs(col[leave]));
      if ((leave_abs < kSuspectPivot || disagree) && !etas_.empty()) {
        if (!refactor()) return Outcome::numerical;
        compute_reduced_costs(c);
        continue;
      }
    }

    x_[enter] += dir * theta;
    if (theta != 0.0)
      for (int i = 0; i < m_; ++i)
        if (col[i] != 0.0) x_[basis_[i]] -= dir * col[i] * theta;
    if (leave < 0) {
      status_[enter] = dir > 0 ? Status::at_upper : Status::at_lower;
      x_[enter] = dir > 0 ? ub_[enter] : lb_[enter];
    } else {
      const int b = basis_[leave];
      x_[b] = leave_to_lower ? lb_[b] : ub_[b];
      pivot(leave, enter, true);
      status_[b] = leave_to_lower ? Status::at_lower : Status::at_upper;
    }
    ++stats.iterations;
    if (phase1) ++stats.phase1_iterations;
    if (bland) ++stats.bland_pivots;

    if (theta <= kDegenerateStep) {
      if (++degenerate_run > threshold) bland = true;
    } else {
      degenerate_run = 0;
      bland = false;
    }
  }
}

SimplexCore::Outcome SimplexCore::dual(long limit, SolveStats& stats) {
  for (long iter = 0;; ++iter) {
    if (iter >= limit) return Outcome::iteration_limit;
    if (etas_.size() >= kMaxEtas) {
      if (!refactor()) return Outcome::numerical;
      compute_reduced_costs(cost_);
    }
    int r = -1;
    double worst = opts_.feasibility_tol;
    bool below = false;
    for (int i = 0; i < m_; ++i) {
      const int b = basis_[i];
      if (lb_[b] - x_[b] > worst) {
        worst = lb_[b] - x_[b];
        r = i;
        below = true;
      } else if (x_[b] - ub_[b] > worst) {
        worst = x_[b] - ub_[b];
        r = i;
        below = false;
      }
    }
    if (r < 0) return Outcome::optimal;

    const int b = basis_[r];
    const double target = below ? lb_[b] : ub_[b];
    compute_row(r);
    const std::vector<double>& pr = work_row_;
    auto eligible = [&](int j) {
      const Status st = status_[j];
      if (st == Status::basic || lb_[j] == ub_[j]) return false;
      const double a = pr[j];
      if (std::fabs(a) <= opts_.pivot_tol) return false;
      if (st == Status::free_zero) return true;
      if (st == Status::at_lower) return below ? a < 0.0 : a > 0.0;
      return below ? a > 0.0 : a < 0.0;
    };
    double relaxed = kInf;
    for (int j = 0; j < nc_; ++j)
      if (eligible(j)) relaxed = std::min(relaxed, (std::fabs(d_[j]) + opts_.optimality_tol) / std::fabs(pr[j]));
    int enter = -1;
    double best_abs = 0.0;
    for (int j = 0; j < nc_; ++j) {
      if (!eligible(j) || std::fabs(d_[j]) / std::fabs(pr[j]) > relaxed) continue;
      if (std::fabs(pr[j]) > best_abs) {
        best_abs = std::fabs(pr[j]);
        enter = j;
      }
    }
    if (enter < 0) {
      if (!etas_.empty()) {
        if (!refactor()) return Outcome::numerical;
        compute_reduced_costs(cost_);
        continue;
      }
      return Outcome::infeasible;
    }

    compute_column(enter);
    const bool disagree = std::fabs(pr[enter] - work_col_[r]) > kPivotAgreement * (1.0 + std::fabs(pr[enter]));
    if ((best_abs < kSuspectPivot || disagree) && !etas_.empty()) {
      if (!refactor()) return Outcome::numerical;
      compute_reduced_costs(cost_);
      continue;
    }

    const double delta = (x_[b] - target) / work_col_[r];
    x_[enter] += delta;
    for (int i = 0; i < m_; ++i)
      if (work_col_[i] != 0.0) x_[basis_[i]] -= work_col_[i] * delta;
    x_[b] = target;
    pivot(r, enter, true);
    status_[b] = below ? Status::at_lower : Status::at_upper;
    ++stats.iterations;
    ++stats.dual_iterations;
  }
}

bool SimplexCore::refactor() {
  ++refactors_;
  etas_.clear();
  if (m_ == 0) return true;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(m_) * 4);
  for (int p = 0; p < m_; ++p) {
    const int j = basis_[p];
    if (j < n_) {
      for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) trip.emplace_back(col_row_[k], p, col_val_[k]);
    } else if (j < n_ + m_) {
      trip.emplace_back(j - n_, p, -1.0);
    } else {
      const int a = j - n_ - m_;
      trip.emplace_back(art_row_[a], p, art_sign_[a]);
    }
  }
  Eigen::SparseMatrix<double> bm(m_, m_);
  bm.setFromTriplets(trip.begin(), trip.end());
  bm.makeCompressed();
  if (!lu_) lu_ = std::make_unique<SparseLu>();
  lu_->analyzePattern(bm);
  lu_->factorize(bm);
  if (lu_->info() != Eigen::Success) return false;
  recompute_basic_values();
  for (int i = 0; i < m_; ++i)
    if (!std::isfinite(x_[basis_[i]])) return false;
  return true;
}

double SimplexCore::row_residual() const {
  double worst = 0.0;
  for (int i = 0; i < m_; ++i) {
    double act = 0.0;
    double scale = 1.0;
    for (const auto& [c, v] : lp_.rows[i]) {
      act += v * x_[c];
      scale = std::max(scale, std::fabs(v * x_[c]));
    }
    worst = std::max(worst, std::fabs(act - x_[n_ + i]) / scale);
  }
  return worst;
}

double SimplexCore::objective() const {
  double v = 0.0;
  for (int j = 0; j < n_; ++j) v += cost_[j] * x_[j];
  return v;
}

LpBasis SimplexCore::basis() const {
  LpBasis b;
  if (!have_basis_) return b;
  b.basic = basis_;
  b.status.reserve(status_.size());
  for (Status st : status_) b.status.push_back(static_cast<std::uint8_t>(st));
  b.generation = generation_;
  return b;
}

bool SimplexCore::set_basis(const LpBasis& b) {
  if (!have_basis_ || b.generation != generation_ || b.status.size() != status_.size()) return false;
  basis_ = b.basic;
  for (std::size_t j = 0; j < status_.size(); ++j) status_[j] = static_cast<Status>(b.status[j]);
  for (int j = 0; j < nc_; ++j) {
    if (status_[j] == Status::basic) continue;
    const bool lo = std::isfinite(lb_[j]);
    const bool hi = std::isfinite(ub_[j]);
    Status st = status_[j];
    if (st == Status::at_lower && !lo) st = hi ? Status::at_upper : Status::free_zero;
    else if (st == Status::at_upper && !hi) st = lo ? Status::at_lower : Status::free_zero;
    else if (st == Status::free_zero && (lo || hi)) st = lo ? Status::at_lower : Status::at_upper;
    status_[j] = st;
    x_[j] = st == Status::at_lower ? lb_[j] : st == Status::at_upper ? ub_[j] : 0.0;
  }
  if (!refactor()) have_basis_ = false;  // next solve starts cold
  return true;
}

SimplexCore::Outcome SimplexCore::solve(SolveStats& stats) {
  Outcome o = solve_once(stats, !have_basis_);
  if (o == Outcome::numerical) {
    have_basis_ = false;
    o = solve_once(stats, true);
    if (o == Outcome::numerical) have_basis_ = false;
  }
  return o;
}

SimplexCore::Outcome SimplexCore::solve_once(SolveStats& stats, bool cold) {
  const long limit = call_limit();
  if (!cold) {
    compute_reduced_costs(cost_);
    // Boxed nonbasics sit at the bound their reduced cost prefers.
    for (int j = 0; j < nc_; ++j) {
      if (status_[j] == Status::basic || lb_[j] == ub_[j]) continue;
      if (!std::isfinite(lb_[j]) || !std::isfinite(ub_[j])) continue;
      const Status want = d_[j] >= 0.0 ? Status::at_lower : Status::at_upper;
      if (status_[j] != want) {
        status_[j] = want;
        move_nonbasic(j, want == Status::at_lower ? lb_[j] : ub_[j]);
      }
    }
    if (!primal_feasible()) {
      if (dual_feasible()) {
        const Outcome o = dual(limit, stats);
        if (o == Outcome::infeasible || o == Outcome::numerical) return o;
        if (o == Outcome::iteration_limit) cold = true;
      } else {
        cold = true;
      }
    }
  }
  if (cold) {
    cold_start();
    if (!art_row_.empty()) {
      std::vector<double> phase1_cost(nc_, 0.0);
      for (int j = n_ + m_; j < nc_; ++j) phase1_cost[j] = 1.0;
      const Outcome o = primal(phase1_cost, limit, stats, true);
      if (o == Outcome::numerical) return o;
      if (o == Outcome::iteration_limit) {
        have_basis_ = false;
        return o;
      }
      double infeas = 0.0;
      for (int j = n_ + m_; j < nc_; ++j) infeas += x_[j];
      if (infeas > opts_.feasibility_tol) {
        have_basis_ = false;
        return Outcome::infeasible;
      }
      // Drive remaining artificials out of the basis; rows where that fails are redundant.
      for (int j = n_ + m_; j < nc_; ++j) {
        lb_[j] = ub_[j] = 0.0;
        x_[j] = 0.0;
        if (status_[j] != Status::basic) {
          status_[j] = Status::at_lower;
          continue;
        }
        const int r = static_cast<int>(std::find(basis_.begin(), basis_.end(), j) - basis_.begin());
        compute_row(r);
        int best = -1;
        double best_abs = opts_.pivot_tol;
        for (int k = 0; k < n_ + m_; ++k)
          if (status_[k] != Status::basic && std::fabs(work_row_[k]) > best_abs) {
            best_abs = std::fabs(work_row_[k]);
            best = k;
          }
        if (best >= 0) {
          compute_column(best);
          pivot(r, best, false);
          status_[j] = Status::at_lower;
        }
      }
      if (!refactor()) return Outcome::numerical;
    }
  }

  bool refactored = false;
  for (;;) {
    const Outcome o = primal(cost_, limit, stats, false);
    if (o != Outcome::optimal) {
      if (o == Outcome::unbounded || o == Outcome::numerical) return o;
      have_basis_ = false;
      return o;
    }
    recompute_basic_values();
    if (refactored || (row_residual() <= 1e-9 && primal_feasible())) break;
    if (!refactor()) return Outcome::numerical;
    refactored = true;
    if (!primal_feasible()) {
      compute_reduced_costs(cost_);
      const Outcome od = dual(limit, stats);
      if (od == Outcome::numerical) return od;
      if (od != Outcome::optimal) {
        have_basis_ = false;
        return od == Outcome::infeasible ? od : Outcome::iteration_limit;
      }
    }
  }
  compute_reduced_costs(cost_);
  return Outcome::optimal;
}

}  // namespace flexgauge
