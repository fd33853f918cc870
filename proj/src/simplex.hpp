#pragma once

// Bounded-variable revised simplex used by LpSolver.
//
// Internal form: minimize c.x subject to  A x - r = 0  with lb <= (x, r) <= ub.
// Row activities r carry the row senses as bounds, so right-hand-side
// changes are bound changes. The basis inverse is a sparse LU factorization
// followed by a product-form eta file, refactorized periodically.

#include "flexgauge/lp.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <cstdint>
#include <memory>
#include <vector>

namespace flexgauge {

class SimplexCore {
 public:
  enum class Status : std::uint8_t { basic, at_lower, at_upper, free_zero };
  enum class Outcome { optimal, infeasible, unbounded, iteration_limit, numerical };

  SimplexCore(const LinearProgram& lp, const SolverOptions& opts);
  ~SimplexCore();

  // Structural column bounds (internal index == LP column index).
  void set_col_bounds(int col, double lb, double ub);
  void set_row_bounds(int row, double lb, double ub);
  // Min-form costs for the structural columns.
  void set_costs(std::span<const double> c);

  Outcome solve(SolveStats& stats);
  LpBasis basis() const;
  bool set_basis(const LpBasis& b);

  double value(int col) const { return x_[col]; }
  double objective() const;
  // Min-form reduced cost of a structural column / row activity.
  double reduced_cost(int col) const { return d_[col]; }
  double row_reduced_cost(int row) const { return d_[n_ + row]; }
  long refactor_count() const { return refactors_; }
  double lower(int col) const { return lb_[col]; }
  double upper(int col) const { return ub_[col]; }

 private:
  using SparseLu = Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>>;

  struct Eta {
    int pos = 0;
    double pivot = 1.0;
    std::vector<int> index;  // off-pivot nonzeros
    std::vector<double> value;
  };

  const LinearProgram& lp_;
  SolverOptions opts_;
  int m_ = 0;
  int n_ = 0;   // structural columns
  int nc_ = 0;  // structural + row activities + artificials
  // Structural columns of A, compressed by column.
  std::vector<int> col_start_;
  std::vector<int> col_row_;
  std::vector<double> col_val_;
  std::vector<double> cost_;      // phase-2 min-form costs, size nc_
  std::vector<double> lb_, ub_;   // size nc_
  std::vector<double> x_;         // size nc_
  std::vector<double> d_;         // reduced costs of the active phase
  std::vector<int> basis_;        // basic column at each basis position
  std::vector<Status> status_;    // per column
  std::vector<int> art_row_;      // row of each artificial
  std::vector<double> art_sign_;  // its coefficient in that row
  std::unique_ptr<SparseLu> lu_;
  std::vector<Eta> etas_;
  std::vector<double> work_col_;  // FTRAN result for the entering column, size m_
  std::vector<double> work_rho_;  // BTRAN result for the pivot row, size m_
  std::vector<double> work_row_;  // pivot row over all columns, size nc_
  bool have_basis_ = false;
  long refactors_ = 0;
  long generation_ = 0;  // bumped by every cold start

  void cold_start();
  // Basis row -> free column for a triangular crash over equality rows; -1 elsewhere.
  std::vector<int> crash_free_columns() const;
  void move_nonbasic(int j, double new_value);
  void place_nonbasic(int j);
  void add_column(int j, double scale, std::vector<double>& v) const;
  void ftran(std::vector<double>& v) const;
  void btran(std::vector<double>& v) const;
  void compute_column(int j);
  void compute_row(int pos);
  void compute_reduced_costs(const std::vector<double>& c);
  void recompute_basic_values();
  void pivot(int pos, int j, bool update_duals);
  bool primal_feasible() const;
  bool dual_feasible() const;
  Outcome primal(const std::vector<double>& c, long limit, SolveStats& stats, bool phase1);
  Outcome dual(long limit, SolveStats& stats);
  bool refactor();  // false when the basis is numerically singular
  Outcome solve_once(SolveStats& stats, bool cold);
  double row_residual() const;
  long call_limit() const;
};

}  // namespace flexgauge
