#pragma once

// Self-contained LP and binary MIP solver.
//
// LPs are solved with a bounded-variable revised simplex (sparse LU basis
// factorization with product-form updates): phase 1 with artificial
// variables, phase 2 with Dantzig pricing that falls back to Bland's rule
// after a run of degenerate pivots. Re-solves after bound or right-hand-side
// changes start from the previous basis with the dual simplex. The MIP solver
// is best-first LP-based branch-and-bound on binary variables, branching on
// the most fractional one.

#include <cstddef>
#include <iosfwd>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace flexgauge {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class ObjectiveSense { minimize, maximize };
enum class RowSense { less_equal, equal, greater_equal };

struct LinearProgram {
  ObjectiveSense sense = ObjectiveSense::minimize;
  std::vector<double> objective;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<bool> binary;
  std::vector<std::string> col_names;

  // Row r holds (column, coefficient) pairs.
  std::vector<std::vector<std::pair<int, double>>> rows;
  std::vector<RowSense> row_sense;
  std::vector<double> rhs;
  std::vector<std::string> row_names;

  int add_variable(double lb, double ub, double cost, std::string name = {}, bool is_binary = false);
  int add_row(std::vector<std::pair<int, double>> entries, RowSense sense, double rhs_value, std::string name = {});

  std::size_t n_cols() const { return objective.size(); }
  std::size_t n_rows() const { return rows.size(); }
  bool has_integers() const;
  // Throws DimensionError on inconsistent sizes or invalid binary bounds.
  void check() const;
};

// All numerical tolerances in one place.
struct SolverOptions {
  double feasibility_tol = 1e-7;
  double optimality_tol = 1e-9;  // reduced-cost tolerance
  double integrality_tol = 1e-6;
  double pivot_tol = 1e-9;
  double mip_abs_gap = 1e-9;
  long iteration_limit = 0;  // 0: 50 * (rows + cols) per simplex call
  long node_limit = 1000000;
  long bland_threshold = 0;  // degenerate pivots before Bland's rule; 0: row count
  bool keep_solution_pool = false;  // MIP: keep every improving incumbent
};

enum class SolveStatus { optimal, infeasible, unbounded, iteration_limit, node_limit };

const char* to_string(SolveStatus s);

struct SolveStats {
  long iterations = 0;
  long phase1_iterations = 0;
  long dual_iterations = 0;
  long nodes = 0;
  long bland_pivots = 0;
  long refactorizations = 0;
};

struct SolveResult {
  SolveStatus status = SolveStatus::infeasible;
  double objective = 0.0;
  std::vector<double> primal;  // empty unless optimal
  // d(objective)/d(rhs) in the problem's own sense; empty unless an optimal LP.
  std::vector<double> dual;
  std::vector<double> reduced_costs;
  SolveStats stats;
  // MIP only, when keep_solution_pool is set: improving incumbents in order found.
  std::vector<std::vector<double>> pool;

  bool optimal() const { return status == SolveStatus::optimal; }
};

// Snapshot of a simplex basis. Only valid for the solver that produced it.
struct LpBasis {
  std::vector<int> basic;
  std::vector<std::uint8_t> status;
  long generation = -1;
};

// Warm-startable LP solver over a fixed constraint matrix. Bounds, row
// right-hand sides and objective coefficients may change between solves.
class LpSolver {
 public:
  explicit LpSolver(const LinearProgram& lp, SolverOptions opts = {});
  ~LpSolver();
  LpSolver(LpSolver&&) noexcept;
  LpSolver& operator=(LpSolver&&) noexcept;

  SolveResult solve();

  void set_col_bounds(int col, double lb, double ub);
  void set_row_rhs(int row, double rhs);
  void set_objective(std::span<const double> c);
  // Basis after the last solve; restoring it refactorizes. set_basis returns
  // false and changes nothing when the snapshot no longer fits the solver.
  LpBasis basis() const;
  bool set_basis(const LpBasis& b);

  double col_lower(int col) const;
  double col_upper(int col) const;
  const LinearProgram& problem() const;
  const SolverOptions& options() const;

 private:
  class Engine;
  std::unique_ptr<Engine> engine_;
};

// Requires no binary columns.
SolveResult solve_lp(const LinearProgram& lp, const SolverOptions& opts = {});

// Optional `start` is a known feasible assignment used as the first incumbent.
SolveResult solve_mip(const LinearProgram& lp, const SolverOptions& opts = {},
                      std::span<const double> start = {});

// Duals keyed by row name. Throws SolverError when the result carries no duals.
std::map<std::string, double> extract_duals(const SolveResult& result, const LinearProgram& lp);

// Max over rows of violation and over columns of bound violation at `x`.
double primal_residual(const LinearProgram& lp, std::span<const double> x);

// Writes the problem in CPLEX LP text format.
void write_lp_format(const LinearProgram& lp, std::ostream& os);

}  // namespace flexgauge
