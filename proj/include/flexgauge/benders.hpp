#pragma once

// Benders decomposition for the largest absorbable uncertainty box.
//
// The master problem maximizes a^T lambda over [0,1]^dim and the feasibility
// cuts found so far. The subproblem is the dual of the slack-penalized
// feasibility LP with the load realization written as
//   d_b  = d_bar_b  + z+_b lambda_up_b d_hat_b - z-_b lambda_dn_b d_hat_b
//   dd_t = dd_bar_t + z+_t lambda_up_t dd_hat_t - z-_t lambda_dn_t dd_hat_t
// and each product z * mu replaced by an auxiliary column with McCormick
// rows, giving a MILP in (mu, aux, z).

#include "flexgauge/compact_form.hpp"
#include "flexgauge/lp.hpp"
#include "flexgauge/model.hpp"

#include <vector>

namespace flexgauge {

struct MasterProblem {
  std::vector<double> a;
  std::vector<CutRecord> cuts;

  MasterProblem() = default;
  explicit MasterProblem(std::vector<double> objective) : a(std::move(objective)) {}
  std::size_t dimension() const { return a.size(); }
};

struct MasterSolution {
  std::vector<double> lambda;  // canonical flat order
  double objective = 0.0;
};

inline constexpr double kMasterSnap = 1e-9;

// Throws SolverError when the cuts exclude every lambda in the box.
MasterSolution solve_master(const MasterProblem& mp, const SolverOptions& opts = {});

// Auxiliary column standing for z * mu. Its objective coefficient is
// weight * lambda[lambda_index].
struct AuxColumn {
  int column = 0;
  int mu_column = 0;
  int z_column = 0;
  int lambda_index = 0;  // canonical flat index
  double weight = 0.0;
};

struct RdfeaProblem {
  LinearProgram lp;
  std::size_t n_buses = 0;
  std::size_t n_sub = 0;
  std::vector<double> lambda;  // flat lambda the objective was built for

  // Dual column of every primal row, per block. Blocks 2 and 4 are split:
  // mu = mu_n - mu_p with both parts in [-1, 0].
  std::array<std::vector<int>, kBlockCount> mu;
  std::vector<int> mu2_p;
  std::vector<int> mu4_p;
  std::vector<AuxColumn> aux;
  // One (z+, z-) pair per uncertain dimension: buses, then sub-intervals.
  std::vector<int> z_up;
  std::vector<int> z_dn;
  // Lambda-independent objective coefficient of every column.
  std::vector<double> nominal;

  std::size_t n_binaries() const { return z_up.size() + z_dn.size(); }
  // Objective coefficients at `lambda_flat`, written into lp.objective.
  void set_lambda(std::span<const double> lambda_flat);
  // A feasible point with objective 0 (all duals zero, every z+ = 1).
  std::vector<double> zero_point() const;
};

RdfeaProblem build_rdfea(const CompactForm& cf, const UncertaintyModel& u, const ScaleVector& lambda);

struct RdfeaSolution {
  double eta = 0.0;
  std::vector<double> values;  // every RDFEA column
  std::vector<int> direction;  // +1 up / -1 down per uncertain dimension
  SolveStats stats;
  std::vector<std::vector<double>> pool;  // improving incumbents, if requested
};

// Throws SolverError on node or iteration limits.
RdfeaSolution solve_rdfea(const RdfeaProblem& p, const SolverOptions& opts = {});

// Cut eta(lambda) <= 0 from an RDFEA point. Requires the point's objective at
// the generating lambda to exceed `tol`; throws Error otherwise.
CutRecord cut_from_duals(const RdfeaProblem& p, std::span<const double> values, double tol = 1e-6);

struct BendersOptions {
  double tol = 1e-6;
  int max_iters = 200;
  bool multi_cut = false;  // one cut per improving incumbent of the subproblem
  SolverOptions solver;
};

// Throws BaseInfeasible when the zero-deviation point is already infeasible,
// IterationLimit when max_iters master solves do not converge.
FlexReport run_benders(const SystemCase& c, const BendersOptions& opts = {});
FlexReport run_benders(const CompactForm& cf, const UncertaintyModel& u, const BendersOptions& opts = {});

}  // namespace flexgauge
