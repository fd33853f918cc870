#pragma once

// Brute-force reference for the robust feasibility check: the slack-penalized
// feasibility LP solved at every vertex of the uncertainty box.

#include "flexgauge/compact_form.hpp"
#include "flexgauge/lp.hpp"
#include "flexgauge/model.hpp"

#include <memory>
#include <vector>

namespace flexgauge {

inline constexpr std::size_t kMaxVertexDimensions = 20;

struct VertexAssignment {
  std::vector<bool> bus_up;  // true: d_bar + lambda_up d_hat, false: d_bar - lambda_dn d_hat
  std::vector<bool> sub_up;
};

// min 1^T s over (x, y, s) at a fixed realization, every row with its own
// slack (equalities with a +/- pair).
LinearProgram build_min_slack_lp(const CompactForm& cf, std::span<const double> d, std::span<const double> delta_d);

// The explicit LP dual of build_min_slack_lp: maximize over bounded duals.
LinearProgram build_min_slack_dual(const CompactForm& cf, std::span<const double> d,
                                   std::span<const double> delta_d);

double min_slack_lp(const CompactForm& cf, std::span<const double> d, std::span<const double> delta_d,
                    const SolverOptions& opts = {});

// Warm-started min-slack solves over a sequence of realizations.
class MinSlackSolver {
 public:
  explicit MinSlackSolver(const CompactForm& cf, SolverOptions opts = {});
  ~MinSlackSolver();
  double solve(std::span<const double> d, std::span<const double> delta_d);

 private:
  struct State;
  std::unique_ptr<State> state_;
};

struct WorstCase {
  double eta = 0.0;
  VertexAssignment vertex;
  long evaluations = 0;
};

// Max over all box vertices of the min-slack value. Dimensions whose up and
// down scales are both zero are not enumerated. Throws DimensionError when
// more than kMaxVertexDimensions dimensions remain.
WorstCase worst_case_eta(const CompactForm& cf, const UncertaintyModel& u, const ScaleVector& lambda,
                         const SolverOptions& opts = {});

// Realization of a vertex.
void vertex_realization(const UncertaintyModel& u, const ScaleVector& lambda, const VertexAssignment& v,
                        std::vector<double>& d, std::vector<double>& delta_d);

struct ReferenceResult {
  double s = 0.0;   // largest feasible step along the ray
  double tf = 0.0;  // a^T (s w)
};

// Bisection on s in [0, 1] for the largest s with worst_case_eta(s w) <= tol.
// Throws BaseInfeasible when s = 0 is already infeasible.
ReferenceResult reference_flexibility(const CompactForm& cf, const UncertaintyModel& u, const ScaleVector& weights,
                                      double tol = 1e-6, double s_tol = 1e-6, const SolverOptions& opts = {});

}  // namespace flexgauge
