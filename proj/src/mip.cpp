#include "flexgauge/errors.hpp"
#include "flexgauge/lp.hpp"

#include <cmath>
#include <memory>
#include <queue>
#include <vector>

namespace flexgauge {
namespace {

struct Node {
  double bound;
  long seq;
  std::vector<std::pair<int, double>> fixes;
  std::shared_ptr<const LpBasis> basis;  // parent's optimal basis
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.seq < b.seq;
  }
};

double evaluate(const LinearProgram& lp, std::span<const double> x) {
  double v = 0.0;
  for (std::size_t j = 0; j < lp.n_cols(); ++j) v += lp.objective[j] * x[j];
  return v;
}

bool integral(const LinearProgram& lp, std::span<const double> x, double tol) {
  for (std::size_t j = 0; j < lp.n_cols(); ++j)
    if (lp.binary[j] && std::fabs(x[j] - std::round(x[j])) > tol) return false;
  return true;
}

}  // namespace

SolveResult solve_mip(const LinearProgram& lp, const SolverOptions& opts, std::span<const double> start) {
  lp.check();
  if (!lp.has_integers()) return solve_lp(lp, opts);

  const double sign = lp.sense == ObjectiveSense::minimize ? 1.0 : -1.0;
  SolveResult out;
  std::vector<double> incumbent;
  double incumbent_value = kInf;  // min-form

  if (!start.empty()) {
    if (start.size() != lp.n_cols()) throw DimensionError("start point length does not match column count");
    if (primal_residual(lp, start) <= opts.feasibility_tol && integral(lp, start, opts.integrality_tol)) {
      incumbent.assign(start.begin(), start.end());
      incumbent_value = sign * evaluate(lp, start);
      if (opts.keep_solution_pool) out.pool.push_back(incumbent);
    }
  }

  LpSolver solver(lp, opts);
  std::vector<int> binaries;
  for (std::size_t j = 0; j < lp.n_cols(); ++j)
    if (lp.binary[j]) binaries.push_back(static_cast<int>(j));
  std::vector<double> cur_lo(lp.lower), cur_hi(lp.upper);

  auto apply = [&](const std::vector<std::pair<int, double>>& fixes) {
    std::vector<double> lo(lp.lower), hi(lp.upper);
    for (const auto& [c, v] : fixes) lo[c] = hi[c] = v;
    for (int c : binaries)
      if (lo[c] != cur_lo[c] || hi[c] != cur_hi[c]) {
        solver.set_col_bounds(c, lo[c], hi[c]);
        cur_lo[c] = lo[c];
        cur_hi[c] = hi[c];
      }
  };

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  long seq = 0;
  std::shared_ptr<const LpBasis> current;
  open.push(Node{-kInf, seq++, {}, nullptr});
  out.status = SolveStatus::optimal;

  while (!open.empty()) {
    Node node = open.top();
    open.pop();
    if (node.bound >= incumbent_value - opts.mip_abs_gap) break;
    if (out.stats.nodes >= opts.node_limit) {
      out.status = SolveStatus::node_limit;
      break;
    }
    apply(node.fixes);
    // The solver still holds the basis a child inherits when its parent was the last solve.
    if (node.basis && node.basis != current) solver.set_basis(*node.basis);
    current.reset();
    SolveResult r = solver.solve();
    ++out.stats.nodes;
    out.stats.iterations += r.stats.iterations;
    out.stats.phase1_iterations += r.stats.phase1_iterations;
    out.stats.dual_iterations += r.stats.dual_iterations;
    out.stats.bland_pivots += r.stats.bland_pivots;
    out.stats.refactorizations += r.stats.refactorizations;
    if (r.status == SolveStatus::infeasible) continue;
    if (r.status == SolveStatus::unbounded) {
      out.status = SolveStatus::unbounded;
      return out;
    }
    if (r.status == SolveStatus::iteration_limit) {
      out.status = SolveStatus::iteration_limit;
      return out;
    }
    const double value = sign * r.objective;
    if (value >= incumbent_value - opts.mip_abs_gap) continue;

    int branch = -1;
    double worst = opts.integrality_tol;
    for (int c : binaries) {
      const double frac = std::fabs(r.primal[c] - std::round(r.primal[c]));
      if (frac > worst) {
        worst = frac;
        branch = c;
      }
    }
    if (branch < 0) {
      for (int c : binaries) r.primal[c] = std::round(r.primal[c]);
      incumbent = std::move(r.primal);
      incumbent_value = sign * evaluate(lp, incumbent);
      if (opts.keep_solution_pool) out.pool.push_back(incumbent);
      continue;
    }
    auto basis = std::make_shared<const LpBasis>(solver.basis());
    current = basis;
    const double up_first = r.primal[branch] >= 0.5 ? 1.0 : 0.0;
    for (double v : {1.0 - up_first, up_first}) {
      Node child{value, seq++, node.fixes, basis};
      child.fixes.emplace_back(branch, v);
      open.push(std::move(child));
    }
  }

  if (incumbent.empty()) {
    if (out.status == SolveStatus::optimal) out.status = SolveStatus::infeasible;
    return out;
  }
  out.objective = evaluate(lp, incumbent);
  out.primal = std::move(incumbent);
  return out;
}

}  // namespace flexgauge
