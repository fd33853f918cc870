#include "flexgauge/lp.hpp"

#include "flexgauge/errors.hpp"
#include "simplex.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace flexgauge {

int LinearProgram::add_variable(double lb, double ub, double cost, std::string name, bool is_binary) {
  objective.push_back(cost);
  lower.push_back(lb);
  upper.push_back(ub);
  binary.push_back(is_binary);
  if (name.empty()) name = "x" + std::to_string(objective.size() - 1);
  col_names.push_back(std::move(name));
  return static_cast<int>(objective.size() - 1);
}

int LinearProgram::add_row(std::vector<std::pair<int, double>> entries, RowSense sense, double rhs_value,
                           std::string name) {
  rows.push_back(std::move(entries));
  row_sense.push_back(sense);
  rhs.push_back(rhs_value);
  if (name.empty()) name = "r" + std::to_string(rows.size() - 1);
  row_names.push_back(std::move(name));
  return static_cast<int>(rows.size() - 1);
}

bool LinearProgram::has_integers() const {
  return std::any_of(binary.begin(), binary.end(), [](bool b) { return b; });
}

void LinearProgram::check() const {
  const std::size_t n = objective.size();
  if (lower.size() != n || upper.size() != n || binary.size() != n || col_names.size() != n)
    throw DimensionError("column arrays have inconsistent lengths");
  const std::size_t m = rows.size();
  if (row_sense.size() != m || rhs.size() != m || row_names.size() != m)
    throw DimensionError("row arrays have inconsistent lengths");
  for (std::size_t r = 0; r < m; ++r)
    for (const auto& [c, v] : rows[r]) {
      if (c < 0 || static_cast<std::size_t>(c) >= n)
        throw DimensionError("row " + row_names[r] + " references column " + std::to_string(c) + " out of range");
      if (!std::isfinite(v)) throw DimensionError("row " + row_names[r] + " has a non-finite coefficient");
    }
  for (std::size_t j = 0; j < n; ++j) {
    if (lower[j] > upper[j]) throw DimensionError("column " + col_names[j] + " has lower bound above upper bound");
    if (binary[j] && (lower[j] < 0.0 || upper[j] > 1.0))
      throw DimensionError("binary column " + col_names[j] + " has bounds outside [0, 1]");
  }
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::iteration_limit: return "iteration_limit";
    case SolveStatus::node_limit: return "node_limit";
  }
  return "unknown";
}

class LpSolver::Engine {
 public:
  Engine(const LinearProgram& p, SolverOptions o) : lp(p), opts(o), core(lp, opts) {}
  LinearProgram lp;
  SolverOptions opts;
  SimplexCore core;
};

LpSolver::LpSolver(const LinearProgram& lp, SolverOptions opts) {
  lp.check();
  engine_ = std::make_unique<Engine>(lp, opts);
}
LpSolver::~LpSolver() = default;
LpSolver::LpSolver(LpSolver&&) noexcept = default;
LpSolver& LpSolver::operator=(LpSolver&&) noexcept = default;

const LinearProgram& LpSolver::problem() const { return engine_->lp; }
const SolverOptions& LpSolver::options() const { return engine_->opts; }

double LpSolver::col_lower(int col) const { return engine_->core.lower(col); }
double LpSolver::col_upper(int col) const { return engine_->core.upper(col); }

void LpSolver::set_col_bounds(int col, double lb, double ub) {
  engine_->lp.lower[col] = lb;
  engine_->lp.upper[col] = ub;
  engine_->core.set_col_bounds(col, lb, ub);
}

void LpSolver::set_row_rhs(int row, double rhs) {
  engine_->lp.rhs[row] = rhs;
  switch (engine_->lp.row_sense[row]) {
    case RowSense::less_equal: engine_->core.set_row_bounds(row, -kInf, rhs); break;
    case RowSense::equal: engine_->core.set_row_bounds(row, rhs, rhs); break;
    case RowSense::greater_equal: engine_->core.set_row_bounds(row, rhs, kInf); break;
  }
}

void LpSolver::set_objective(std::span<const double> c) {
  auto& lp = engine_->lp;
  if (c.size() != lp.n_cols()) throw DimensionError("objective length does not match column count");
  std::copy(c.begin(), c.end(), lp.objective.begin());
  const double sign = lp.sense == ObjectiveSense::minimize ? 1.0 : -1.0;
  std::vector<double> internal(c.size());
  for (std::size_t j = 0; j < c.size(); ++j) internal[j] = sign * c[j];
  engine_->core.set_costs(internal);
}

LpBasis LpSolver::basis() const { return engine_->core.basis(); }

bool LpSolver::set_basis(const LpBasis& b) { return engine_->core.set_basis(b); }

SolveResult LpSolver::solve() {
  SolveResult res;
  auto& core = engine_->core;
  const auto& lp = engine_->lp;
  const long refactors_before = core.refactor_count();
  const auto outcome = core.solve(res.stats);
  res.stats.refactorizations = core.refactor_count() - refactors_before;
  switch (outcome) {
    case SimplexCore::Outcome::infeasible: res.status = SolveStatus::infeasible; return res;
    case SimplexCore::Outcome::unbounded: res.status = SolveStatus::unbounded; return res;
    case SimplexCore::Outcome::iteration_limit: res.status = SolveStatus::iteration_limit; return res;
    case SimplexCore::Outcome::numerical: throw SolverError("simplex: basis is numerically singular");
    case SimplexCore::Outcome::optimal: break;
  }
  const double sign = lp.sense == ObjectiveSense::minimize ? 1.0 : -1.0;
  const int n = static_cast<int>(lp.n_cols());
  const int m = static_cast<int>(lp.n_rows());
  res.status = SolveStatus::optimal;
  res.primal.resize(n);
  res.reduced_costs.resize(n);
  for (int j = 0; j < n; ++j) {
    res.primal[j] = core.value(j);
    res.reduced_costs[j] = sign * core.reduced_cost(j);
  }
  res.dual.resize(m);
  for (int i = 0; i < m; ++i) res.dual[i] = sign * core.row_reduced_cost(i);
  double obj = 0.0;
  for (int j = 0; j < n; ++j) obj += lp.objective[j] * res.primal[j];
  res.objective = obj;
  return res;
}

SolveResult solve_lp(const LinearProgram& lp, const SolverOptions& opts) {
  if (lp.has_integers()) throw SolverError("solve_lp called on a problem with binary columns");
  LpSolver solver(lp, opts);
  return solver.solve();
}

std::map<std::string, double> extract_duals(const SolveResult& result, const LinearProgram& lp) {
  if (!result.optimal() || result.dual.size() != lp.n_rows())
    throw SolverError("no dual values available (status " + std::string(to_string(result.status)) + ")");
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < lp.n_rows(); ++i) out[lp.row_names[i]] = result.dual[i];
  return out;
}

double primal_residual(const LinearProgram& lp, std::span<const double> x) {
  if (x.size() != lp.n_cols()) throw DimensionError("point length does not match column count");
  double worst = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    worst = std::max(worst, lp.lower[j] - x[j]);
    worst = std::max(worst, x[j] - lp.upper[j]);
  }
  for (std::size_t i = 0; i < lp.n_rows(); ++i) {
    double act = 0.0;
    for (const auto& [c, v] : lp.rows[i]) act += v * x[c];
    const double gap = act - lp.rhs[i];
    switch (lp.row_sense[i]) {
      case RowSense::less_equal: worst = std::max(worst, gap); break;
      case RowSense::equal: worst = std::max(worst, std::fabs(gap)); break;
      case RowSense::greater_equal: worst = std::max(worst, -gap); break;
    }
  }
  return worst;
}

namespace {

void write_term(std::ostream& os, double coef, const std::string& name, bool first) {
  if (coef < 0.0) os << (first ? "- " : " - ");
  else if (!first) os << " + ";
  os << std::fabs(coef) << ' ' << name;
}

}  // namespace

void write_lp_format(const LinearProgram& lp, std::ostream& os) {
  const auto old_precision = os.precision(17);
  os << (lp.sense == ObjectiveSense::minimize ? "Minimize\n" : "Maximize\n") << " obj: ";
  bool first = true;
  for (std::size_t j = 0; j < lp.n_cols(); ++j) {
    if (lp.objective[j] == 0.0) continue;
    write_term(os, lp.objective[j], lp.col_names[j], first);
    first = false;
  }
  if (first) os << "0 " << (lp.n_cols() > 0 ? lp.col_names[0] : "x0");
  os << "\nSubject To\n";
  for (std::size_t i = 0; i < lp.n_rows(); ++i) {
    os << ' ' << lp.row_names[i] << ": ";
    bool f = true;
    for (const auto& [c, v] : lp.rows[i]) {
      write_term(os, v, lp.col_names[c], f);
      f = false;
    }
    if (f) os << "0 " << (lp.n_cols() > 0 ? lp.col_names[0] : "x0");
    switch (lp.row_sense[i]) {
      case RowSense::less_equal: os << " <= "; break;
      case RowSense::equal: os << " = "; break;
      case RowSense::greater_equal: os << " >= "; break;
    }
    os << lp.rhs[i] << '\n';
  }
  os << "Bounds\n";
  for (std::size_t j = 0; j < lp.n_cols(); ++j) {
    if (lp.binary[j]) continue;
    const double lo = lp.lower[j];
    const double hi = lp.upper[j];
    const auto& name = lp.col_names[j];
    if (!std::isfinite(lo) && !std::isfinite(hi)) {
      os << ' ' << name << " free\n";
    } else if (lo == hi) {
      os << ' ' << name << " = " << lo << '\n';
    } else {
      os << ' ';
      if (std::isfinite(lo)) os << lo;
      else os << "-inf";
      os << " <= " << name << " <= ";
      if (std::isfinite(hi)) os << hi;
      else os << "+inf";
      os << '\n';
    }
  }
  if (lp.has_integers()) {
    os << "Binary\n";
    for (std::size_t j = 0; j < lp.n_cols(); ++j)
      if (lp.binary[j]) os << ' ' << lp.col_names[j] << '\n';
  }
  os << "End\n";
  os.precision(old_precision);
}

}  // namespace flexgauge
