#include "flexgauge/oracle.hpp"

#include "flexgauge/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace flexgauge {
namespace {

struct BlockView {
  Block block;
  const SparseMatrix* x;  // may be null
  const SparseMatrix* y;  // may be null
  bool equality;
};

std::vector<BlockView> blocks(const CompactForm& cf) {
  return {{Block::a1, &cf.a1, nullptr, false}, {Block::a2, &cf.a2, nullptr, true},
          {Block::a3, &cf.a3, nullptr, false}, {Block::a4, nullptr, &cf.a4, true},
          {Block::a5, nullptr, &cf.a5, true},  {Block::a6, nullptr, &cf.a6, false},
          {Block::a7, &cf.a7, &cf.a8, false}};
}

// Right-hand side of every primal row at a realization, block by block.
std::array<std::vector<double>, kBlockCount> rhs_at(const CompactForm& cf, std::span<const double> d,
                                                    std::span<const double> delta_d) {
  if (d.size() != cf.n_buses || delta_d.size() != cf.n_sub)
    throw DimensionError("realization dimensions do not match the compact form");
  std::array<std::vector<double>, kBlockCount> r;
  r[0] = cf.b1;
  r[1] = cf.h2.multiply(d);
  r[2] = cf.h3.multiply(d);
  for (std::size_t i = 0; i < r[2].size(); ++i) r[2][i] += cf.b3[i];
  r[3] = cf.h4.multiply(delta_d);
  r[4] = cf.b5;
  r[5] = cf.b6;
  r[6] = cf.b7;
  return r;
}

std::vector<std::vector<std::pair<int, double>>> rows_of(const SparseMatrix& m, int offset) {
  std::vector<std::vector<std::pair<int, double>>> rows(m.rows);
  for (const auto& e : m.entries) rows[e.row].emplace_back(e.col + offset, e.value);
  return rows;
}

}  // namespace

LinearProgram build_min_slack_lp(const CompactForm& cf, std::span<const double> d, std::span<const double> delta_d) {
  const auto rhs = rhs_at(cf, d, delta_d);
  LinearProgram lp;
  for (const auto& c : cf.x_columns) lp.add_variable(0.0, kInf, 0.0, c.name);
  const int ny0 = static_cast<int>(lp.n_cols());
  for (const auto& c : cf.y_columns) lp.add_variable(-kInf, kInf, 0.0, c.name);
  for (const auto& bv : blocks(cf)) {
    const std::size_t b = static_cast<std::size_t>(bv.block);
    const int n = static_cast<int>(cf.row_count(bv.block));
    std::vector<std::vector<std::pair<int, double>>> rows(n);
    if (bv.x) {
      auto xr = rows_of(*bv.x, 0);
      for (int i = 0; i < n; ++i) rows[i].insert(rows[i].end(), xr[i].begin(), xr[i].end());
    }
    if (bv.y) {
      auto yr = rows_of(*bv.y, ny0);
      for (int i = 0; i < n; ++i) rows[i].insert(rows[i].end(), yr[i].begin(), yr[i].end());
    }
    for (int i = 0; i < n; ++i) {
      const auto& name = cf.row_labels[b][i].name;
      if (bv.equality) {
        const int sp = lp.add_variable(0.0, kInf, 1.0, "s+[" + name + "]");
        const int sm = lp.add_variable(0.0, kInf, 1.0, "s-[" + name + "]");
        rows[i].emplace_back(sp, 1.0);
        rows[i].emplace_back(sm, -1.0);
        lp.add_row(std::move(rows[i]), RowSense::equal, rhs[b][i], name);
      } else {
        const int s = lp.add_variable(0.0, kInf, 1.0, "s[" + name + "]");
        rows[i].emplace_back(s, -1.0);
        lp.add_row(std::move(rows[i]), RowSense::less_equal, rhs[b][i], name);
      }
    }
  }
  return lp;
}

LinearProgram build_min_slack_dual(const CompactForm& cf, std::span<const double> d,
                                   std::span<const double> delta_d) {
  const auto rhs = rhs_at(cf, d, delta_d);
  LinearProgram lp;
  lp.sense = ObjectiveSense::maximize;
  std::array<int, kBlockCount> first{};
  for (const auto& bv : blocks(cf)) {
    const std::size_t b = static_cast<std::size_t>(bv.block);
    first[b] = static_cast<int>(lp.n_cols());
    for (std::size_t i = 0; i < cf.row_count(bv.block); ++i)
      lp.add_variable(-1.0, bv.equality ? 1.0 : 0.0, rhs[b][i], "mu[" + cf.row_labels[b][i].name + "]");
  }
  std::vector<std::vector<std::pair<int, double>>> xr(cf.n_x()), yr(cf.n_y());
  for (const auto& bv : blocks(cf)) {
    const int f = first[static_cast<std::size_t>(bv.block)];
    if (bv.x)
      for (const auto& e : bv.x->entries) xr[e.col].emplace_back(f + e.row, e.value);
    if (bv.y)
      for (const auto& e : bv.y->entries) yr[e.col].emplace_back(f + e.row, e.value);
  }
  for (std::size_t j = 0; j < xr.size(); ++j)
    lp.add_row(std::move(xr[j]), RowSense::less_equal, 0.0, "dual[" + cf.x_columns[j].name + "]");
  for (std::size_t j = 0; j < yr.size(); ++j)
    lp.add_row(std::move(yr[j]), RowSense::equal, 0.0, "dual[" + cf.y_columns[j].name + "]");
  return lp;
}

double min_slack_lp(const CompactForm& cf, std::span<const double> d, std::span<const double> delta_d,
                    const SolverOptions& opts) {
  const auto r = solve_lp(build_min_slack_lp(cf, d, delta_d), opts);
  if (!r.optimal()) throw SolverError(std::string("min-slack LP ") + to_string(r.status));
  return r.objective;
}

struct MinSlackSolver::State {
  const CompactForm& cf;
  std::unique_ptr<LpSolver> solver;
  std::vector<double> current;  // rhs of every row
  State(const CompactForm& c, SolverOptions opts) : cf(c) {
    const std::vector<double> d(c.n_buses, 0.0), dd(c.n_sub, 0.0);
    auto lp = build_min_slack_lp(c, d, dd);
    current = lp.rhs;
    solver = std::make_unique<LpSolver>(lp, opts);
  }
};

MinSlackSolver::MinSlackSolver(const CompactForm& cf, SolverOptions opts)
    : state_(std::make_unique<State>(cf, opts)) {}
MinSlackSolver::~MinSlackSolver() = default;

double MinSlackSolver::solve(std::span<const double> d, std::span<const double> delta_d) {
  const auto rhs = rhs_at(state_->cf, d, delta_d);
  int row = 0;
  for (std::size_t b = 0; b < kBlockCount; ++b)
    for (double v : rhs[b]) {
      if (v != state_->current[row]) {
        state_->solver->set_row_rhs(row, v);
        state_->current[row] = v;
      }
      ++row;
    }
  const auto r = state_->solver->solve();
  if (!r.optimal()) throw SolverError(std::string("min-slack LP ") + to_string(r.status));
  return r.objective;
}

void vertex_realization(const UncertaintyModel& u, const ScaleVector& lambda, const VertexAssignment& v,
                        std::vector<double>& d, std::vector<double>& delta_d) {
  const std::size_t nb = u.n_buses();
  const std::size_t nt = u.n_sub_intervals();
  if (lambda.lam_up_b.size() != nb || lambda.lam_dn_b.size() != nb || lambda.lam_up_t.size() != nt ||
      lambda.lam_dn_t.size() != nt || v.bus_up.size() != nb || v.sub_up.size() != nt)
    throw DimensionError("vertex dimensions do not match the uncertainty model");
  d.resize(nb);
  delta_d.resize(nt);
  for (std::size_t b = 0; b < nb; ++b)
    d[b] = v.bus_up[b] ? u.d_bar[b] + lambda.lam_up_b[b] * u.d_hat[b] : u.d_bar[b] - lambda.lam_dn_b[b] * u.d_hat[b];
  for (std::size_t t = 0; t < nt; ++t)
    delta_d[t] = v.sub_up[t] ? u.delta_d_bar[t] + lambda.lam_up_t[t] * u.delta_d_hat[t]
                             : u.delta_d_bar[t] - lambda.lam_dn_t[t] * u.delta_d_hat[t];
}

WorstCase worst_case_eta(const CompactForm& cf, const UncertaintyModel& u, const ScaleVector& lambda,
                         const SolverOptions& opts) {
  const std::size_t nb = u.n_buses();
  const std::size_t nt = u.n_sub_intervals();
  if (nb != cf.n_buses || nt != cf.n_sub) throw DimensionError("uncertainty model does not match the compact form");
  VertexAssignment v{std::vector<bool>(nb, true), std::vector<bool>(nt, true)};
  // Dimensions whose two vertices differ.
  std::vector<std::size_t> dims;
  for (std::size_t b = 0; b < nb; ++b)
    if (lambda.lam_up_b.at(b) * u.d_hat[b] != 0.0 || lambda.lam_dn_b.at(b) * u.d_hat[b] != 0.0) dims.push_back(b);
  for (std::size_t t = 0; t < nt; ++t)
    if (lambda.lam_up_t.at(t) * u.delta_d_hat[t] != 0.0 || lambda.lam_dn_t.at(t) * u.delta_d_hat[t] != 0.0)
      dims.push_back(nb + t);
  if (dims.size() > kMaxVertexDimensions)
    throw DimensionError("vertex enumeration over " + std::to_string(dims.size()) + " dimensions exceeds the limit of " +
                         std::to_string(kMaxVertexDimensions));

  MinSlackSolver solver(cf, opts);
  std::vector<double> d, dd;
  WorstCase best;
  best.eta = -kInf;
  const std::uint64_t count = std::uint64_t{1} << dims.size();
  for (std::uint64_t k = 0; k < count; ++k) {
    if (k > 0) {
      // Gray-code order: one dimension flips per step.
      const std::size_t flip = dims[std::countr_zero(k)];
      if (flip < nb) v.bus_up[flip] = !v.bus_up[flip];
      else v.sub_up[flip - nb] = !v.sub_up[flip - nb];
    }
    vertex_realization(u, lambda, v, d, dd);
    const double eta = solver.solve(d, dd);
    ++best.evaluations;
    if (eta > best.eta) {
      best.eta = eta;
      best.vertex = v;
    }
  }
  return best;
}

ReferenceResult reference_flexibility(const CompactForm& cf, const UncertaintyModel& u, const ScaleVector& weights,
                                      double tol, double s_tol, const SolverOptions& opts) {
  const auto w = weights.flat();
  for (double x : w)
    if (x < 0.0 || x > 1.0) throw DimensionError("ray weights must lie in [0, 1]");
  const std::size_t nb = u.n_buses();
  const std::size_t nt = u.n_sub_intervals();
  auto eta_at = [&](double s) {
    std::vector<double> l(w);
    for (auto& x : l) x *= s;
    return worst_case_eta(cf, u, ScaleVector::from_flat(l, nb, nt), opts).eta;
  };
  const double base = eta_at(0.0);
  if (base > tol) throw BaseInfeasible(base);
  const auto a = objective_coefficients(u);
  auto result = [&](double s) {
    ReferenceResult r;
    r.s = s;
    for (std::size_t k = 0; k < w.size(); ++k) r.tf += a[k] * s * w[k];
    return r;
  };
  if (eta_at(1.0) <= tol) return result(1.0);
  double lo = 0.0, hi = 1.0;
  while (hi - lo > s_tol) {
    const double mid = 0.5 * (lo + hi);
    if (eta_at(mid) <= tol) lo = mid;
    else hi = mid;
  }
  return result(lo);
}

}  // namespace flexgauge
