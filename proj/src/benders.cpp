#include "flexgauge/benders.hpp"

#include "flexgauge/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace flexgauge {

MasterSolution solve_master(const MasterProblem& mp, const SolverOptions& opts) {
  LinearProgram lp;
  lp.sense = ObjectiveSense::maximize;
  const std::size_t dim = mp.dimension();
  for (std::size_t k = 0; k < dim; ++k) lp.add_variable(0.0, 1.0, mp.a[k], "lambda" + std::to_string(k));
  for (std::size_t c = 0; c < mp.cuts.size(); ++c) {
    const auto& cut = mp.cuts[c];
    if (cut.coefficients.size() != dim) throw DimensionError("cut dimension does not match the master problem");
    std::vector<std::pair<int, double>> row;
    for (std::size_t k = 0; k < dim; ++k)
      if (cut.coefficients[k] != 0.0) row.emplace_back(static_cast<int>(k), cut.coefficients[k]);
    lp.add_row(std::move(row), RowSense::less_equal, -cut.constant, "cut" + std::to_string(c));
  }
  const auto r = solve_lp(lp, opts);
  if (!r.optimal()) throw SolverError(std::string("master problem ") + to_string(r.status));
  MasterSolution out;
  out.lambda.resize(dim);
  // Values within kMasterSnap of a box bound are LP round-off; put them on the bound.
  for (std::size_t k = 0; k < dim; ++k) {
    double v = std::clamp(r.primal[k], 0.0, 1.0);
    if (v < kMasterSnap) v = 0.0;
    else if (v > 1.0 - kMasterSnap) v = 1.0;
    out.lambda[k] = v;
    out.objective += mp.a[k] * v;
  }
  return out;
}

void RdfeaProblem::set_lambda(std::span<const double> lambda_flat) {
  if (lambda_flat.size() != 2 * (n_buses + n_sub)) throw DimensionError("lambda dimension does not match RDFEA");
  lambda.assign(lambda_flat.begin(), lambda_flat.end());
  lp.objective = nominal;
  for (const auto& a : aux) lp.objective[a.column] = a.weight * lambda[a.lambda_index];
}

std::vector<double> RdfeaProblem::zero_point() const {
  std::vector<double> x(lp.n_cols(), 0.0);
  for (int z : z_up) x[z] = 1.0;
  return x;
}

RdfeaProblem build_rdfea(const CompactForm& cf, const UncertaintyModel& u, const ScaleVector& lambda) {
  const std::size_t nb = cf.n_buses;
  const std::size_t nt = cf.n_sub;
  if (u.n_buses() != nb || u.d_hat.size() != nb || u.n_sub_intervals() != nt || u.delta_d_hat.size() != nt)
    throw DimensionError("uncertainty model does not match the compact form");
  const auto flat = lambda.flat();
  if (flat.size() != 2 * (nb + nt)) throw DimensionError("lambda dimension does not match the compact form");

  RdfeaProblem p;
  p.n_buses = nb;
  p.n_sub = nt;
  auto& lp = p.lp;
  lp.sense = ObjectiveSense::maximize;
  auto add = [&](double lb, double ub, double nominal, std::string name, bool binary = false) {
    p.nominal.push_back(nominal);
    return lp.add_variable(lb, ub, 0.0, std::move(name), binary);
  };
  auto row_name = [&](Block b, int i) { return cf.row_labels[static_cast<std::size_t>(b)][i].name; };

  // Nominal right-hand sides of the d-dependent blocks.
  std::vector<double> d_bar(u.d_bar), dd_bar(u.delta_d_bar);
  const auto h2_nom = cf.h2.multiply(d_bar);
  const auto h3_nom = cf.h3.multiply(d_bar);
  const auto h4_nom = cf.h4.multiply(dd_bar);

  const std::vector<double>* plain_rhs[kBlockCount] = {&cf.b1, nullptr, &cf.b3, nullptr, &cf.b5, &cf.b6, &cf.b7};
  for (std::size_t b = 0; b < kBlockCount; ++b) {
    const Block blk = static_cast<Block>(b);
    const int rows = static_cast<int>(cf.row_count(blk));
    for (int i = 0; i < rows; ++i) {
      const std::string name = "mu" + std::to_string(b + 1) + "[" + row_name(blk, i) + "]";
      switch (blk) {
        case Block::a2:
          p.mu[b].push_back(add(-1.0, 0.0, h2_nom[i], "mu2n[" + row_name(blk, i) + "]"));
          p.mu2_p.push_back(add(-1.0, 0.0, -h2_nom[i], "mu2p[" + row_name(blk, i) + "]"));
          break;
        case Block::a4:
          p.mu[b].push_back(add(-1.0, 0.0, h4_nom[i], "mu4n[" + row_name(blk, i) + "]"));
          p.mu4_p.push_back(add(-1.0, 0.0, -h4_nom[i], "mu4p[" + row_name(blk, i) + "]"));
          break;
        case Block::a3:
          p.mu[b].push_back(add(-1.0, 0.0, (*plain_rhs[b])[i] + h3_nom[i], name));
          break;
        case Block::a5:
          p.mu[b].push_back(add(-1.0, 1.0, (*plain_rhs[b])[i], name));
          break;
        default:
          p.mu[b].push_back(add(-1.0, 0.0, (*plain_rhs[b])[i], name));
          break;
      }
    }
  }

  for (std::size_t k = 0; k < nb + nt; ++k) {
    const std::string dim = k < nb ? "b" + std::to_string(k + 1) : "t" + std::to_string(k - nb + 1);
    p.z_up.push_back(add(0.0, 1.0, 0.0, "z+[" + dim + "]", true));
    p.z_dn.push_back(add(0.0, 1.0, 0.0, "z-[" + dim + "]", true));
    lp.add_row({{p.z_up.back(), 1.0}, {p.z_dn.back(), 1.0}}, RowSense::equal, 1.0, "direction[" + dim + "]");
  }

  // z * mu products: aux >= -z, aux >= mu, aux <= 1 - z + mu, aux in [-1, 0].
  auto add_aux = [&](int mu_col, int dim, bool up, int lambda_index, double weight) {
    if (weight == 0.0) return;
    const int z = up ? p.z_up[dim] : p.z_dn[dim];
    const int col = add(-1.0, 0.0, 0.0, "aux[" + lp.col_names[mu_col] + "," + lp.col_names[z] + "]");
    const std::string tag = lp.col_names[col];
    lp.add_row({{col, 1.0}, {z, 1.0}}, RowSense::greater_equal, 0.0, "mc_z[" + tag + "]");
    lp.add_row({{col, 1.0}, {mu_col, -1.0}}, RowSense::greater_equal, 0.0, "mc_mu[" + tag + "]");
    lp.add_row({{col, 1.0}, {z, 1.0}, {mu_col, -1.0}}, RowSense::less_equal, 1.0, "mc_up[" + tag + "]");
    p.aux.push_back({col, mu_col, z, lambda_index, weight});
  };
  const int inb = static_cast<int>(nb);
  auto bidx = [](int b, bool up) { return static_cast<int>(bus_flat_index(b, up)); };
  auto tidx = [&](int t, bool up) { return static_cast<int>(sub_flat_index(nb, t, up)); };
  for (const auto& e : cf.h2.entries) {
    const double w = u.d_hat[e.col] * e.value;
    for (int part = 0; part < 2; ++part) {
      const int mu_col = part == 0 ? p.mu[1][e.row] : p.mu2_p[e.row];
      const double s = part == 0 ? 1.0 : -1.0;
      add_aux(mu_col, e.col, true, bidx(e.col, true), s * w);
      add_aux(mu_col, e.col, false, bidx(e.col, false), -s * w);
    }
  }
  for (const auto& e : cf.h3.entries) {
    const double w = u.d_hat[e.col] * e.value;
    add_aux(p.mu[2][e.row], e.col, true, bidx(e.col, true), w);
    add_aux(p.mu[2][e.row], e.col, false, bidx(e.col, false), -w);
  }
  for (const auto& e : cf.h4.entries) {
    const double w = u.delta_d_hat[e.col] * e.value;
    for (int part = 0; part < 2; ++part) {
      const int mu_col = part == 0 ? p.mu[3][e.row] : p.mu4_p[e.row];
      const double s = part == 0 ? 1.0 : -1.0;
      add_aux(mu_col, inb + e.col, true, tidx(e.col, true), s * w);
      add_aux(mu_col, inb + e.col, false, tidx(e.col, false), -s * w);
    }
  }

  // Dual feasibility: one row per x column (<= 0) and per y column (= 0).
  std::vector<std::vector<std::pair<int, double>>> xr(cf.n_x()), yr(cf.n_y());
  auto scatter = [](auto& rows, const SparseMatrix& m, const std::vector<int>& mu, const std::vector<int>* mu_p) {
    for (const auto& e : m.entries) {
      rows[e.col].emplace_back(mu[e.row], e.value);
      if (mu_p) rows[e.col].emplace_back((*mu_p)[e.row], -e.value);
    }
  };
  scatter(xr, cf.a1, p.mu[0], nullptr);
  scatter(xr, cf.a2, p.mu[1], &p.mu2_p);
  scatter(xr, cf.a3, p.mu[2], nullptr);
  scatter(xr, cf.a7, p.mu[6], nullptr);
  scatter(yr, cf.a4, p.mu[3], &p.mu4_p);
  scatter(yr, cf.a5, p.mu[4], nullptr);
  scatter(yr, cf.a6, p.mu[5], nullptr);
  scatter(yr, cf.a8, p.mu[6], nullptr);
  for (std::size_t j = 0; j < xr.size(); ++j)
    lp.add_row(std::move(xr[j]), RowSense::less_equal, 0.0, "dual[" + cf.x_columns[j].name + "]");
  for (std::size_t j = 0; j < yr.size(); ++j)
    lp.add_row(std::move(yr[j]), RowSense::equal, 0.0, "dual[" + cf.y_columns[j].name + "]");

  p.set_lambda(flat);
  return p;
}

RdfeaSolution solve_rdfea(const RdfeaProblem& p, const SolverOptions& opts) {
  LinearProgram lp = p.lp;
  // Directions of dimensions without a weighted auxiliary cannot change the
  // objective; fix them up.
  std::vector<bool> active(p.z_up.size(), false);
  std::vector<int> dim_of_z(lp.n_cols(), -1);
  for (std::size_t k = 0; k < p.z_up.size(); ++k) dim_of_z[p.z_up[k]] = dim_of_z[p.z_dn[k]] = static_cast<int>(k);
  for (const auto& a : p.aux)
    if (lp.objective[a.column] != 0.0) active[dim_of_z[a.z_column]] = true;
  for (std::size_t k = 0; k < active.size(); ++k)
    if (!active[k]) {
      lp.lower[p.z_up[k]] = lp.upper[p.z_up[k]] = 1.0;
      lp.lower[p.z_dn[k]] = lp.upper[p.z_dn[k]] = 0.0;
    }

  const auto start = p.zero_point();
  const auto r = solve_mip(lp, opts, start);
  if (!r.optimal()) throw SolverError(std::string("RDFEA subproblem ") + to_string(r.status));
  RdfeaSolution out;
  out.eta = r.objective;
  out.values = r.primal;
  out.stats = r.stats;
  out.pool = r.pool;
  for (std::size_t k = 0; k < p.z_up.size(); ++k) out.direction.push_back(out.values[p.z_up[k]] > 0.5 ? 1 : -1);
  return out;
}

CutRecord cut_from_duals(const RdfeaProblem& p, std::span<const double> values, double tol) {
  if (values.size() != p.lp.n_cols()) throw DimensionError("RDFEA point length does not match column count");
  CutRecord cut;
  cut.coefficients.assign(p.lambda.size(), 0.0);
  for (std::size_t j = 0; j < values.size(); ++j) cut.constant += p.nominal[j] * values[j];
  for (const auto& a : p.aux) cut.coefficients[a.lambda_index] += a.weight * values[a.column];
  cut.eta = cut.evaluate(p.lambda);
  if (!(cut.eta > tol))
    throw Error("cut_from_duals: subproblem value " + std::to_string(cut.eta) + " does not exceed tolerance");
  return cut;
}

FlexReport run_benders(const SystemCase& c, const BendersOptions& opts) {
  if (auto v = validate_case(c); !v.empty()) throw ValidationError("invalid case: " + v.front().message);
  return run_benders(assemble(c), c.uncertainty(), opts);
}

FlexReport run_benders(const CompactForm& cf, const UncertaintyModel& u, const BendersOptions& opts) {
  using clock = std::chrono::steady_clock;
  const std::size_t nb = cf.n_buses;
  const std::size_t nt = cf.n_sub;

  {
    const auto p0 = build_rdfea(cf, u, ScaleVector::zeros(nb, nt));
    const auto r0 = solve_rdfea(p0, opts.solver);
    if (r0.eta > opts.tol) throw BaseInfeasible(r0.eta);
  }

  MasterProblem mp(objective_coefficients(u));
  FlexReport report;
  SolverOptions sub_opts = opts.solver;
  sub_opts.keep_solution_pool = opts.multi_cut;
  for (int iter = 1; iter <= opts.max_iters; ++iter) {
    const auto t0 = clock::now();
    const auto ms = solve_master(mp, opts.solver);
    const auto lambda = ScaleVector::from_flat(ms.lambda, nb, nt);
    const auto p = build_rdfea(cf, u, lambda);
    const auto r = solve_rdfea(p, sub_opts);

    IterationRecord rec;
    rec.iteration = iter;
    rec.master_objective = ms.objective;
    rec.eta = r.eta;
    if (r.eta <= opts.tol) {
      rec.wall_seconds = std::chrono::duration<double>(clock::now() - t0).count();
      report.trace.push_back(rec);
      report.lambda_star = lambda;
      report.indices = compute_indices(lambda, u);
      report.iterations = iter;
      report.cuts = mp.cuts;
      return report;
    }
    auto cut = cut_from_duals(p, r.values, opts.tol);
    cut.iteration = iter;
    rec.cut_constant = cut.constant;
    mp.cuts.push_back(std::move(cut));
    if (opts.multi_cut) {
      for (const auto& point : r.pool) {
        if (point == r.values) continue;
        CutRecord extra;
        try {
          extra = cut_from_duals(p, point, opts.tol);
        } catch (const Error&) {
          continue;
        }
        extra.iteration = iter;
        mp.cuts.push_back(std::move(extra));
      }
    }
    rec.wall_seconds = std::chrono::duration<double>(clock::now() - t0).count();
    report.trace.push_back(rec);
  }
  throw IterationLimit(opts.max_iters);
}

}  // namespace flexgauge
