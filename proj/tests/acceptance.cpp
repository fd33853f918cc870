// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include "fixtures.hpp"

#include "flexgauge/agc.hpp"
#include "flexgauge/benders.hpp"
#include "flexgauge/compact_form.hpp"
#include "flexgauge/errors.hpp"
#include "flexgauge/lp.hpp"
#include "flexgauge/oracle.hpp"
#include "flexgauge/sweep.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

using namespace flexgauge;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void fail(const std::string& why) {
    if (ok) detail = why;
    ok = false;
  }
  void expect(bool cond, const std::string& why) {
    if (!cond) fail(why);
  }
};

std::string num(double v) {
  std::ostringstream ss;
  ss.precision(10);
  ss << v;
  return ss.str();
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

Outcome oracle_equivalence() {
  Outcome out;
  std::mt19937 rng(101);
  int points = 0;
  for (const auto& name : fixtures::desk_cases()) {
    const auto c = fixtures::load(name);
    const auto cf = assemble(c);
    const auto u = c.uncertainty();
    const auto nb = u.n_buses(), nt = u.n_sub_intervals();
    for (int k = 0; k < 12; ++k) {
      const auto lam = k < 4 ? ScaleVector::constant(nb, nt, k / 3.0) : fixtures::random_scale(rng, nb, nt);
      const double er = solve_rdfea(build_rdfea(cf, u, lam)).eta;
      const double eo = worst_case_eta(cf, u, lam).eta;
      ++points;
      out.expect(std::fabs(er - eo) <= 1e-6, name + " point " + std::to_string(k) + ": rdfea " + num(er) +
                                                 " vs vertices " + num(eo));
    }
  }
  if (out.ok) out.detail = std::to_string(points) + " points on 5 cases";
  return out;
}

Outcome benders_vs_oracle() {
  Outcome out;
  std::string summary;
  for (const auto& name : fixtures::desk_cases()) {
    const auto c = fixtures::load(name);
    const auto cf = assemble(c);
    const auto u = c.uncertainty();
    const auto rep = run_benders(cf, u);
    const double eta = worst_case_eta(cf, u, rep.lambda_star).eta;
    const auto ref = reference_flexibility(cf, u, ScaleVector::constant(u.n_buses(), u.n_sub_intervals(), 1.0));
    out.expect(eta <= 1e-6, name + ": lambda* rejected, eta " + num(eta));
    out.expect(rep.indices.tf >= ref.tf - 1e-4, name + ": TF " + num(rep.indices.tf) + " below ray " + num(ref.tf));
    summary += (summary.empty() ? "" : ", ") + name.substr(0, name.size() - 5) + " TF " + num(rep.indices.tf) +
               " ray " + num(ref.tf);
  }
  if (out.ok) out.detail = summary;
  return out;
}

Outcome duality_suite() {
  Outcome out;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> pos(0.1, 5.0), any(-2.0, 5.0), rhs(1.0, 10.0);
  int solved = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 6), m = 1 + static_cast<int>(rng() % 6);
    // Alternate max {c x : A x <= b, x >= 0} (b > 0, every column has a
    // positive entry) with min {c x : A x >= b, x >= 0} (c > 0).
    const bool packing = trial % 2 == 0;
    std::vector<std::vector<double>> a(m, std::vector<double>(n));
    for (auto& row : a)
      for (auto& v : row) v = any(rng);
    for (int j = 0; j < n; ++j) a[rng() % m][j] = pos(rng);
    for (int i = 0; i < m; ++i) a[i][rng() % n] = pos(rng);
    std::vector<double> b(m), c(n);
    for (auto& v : b) v = rhs(rng);
    for (auto& v : c) v = packing ? any(rng) : pos(rng);

    LinearProgram primal, dual;
    primal.sense = packing ? ObjectiveSense::maximize : ObjectiveSense::minimize;
    dual.sense = packing ? ObjectiveSense::minimize : ObjectiveSense::maximize;
    for (int j = 0; j < n; ++j) primal.add_variable(0.0, kInf, c[j]);
    for (int i = 0; i < m; ++i) dual.add_variable(0.0, kInf, b[i]);
    for (int i = 0; i < m; ++i) {
      std::vector<std::pair<int, double>> e;
      for (int j = 0; j < n; ++j) e.emplace_back(j, a[i][j]);
      primal.add_row(std::move(e), packing ? RowSense::less_equal : RowSense::greater_equal, b[i]);
    }
    for (int j = 0; j < n; ++j) {
      std::vector<std::pair<int, double>> e;
      for (int i = 0; i < m; ++i) e.emplace_back(i, a[i][j]);
      dual.add_row(std::move(e), packing ? RowSense::greater_equal : RowSense::less_equal, c[j]);
    }
    const auto rp = solve_lp(primal), rd = solve_lp(dual);
    if (!rp.optimal() || !rd.optimal()) {
      out.fail("random LP " + std::to_string(trial) + ": " + to_string(rp.status) + " / " + to_string(rd.status));
      continue;
    }
    ++solved;
    out.expect(std::fabs(rp.objective - rd.objective) <= 1e-6 * (1.0 + std::fabs(rp.objective)),
               "random LP " + std::to_string(trial) + ": " + num(rp.objective) + " vs " + num(rd.objective));
  }

  std::mt19937 rng2(19);
  std::uniform_real_distribution<double> s(-1.5, 1.5);
  int slack = 0;
  for (int k = 0; k < 20; ++k) {
    const auto& name = fixtures::desk_cases()[k % 5];
    const auto c = fixtures::load(name);
    const auto cf = assemble(c);
    const auto u = c.uncertainty();
    std::vector<double> d = u.d_bar, dd = u.delta_d_bar;
    for (std::size_t b = 0; b < d.size(); ++b) d[b] += s(rng2) * u.d_hat[b];
    for (std::size_t t = 0; t < dd.size(); ++t) dd[t] += s(rng2) * (u.delta_d_hat[t] + 1.0);
    const double p = min_slack_lp(cf, d, dd);
    const auto r = solve_lp(build_min_slack_dual(cf, d, dd));
    if (!r.optimal()) {
      out.fail("min-slack dual " + std::to_string(k) + " " + to_string(r.status));
      continue;
    }
    if (p > 1e-6) ++slack;
    out.expect(std::fabs(p - r.objective) <= 1e-6, name + " realization " + std::to_string(k) + ": " + num(p) +
                                                       " vs " + num(r.objective));
  }
  if (out.ok)
    out.detail = std::to_string(solved) + " random LP pairs, 20 min-slack pairs (" + std::to_string(slack) +
                 " with positive slack)";
  return out;
}

Outcome linearization_suite() {
  Outcome out;
  std::mt19937 rng(43);
  std::uniform_real_distribution<double> load(0.9, 1.5), budget(0.9, 1.3);
  const auto base = fixtures::load("desk_2bus.json");
  int positive = 0;
  for (int k = 0; k < 10; ++k) {
    auto c = base;
    for (auto& b : c.buses) {
      const double f = load(rng);
      b.d_bar *= f;
      b.d_hat *= f;
    }
    c.budget *= budget(rng);
    const auto cf = assemble(c);
    const auto u = c.uncertainty();
    const auto nb = u.n_buses(), nt = u.n_sub_intervals();
    const auto lam = fixtures::random_scale(rng, nb, nt);
    const auto p = build_rdfea(cf, u, lam);
    if (p.n_binaries() > 8) {
      out.fail("instance has " + std::to_string(p.n_binaries()) + " binaries");
      break;
    }
    const double milp = solve_rdfea(p).eta;
    // The bilinear objective at a fixed z is the min-slack dual at that
    // vertex realization; take the best over every z.
    const std::size_t dims = nb + nt;
    double best = -kInf;
    std::vector<double> d, dd;
    for (std::size_t mask = 0; mask < (std::size_t{1} << dims); ++mask) {
      VertexAssignment v;
      for (std::size_t j = 0; j < dims; ++j) (j < nb ? v.bus_up : v.sub_up).push_back(((mask >> j) & 1) != 0);
      vertex_realization(u, lam, v, d, dd);
      const auto r = solve_lp(build_min_slack_dual(cf, d, dd));
      if (!r.optimal()) {
        out.fail("vertex dual not optimal");
        return out;
      }
      best = std::max(best, r.objective);
    }
    if (best > 1e-6) ++positive;
    out.expect(std::fabs(milp - best) <= 1e-8,
               "instance " + std::to_string(k) + ": milp " + num(milp) + " vs enumeration " + num(best));
  }
  if (out.ok) out.detail = "10 instances, 8 binaries each, " + std::to_string(positive) + " with positive optimum";
  return out;
}

bool nondecreasing_tf(const std::vector<SweepRow>& rows, std::string& why) {
  double prev = -kInf;
  bool seen = false;
  for (const auto& r : rows) {
    if (!r.indices) {
      if (seen) {
        why = "infeasible row after a feasible one at SF " + num(r.sf);
        return false;
      }
      continue;
    }
    seen = true;
    if (r.indices->tf < prev - 1e-6) {
      why = "TF drops at SF " + num(r.sf);
      return false;
    }
    prev = r.indices->tf;
  }
  if (!seen) why = "no feasible row";
  return seen;
}

bool same_indices(const Indices& a, const Indices& b) {
  const double d[] = {a.tf - b.tf,       a.edf - b.edf,     a.agcf - b.agcf,    a.edupf - b.edupf,
                      a.eddnf - b.eddnf, a.agcupf - b.agcupf, a.agcdnf - b.agcdnf};
  for (double v : d)
    if (std::fabs(v) > 1e-6) return false;
  return true;
}

// The last `tail` rows carry identical indices.
bool saturates(const std::vector<SweepRow>& rows, std::size_t tail) {
  if (rows.size() < tail) return false;
  const auto& last = rows.back();
  for (std::size_t k = rows.size() - tail; k < rows.size(); ++k)
    if (!rows[k].indices || !same_indices(*rows[k].indices, *last.indices)) return false;
  return true;
}

Outcome budget_sweep() {
  Outcome out;
  const auto c = fixtures::load("desk_2bus.json");
  for (const auto& g : c.generators) out.expect(g.cp > 0.0, "generator " + g.id + " has no governor penalty");
  SweepSpec s;
  s.target = SweepTarget::budget;
  s.scale_factors = {1.0, 1.02, 1.05, 1.1, 1.2, 1.3, 1.5, 2.0, 3.0};
  const auto res = run_sweep(c, s);
  std::string why;
  out.expect(nondecreasing_tf(res.rows, why), why);
  out.expect(res.rows[0].indices && res.rows[0].indices->agcf <= 1e-9,
             "AGCF at SF 1 is " + (res.rows[0].indices ? num(res.rows[0].indices->agcf) : std::string("NA")));
  out.expect(saturates(res.rows, 3), "indices not constant over the last three budgets");
  if (out.ok)
    out.detail = "B0 " + num(res.b0) + ", TF " + num(res.rows[0].indices->tf) + " -> " +
                 num(res.rows.back().indices->tf) + ", AGCF " + num(res.rows.back().indices->agcf) + " at saturation";
  return out;
}

Outcome ramp_line_sweeps() {
  Outcome out;
  auto c = fixtures::load("desk_2bus.json");
  c.budget = 10.0 * base_budget(c);
  SweepSpec ramp;
  ramp.target = SweepTarget::ramp;
  ramp.scale_factors = {0.1, 0.25, 0.5, 1.0, 1.5, 2.0};
  const auto rr = run_sweep(c, ramp);
  std::string why;
  out.expect(nondecreasing_tf(rr.rows, why), "ramp: " + why);
  out.expect(saturates(rr.rows, 3), "ramp: indices not constant over the last three factors");

  SweepSpec line;
  line.target = SweepTarget::line;
  line.scale_factors = {0.1, 0.25, 0.5, 1.0, 1.5, 2.0, 4.0};
  const auto lr = run_sweep(c, line);
  out.expect(nondecreasing_tf(lr.rows, why), "line: " + why);
  out.expect(saturates(lr.rows, 2), "line: indices not constant over the last two factors");
  double lo = kInf, hi = -kInf;
  int feasible = 0;
  for (const auto& r : lr.rows)
    if (r.indices) {
      ++feasible;
      lo = std::min(lo, r.indices->agcf);
      hi = std::max(hi, r.indices->agcf);
    }
  out.expect(feasible >= 5, "line: only " + std::to_string(feasible) + " feasible rows");
  out.expect(hi - lo <= 1e-6, "line: AGCF varies from " + num(lo) + " to " + num(hi));
  if (out.ok)
    out.detail = "ramp TF " + num(rr.rows.front().indices ? rr.rows.front().indices->tf : 0.0) + " -> " +
                 num(rr.rows.back().indices->tf) + "; line AGCF " + num(hi) + " over " + std::to_string(feasible) +
                 " feasible factors";
  return out;
}

Outcome zoh_suite() {
  Outcome out;
  for (double k : {0.1, 1.0, 7.5}) {
    Eigen::MatrixXd a(1, 1), b(1, 1);
    a << -k;
    b << 2.0;
    const double dt = 0.4;
    const auto d = zoh(a, b, dt);
    out.expect(std::fabs(d.a(0, 0) - std::exp(-k * dt)) <= 1e-10, "scalar A at k " + num(k));
    out.expect(std::fabs(d.b(0, 0) - 2.0 * (1.0 - std::exp(-k * dt)) / k) <= 1e-10, "scalar B at k " + num(k));
  }
  {
    Eigen::MatrixXd a(2, 2), b(2, 1);
    a << -1, 1, 0, -2;
    b << 0, 1;
    const double t = 0.9;
    const auto d = zoh(a, b, t);
    Eigen::MatrixXd ea(2, 2), eb(2, 1);
    ea << std::exp(-t), std::exp(-t) - std::exp(-2 * t), 0, std::exp(-2 * t);
    eb << 0.5 - std::exp(-t) + 0.5 * std::exp(-2 * t), 0.5 * (1 - std::exp(-2 * t));
    out.expect((d.a - ea).cwiseAbs().maxCoeff() <= 1e-10, "2x2 A");
    out.expect((d.b - eb).cwiseAbs().maxCoeff() <= 1e-10, "2x2 B");
  }
  // 40-step simulation of a two-generator model against the continuous step
  // response from the eigendecomposition of A.
  ContinuousAgcModel cont;
  cont.t_ch = {0.3, 0.4};
  cont.t_g = {0.08, 0.1};
  cont.droop = {0.05, 0.04};
  cont.inertia = 10.0;
  cont.damping = 1.0;
  cont.dt = 0.5;
  const auto cm = continuous_matrices(cont);
  const auto dm = zoh(cm.a, cm.b, cont.dt);
  Eigen::EigenSolver<Eigen::MatrixXd> es(cm.a);
  const Eigen::MatrixXcd v = es.eigenvectors();
  const Eigen::VectorXcd lam = es.eigenvalues();
  const Eigen::MatrixXcd vinv = v.inverse();
  const double u = 3.0;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(cm.a.rows());
  double worst = 0.0;
  for (int k = 1; k <= 40; ++k) {
    x = dm.a * x + dm.b.col(0) * u;
    Eigen::VectorXcd cc = vinv * (cm.b.col(0).cast<std::complex<double>>() * u);
    for (Eigen::Index i = 0; i < lam.size(); ++i) cc(i) *= (std::exp(lam(i) * (k * cont.dt)) - 1.0) / lam(i);
    worst = std::max(worst, (x - (v * cc).real()).cwiseAbs().maxCoeff());
  }
  out.expect(worst <= 1e-8, "simulation error " + num(worst));
  if (out.ok) out.detail = "closed forms within 1e-10, simulation error " + num(worst);
  return out;
}

Outcome index_identities() {
  Outcome out;
  std::mt19937 rng(1000);
  const auto u = fixtures::load("desk_2bus_t10.json").uncertainty();
  const auto a = objective_coefficients(u);
  for (int k = 0; k < 1000; ++k) {
    const auto lam = fixtures::random_scale(rng, u.n_buses(), u.n_sub_intervals());
    const auto ix = compute_indices(lam, u);
    out.expect(ix.tf == ix.edf + ix.agcf, "TF != EDF + AGCF");
    out.expect(ix.edf == ix.edupf + ix.eddnf, "EDF != EDUPF + EDDNF");
    out.expect(ix.agcf == ix.agcupf + ix.agcdnf, "AGCF != AGCUPF + AGCDNF");
    out.expect(std::fabs(ix.tf - dot(a, lam.flat())) <= 1e-9, "TF != a . lambda");
  }
  if (out.ok) out.detail = "1000 scale vectors";
  return out;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome cli_determinism() {
  Outcome out;
  const auto root = std::filesystem::temp_directory_path() / "flexgauge_acceptance";
  std::filesystem::remove_all(root);
  std::string files[2];
  for (int k = 0; k < 2; ++k) {
    const auto dir = root / ("run" + std::to_string(k));
    const std::string cmd = std::string("\"") + FLEXGAUGE_BIN + "\" sweep --case \"" +
                            fixtures::case_path("desk_2bus.json").string() + "\" --out \"" + dir.string() +
                            "\" --target budget --sf 1,1.1,1.3,1.5,2 > /dev/null";
    const int rc = std::system(cmd.c_str());
    if (rc != 0) {
      out.fail("sweep exited with " + std::to_string(rc));
      return out;
    }
    files[k] = slurp(dir / "results.csv");
  }
  out.expect(!files[0].empty(), "results.csv missing");
  out.expect(files[0] == files[1], "results.csv differs between runs");
  std::filesystem::remove_all(root);
  if (out.ok) out.detail = std::to_string(files[0].size()) + " bytes identical";
  return out;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"oracle equivalence", oracle_equivalence},   {"benders vs oracle", benders_vs_oracle},
      {"duality", duality_suite},                   {"linearization", linearization_suite},
      {"budget sweep", budget_sweep},               {"ramp and line sweeps", ramp_line_sweeps},
      {"zoh", zoh_suite},                           {"index identities", index_identities},
      {"cli determinism", cli_determinism},
  };
  int failed = 0, n = 0;
  for (const auto& [name, run] : criteria) {
    ++n;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += o.ok ? 0 : 1;
    std::printf("%s %d %s (%.1fs): %s\n", o.ok ? "PASS" : "FAIL", n, name, secs, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
