// flexgauge: flexibility assessment of ED + AGC cases.
//
// Exit codes: 0 success, 1 other error, 2 parse/validation error,
// 3 base case infeasible (solve), 4 iteration limit.

#include "flexgauge/benders.hpp"
#include "flexgauge/case_io.hpp"
#include "flexgauge/errors.hpp"
#include "flexgauge/kernels.hpp"
#include "flexgauge/oracle.hpp"
#include "flexgauge/sweep.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

using namespace flexgauge;

namespace {

enum Exit { kOk = 0, kOther = 1, kInput = 2, kBaseInfeasible = 3, kIterationLimit = 4 };

struct Common {
  std::string case_path;
  std::string out_dir;
  double tol = 1e-6;
  int max_iters = 200;
  long seed = 0;  // accepted for interface stability; the algorithms are deterministic
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--case", c.case_path, "case file (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out_dir, "output directory")->required();
  cmd->add_option("--tol", c.tol, "feasibility tolerance on the subproblem value")->check(CLI::PositiveNumber);
  cmd->add_option("--max-iters", c.max_iters, "Benders iteration limit")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", c.seed, "reserved; results do not depend on it");
}

LoadedCase read_case(const Common& c) {
  auto loaded = load_case(c.case_path);
  for (const auto& w : loaded.warnings) std::cerr << "warning: " << w << '\n';
  return loaded;
}

void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  out << s;
}

int cmd_solve(const Common& c, bool multi_cut) {
  const auto loaded = read_case(c);
  BendersOptions opts;
  opts.tol = c.tol;
  opts.max_iters = c.max_iters;
  opts.multi_cut = multi_cut;
  const auto report = run_benders(loaded.system, opts);

  SweepResult table;
  table.target = SweepTarget::budget;
  table.b0 = loaded.system.budget;
  SweepRow row;
  row.sf = 1.0;
  row.indices = report.indices;
  row.iterations = report.iterations;
  table.rows.push_back(row);
  RunMetadata meta{"solve", loaded.system.name, c.tol, c.max_iters, std::string(kernels::isa_name(kernels::active_isa()))};
  emit_results(table, meta, c.out_dir);

  nlohmann::ordered_json j;
  const auto& ix = report.indices;
  j["indices"] = {{"TF", ix.tf},       {"EDF", ix.edf},       {"AGCF", ix.agcf},    {"EDUPF", ix.edupf},
                  {"EDDNF", ix.eddnf}, {"AGCUPF", ix.agcupf}, {"AGCDNF", ix.agcdnf}};
  j["lambda_star"] = {{"up_b", report.lambda_star.lam_up_b},
                      {"dn_b", report.lambda_star.lam_dn_b},
                      {"up_t", report.lambda_star.lam_up_t},
                      {"dn_t", report.lambda_star.lam_dn_t}};
  j["iterations"] = report.iterations;
  auto cuts = nlohmann::ordered_json::array();
  for (const auto& cut : report.cuts)
    cuts.push_back({{"iteration", cut.iteration}, {"eta", cut.eta}, {"constant", cut.constant},
                    {"coefficients", cut.coefficients}});
  j["cuts"] = cuts;
  auto trace = nlohmann::ordered_json::array();
  for (const auto& t : report.trace)
    trace.push_back({{"iteration", t.iteration}, {"master_objective", t.master_objective}, {"eta", t.eta},
                     {"cut_constant", t.cut_constant}, {"wall_seconds", t.wall_seconds}});
  j["trace"] = trace;
  write_text(std::filesystem::path(c.out_dir) / "report.json", j.dump(2) + "\n");

  std::cout << "TF " << format_number(ix.tf) << "  EDF " << format_number(ix.edf) << "  AGCF "
            << format_number(ix.agcf) << "  iterations " << report.iterations << '\n';
  return kOk;
}

int cmd_sweep(const Common& c, const std::string& target, const std::vector<double>& sf) {
  const auto loaded = read_case(c);
  SweepSpec spec;
  spec.target = parse_sweep_target(target);
  spec.scale_factors = sf;
  BendersOptions opts;
  opts.tol = c.tol;
  opts.max_iters = c.max_iters;
  const auto result = run_sweep(loaded.system, spec, opts);
  RunMetadata meta{"sweep", loaded.system.name, c.tol, c.max_iters, std::string(kernels::isa_name(kernels::active_isa()))};
  emit_results(result, meta, c.out_dir);
  std::cout << results_csv(result.rows);
  return kOk;
}

int cmd_oracle(const Common& c, double step) {
  if (!(step > 0.0 && step <= 1.0)) throw ValidationError("--lambda-grid must be in (0, 1]");
  const auto loaded = read_case(c);
  const auto cf = assemble(loaded.system);
  const auto u = loaded.system.uncertainty();
  const std::size_t nb = u.n_buses(), nt = u.n_sub_intervals();

  std::string csv = "s,eta_oracle,eta_rdfea,abs_diff\n";
  double worst_diff = 0.0;
  const int steps = static_cast<int>(std::floor(1.0 / step + 1e-9));
  for (int k = 0; k <= steps; ++k) {
    const double s = std::min(1.0, k * step);
    const auto lambda = ScaleVector::constant(nb, nt, s);
    const double eo = worst_case_eta(cf, u, lambda).eta;
    const double er = solve_rdfea(build_rdfea(cf, u, lambda)).eta;
    worst_diff = std::max(worst_diff, std::fabs(eo - er));
    csv += format_number(s) + ',' + format_number(eo) + ',' + format_number(er) + ',' + format_number(std::fabs(eo - er)) + '\n';
  }
  std::filesystem::create_directories(c.out_dir);
  write_text(std::filesystem::path(c.out_dir) / "oracle.csv", csv);

  nlohmann::ordered_json j;
  j["case"] = loaded.system.name;
  j["max_abs_diff"] = worst_diff;
  try {
    const auto ref = reference_flexibility(cf, u, ScaleVector::constant(nb, nt, 1.0), c.tol);
    BendersOptions opts;
    opts.tol = c.tol;
    opts.max_iters = c.max_iters;
    const auto report = run_benders(cf, u, opts);
    j["reference_s"] = ref.s;
    j["reference_tf"] = ref.tf;
    j["benders_tf"] = report.indices.tf;
    j["benders_lambda_eta"] = worst_case_eta(cf, u, report.lambda_star).eta;
  } catch (const BaseInfeasible& e) {
    j["base_infeasible_eta"] = e.eta();
  }
  write_text(std::filesystem::path(c.out_dir) / "oracle.json", j.dump(2) + "\n");
  std::cout << csv << "max |eta_oracle - eta_rdfea| = " << format_number(worst_diff) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flexibility assessment for economic dispatch with AGC dynamics"};
  app.require_subcommand(1);

  Common solve_opts, sweep_opts, oracle_opts;
  bool multi_cut = false;
  auto* solve = app.add_subcommand("solve", "run the decomposition on one case");
  add_common(solve, solve_opts);
  solve->add_flag("--multi-cut", multi_cut, "add one cut per improving subproblem incumbent");

  std::string target;
  std::vector<double> sf;
  auto* sweep = app.add_subcommand("sweep", "scale budget, ramp limits or line capacities");
  add_common(sweep, sweep_opts);
  sweep->add_option("--target", target, "budget | ramp | line")->required();
  sweep->add_option("--sf", sf, "scale factors, ascending")->required()->delimiter(',');

  double step = 0.25;
  auto* oracle = app.add_subcommand("oracle", "cross-check the subproblem against vertex enumeration");
  add_common(oracle, oracle_opts);
  oracle->add_option("--lambda-grid", step, "step of the uniform lambda grid in [0, 1]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInput;
  }

  try {
    if (*solve) return cmd_solve(solve_opts, multi_cut);
    if (*sweep) return cmd_sweep(sweep_opts, target, sf);
    if (*oracle) return cmd_oracle(oracle_opts, step);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInput;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInput;
  } catch (const BaseInfeasible& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBaseInfeasible;
  } catch (const IterationLimit& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIterationLimit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kOther;
  }
  return kOther;
}
